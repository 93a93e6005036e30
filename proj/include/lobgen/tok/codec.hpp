#pragma once

// Bijective 22-token message codec plus per-position syntactic validity
// masks for constrained sampling.
//
// Position layout:
//   0      event type
//   1      direction
//   2-3    price (sign, magnitude)
//   4      size
//   5-8    dt, four big-endian 3-digit groups of the 12-digit value
//   9-13   arrival time, five 3-digit groups of the 15-digit value
//   14-15  ref price (sign, magnitude)
//   16     ref size
//   17-21  ref time, five 3-digit groups
// Positions 14-21 are all NA for new limit orders.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <vector>

#include "lobgen/data/message.hpp"
#include "lobgen/tok/vocabulary.hpp"

namespace lobgen::tok {

using EncodedMessage = std::array<TokenId, kTokensPerMessage>;

struct FieldOutOfRange : std::runtime_error {
  explicit FieldOutOfRange(const char* what) : std::runtime_error(what) {}
};
struct SyntaxError : std::runtime_error {
  explicit SyntaxError(const char* what) : std::runtime_error(what) {}
};

namespace detail {

inline TokenId event_type_token(data::EventType t) {
  return kEventTypeLo + static_cast<TokenId>(t) - 1;
}
inline TokenId direction_token(lob::Side s) {
  return s == lob::Side::Bid ? kDirectionLo : kDirectionLo + 1;
}
inline TokenId sign_token(std::int32_t v) {
  return v >= 0 ? kPriceSignLo : kPriceSignLo + 1;
}
inline TokenId magnitude_token(std::int32_t v) {
  return kPriceMagLo + static_cast<TokenId>(std::abs(v));
}
inline TokenId size_token(std::int32_t v) { return kSizeLo + static_cast<TokenId>(v); }
inline TokenId time_group_token(std::int64_t group) {
  return kTimeGroupLo + static_cast<TokenId>(group);
}

// Big-endian 3-digit groups of a zero-padded value.
template <std::size_t N>
inline std::array<std::int64_t, N> digit_groups(std::int64_t value) {
  std::array<std::int64_t, N> groups{};
  for (std::size_t i = N; i-- > 0;) {
    groups[i] = value % 1000;
    value /= 1000;
  }
  return groups;
}

template <std::size_t N>
inline std::int64_t from_groups(const std::array<std::int64_t, N>& groups) {
  std::int64_t value = 0;
  for (auto g : groups) value = value * 1000 + g;
  return value;
}

}  // namespace detail

inline EncodedMessage encode(const data::PreprocessedMessage& msg) {
  if (!msg.valid()) throw FieldOutOfRange("message violates field ranges");
  EncodedMessage out{};
  out[0] = detail::event_type_token(msg.type);
  out[1] = detail::direction_token(msg.direction);
  out[2] = detail::sign_token(msg.price_ticks);
  out[3] = detail::magnitude_token(msg.price_ticks);
  out[4] = detail::size_token(msg.size);
  auto dt = detail::digit_groups<4>(msg.dt_ns);
  for (std::size_t i = 0; i < 4; ++i) out[5 + i] = detail::time_group_token(dt[i]);
  auto tm = detail::digit_groups<5>(msg.time_ns);
  for (std::size_t i = 0; i < 5; ++i) out[9 + i] = detail::time_group_token(tm[i]);
  if (msg.has_ref) {
    out[14] = detail::sign_token(msg.ref_price_ticks);
    out[15] = detail::magnitude_token(msg.ref_price_ticks);
    out[16] = detail::size_token(msg.ref_size);
    auto rt = detail::digit_groups<5>(msg.ref_time_ns);
    for (std::size_t i = 0; i < 5; ++i) out[17 + i] = detail::time_group_token(rt[i]);
  } else {
    for (std::size_t i = 14; i < 22; ++i) out[i] = kNa;
  }
  return out;
}

namespace detail {

inline void expect_range(TokenId t, TokenId lo, TokenId hi, const char* what) {
  if (t < lo || t > hi) throw SyntaxError(what);
}

inline std::int64_t time_group_value(TokenId t, const char* what) {
  expect_range(t, kTimeGroupLo, kTimeGroupHi, what);
  return static_cast<std::int64_t>(t - kTimeGroupLo);
}

}  // namespace detail

inline data::PreprocessedMessage decode(const EncodedMessage& enc) {
  using namespace detail;
  data::PreprocessedMessage msg;
  expect_range(enc[0], kEventTypeLo, kEventTypeHi, "position 0: event type");
  msg.type = static_cast<data::EventType>(enc[0] - kEventTypeLo + 1);
  expect_range(enc[1], kDirectionLo, kDirectionHi, "position 1: direction");
  msg.direction = enc[1] == kDirectionLo ? lob::Side::Bid : lob::Side::Ask;
  expect_range(enc[2], kPriceSignLo, kPriceSignHi, "position 2: price sign");
  expect_range(enc[3], kPriceMagLo, kPriceMagHi, "position 3: price magnitude");
  std::int32_t mag = static_cast<std::int32_t>(enc[3] - kPriceMagLo);
  msg.price_ticks = enc[2] == kPriceSignLo ? mag : -mag;
  expect_range(enc[4], kSizeLo, kSizeHi, "position 4: size");
  msg.size = static_cast<std::int32_t>(enc[4] - kSizeLo);
  std::array<std::int64_t, 4> dt{};
  for (std::size_t i = 0; i < 4; ++i)
    dt[i] = time_group_value(enc[5 + i], "positions 5-8: dt group");
  msg.dt_ns = from_groups(dt);
  std::array<std::int64_t, 5> tm{};
  for (std::size_t i = 0; i < 5; ++i)
    tm[i] = time_group_value(enc[9 + i], "positions 9-13: time group");
  msg.time_ns = from_groups(tm);

  bool ref_na = enc[14] == kNa;
  for (std::size_t i = 14; i < 22; ++i) {
    if ((enc[i] == kNa) != ref_na)
      throw SyntaxError("positions 14-21: partial NA reference");
  }
  msg.has_ref = !ref_na;
  if (ref_na) {
    if (msg.type != data::EventType::NewLimit)
      throw SyntaxError("NA reference on a referential message");
  } else {
    if (msg.type == data::EventType::NewLimit)
      throw SyntaxError("reference fields present on a new limit order");
    expect_range(enc[14], kPriceSignLo, kPriceSignHi, "position 14: ref price sign");
    expect_range(enc[15], kPriceMagLo, kPriceMagHi, "position 15: ref magnitude");
    std::int32_t rmag = static_cast<std::int32_t>(enc[15] - kPriceMagLo);
    msg.ref_price_ticks = enc[14] == kPriceSignLo ? rmag : -rmag;
    expect_range(enc[16], kSizeLo, kSizeHi, "position 16: ref size");
    msg.ref_size = static_cast<std::int32_t>(enc[16] - kSizeLo);
    std::array<std::int64_t, 5> rt{};
    for (std::size_t i = 0; i < 5; ++i)
      rt[i] = time_group_value(enc[17 + i], "positions 17-21: ref time group");
    msg.ref_time_ns = from_groups(rt);
  }
  if (msg.size < 1) throw SyntaxError("zero size");
  if (msg.has_ref && msg.ref_size < 1) throw SyntaxError("zero ref size");
  return msg;
}

// Allowed token set at one position given the fixed tokens to its left.
// Always a contiguous field range, optionally plus (or reduced to) NA.
struct FieldMask {
  int position{0};
  TokenId lo{0};
  TokenId hi{0};
  bool range_allowed{true};
  bool na_allowed{false};

  bool contains(TokenId t) const {
    if (t == kNa) return na_allowed;
    return range_allowed && t >= lo && t <= hi;
  }
  std::size_t count() const {
    return (range_allowed ? hi - lo + 1 : 0) + (na_allowed ? 1 : 0);
  }
};

namespace detail {

inline std::pair<TokenId, TokenId> field_range(int position) {
  switch (position) {
    case 0: return {kEventTypeLo, kEventTypeHi};
    case 1: return {kDirectionLo, kDirectionHi};
    case 2: case 14: return {kPriceSignLo, kPriceSignHi};
    case 3: case 15: return {kPriceMagLo, kPriceMagHi};
    case 4: case 16: return {kSizeLo, kSizeHi};
    default: return {kTimeGroupLo, kTimeGroupHi};  // 5-13, 17-21
  }
}

}  // namespace detail

// `prefix` holds the tokens fixed at positions [0, position).
inline FieldMask validity_mask(std::span<const TokenId> prefix, int position) {
  if (position < 0 || position >= static_cast<int>(kTokensPerMessage))
    throw std::out_of_range("token position");
  FieldMask mask;
  mask.position = position;
  auto [lo, hi] = detail::field_range(position);
  mask.lo = lo;
  mask.hi = hi;
  if (position >= 14) {
    bool is_new_limit =
        prefix.size() > 0 && prefix[0] == detail::event_type_token(data::EventType::NewLimit);
    bool ref_started_na =
        position > 14 && prefix.size() > 14 && prefix[14] == kNa;
    if (ref_started_na || (position == 14 && is_new_limit)) {
      // New limit orders carry no reference: once (or because) the block is
      // NA it stays NA, so every sampled message decodes cleanly.
      mask.range_allowed = false;
      mask.na_allowed = true;
    }
    // referential messages keep range-only masks at 14-21
  }
  return mask;
}

inline const std::vector<int>& maskable_positions() {
  // All positions except arrival time (9-13): those are computed from dt,
  // never predicted. Reference time positions are prediction targets.
  static const std::vector<int> positions = [] {
    std::vector<int> p;
    for (int i = 0; i <= 8; ++i) p.push_back(i);
    for (int i = 14; i <= 21; ++i) p.push_back(i);
    return p;
  }();
  return positions;
}

}  // namespace lobgen::tok
