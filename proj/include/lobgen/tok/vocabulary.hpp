#pragma once

// Fixed 12011-token vocabulary for encoded LOB messages. Field ranges are
// contiguous and non-overlapping; two raw values that coincide numerically
// (say event type 2 and price magnitude 2) still map to distinct ids.
//
// Layout (inclusive id ranges):
//   NA               0
//   MSK              1
//   HID              2
//   event_type       3 .. 6       (types 1..4)
//   direction        7 .. 8       (buy, sell)
//   price_sign       9 .. 10      (+, -)
//   price_magnitude  11 .. 1010   (0..999)
//   size             1011 .. 11010 (0..9999)
//   time_group       11011 .. 12010 (000..999)

#include <array>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>

namespace lobgen::tok {

using TokenId = std::uint32_t;

inline constexpr TokenId kNa = 0;
inline constexpr TokenId kMsk = 1;
inline constexpr TokenId kHid = 2;

inline constexpr TokenId kEventTypeLo = 3;
inline constexpr TokenId kEventTypeHi = 6;
inline constexpr TokenId kDirectionLo = 7;
inline constexpr TokenId kDirectionHi = 8;
inline constexpr TokenId kPriceSignLo = 9;
inline constexpr TokenId kPriceSignHi = 10;
inline constexpr TokenId kPriceMagLo = 11;
inline constexpr TokenId kPriceMagHi = 1010;
inline constexpr TokenId kSizeLo = 1011;
inline constexpr TokenId kSizeHi = 11010;
inline constexpr TokenId kTimeGroupLo = 11011;
inline constexpr TokenId kTimeGroupHi = 12010;

inline constexpr std::uint32_t kVocabSize = 12011;
static_assert(kTimeGroupHi + 1 == kVocabSize);

inline constexpr std::size_t kTokensPerMessage = 22;

struct Range {
  const char* name;
  TokenId lo;
  TokenId hi;
};

inline constexpr std::array<Range, 9> kRanges{{
    {"NA", kNa, kNa},
    {"MSK", kMsk, kMsk},
    {"HID", kHid, kHid},
    {"event_type", kEventTypeLo, kEventTypeHi},
    {"direction", kDirectionLo, kDirectionHi},
    {"price_sign", kPriceSignLo, kPriceSignHi},
    {"price_magnitude", kPriceMagLo, kPriceMagHi},
    {"size", kSizeLo, kSizeHi},
    {"time_group", kTimeGroupLo, kTimeGroupHi},
}};

inline std::string vocabulary_manifest() {
  std::ostringstream os;
  os << "# token vocabulary manifest, total " << kVocabSize << " ids\n";
  os << "# range_name lo hi\n";
  for (const auto& r : kRanges) os << r.name << ' ' << r.lo << ' ' << r.hi << '\n';
  return os.str();
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t vocabulary_manifest_hash() {
  return fnv1a(vocabulary_manifest());
}

}  // namespace lobgen::tok
