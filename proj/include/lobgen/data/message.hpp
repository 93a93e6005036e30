#pragma once

#include <cstdint>
#include <stdexcept>

#include "lobgen/lob/order_book.hpp"

namespace lobgen::data {

// LOBSTER event types 1-4 (hidden executions, auctions and halts are
// filtered out upstream).
enum class EventType : std::uint8_t {
  NewLimit = 1,
  PartialCancel = 2,
  Delete = 3,
  Execution = 4,
};

// One raw LOBSTER message row, prices in LOBSTER units (dollars x 10000).
struct RawMessage {
  std::int64_t time_ns{0};
  int event_type{1};  // 1..7 before filtering
  std::int64_t order_id{0};
  std::int64_t size{0};
  std::int64_t price{0};
  int direction{1};  // +1 buy, -1 sell
};

inline constexpr std::int32_t kMaxPriceTicks = 999;
inline constexpr std::int32_t kMaxSize = 9999;
inline constexpr std::int64_t kMaxDtNs = 999'999'999'999LL;        // 12 digits
inline constexpr std::int64_t kMaxTimeNs = 999'999'999'999'999LL;  // 15 digits

// The 9-field stationarized message of the pre-processing stage.
// Field order is fixed: type, direction, price, size, dt, time, then the
// reference price/size/time (absent exactly for new limit orders).
struct PreprocessedMessage {
  EventType type{EventType::NewLimit};
  lob::Side direction{lob::Side::Bid};
  std::int32_t price_ticks{0};  // [-999, 999], relative to previous mid anchor
  std::int32_t size{1};         // [1, 9999]
  std::int64_t dt_ns{0};        // [0, 1e12 - 1]
  std::int64_t time_ns{0};      // [0, 1e15 - 1]
  bool has_ref{false};          // true iff type != NewLimit
  std::int32_t ref_price_ticks{0};
  std::int32_t ref_size{0};
  std::int64_t ref_time_ns{0};

  friend bool operator==(const PreprocessedMessage&,
                         const PreprocessedMessage&) = default;

  bool valid() const {
    if (price_ticks < -kMaxPriceTicks || price_ticks > kMaxPriceTicks) return false;
    if (size < 1 || size > kMaxSize) return false;
    if (dt_ns < 0 || dt_ns > kMaxDtNs) return false;
    if (time_ns < 0 || time_ns > kMaxTimeNs) return false;
    if (has_ref != (type != EventType::NewLimit)) return false;
    if (has_ref) {
      if (ref_price_ticks < -kMaxPriceTicks || ref_price_ticks > kMaxPriceTicks)
        return false;
      if (ref_size < 1 || ref_size > kMaxSize) return false;
      if (ref_time_ns < 0 || ref_time_ns > kMaxTimeNs) return false;
    }
    return true;
  }
};

}  // namespace lobgen::data
