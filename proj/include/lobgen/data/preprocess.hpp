#pragma once

// Transformation of filtered raw messages into the 9-field stationarized
// representation: tick-relative prices against the previous mid anchor,
// truncation at +-999 ticks / size 9999 / 12-digit dt, reference fields
// resolved through an order-id index (ids are discarded afterwards), and
// aligned volume images produced by replaying the day through the book
// engine.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lobgen/data/lobster.hpp"
#include "lobgen/data/message.hpp"
#include "lobgen/gen/correction.hpp"
#include "lobgen/lob/order_book.hpp"

namespace lobgen::data {

struct NoMid : std::runtime_error {
  NoMid() : std::runtime_error("book never two-sided before first message") {}
};

struct DayDataset {
  std::string symbol;
  std::string date;
  std::uint32_t P{200};
  lob::L2Snapshot initial_snapshot;
  std::vector<PreprocessedMessage> messages;
  // Book state (volume image) *before* each message; message i transitions
  // state i to i+1.
  std::vector<lob::VolumeImage> books;
};

struct ClipStats {
  std::size_t total{0};
  std::size_t clipped_price{0};
  std::size_t clipped_size{0};
  std::size_t clipped_dt{0};

  double clip_rate() const {
    if (total == 0) return 0.0;
    return static_cast<double>(clipped_price + clipped_size + clipped_dt) /
           static_cast<double>(total);
  }
};

struct RefInfo {
  std::int32_t price_ticks{0};
  std::int32_t size{0};
  std::int64_t time_ns{0};
};

// Reference resolution for types 2-4: the original order's submission-time
// tick-relative price, original size, and time. Orders from before the day's
// data degrade to the referencing row's own values with time 0.
inline RefInfo resolve_reference(
    const RawMessage& msg, std::int32_t own_price_ticks, std::int32_t own_size,
    const std::unordered_map<std::int64_t, RefInfo>& history) {
  auto it = history.find(msg.order_id);
  if (it != history.end()) return it->second;
  return RefInfo{own_price_ticks, own_size, 0};
}

inline lob::Side direction_side(int direction) {
  return direction > 0 ? lob::Side::Bid : lob::Side::Ask;
}

// `msgs`/`books` must be filtered and aligned (books[i] = state after
// msgs[i]). The first message seeds the initial snapshot boundary; the
// remaining ones become the dataset.
inline DayDataset preprocess_day(const std::vector<RawMessage>& msgs,
                                 const std::vector<lob::L2Snapshot>& books,
                                 std::uint32_t P, const std::string& symbol = "",
                                 const std::string& date = "",
                                 ClipStats* stats = nullptr) {
  if (msgs.empty()) throw std::invalid_argument("need at least one message");
  if (msgs.size() != books.size()) throw MisalignedFiles(msgs.size(), books.size());

  DayDataset day;
  day.symbol = symbol;
  day.date = date;
  day.P = P;
  day.initial_snapshot = books.front();
  day.initial_snapshot.time_ns = msgs.front().time_ns;

  lob::OrderBookL3 book = lob::OrderBookL3::from_snapshot(day.initial_snapshot);
  auto anchor0 = book.mid_anchor_ticks();
  if (!anchor0) throw NoMid();
  lob::Ticks prev_anchor = *anchor0;
  std::int64_t prev_time = msgs.front().time_ns;

  std::unordered_map<std::int64_t, RefInfo> history;

  for (std::size_t i = 1; i < msgs.size(); ++i) {
    const RawMessage& raw = msgs[i];
    const lob::Ticks anchor = *book.mid_anchor_ticks();

    PreprocessedMessage pm;
    pm.type = static_cast<EventType>(raw.event_type);
    pm.direction = direction_side(raw.direction);
    const lob::Ticks abs_ticks = raw.price / kLobsterUnitsPerTick;
    std::int64_t rel = abs_ticks - anchor;
    std::int64_t clipped_rel = std::clamp<std::int64_t>(rel, -kMaxPriceTicks,
                                                        kMaxPriceTicks);
    pm.price_ticks = static_cast<std::int32_t>(clipped_rel);
    std::int64_t clipped_size = std::clamp<std::int64_t>(raw.size, 1, kMaxSize);
    pm.size = static_cast<std::int32_t>(clipped_size);
    std::int64_t dt = raw.time_ns - prev_time;
    std::int64_t clipped_dt = std::clamp<std::int64_t>(dt, 0, kMaxDtNs);
    pm.dt_ns = clipped_dt;
    pm.time_ns = std::min(raw.time_ns, kMaxTimeNs);

    if (stats) {
      ++stats->total;
      if (clipped_rel != rel) ++stats->clipped_price;
      if (clipped_size != raw.size) ++stats->clipped_size;
      if (clipped_dt != dt) ++stats->clipped_dt;
    }

    if (pm.type == EventType::NewLimit) {
      pm.has_ref = false;
      history[raw.order_id] = RefInfo{pm.price_ticks, pm.size, pm.time_ns};
    } else {
      pm.has_ref = true;
      RefInfo ref = resolve_reference(raw, pm.price_ticks, pm.size, history);
      pm.ref_price_ticks = ref.price_ticks;
      pm.ref_size = ref.size;
      pm.ref_time_ns = ref.time_ns;
    }

    day.books.push_back(book.export_volume_image(prev_anchor, P));
    prev_anchor = anchor;
    prev_time = raw.time_ns;
    day.messages.push_back(pm);

    // Advance through the same corrected-apply path the generation loop
    // uses, so replay from the snapshot reproduces these volume images.
    gen::correct_and_apply(book, pm, anchor);
  }
  return day;
}

}  // namespace lobgen::data
