#pragma once

// Deterministic level-3 limit order book with price-time priority.
// Prices are held as integer ticks throughout; conversion to external
// price units happens at ingestion boundaries only. Mid-prices are kept
// at half-tick resolution by storing 2x the mid internally.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace lobgen::lob {

using Ticks = std::int64_t;
using Qty = std::int64_t;
using TimeNs = std::int64_t;
using SeqNo = std::uint64_t;

enum class Side : std::uint8_t { Bid = 0, Ask = 1 };

inline Side opposite(Side s) { return s == Side::Bid ? Side::Ask : Side::Bid; }

// Sentinel prices for empty L2 levels (ticks), mirroring LOBSTER's extreme
// placeholder convention.
inline constexpr Ticks kAskSentinelTicks = 999'999'999;
inline constexpr Ticks kBidSentinelTicks = -999'999'999;

// Marker for "no submission-relative price recorded".
inline constexpr std::int32_t kNoRelPrice = INT32_MIN;

struct OrderKey {
  Side side{Side::Bid};
  Ticks price{0};
  SeqNo entry_seq{0};
  TimeNs entry_time_ns{0};

  friend bool operator==(const OrderKey&, const OrderKey&) = default;
};

struct RestingOrder {
  OrderKey key;
  Qty remaining_size{0};
  bool is_init_volume{false};
  // Size at submission; cancellations reduce remaining_size only.
  Qty orig_size{0};
  // Tick-relative price at submission, recorded by callers that need
  // reference matching (generation loop). kNoRelPrice when untracked.
  std::int32_t submit_rel_price{kNoRelPrice};
};

struct Trade {
  Ticks price{0};
  Qty size{0};
  OrderKey maker;
};

struct L2Level {
  Ticks price{0};
  Qty volume{0};
};

struct L2Snapshot {
  std::vector<L2Level> asks;  // best (lowest) first
  std::vector<L2Level> bids;  // best (highest) first
  TimeNs time_ns{0};

  std::size_t depth() const { return asks.size(); }
};

struct VolumeImage {
  std::int64_t mid_change_ticks{0};
  // Signed volume per tick offset: bid volume positive, ask negative.
  std::vector<std::int64_t> vols;

  friend bool operator==(const VolumeImage&, const VolumeImage&) = default;
};

struct OrderNotFound : std::runtime_error {
  OrderNotFound() : std::runtime_error("order not found") {}
};
struct EmptySide : std::runtime_error {
  EmptySide() : std::runtime_error("no resting order on side") {}
};
struct UndefinedMid : std::runtime_error {
  UndefinedMid() : std::runtime_error("mid-price never defined") {}
};
struct CrossedSnapshot : std::runtime_error {
  CrossedSnapshot() : std::runtime_error("snapshot is crossed (bid >= ask)") {}
};

class OrderBookL3 {
 public:
  explicit OrderBookL3(Ticks tick_size = 100) : tick_size_(tick_size) {
    if (tick_size < 1) throw std::invalid_argument("tick_size must be >= 1");
  }

  Ticks tick_size() const { return tick_size_; }

  static OrderBookL3 from_snapshot(const L2Snapshot& snap, Ticks tick_size = 100) {
    OrderBookL3 book(tick_size);
    book.init_from_snapshot(snap);
    return book;
  }

  // Populated levels become one synthetic order each; sequence numbers are
  // assigned asks-then-bids, best to worst. Rejects a crossed snapshot.
  void init_from_snapshot(const L2Snapshot& snap) {
    if (!snap.asks.empty() && !snap.bids.empty() &&
        snap.asks.front().volume > 0 && snap.bids.front().volume > 0 &&
        snap.bids.front().price >= snap.asks.front().price) {
      throw CrossedSnapshot();
    }
    sides_[0].clear();
    sides_[1].clear();
    next_seq_ = 0;
    last_mid2_.reset();
    last_trade_.reset();
    for (const auto& lvl : snap.asks) {
      if (lvl.volume <= 0) continue;
      insert_resting(Side::Ask, lvl.price, lvl.volume, /*time=*/0, /*init=*/true,
                     kNoRelPrice);
    }
    for (const auto& lvl : snap.bids) {
      if (lvl.volume <= 0) continue;
      insert_resting(Side::Bid, lvl.price, lvl.volume, /*time=*/0, /*init=*/true,
                     kNoRelPrice);
    }
    touch_mid();
  }

  std::optional<Ticks> best_price(Side s) const {
    const auto& m = side_map(s);
    if (m.empty()) return std::nullopt;
    return from_key(s, m.begin()->first);
  }
  std::optional<Ticks> best_bid() const { return best_price(Side::Bid); }
  std::optional<Ticks> best_ask() const { return best_price(Side::Ask); }

  // Twice the mid-price in ticks (exact at half-tick resolution), falling
  // back to the most recent defined mid; nullopt if never defined.
  std::optional<std::int64_t> mid2_ticks() const { return last_mid2_; }

  // Mid floored to a tick. nullopt if mid never defined.
  std::optional<Ticks> mid_anchor_ticks() const {
    if (!last_mid2_) return std::nullopt;
    std::int64_t m = *last_mid2_;
    return (m >= 0) ? m / 2 : -((-m + 1) / 2);  // floor division
  }

  struct LimitResult {
    std::vector<Trade> trades;
    std::optional<OrderKey> resting;  // key of the unfilled remainder, if any
  };

  // Incoming limit order: matches while crossing, remainder rests.
  // `submit_rel_price` is opaque caller metadata kept on the resting order.
  LimitResult apply_limit(Side side, Ticks price, Qty size, TimeNs time_ns,
                          std::int32_t submit_rel_price = kNoRelPrice) {
    if (size < 1) throw std::invalid_argument("order size must be >= 1");
    std::vector<Trade> trades;
    Qty remaining = size;
    auto& opp = side_map(opposite(side));
    // In the opposite side's keying, crossing means limit_key <= best key.
    const Ticks limit_key = to_key(opposite(side), price);
    while (remaining > 0 && !opp.empty()) {
      auto it = opp.begin();
      if (limit_key > it->first) break;
      auto& queue = it->second;
      RestingOrder& maker = queue.front();
      Qty fill = std::min(remaining, maker.remaining_size);
      trades.push_back({maker.key.price, fill, maker.key});
      maker.remaining_size -= fill;
      remaining -= fill;
      if (maker.remaining_size == 0) queue.pop_front();
      if (queue.empty()) opp.erase(it);
    }
    std::optional<OrderKey> resting;
    if (remaining > 0) {
      resting = insert_resting(side, price, remaining, time_ns, /*init=*/false,
                               submit_rel_price, size);
    }
    touch_mid();
    if (!trades.empty()) last_trade_ = trades.back();
    return {std::move(trades), resting};
  }

  // Cancel/delete: reduces by min(reduce_by, remaining); removes at zero.
  void apply_cancel(const OrderKey& key, Qty reduce_by) {
    if (reduce_by < 1) throw std::invalid_argument("reduce_by must be >= 1");
    auto& m = side_map(key.side);
    auto it = m.find(to_key(key.side, key.price));
    if (it == m.end()) throw OrderNotFound();
    auto& queue = it->second;
    for (auto q = queue.begin(); q != queue.end(); ++q) {
      if (q->key.entry_seq == key.entry_seq) {
        q->remaining_size -= std::min(reduce_by, q->remaining_size);
        if (q->remaining_size == 0) queue.erase(q);
        if (queue.empty()) m.erase(it);
        touch_mid();
        return;
      }
    }
    throw OrderNotFound();
  }

  // Execution against the single best-priority order on `side`, clipped to
  // that order's remaining size. Multi-order sweeps arrive as separate events.
  std::vector<Trade> apply_execution(Side side, Qty size) {
    if (size < 1) throw std::invalid_argument("execution size must be >= 1");
    auto& m = side_map(side);
    if (m.empty()) throw EmptySide();
    auto it = m.begin();
    auto& queue = it->second;
    RestingOrder& top = queue.front();
    Qty fill = std::min(size, top.remaining_size);
    Trade t{top.key.price, fill, top.key};
    top.remaining_size -= fill;
    if (top.remaining_size == 0) queue.pop_front();
    if (queue.empty()) m.erase(it);
    touch_mid();
    last_trade_ = t;
    return {t};
  }

  L2Snapshot export_l2(std::size_t levels, TimeNs time_ns) const {
    L2Snapshot snap;
    snap.time_ns = time_ns;
    snap.asks.reserve(levels);
    snap.bids.reserve(levels);
    auto ask_it = side_map(Side::Ask).begin();
    auto bid_it = side_map(Side::Bid).begin();
    const auto ask_end = side_map(Side::Ask).end();
    const auto bid_end = side_map(Side::Bid).end();
    for (std::size_t i = 0; i < levels; ++i) {
      if (ask_it != ask_end) {
        snap.asks.push_back(
            {from_key(Side::Ask, ask_it->first), queue_volume(ask_it->second)});
        ++ask_it;
      } else {
        snap.asks.push_back({kAskSentinelTicks, 0});
      }
      if (bid_it != bid_end) {
        snap.bids.push_back(
            {from_key(Side::Bid, bid_it->first), queue_volume(bid_it->second)});
        ++bid_it;
      } else {
        snap.bids.push_back({kBidSentinelTicks, 0});
      }
    }
    return snap;
  }

  // Signed volumes over P ticks centered on the current mid anchor.
  VolumeImage export_volume_image(Ticks prev_mid_ticks, std::size_t P) const {
    if (P < 2 || P % 2 != 0) throw std::invalid_argument("P must be even, >= 2");
    auto anchor = mid_anchor_ticks();
    if (!anchor) throw UndefinedMid();
    VolumeImage img;
    img.mid_change_ticks = *anchor - prev_mid_ticks;
    img.vols.assign(P, 0);
    const Ticks lo = *anchor - static_cast<Ticks>(P / 2);
    for (const auto& [k, queue] : side_map(Side::Bid)) {
      Ticks off = from_key(Side::Bid, k) - lo;
      if (off >= 0 && off < static_cast<Ticks>(P))
        img.vols[static_cast<std::size_t>(off)] += queue_volume(queue);
    }
    for (const auto& [k, queue] : side_map(Side::Ask)) {
      Ticks off = from_key(Side::Ask, k) - lo;
      if (off >= 0 && off < static_cast<Ticks>(P))
        img.vols[static_cast<std::size_t>(off)] -= queue_volume(queue);
    }
    return img;
  }

  // Read-only scan over resting orders of one side, best price first,
  // FIFO within a level.
  void for_each_order(Side side,
                      const std::function<void(const RestingOrder&)>& fn) const {
    for (const auto& [k, q] : side_map(side))
      for (const auto& o : q) fn(o);
  }

  std::optional<RestingOrder> find_order(const OrderKey& key) const {
    auto it = side_map(key.side).find(to_key(key.side, key.price));
    if (it == side_map(key.side).end()) return std::nullopt;
    for (const auto& o : it->second)
      if (o.key.entry_seq == key.entry_seq) return o;
    return std::nullopt;
  }

  Qty volume_at(Side side, Ticks price) const {
    auto it = side_map(side).find(to_key(side, price));
    return it == side_map(side).end() ? 0 : queue_volume(it->second);
  }

  // Remaining initialization volume at a price level; key of the first
  // init order there, if any.
  std::optional<OrderKey> init_volume_at(Side side, Ticks price) const {
    auto it = side_map(side).find(to_key(side, price));
    if (it == side_map(side).end()) return std::nullopt;
    for (const auto& o : it->second)
      if (o.is_init_volume) return o.key;
    return std::nullopt;
  }

  std::optional<Trade> last_trade() const { return last_trade_; }
  bool empty() const { return sides_[0].empty() && sides_[1].empty(); }
  SeqNo next_seq() const { return next_seq_; }

  std::size_t level_count(Side side) const { return side_map(side).size(); }

 private:
  // Asks are keyed by negated price so both sides share one map type with
  // "best first" iteration order and a uniform crossing test.
  using SideMap = std::map<Ticks, std::deque<RestingOrder>, std::greater<Ticks>>;

  static Ticks to_key(Side s, Ticks price) {
    return s == Side::Bid ? price : -price;
  }
  static Ticks from_key(Side s, Ticks key) {
    return s == Side::Bid ? key : -key;
  }

  SideMap& side_map(Side s) { return sides_[static_cast<std::size_t>(s)]; }
  const SideMap& side_map(Side s) const {
    return sides_[static_cast<std::size_t>(s)];
  }

  OrderKey insert_resting(Side side, Ticks price, Qty size, TimeNs time_ns,
                          bool init, std::int32_t submit_rel_price,
                          Qty orig_size = -1) {
    RestingOrder order;
    order.key = OrderKey{side, price, next_seq_++, time_ns};
    order.remaining_size = size;
    order.is_init_volume = init;
    order.orig_size = orig_size >= 0 ? orig_size : size;
    order.submit_rel_price = submit_rel_price;
    side_map(side)[to_key(side, price)].push_back(order);
    return order.key;
  }

  static Qty queue_volume(const std::deque<RestingOrder>& q) {
    Qty total = 0;
    for (const auto& o : q) total += o.remaining_size;
    return total;
  }

  void touch_mid() {
    auto bb = best_bid();
    auto ba = best_ask();
    if (bb && ba) last_mid2_ = *bb + *ba;
  }

  Ticks tick_size_;
  SideMap sides_[2];  // [0]=bids, [1]=asks (keys per to_key)
  SeqNo next_seq_{0};
  std::optional<std::int64_t> last_mid2_;
  std::optional<Trade> last_trade_;
};

inline bool operator==(const L2Level& a, const L2Level& b) {
  return a.price == b.price && a.volume == b.volume;
}
inline bool operator==(const L2Snapshot& a, const L2Snapshot& b) {
  return a.asks == b.asks && a.bids == b.bids;
}

}  // namespace lobgen::lob
