#pragma once

// Independent naive O(n)-scan reference book used as the matching-engine
// oracle. Single flat vector of orders, every query a full scan.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "lobgen/lob/order_book.hpp"

namespace lobgen::testsupport {

struct NaiveOrder {
  lob::Side side;
  lob::Ticks price;
  std::uint64_t seq;
  std::int64_t time_ns;
  lob::Qty size;
  bool init;
};

class NaiveBook {
 public:
  void init_from_snapshot(const lob::L2Snapshot& snap) {
    orders_.clear();
    next_seq_ = 0;
    for (const auto& lvl : snap.asks)
      if (lvl.volume > 0)
        orders_.push_back({lob::Side::Ask, lvl.price, next_seq_++, 0, lvl.volume, true});
    for (const auto& lvl : snap.bids)
      if (lvl.volume > 0)
        orders_.push_back({lob::Side::Bid, lvl.price, next_seq_++, 0, lvl.volume, true});
  }

  std::optional<std::size_t> best_index(lob::Side side) const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < orders_.size(); ++i) {
      const auto& o = orders_[i];
      if (o.side != side || o.size <= 0) continue;
      if (!best) {
        best = i;
        continue;
      }
      const auto& b = orders_[*best];
      bool better_price = side == lob::Side::Bid ? o.price > b.price : o.price < b.price;
      bool same_price = o.price == b.price;
      if (better_price || (same_price && o.seq < b.seq)) best = i;
    }
    return best;
  }

  void apply_limit(lob::Side side, lob::Ticks price, lob::Qty size,
                   std::int64_t time_ns) {
    lob::Qty remaining = size;
    while (remaining > 0) {
      auto idx = best_index(lob::opposite(side));
      if (!idx) break;
      auto& maker = orders_[*idx];
      bool crosses = side == lob::Side::Bid ? price >= maker.price : price <= maker.price;
      if (!crosses) break;
      lob::Qty fill = std::min(remaining, maker.size);
      maker.size -= fill;
      remaining -= fill;
      compact();
    }
    if (remaining > 0)
      orders_.push_back({side, price, next_seq_++, time_ns, remaining, false});
  }

  // Cancels against the order with matching (side, price, entry order) by
  // position within the level: callers identify orders by insertion index.
  bool cancel_nth_at(lob::Side side, lob::Ticks price, std::size_t nth,
                     lob::Qty reduce_by) {
    std::size_t seen = 0;
    for (auto& o : orders_) {
      if (o.side != side || o.price != price || o.size <= 0) continue;
      if (seen++ == nth) {
        o.size -= std::min(reduce_by, o.size);
        compact();
        return true;
      }
    }
    return false;
  }

  bool execute(lob::Side side, lob::Qty size) {
    auto idx = best_index(side);
    if (!idx) return false;
    auto& o = orders_[*idx];
    o.size -= std::min(size, o.size);
    compact();
    return true;
  }

  lob::L2Snapshot export_l2(std::size_t levels, std::int64_t time_ns) const {
    std::map<lob::Ticks, lob::Qty> asks, bids;
    for (const auto& o : orders_) {
      if (o.size <= 0) continue;
      (o.side == lob::Side::Ask ? asks : bids)[o.price] += o.size;
    }
    lob::L2Snapshot snap;
    snap.time_ns = time_ns;
    auto ait = asks.begin();
    auto bit = bids.rbegin();
    for (std::size_t i = 0; i < levels; ++i) {
      if (ait != asks.end()) {
        snap.asks.push_back({ait->first, ait->second});
        ++ait;
      } else {
        snap.asks.push_back({lob::kAskSentinelTicks, 0});
      }
      if (bit != bids.rend()) {
        snap.bids.push_back({bit->first, bit->second});
        ++bit;
      } else {
        snap.bids.push_back({lob::kBidSentinelTicks, 0});
      }
    }
    return snap;
  }

  std::size_t order_count() const { return orders_.size(); }
  const std::vector<NaiveOrder>& orders() const { return orders_; }

 private:
  void compact() {
    std::erase_if(orders_, [](const NaiveOrder& o) { return o.size <= 0; });
  }

  std::vector<NaiveOrder> orders_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace lobgen::testsupport
