#pragma once

// Synthetic LOBSTER-style fixture days: a stochastic order-flow process run
// through the book engine, emitting raw messages with aligned post-message
// L2 snapshots. Used for tests and desk-scale training corpora where real
// licensed data is unavailable.

#include <cstdint>
#include <random>
#include <vector>

#include "lobgen/data/lobster.hpp"
#include "lobgen/data/message.hpp"
#include "lobgen/lob/order_book.hpp"

namespace lobgen::data {

struct SyntheticConfig {
  std::uint64_t seed{1};
  std::size_t n_messages{2000};
  lob::Ticks start_price_ticks{10'000};  // $100.00
  std::size_t levels{10};
  std::int64_t start_time_ns{kSessionStartNs};
};

struct SyntheticDay {
  std::vector<RawMessage> messages;
  std::vector<lob::L2Snapshot> books;
};

inline SyntheticDay make_synthetic_day(const SyntheticConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  lob::OrderBookL3 book(100);

  // Seed book: ten levels a side with decaying volume.
  lob::L2Snapshot seed_snap;
  for (std::size_t l = 0; l < cfg.levels; ++l) {
    auto li = static_cast<lob::Ticks>(l);
    seed_snap.asks.push_back(
        {cfg.start_price_ticks + 1 + li, 300 - 20 * li});
    seed_snap.bids.push_back({cfg.start_price_ticks - 1 - li, 300 - 20 * li});
  }
  book.init_from_snapshot(seed_snap);

  SyntheticDay day;
  day.messages.reserve(cfg.n_messages);
  day.books.reserve(cfg.n_messages);

  struct Live {
    std::int64_t id;
    lob::OrderKey key;
  };
  std::vector<Live> live;
  std::int64_t next_id = 1'000'000;
  std::int64_t time_ns = cfg.start_time_ns;

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::geometric_distribution<int> offset_dist(0.35);
  std::uniform_int_distribution<int> size_dist(1, 300);

  auto prune_live = [&] {
    std::erase_if(live, [&](const Live& o) {
      return !book.find_order(o.key).has_value();
    });
  };

  while (day.messages.size() < cfg.n_messages) {
    // Inter-arrival times: mostly sub-millisecond with an occasional pause.
    double u = uni(rng);
    std::int64_t dt = u < 0.7 ? 1'000 + static_cast<std::int64_t>(uni(rng) * 500'000)
                              : static_cast<std::int64_t>(uni(rng) * 50'000'000);
    time_ns += dt;

    RawMessage m;
    m.time_ns = time_ns;
    double action = uni(rng);
    auto bb = book.best_bid();
    auto ba = book.best_ask();

    if (action < 0.55 || live.empty() || !bb || !ba) {
      // new limit order near the touch
      bool buy = uni(rng) < 0.5;
      int off = offset_dist(rng) % 12;
      lob::Ticks base = buy ? (bb ? *bb : cfg.start_price_ticks - 1)
                            : (ba ? *ba : cfg.start_price_ticks + 1);
      // occasionally cross the spread
      lob::Ticks price = buy ? base - off : base + off;
      if (uni(rng) < 0.08) price = buy ? base + 1 : base - 1;
      if (price < 2) price = 2;
      m.event_type = 1;
      m.order_id = next_id++;
      m.size = size_dist(rng);
      m.price = price * kLobsterUnitsPerTick;
      m.direction = buy ? 1 : -1;
      auto res = book.apply_limit(buy ? lob::Side::Bid : lob::Side::Ask, price,
                                  m.size, time_ns);
      if (res.resting) live.push_back({m.order_id, *res.resting});
    } else if (action < 0.75) {
      // cancel or delete a random live order
      std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
      auto& o = live[pick(rng)];
      auto order = book.find_order(o.key);
      if (!order) {
        prune_live();
        continue;
      }
      bool full = uni(rng) < 0.5 || order->remaining_size <= 1;
      lob::Qty reduce =
          full ? order->remaining_size
               : 1 + static_cast<lob::Qty>(uni(rng) *
                                           static_cast<double>(order->remaining_size - 1));
      m.event_type = full ? 3 : 2;
      m.order_id = o.id;
      m.size = reduce;
      m.price = order->key.price * kLobsterUnitsPerTick;
      m.direction = order->key.side == lob::Side::Bid ? 1 : -1;
      book.apply_cancel(o.key, reduce);
      if (full) prune_live();
    } else if (action < 0.82) {
      // cancel against pre-day initialization volume (unknown order id)
      bool bid_side = uni(rng) < 0.5;
      lob::Side side = bid_side ? lob::Side::Bid : lob::Side::Ask;
      std::optional<lob::OrderKey> init_key;
      book.for_each_order(side, [&](const lob::RestingOrder& o) {
        if (o.is_init_volume && !init_key) init_key = o.key;
      });
      if (!init_key) continue;
      auto order = book.find_order(*init_key);
      lob::Qty reduce =
          1 + static_cast<lob::Qty>(uni(rng) *
                                    static_cast<double>(order->remaining_size));
      reduce = std::min(reduce, order->remaining_size);
      bool full = reduce == order->remaining_size;
      m.event_type = full ? 3 : 2;
      m.order_id = 1 + static_cast<std::int64_t>(uni(rng) * 1000);  // pre-day id
      m.size = reduce;
      m.price = order->key.price * kLobsterUnitsPerTick;
      m.direction = bid_side ? 1 : -1;
      book.apply_cancel(*init_key, reduce);
    } else {
      // execution against the best order on one side; keep at least one
      // resting order per side so the mid stays defined most of the time
      bool bid_side = uni(rng) < 0.5;
      lob::Side side = bid_side ? lob::Side::Bid : lob::Side::Ask;
      if (book.level_count(side) < 2) continue;
      auto best = book.best_price(side);
      std::optional<lob::RestingOrder> top;
      book.for_each_order(side, [&](const lob::RestingOrder& o) {
        if (!top) top = o;
      });
      lob::Qty sz = std::min<lob::Qty>(top->remaining_size,
                                       1 + static_cast<lob::Qty>(uni(rng) * 200));
      m.event_type = 4;
      m.order_id = 0;
      m.size = sz;
      m.price = *best * kLobsterUnitsPerTick;
      m.direction = bid_side ? 1 : -1;
      book.apply_execution(side, sz);
      prune_live();
    }
    day.messages.push_back(m);
    day.books.push_back(book.export_l2(cfg.levels, time_ns));
  }
  return day;
}

}  // namespace lobgen::data
