#pragma once

// Randomized message driver applying identical operation streams to the
// engine book and the naive reference book, comparing L2 snapshots after
// every message.

#include <optional>
#include <random>
#include <string>

#include "lobgen/lob/order_book.hpp"
#include "support/naive_book.hpp"

namespace lobgen::testsupport {

struct FuzzResult {
  bool ok{true};
  std::size_t first_divergence{0};
  std::string detail;
};

inline std::optional<lob::OrderKey> nth_at_level(const lob::OrderBookL3& book,
                                                 lob::Side side, lob::Ticks price,
                                                 std::size_t nth) {
  std::optional<lob::OrderKey> key;
  std::size_t seen = 0;
  book.for_each_order(side, [&](const lob::RestingOrder& o) {
    if (o.key.price != price || key) return;
    if (seen++ == nth) key = o.key;
  });
  return key;
}

inline FuzzResult run_book_fuzz(std::size_t n_messages, std::uint64_t seed,
                                std::size_t levels = 10) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  lob::L2Snapshot snap;
  for (std::size_t l = 0; l < levels; ++l) {
    auto li = static_cast<lob::Ticks>(l);
    snap.asks.push_back({10'001 + li, 200 + 10 * li});
    snap.bids.push_back({9'999 - li, 200 + 10 * li});
  }
  lob::OrderBookL3 engine = lob::OrderBookL3::from_snapshot(snap);
  NaiveBook naive;
  naive.init_from_snapshot(snap);

  std::int64_t time_ns = 34'200'000'000'000LL;
  for (std::size_t i = 0; i < n_messages; ++i) {
    time_ns += 1 + static_cast<std::int64_t>(uni(rng) * 1'000'000);
    double action = uni(rng);
    bool buy = uni(rng) < 0.5;
    lob::Side side = buy ? lob::Side::Bid : lob::Side::Ask;

    if (action < 0.55) {
      auto ref = side == lob::Side::Bid ? engine.best_bid() : engine.best_ask();
      lob::Ticks base = ref.value_or(10'000);
      int off = static_cast<int>(uni(rng) * 8) - 2;  // sometimes crossing
      lob::Ticks price = buy ? base + off : base - off;
      if (price < 2) price = 2;
      lob::Qty size = 1 + static_cast<lob::Qty>(uni(rng) * 400);
      engine.apply_limit(side, price, size, time_ns);
      naive.apply_limit(side, price, size, time_ns);
    } else if (action < 0.80) {
      auto l2 = engine.export_l2(levels, time_ns);
      const auto& lvls = side == lob::Side::Bid ? l2.bids : l2.asks;
      std::size_t li = static_cast<std::size_t>(uni(rng) * static_cast<double>(levels));
      if (lvls[li].volume <= 0) continue;
      lob::Ticks price = lvls[li].price;
      std::size_t nth = static_cast<std::size_t>(uni(rng) * 3.0);
      auto key = nth_at_level(engine, side, price, nth);
      if (!key) continue;
      lob::Qty reduce = 1 + static_cast<lob::Qty>(uni(rng) * 500);  // may over-reduce
      engine.apply_cancel(*key, reduce);
      naive.cancel_nth_at(side, price, nth, reduce);
    } else {
      lob::Qty size = 1 + static_cast<lob::Qty>(uni(rng) * 300);
      bool have = side == lob::Side::Bid ? engine.best_bid().has_value()
                                         : engine.best_ask().has_value();
      if (!have) continue;
      engine.apply_execution(side, size);
      naive.execute(side, size);
    }

    auto a = engine.export_l2(levels, time_ns);
    auto b = naive.export_l2(levels, time_ns);
    if (!(a == b)) {
      return {false, i, "L2 snapshots diverge after message " + std::to_string(i)};
    }
  }
  return {};
}

}  // namespace lobgen::testsupport
