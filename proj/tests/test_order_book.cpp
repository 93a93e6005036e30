#include <catch2/catch_amalgamated.hpp>

#include "lobgen/lob/order_book.hpp"
#include "support/book_fuzz.hpp"

using namespace lobgen;
using lob::OrderBookL3;
using lob::Side;

namespace {

lob::L2Snapshot two_sided_snapshot() {
  lob::L2Snapshot snap;
  for (int l = 0; l < 10; ++l) {
    snap.asks.push_back({10'001 + l, 300 - 20 * l});
    snap.bids.push_back({9'999 - l, 300 - 20 * l});
  }
  return snap;
}

}  // namespace

TEST_CASE("new book is empty with undefined best prices and mid") {
  OrderBookL3 book(100);
  CHECK(book.empty());
  CHECK_FALSE(book.best_bid().has_value());
  CHECK_FALSE(book.best_ask().has_value());
  CHECK_FALSE(book.mid2_ticks().has_value());
}

TEST_CASE("snapshot initialization") {
  SECTION("single ask level becomes one init order") {
    lob::L2Snapshot snap;
    snap.asks.push_back({10'001, 300});
    snap.bids.push_back({lob::kBidSentinelTicks, 0});
    OrderBookL3 book = OrderBookL3::from_snapshot(snap);
    int count = 0;
    book.for_each_order(Side::Ask, [&](const lob::RestingOrder& o) {
      ++count;
      CHECK(o.remaining_size == 300);
      CHECK(o.is_init_volume);
      CHECK(o.key.entry_time_ns == 0);
    });
    CHECK(count == 1);
  }
  SECTION("empty snapshot yields empty book") {
    OrderBookL3 book = OrderBookL3::from_snapshot(lob::L2Snapshot{});
    CHECK(book.empty());
  }
  SECTION("10 populated levels per side round-trip through export_l2") {
    auto snap = two_sided_snapshot();
    OrderBookL3 book = OrderBookL3::from_snapshot(snap);
    auto exported = book.export_l2(10, 0);
    CHECK(exported == snap);
    std::size_t orders = 0;
    book.for_each_order(Side::Bid, [&](const auto&) { ++orders; });
    book.for_each_order(Side::Ask, [&](const auto&) { ++orders; });
    CHECK(orders == 20);
  }
  SECTION("crossed snapshot rejected") {
    lob::L2Snapshot snap;
    snap.asks.push_back({10'000, 100});
    snap.bids.push_back({10'000, 100});
    OrderBookL3 book;
    CHECK_THROWS_AS(book.init_from_snapshot(snap), lob::CrossedSnapshot);
  }
}

TEST_CASE("limit order matching follows price-time priority") {
  SECTION("partial fill at maker price") {
    OrderBookL3 book;
    book.apply_limit(Side::Ask, 100, 50, 1);
    auto res = book.apply_limit(Side::Bid, 101, 30, 2);
    REQUIRE(res.trades.size() == 1);
    CHECK(res.trades[0].price == 100);
    CHECK(res.trades[0].size == 30);
    CHECK(book.volume_at(Side::Ask, 100) == 20);
    CHECK_FALSE(res.resting.has_value());
  }
  SECTION("FIFO across two asks at one price") {
    OrderBookL3 book;
    book.apply_limit(Side::Ask, 100, 10, 1);
    book.apply_limit(Side::Ask, 100, 20, 2);
    auto res = book.apply_limit(Side::Bid, 100, 15, 3);
    REQUIRE(res.trades.size() == 2);
    CHECK(res.trades[0].size == 10);
    CHECK(res.trades[1].size == 5);
    CHECK(book.volume_at(Side::Ask, 100) == 15);
  }
  SECTION("non-crossing bid rests") {
    OrderBookL3 book;
    book.apply_limit(Side::Ask, 100, 50, 1);
    auto res = book.apply_limit(Side::Bid, 99, 10, 2);
    CHECK(res.trades.empty());
    REQUIRE(res.resting.has_value());
    CHECK(book.volume_at(Side::Bid, 99) == 10);
  }
  SECTION("volume conservation") {
    OrderBookL3 book = OrderBookL3::from_snapshot(two_sided_snapshot());
    auto res = book.apply_limit(Side::Bid, 10'003, 700, 5);
    lob::Qty traded = 0;
    for (const auto& t : res.trades) traded += t.size;
    lob::Qty rested = res.resting ? book.find_order(*res.resting)->remaining_size : 0;
    CHECK(traded + rested == 700);
  }
}

TEST_CASE("cancellation semantics") {
  OrderBookL3 book;
  auto res = book.apply_limit(Side::Bid, 99, 100, 1);
  REQUIRE(res.resting.has_value());
  auto key = *res.resting;

  SECTION("partial cancel keeps queue position") {
    book.apply_limit(Side::Bid, 99, 40, 2);  // behind in queue
    book.apply_cancel(key, 40);
    auto first = book.find_order(key);
    REQUIRE(first.has_value());
    CHECK(first->remaining_size == 60);
    // still first in queue: an execution hits it
    auto trades = book.apply_execution(Side::Bid, 5);
    CHECK(trades[0].maker.entry_seq == key.entry_seq);
  }
  SECTION("cancel to zero removes the order") {
    book.apply_cancel(key, 100);
    CHECK_FALSE(book.find_order(key).has_value());
  }
  SECTION("over-cancel clips instead of underflowing") {
    book.apply_cancel(key, 150);
    CHECK_FALSE(book.find_order(key).has_value());
    CHECK(book.volume_at(Side::Bid, 99) == 0);
  }
  SECTION("unknown key raises OrderNotFound") {
    lob::OrderKey missing{Side::Bid, 99, 12345, 0};
    CHECK_THROWS_AS(book.apply_cancel(missing, 1), lob::OrderNotFound);
  }
}

TEST_CASE("execution touches only the single best-priority order") {
  OrderBookL3 book;
  book.apply_limit(Side::Ask, 100, 10, 1);
  book.apply_limit(Side::Ask, 100, 20, 2);

  SECTION("clips to the first order's size") {
    auto trades = book.apply_execution(Side::Ask, 25);
    REQUIRE(trades.size() == 1);
    CHECK(trades[0].price == 100);
    CHECK(trades[0].size == 10);
    CHECK(book.volume_at(Side::Ask, 100) == 20);
  }
  SECTION("partial execution of the best bid") {
    book.apply_limit(Side::Bid, 99, 50, 3);
    auto trades = book.apply_execution(Side::Bid, 5);
    REQUIRE(trades.size() == 1);
    CHECK(trades[0].price == 99);
    CHECK(trades[0].size == 5);
    CHECK(book.volume_at(Side::Bid, 99) == 45);
  }
  SECTION("empty side raises EmptySide") {
    CHECK_THROWS_AS(book.apply_execution(Side::Bid, 1), lob::EmptySide);
  }
}

TEST_CASE("L2 export") {
  SECTION("empty book gives all sentinel levels") {
    OrderBookL3 book;
    auto snap = book.export_l2(10, 0);
    for (const auto& lvl : snap.asks) {
      CHECK(lvl.price == lob::kAskSentinelTicks);
      CHECK(lvl.volume == 0);
    }
    for (const auto& lvl : snap.bids) {
      CHECK(lvl.price == lob::kBidSentinelTicks);
      CHECK(lvl.volume == 0);
    }
  }
  SECTION("12 bid levels truncate to the best 10") {
    OrderBookL3 book;
    for (int l = 0; l < 12; ++l)
      book.apply_limit(Side::Bid, 9'999 - l, 10 + l, l + 1);
    auto snap = book.export_l2(10, 0);
    CHECK(snap.bids.front().price == 9'999);
    CHECK(snap.bids.back().price == 9'990);
    CHECK(snap.bids.back().volume == 19);
  }
}

TEST_CASE("mid-price at half-tick resolution with fallback") {
  OrderBookL3 book;
  SECTION("even spread midpoint") {
    book.apply_limit(Side::Bid, 100, 10, 1);
    book.apply_limit(Side::Ask, 102, 10, 2);
    CHECK(book.mid2_ticks() == 202);  // mid 101
    CHECK(book.mid_anchor_ticks() == 101);
  }
  SECTION("odd spread keeps half tick and floors the anchor") {
    book.apply_limit(Side::Bid, 100, 10, 1);
    book.apply_limit(Side::Ask, 101, 10, 2);
    CHECK(book.mid2_ticks() == 201);  // mid 100.5
    CHECK(book.mid_anchor_ticks() == 100);
  }
  SECTION("mid persists after one side empties") {
    book.apply_limit(Side::Bid, 100, 10, 1);
    auto res = book.apply_limit(Side::Ask, 102, 10, 2);
    CHECK(book.mid_anchor_ticks() == 101);
    book.apply_cancel(*res.resting, 10);
    CHECK_FALSE(book.best_ask().has_value());
    CHECK(book.mid_anchor_ticks() == 101);
  }
}

TEST_CASE("volume image export") {
  SECTION("hand-computed placement") {
    OrderBookL3 book;
    book.apply_limit(Side::Bid, 998, 30, 1);
    book.apply_limit(Side::Ask, 1'002, 20, 2);
    // mid2 = 2000, anchor 1000; window [996, 1004)
    auto img = book.export_volume_image(1'000, 8);
    CHECK(img.mid_change_ticks == 0);
    std::vector<std::int64_t> expected{0, 0, 30, 0, 0, 0, -20, 0};
    CHECK(img.vols == expected);
  }
  SECTION("mid move changes the anchor delta") {
    OrderBookL3 book;
    book.apply_limit(Side::Bid, 999, 30, 1);
    book.apply_limit(Side::Ask, 1'003, 20, 2);  // anchor 1001
    auto img = book.export_volume_image(1'000, 8);
    CHECK(img.mid_change_ticks == 1);
  }
  SECTION("book never two-sided raises UndefinedMid") {
    OrderBookL3 book;
    book.apply_limit(Side::Bid, 999, 30, 1);
    CHECK_THROWS_AS(book.export_volume_image(1'000, 8), lob::UndefinedMid);
  }
  SECTION("empty window region is all zeros") {
    OrderBookL3 book;
    book.apply_limit(Side::Bid, 500, 30, 1);
    book.apply_limit(Side::Ask, 1'500, 20, 2);  // anchor 1000, both outside P=8
    auto img = book.export_volume_image(1'000, 8);
    for (auto v : img.vols) CHECK(v == 0);
  }
}

TEST_CASE("book is never crossed and replay is deterministic") {
  auto r1 = testsupport::run_book_fuzz(2'000, 7);
  CHECK(r1.ok);

  // determinism: identical stream, identical final snapshot
  auto r2 = testsupport::run_book_fuzz(2'000, 7);
  CHECK(r2.ok);
}

TEST_CASE("oracle equivalence over randomized message streams") {
  auto result = testsupport::run_book_fuzz(10'000, 42);
  INFO(result.detail);
  CHECK(result.ok);
}
