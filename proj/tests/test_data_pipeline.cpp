#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <sstream>

#include "lobgen/data/dataset_io.hpp"
#include "lobgen/data/lobster.hpp"
#include "lobgen/data/preprocess.hpp"
#include "lobgen/data/synthetic.hpp"
#include "lobgen/gen/correction.hpp"

using namespace lobgen;
using namespace lobgen::data;

TEST_CASE("LOBSTER message parsing") {
  SECTION("single row with nanosecond time") {
    std::istringstream msgs("34200.000000001,1,12345,100,1000100,1\n");
    auto parsed = parse_lobster_messages(msgs);
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].time_ns == 34'200'000'000'001LL);
    CHECK(parsed[0].event_type == 1);
    CHECK(parsed[0].order_id == 12'345);
    CHECK(parsed[0].size == 100);
    CHECK(parsed[0].price == 1'000'100);
    CHECK(parsed[0].direction == 1);
  }
  SECTION("empty files give empty lists") {
    std::istringstream m(""), b("");
    auto [msgs, books] = parse_lobster(m, b, 10);
    CHECK(msgs.empty());
    CHECK(books.empty());
  }
  SECTION("row count mismatch raises MisalignedFiles") {
    std::ostringstream mrows, brows;
    for (int i = 0; i < 10; ++i) mrows << "34200.0,1," << i << ",10,1000000,1\n";
    for (int i = 0; i < 9; ++i) {
      for (int l = 0; l < 10; ++l) brows << "1000100,10,999900,10" << (l < 9 ? "," : "");
      brows << "\n";
    }
    std::istringstream m(mrows.str()), b(brows.str());
    CHECK_THROWS_AS(parse_lobster(m, b, 10), MisalignedFiles);
  }
  SECTION("non-numeric cell raises MalformedRow") {
    std::istringstream m("34200.0,1,x,10,1000000,1\n");
    CHECK_THROWS_AS(parse_lobster_messages(m), MalformedRow);
  }
  SECTION("short row raises MalformedRow") {
    std::istringstream m("34200.0,1,5\n");
    CHECK_THROWS_AS(parse_lobster_messages(m), MalformedRow);
  }
}

TEST_CASE("session and type filtering") {
  std::vector<RawMessage> msgs{
      {34'199'000'000'000LL, 1, 1, 10, 1'000'000, 1},  // before 09:30
      {kSessionStartNs, 1, 2, 10, 1'000'000, 1},       // boundary inclusive
      {40'000'000'000'000LL, 5, 3, 10, 1'000'000, 1},  // hidden execution
      {40'000'000'000'001LL, 2, 2, 5, 1'000'000, 1},
      {kSessionEndNs, 1, 4, 10, 1'000'000, 1},  // 16:00 exclusive
  };
  std::vector<lob::L2Snapshot> books(msgs.size());
  auto [fm, fb] = filter_messages(msgs, books);
  REQUIRE(fm.size() == 2);
  CHECK(fm[0].order_id == 2);
  CHECK(fm[1].event_type == 2);
  CHECK(fb.size() == 2);
}

TEST_CASE("preprocessing a synthetic day") {
  SyntheticConfig cfg;
  cfg.seed = 21;
  cfg.n_messages = 1'500;
  auto dayraw = make_synthetic_day(cfg);
  auto [msgs, books] = filter_messages(dayraw.messages, dayraw.books);
  REQUIRE(msgs.size() > 1'000);

  ClipStats stats;
  auto day = preprocess_day(msgs, books, /*P=*/64, "TEST", "2024-01-02", &stats);

  SECTION("field ranges hold for every message") {
    for (const auto& m : day.messages) {
      INFO("time " << m.time_ns);
      REQUIRE(m.valid());
    }
  }
  SECTION("messages and books stay aligned") {
    CHECK(day.messages.size() == day.books.size());
    CHECK(day.messages.size() == msgs.size() - 1);
  }
  SECTION("dt chain matches time stamps") {
    for (std::size_t i = 1; i < day.messages.size(); ++i) {
      CHECK(day.messages[i].dt_ns ==
            day.messages[i].time_ns - day.messages[i - 1].time_ns);
    }
  }
  SECTION("clipping is rare on realistic flow") {
    CHECK(stats.clip_rate() < 0.001);
  }
  SECTION("reference fields NA exactly for new limit orders") {
    for (const auto& m : day.messages)
      CHECK(m.has_ref == (m.type != EventType::NewLimit));
  }
  SECTION("replaying through the corrected-apply path reproduces the books") {
    lob::OrderBookL3 book = lob::OrderBookL3::from_snapshot(day.initial_snapshot);
    lob::Ticks prev_anchor = *book.mid_anchor_ticks();
    for (std::size_t i = 0; i < day.messages.size(); ++i) {
      lob::Ticks anchor = *book.mid_anchor_ticks();
      auto img = book.export_volume_image(prev_anchor, day.P);
      REQUIRE(img == day.books[i]);
      prev_anchor = anchor;
      gen::correct_and_apply(book, day.messages[i], anchor);
    }
  }
}

TEST_CASE("tick-relative price arithmetic") {
  // prev mid 100.005 dollars -> mid2 = 20001 ticks, anchor 10000;
  // a limit buy at 99.98 is 2 ticks below the anchor.
  lob::L2Snapshot snap;
  snap.asks.push_back({10'002, 50});
  snap.bids.push_back({9'999, 50});
  std::vector<RawMessage> msgs{
      {kSessionStartNs, 1, 1, 10, 99'990'0, 1},  // boundary message -> snapshot
      {kSessionStartNs + 1'000, 1, 2, 10, 999'800, 1},
  };
  // books[0] is the state after msgs[0]; construct it directly
  std::vector<lob::L2Snapshot> books{snap, snap};
  auto day = preprocess_day(msgs, books, 16);
  REQUIRE(day.messages.size() == 1);
  CHECK(day.messages[0].price_ticks == -2);
  CHECK(day.messages[0].dt_ns == 1'000);
}

TEST_CASE("size and price truncation") {
  lob::L2Snapshot snap;
  snap.asks.push_back({10'001, 50});
  snap.bids.push_back({9'999, 50});
  std::vector<RawMessage> msgs{
      {kSessionStartNs, 1, 1, 10, 1'000'000, 1},
      {kSessionStartNs + 1, 1, 2, 25'000, 1'000'000, 1},     // size clip
      {kSessionStartNs + 2, 1, 3, 10, 1'500'000, -1},        // +5000 ticks
  };
  std::vector<lob::L2Snapshot> books{snap, snap, snap};
  auto day = preprocess_day(msgs, books, 16);
  REQUIRE(day.messages.size() == 2);
  CHECK(day.messages[0].size == 9'999);
  CHECK(day.messages[1].price_ticks == 999);
}

TEST_CASE("reference resolution") {
  std::unordered_map<std::int64_t, RefInfo> history;
  history[7] = RefInfo{-3, 120, 34'200'000'001'000LL};

  SECTION("same-day delete resolves to the original triple") {
    RawMessage del{34'201'000'000'000LL, 3, 7, 120, 999'700, 1};
    auto ref = resolve_reference(del, -5, 120, history);
    CHECK(ref.price_ticks == -3);
    CHECK(ref.size == 120);
    CHECK(ref.time_ns == 34'200'000'001'000LL);
  }
  SECTION("pre-session order falls back to own fields with time zero") {
    RawMessage del{34'201'000'000'000LL, 3, 99, 80, 999'700, 1};
    auto ref = resolve_reference(del, -5, 80, history);
    CHECK(ref.price_ticks == -5);
    CHECK(ref.size == 80);
    CHECK(ref.time_ns == 0);
  }
}

TEST_CASE("dataset persistence round trip") {
  SyntheticConfig cfg;
  cfg.seed = 3;
  cfg.n_messages = 300;
  auto dayraw = make_synthetic_day(cfg);
  auto [msgs, books] = filter_messages(dayraw.messages, dayraw.books);
  auto day = preprocess_day(msgs, books, 32, "SYN", "2024-02-01");

  auto path = std::filesystem::temp_directory_path() / "lobgen_day_test.bin";
  save_dataset(path, day);
  auto loaded = load_dataset(path);

  CHECK(loaded.symbol == "SYN");
  CHECK(loaded.date == "2024-02-01");
  CHECK(loaded.P == day.P);
  CHECK(loaded.messages == day.messages);
  REQUIRE(loaded.books.size() == day.books.size());
  for (std::size_t i = 0; i < day.books.size(); ++i)
    CHECK(loaded.books[i] == day.books[i]);
  CHECK(loaded.initial_snapshot == day.initial_snapshot);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}
