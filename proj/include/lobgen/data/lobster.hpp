#pragma once

// LOBSTER CSV ingestion: message files (time, type, id, size, price, dir)
// with row-aligned orderbook files (ask_p1, ask_v1, bid_p1, bid_v1, ...).
// Prices convert from LOBSTER units (dollars x 10000) to ticks at this
// boundary; one tick = 100 LOBSTER units ($0.01).

#include <charconv>
#include <cstdint>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lobgen/data/message.hpp"
#include "lobgen/lob/order_book.hpp"

namespace lobgen::data {

inline constexpr std::int64_t kLobsterUnitsPerTick = 100;
inline constexpr std::int64_t kSessionStartNs = 34'200'000'000'000LL;  // 09:30
inline constexpr std::int64_t kSessionEndNs = 57'600'000'000'000LL;    // 16:00

struct MalformedRow : std::runtime_error {
  MalformedRow(std::size_t row, const std::string& detail)
      : std::runtime_error("malformed row " + std::to_string(row) + ": " + detail),
        row_number(row) {}
  std::size_t row_number;
};

struct MisalignedFiles : std::runtime_error {
  MisalignedFiles(std::size_t messages, std::size_t books)
      : std::runtime_error("row counts differ: " + std::to_string(messages) +
                           " messages vs " + std::to_string(books) +
                           " orderbook rows") {}
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  return cells;
}

inline std::int64_t parse_int(const std::string& s, std::size_t row) {
  std::int64_t v = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ')) ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e)
    throw MalformedRow(row, "not an integer: '" + s + "'");
  return v;
}

// Decimal seconds after midnight to exact integer nanoseconds.
inline std::int64_t parse_time_ns(const std::string& s, std::size_t row) {
  auto dot = s.find('.');
  std::string secs_part = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac_part = dot == std::string::npos ? "" : s.substr(dot + 1);
  if (frac_part.size() > 9) frac_part.resize(9);
  while (frac_part.size() < 9) frac_part.push_back('0');
  std::int64_t secs = parse_int(secs_part, row);
  std::int64_t frac = frac_part.empty() ? 0 : parse_int(frac_part, row);
  return secs * 1'000'000'000LL + frac;
}

}  // namespace detail

inline std::vector<RawMessage> parse_lobster_messages(std::istream& is) {
  std::vector<RawMessage> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = detail::split_csv(line);
    if (cells.size() < 6)
      throw MalformedRow(row, "expected 6 columns, got " +
                                  std::to_string(cells.size()));
    RawMessage m;
    m.time_ns = detail::parse_time_ns(cells[0], row);
    m.event_type = static_cast<int>(detail::parse_int(cells[1], row));
    m.order_id = detail::parse_int(cells[2], row);
    m.size = detail::parse_int(cells[3], row);
    m.price = detail::parse_int(cells[4], row);
    m.direction = static_cast<int>(detail::parse_int(cells[5], row));
    out.push_back(m);
  }
  return out;
}

inline std::vector<lob::L2Snapshot> parse_lobster_orderbook(std::istream& is,
                                                            std::size_t levels) {
  std::vector<lob::L2Snapshot> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = detail::split_csv(line);
    if (cells.size() < 4 * levels)
      throw MalformedRow(row, "expected " + std::to_string(4 * levels) +
                                  " columns, got " + std::to_string(cells.size()));
    lob::L2Snapshot snap;
    for (std::size_t l = 0; l < levels; ++l) {
      std::int64_t ap = detail::parse_int(cells[4 * l + 0], row);
      std::int64_t av = detail::parse_int(cells[4 * l + 1], row);
      std::int64_t bp = detail::parse_int(cells[4 * l + 2], row);
      std::int64_t bv = detail::parse_int(cells[4 * l + 3], row);
      if (av > 0)
        snap.asks.push_back({ap / kLobsterUnitsPerTick, av});
      else
        snap.asks.push_back({lob::kAskSentinelTicks, 0});
      if (bv > 0)
        snap.bids.push_back({bp / kLobsterUnitsPerTick, bv});
      else
        snap.bids.push_back({lob::kBidSentinelTicks, 0});
    }
    out.push_back(std::move(snap));
  }
  return out;
}

// Parses a row-aligned message/orderbook file pair (row i of the orderbook
// is the book state after message i).
inline std::pair<std::vector<RawMessage>, std::vector<lob::L2Snapshot>>
parse_lobster(std::istream& messages, std::istream& orderbook,
              std::size_t levels) {
  auto msgs = parse_lobster_messages(messages);
  auto books = parse_lobster_orderbook(orderbook, levels);
  if (msgs.size() != books.size()) throw MisalignedFiles(msgs.size(), books.size());
  return {std::move(msgs), std::move(books)};
}

// Keeps event types 1-4 inside regular trading hours [09:30, 16:00),
// preserving message/book alignment.
inline std::pair<std::vector<RawMessage>, std::vector<lob::L2Snapshot>>
filter_messages(const std::vector<RawMessage>& msgs,
                const std::vector<lob::L2Snapshot>& books) {
  std::vector<RawMessage> fmsgs;
  std::vector<lob::L2Snapshot> fbooks;
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    const auto& m = msgs[i];
    if (m.event_type < 1 || m.event_type > 4) continue;
    if (m.time_ns < kSessionStartNs || m.time_ns >= kSessionEndNs) continue;
    fmsgs.push_back(m);
    if (i < books.size()) fbooks.push_back(books[i]);
  }
  return {std::move(fmsgs), std::move(fbooks)};
}

}  // namespace lobgen::data
