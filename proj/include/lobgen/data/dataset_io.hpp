#pragma once

// Per-day binary dataset persistence: little-endian 64-bit columnar message
// fields, then volume images, with a JSON sidecar of metadata. Reference
// fields of new limit orders are stored as INT64_MIN (NA).
//
// Field column order: type, direction, price, size, dt, time, ref_price,
// ref_size, ref_time.

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "lobgen/data/preprocess.hpp"
#include "lobgen/gen/correction.hpp"
#include "lobgen/util/binio.hpp"

namespace lobgen::data {

inline constexpr std::uint32_t kDatasetMagic = 0x4C4F4244;  // "LOBD"
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::int64_t kFieldNa = INT64_MIN;

inline void write_dataset(std::ostream& os, const DayDataset& day,
                          const std::vector<std::uint8_t>* outcomes = nullptr) {
  util::write_le(os, kDatasetMagic);
  util::write_le(os, kDatasetVersion);
  util::write_le<std::uint64_t>(os, day.messages.size());
  util::write_le<std::uint32_t>(os, day.P);
  util::write_le<std::uint32_t>(os,
                                static_cast<std::uint32_t>(day.initial_snapshot.depth()));
  util::write_le<std::uint8_t>(os, outcomes ? 1 : 0);
  for (const auto& lvl : day.initial_snapshot.asks) {
    util::write_le<std::int64_t>(os, lvl.price);
    util::write_le<std::int64_t>(os, lvl.volume);
  }
  for (const auto& lvl : day.initial_snapshot.bids) {
    util::write_le<std::int64_t>(os, lvl.price);
    util::write_le<std::int64_t>(os, lvl.volume);
  }
  util::write_le<std::int64_t>(os, day.initial_snapshot.time_ns);

  auto column = [&](auto&& get) {
    for (const auto& m : day.messages) util::write_le<std::int64_t>(os, get(m));
  };
  column([](const auto& m) { return static_cast<std::int64_t>(m.type); });
  column([](const auto& m) { return m.direction == lob::Side::Bid ? 1 : -1; });
  column([](const auto& m) { return static_cast<std::int64_t>(m.price_ticks); });
  column([](const auto& m) { return static_cast<std::int64_t>(m.size); });
  column([](const auto& m) { return m.dt_ns; });
  column([](const auto& m) { return m.time_ns; });
  column([](const auto& m) {
    return m.has_ref ? static_cast<std::int64_t>(m.ref_price_ticks) : kFieldNa;
  });
  column([](const auto& m) {
    return m.has_ref ? static_cast<std::int64_t>(m.ref_size) : kFieldNa;
  });
  column([](const auto& m) { return m.has_ref ? m.ref_time_ns : kFieldNa; });

  for (const auto& img : day.books) {
    util::write_le<std::int64_t>(os, img.mid_change_ticks);
    for (auto v : img.vols) util::write_le<std::int64_t>(os, v);
  }
  if (outcomes) {
    for (auto b : *outcomes) util::write_le<std::uint8_t>(os, b);
  }
}

inline DayDataset read_dataset(std::istream& is,
                               std::vector<std::uint8_t>* outcomes = nullptr) {
  if (util::read_le<std::uint32_t>(is) != kDatasetMagic)
    throw util::IoError("bad dataset magic");
  if (util::read_le<std::uint32_t>(is) != kDatasetVersion)
    throw util::IoError("unsupported dataset version");
  const auto count = util::read_le<std::uint64_t>(is);
  DayDataset day;
  day.P = util::read_le<std::uint32_t>(is);
  const auto depth = util::read_le<std::uint32_t>(is);
  const bool has_outcomes = util::read_le<std::uint8_t>(is) != 0;
  day.initial_snapshot.asks.resize(depth);
  day.initial_snapshot.bids.resize(depth);
  for (auto& lvl : day.initial_snapshot.asks) {
    lvl.price = util::read_le<std::int64_t>(is);
    lvl.volume = util::read_le<std::int64_t>(is);
  }
  for (auto& lvl : day.initial_snapshot.bids) {
    lvl.price = util::read_le<std::int64_t>(is);
    lvl.volume = util::read_le<std::int64_t>(is);
  }
  day.initial_snapshot.time_ns = util::read_le<std::int64_t>(is);

  day.messages.resize(count);
  auto column = [&](auto&& set) {
    for (auto& m : day.messages) set(m, util::read_le<std::int64_t>(is));
  };
  column([](auto& m, std::int64_t v) { m.type = static_cast<EventType>(v); });
  column([](auto& m, std::int64_t v) {
    m.direction = v > 0 ? lob::Side::Bid : lob::Side::Ask;
  });
  column([](auto& m, std::int64_t v) {
    m.price_ticks = static_cast<std::int32_t>(v);
  });
  column([](auto& m, std::int64_t v) { m.size = static_cast<std::int32_t>(v); });
  column([](auto& m, std::int64_t v) { m.dt_ns = v; });
  column([](auto& m, std::int64_t v) { m.time_ns = v; });
  column([](auto& m, std::int64_t v) {
    m.has_ref = v != kFieldNa;
    m.ref_price_ticks = m.has_ref ? static_cast<std::int32_t>(v) : 0;
  });
  column([](auto& m, std::int64_t v) {
    m.ref_size = v != kFieldNa ? static_cast<std::int32_t>(v) : 0;
  });
  column([](auto& m, std::int64_t v) { m.ref_time_ns = v != kFieldNa ? v : 0; });

  day.books.resize(count);
  for (auto& img : day.books) {
    img.mid_change_ticks = util::read_le<std::int64_t>(is);
    img.vols.resize(day.P);
    for (auto& v : img.vols) v = util::read_le<std::int64_t>(is);
  }
  if (has_outcomes && outcomes) {
    outcomes->resize(count);
    for (auto& b : *outcomes) b = util::read_le<std::uint8_t>(is);
  }
  return day;
}

inline void save_dataset(const std::filesystem::path& path, const DayDataset& day,
                         const std::vector<std::uint8_t>* outcomes = nullptr) {
  util::atomic_write(path,
                     [&](std::ostream& os) { write_dataset(os, day, outcomes); });
  nlohmann::json meta{{"symbol", day.symbol},
                      {"date", day.date},
                      {"P", day.P},
                      {"count", day.messages.size()},
                      {"depth", day.initial_snapshot.depth()}};
  util::atomic_write(std::filesystem::path(path.string() + ".json"),
                     [&](std::ostream& os) { os << meta.dump(2) << '\n'; });
}

inline DayDataset load_dataset(const std::filesystem::path& path,
                               std::vector<std::uint8_t>* outcomes = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw util::IoError("cannot open " + path.string());
  auto day = read_dataset(is, outcomes);
  auto sidecar = std::filesystem::path(path.string() + ".json");
  if (std::filesystem::exists(sidecar)) {
    auto meta = nlohmann::json::parse(util::read_file(sidecar));
    day.symbol = meta.value("symbol", "");
    day.date = meta.value("date", "");
  }
  return day;
}

}  // namespace lobgen::data
