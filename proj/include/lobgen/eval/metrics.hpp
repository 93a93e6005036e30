#pragma once

// Distributional comparison metrics between generated and realized flow:
// mid-price returns, Pearson correlation with one-sided significance,
// aggregated event-type frequencies, and inter-arrival ECDF / P-P data.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "lobgen/data/message.hpp"
#include "lobgen/eval/stats.hpp"
#include "lobgen/lob/order_book.hpp"

namespace lobgen::eval {

struct DegenerateVariance : std::runtime_error {
  DegenerateVariance() : std::runtime_error("constant series: correlation undefined") {}
};

// ---------------------------------------------------------------------------
// Mid-price returns. `mids` holds the price at generation start (index 0)
// followed by one price per message; NaN marks an undefined mid, replaced by
// the most recent defined value.

inline std::vector<double> mid_returns(const std::vector<double>& mids, int horizons) {
  if (mids.empty() || std::isnan(mids[0])) throw lob::UndefinedMid();
  if (static_cast<std::size_t>(horizons) >= mids.size())
    throw std::invalid_argument("horizon exceeds series length");
  std::vector<double> out(static_cast<std::size_t>(horizons));
  const double p0 = mids[0];
  double last = p0;
  for (int s = 1; s <= horizons; ++s) {
    const double p = mids[static_cast<std::size_t>(s)];
    if (!std::isnan(p)) last = p;
    out[static_cast<std::size_t>(s) - 1] = (last - p0) / p0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pearson correlation across sequences, per horizon.

struct HorizonCorrelation {
  int horizon{};
  std::optional<double> rho;      // missing when either series is constant
  std::optional<double> p_value;  // one-sided, H1: rho > 0
  std::size_t n{};
};

struct CorrelationReport {
  std::vector<HorizonCorrelation> horizons;
};

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw std::invalid_argument("need >= 3 paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateVariance();
  return sxy / std::sqrt(sxx * syy);
}

// gen[s][i], real[s][i]: return at horizon s+1 for sequence i.
inline CorrelationReport return_correlation(
    const std::vector<std::vector<double>>& gen,
    const std::vector<std::vector<double>>& real) {
  if (gen.size() != real.size())
    throw std::invalid_argument("horizon count mismatch");
  CorrelationReport report;
  for (std::size_t s = 0; s < gen.size(); ++s) {
    HorizonCorrelation hc;
    hc.horizon = static_cast<int>(s) + 1;
    hc.n = gen[s].size();
    try {
      const double rho = pearson(gen[s], real[s]);
      hc.rho = rho;
      const double nu = static_cast<double>(hc.n) - 2.0;
      const double t = rho * std::sqrt(nu / (1.0 - rho * rho));
      hc.p_value = student_t_sf(t, nu);
    } catch (const DegenerateVariance&) {
      // reported as missing
    }
    report.horizons.push_back(hc);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Event-type frequencies over {limit, cancel+delete, execution}.

struct EventFrequencies {
  std::array<double, 3> gen{};
  std::array<double, 3> real{};
  static constexpr std::array<const char*, 3> kLabels = {"limit", "cancel",
                                                         "execution"};
};

inline std::array<double, 3> type_histogram(
    const std::vector<data::EventType>& types) {
  std::array<double, 3> h{};
  for (auto t : types) {
    switch (t) {
      case data::EventType::NewLimit: h[0] += 1; break;
      case data::EventType::PartialCancel:
      case data::EventType::Delete: h[1] += 1; break;
      case data::EventType::Execution: h[2] += 1; break;
    }
  }
  const double total = h[0] + h[1] + h[2];
  if (total > 0)
    for (auto& v : h) v /= total;
  return h;
}

inline EventFrequencies event_type_frequencies(
    const std::vector<data::EventType>& gen, const std::vector<data::EventType>& real) {
  return {type_histogram(gen), type_histogram(real)};
}

// ---------------------------------------------------------------------------
// Inter-arrival comparison: P-P pairs over the merged support plus a
// log-spaced histogram, with means and medians.

struct InterarrivalReport {
  std::vector<std::pair<double, double>> pp;  // (F_gen(x), F_real(x))
  std::vector<double> bin_edges;              // log-spaced, ns
  std::vector<std::size_t> gen_counts;
  std::vector<std::size_t> real_counts;
  double gen_mean{}, real_mean{};
  double gen_median{}, real_median{};
};

namespace detail {

inline double ecdf(const std::vector<double>& sorted, double x) {
  auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

inline double median_sorted(const std::vector<double>& sorted) {
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace detail

inline InterarrivalReport interarrival_ecdf(std::vector<double> gen,
                                            std::vector<double> real,
                                            int grid_size = 200) {
  if (gen.empty() || real.empty())
    throw std::invalid_argument("empty inter-arrival list");
  std::sort(gen.begin(), gen.end());
  std::sort(real.begin(), real.end());

  InterarrivalReport rep;
  // evaluation grid: merged support quantile-sampled to grid_size points
  std::vector<double> grid;
  grid.reserve(gen.size() + real.size());
  grid.insert(grid.end(), gen.begin(), gen.end());
  grid.insert(grid.end(), real.begin(), real.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t step = std::max<std::size_t>(1, grid.size() / grid_size);
  for (std::size_t i = 0; i < grid.size(); i += step)
    rep.pp.emplace_back(detail::ecdf(gen, grid[i]), detail::ecdf(real, grid[i]));
  rep.pp.emplace_back(1.0, 1.0);

  // log-spaced histogram over the positive support
  const double lo = std::max(1.0, std::min(gen.front(), real.front()));
  const double hi = std::max({lo + 1.0, gen.back(), real.back()});
  const int bins = 50;
  for (int b = 0; b <= bins; ++b)
    rep.bin_edges.push_back(lo * std::pow(hi / lo, static_cast<double>(b) / bins));
  auto fill = [&](const std::vector<double>& xs, std::vector<std::size_t>& counts) {
    counts.assign(bins, 0);
    for (double x : xs) {
      auto it = std::upper_bound(rep.bin_edges.begin(), rep.bin_edges.end(), x);
      std::size_t idx = it == rep.bin_edges.begin()
                            ? 0
                            : static_cast<std::size_t>(it - rep.bin_edges.begin()) - 1;
      counts[std::min<std::size_t>(idx, bins - 1)] += 1;
    }
  };
  fill(gen, rep.gen_counts);
  fill(real, rep.real_counts);

  auto mean = [](const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };
  rep.gen_mean = mean(gen);
  rep.real_mean = mean(real);
  rep.gen_median = detail::median_sorted(gen);
  rep.real_median = detail::median_sorted(real);
  return rep;
}

}  // namespace lobgen::eval
