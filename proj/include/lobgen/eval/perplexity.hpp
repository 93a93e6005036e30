#pragma once

// Masked one-step-ahead perplexity: every maskable position of every
// evaluated message is scored with the training-style MSK/HID mask, giving
// overall, per-sequence, and per-position (17-column) perplexities.

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "lobgen/s5/model.hpp"
#include "lobgen/s5/train.hpp"
#include "lobgen/tok/codec.hpp"

namespace lobgen::eval {

struct PerplexityReport {
  double overall{};            // exp(mean NLL over all scored tokens)
  double mean_nll{};
  double std_err_tokens{};     // SEM of per-token NLL
  double std_err_sequences{};  // SEM of per-sequence mean NLL
  std::vector<double> per_sequence;
  std::vector<double> per_position;  // 17 entries, maskable-position order
  std::size_t token_count{};
};

namespace detail {

struct SequenceStats {
  double nll_sum{};
  double nll_sq_sum{};
  std::size_t count{};
  std::vector<double> pos_nll;
  std::vector<std::size_t> pos_count;
};

// Scores every message of `day` from index n-1 on (each with a full window
// of preceding context), all 17 maskable positions per message.
inline SequenceStats score_sequence(const s5::SequenceModel& model,
                                    const s5::EncodedDay& day, int stride) {
  const auto& cfg = model.config();
  const auto& positions = tok::maskable_positions();
  SequenceStats st;
  st.pos_nll.assign(positions.size(), 0.0);
  st.pos_count.assign(positions.size(), 0);
  const std::size_t n = static_cast<std::size_t>(cfg.n_messages);
  if (day.tokens.size() < n) return st;

  const std::size_t base = (n - 1) * tok::kTokensPerMessage;
  for (std::size_t start = 0; start + n <= day.tokens.size();
       start += static_cast<std::size_t>(stride)) {
    auto tokens = s5::window_tokens(day, start, cfg);
    auto books = s5::book_window(day, start, cfg);
    const auto original = day.tokens[start + n - 1];
    for (std::size_t pi = 0; pi < positions.size(); ++pi) {
      const int pos = positions[pi];
      // training-style mask: MSK at pos, HID strictly to the right
      for (int p = pos; p < static_cast<int>(tok::kTokensPerMessage); ++p)
        tokens[base + static_cast<std::size_t>(p)] =
            p == pos ? tok::kMsk : tok::kHid;
      auto logits = model.logits(tokens, books);
      const double nll = static_cast<double>(s5::S5Model::cross_entropy(
          logits, original[static_cast<std::size_t>(pos)]));
      st.nll_sum += nll;
      st.nll_sq_sum += nll * nll;
      ++st.count;
      st.pos_nll[pi] += nll;
      ++st.pos_count[pi];
      // restore for the next position
      for (int p = pos; p < static_cast<int>(tok::kTokensPerMessage); ++p)
        tokens[base + static_cast<std::size_t>(p)] =
            original[static_cast<std::size_t>(p)];
    }
  }
  return st;
}

}  // namespace detail

inline PerplexityReport perplexity(const s5::SequenceModel& model,
                                   const std::vector<s5::EncodedDay>& sequences,
                                   int stride = 1, int workers = 1) {
  const auto& positions = tok::maskable_positions();
  std::vector<detail::SequenceStats> stats(sequences.size());

  if (workers <= 1 || sequences.size() <= 1) {
    for (std::size_t i = 0; i < sequences.size(); ++i)
      stats[i] = detail::score_sequence(model, sequences[i], stride);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < sequences.size();
             i = next.fetch_add(1))
          stats[i] = detail::score_sequence(model, sequences[i], stride);
      });
    for (auto& t : pool) t.join();
  }

  // fixed-order reduction
  PerplexityReport rep;
  rep.per_position.assign(positions.size(), 0.0);
  std::vector<std::size_t> pos_counts(positions.size(), 0);
  double sq_sum = 0.0;
  std::vector<double> seq_means;
  for (const auto& st : stats) {
    if (st.count == 0) continue;
    rep.token_count += st.count;
    rep.mean_nll += st.nll_sum;
    sq_sum += st.nll_sq_sum;
    seq_means.push_back(st.nll_sum / static_cast<double>(st.count));
    rep.per_sequence.push_back(std::exp(seq_means.back()));
    for (std::size_t pi = 0; pi < positions.size(); ++pi) {
      rep.per_position[pi] += st.pos_nll[pi];
      pos_counts[pi] += st.pos_count[pi];
    }
  }
  if (rep.token_count == 0) return rep;
  rep.mean_nll /= static_cast<double>(rep.token_count);
  rep.overall = std::exp(rep.mean_nll);
  const double var =
      sq_sum / static_cast<double>(rep.token_count) - rep.mean_nll * rep.mean_nll;
  rep.std_err_tokens =
      std::sqrt(std::max(0.0, var) / static_cast<double>(rep.token_count));
  if (seq_means.size() > 1) {
    double m = 0.0;
    for (double v : seq_means) m += v;
    m /= static_cast<double>(seq_means.size());
    double sv = 0.0;
    for (double v : seq_means) sv += (v - m) * (v - m);
    sv /= static_cast<double>(seq_means.size() - 1);
    rep.std_err_sequences = std::sqrt(sv / static_cast<double>(seq_means.size()));
  }
  for (std::size_t pi = 0; pi < positions.size(); ++pi)
    rep.per_position[pi] = pos_counts[pi] == 0
                               ? 0.0
                               : std::exp(rep.per_position[pi] /
                                          static_cast<double>(pos_counts[pi]));
  return rep;
}

}  // namespace lobgen::eval
