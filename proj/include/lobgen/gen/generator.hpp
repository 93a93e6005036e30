#pragma once

// Closed generation loop: constrained autoregressive sampling of one message
// at a time, arrival-time materialization from the sampled dt, decoding,
// error-corrected application to the simulator book, and window sliding.

#include <random>
#include <span>
#include <vector>

#include "lobgen/data/preprocess.hpp"
#include "lobgen/gen/correction.hpp"
#include "lobgen/s5/model.hpp"
#include "lobgen/tok/codec.hpp"
#include "lobgen/util/rng.hpp"

namespace lobgen::gen {

struct GenerationStep {
  data::PreprocessedMessage message;  // as sampled (post time materialization)
  CorrectionOutcome outcome;
  lob::VolumeImage book;  // state before this message
  std::vector<lob::Trade> trades;
};

struct CorrectionTally {
  std::size_t new_order{0};
  std::size_t exact_match{0};
  std::size_t match_ignoring_time{0};
  std::size_t init_volume_cancel{0};
  std::size_t best_order_execution{0};
  std::size_t size_clipped{0};
  std::size_t discarded{0};

  void add(CorrectionAction a) {
    switch (a) {
      case CorrectionAction::NewOrder: ++new_order; break;
      case CorrectionAction::ExactMatch: ++exact_match; break;
      case CorrectionAction::MatchIgnoringTime: ++match_ignoring_time; break;
      case CorrectionAction::InitVolumeCancel: ++init_volume_cancel; break;
      case CorrectionAction::BestOrderExecution: ++best_order_execution; break;
      case CorrectionAction::SizeClipped: ++size_clipped; break;
      case CorrectionAction::Discarded: ++discarded; break;
    }
  }
  std::size_t referential() const {
    return exact_match + match_ignoring_time + init_volume_cancel +
           best_order_execution + size_clipped + discarded;
  }
  double discard_rate() const {
    const std::size_t n = referential();
    return n == 0 ? 0.0 : static_cast<double>(discarded) / static_cast<double>(n);
  }
};

class GenerationContext {
 public:
  // `snapshot` is the L2 state before the first context message; `context`
  // must hold exactly config.n_messages consecutive messages whose book
  // images the replay will regenerate.
  GenerationContext(const s5::ModelConfig& config, const lob::L2Snapshot& snapshot,
                    std::span<const data::PreprocessedMessage> context,
                    std::uint64_t seed)
      : cfg_(config),
        sim_(lob::OrderBookL3::from_snapshot(snapshot)),
        rng_(util::derive_seed(seed, "generate")) {
    if (static_cast<int>(context.size()) != cfg_.n_messages)
      throw std::invalid_argument("context must hold exactly n messages");
    last_anchor_ = require_anchor();
    for (const auto& msg : context) {
      const lob::Ticks anchor = require_anchor();
      msgs_.push_back(tok::encode(msg));
      images_.push_back(sim_.export_volume_image(last_anchor_, cfg_.P));
      correct_and_apply(sim_, msg, anchor);
      last_anchor_ = anchor;
      last_time_ns_ = msg.time_ns;
    }
  }

  const lob::OrderBookL3& sim() const { return sim_; }
  std::int64_t last_time_ns() const { return last_time_ns_; }
  const std::vector<tok::EncodedMessage>& window_messages() const { return msgs_; }
  const std::vector<lob::VolumeImage>& window_books() const { return images_; }
  const CorrectionTally& tally() const { return tally_; }

  // Sample the next message given the current window; does not advance the
  // simulator. `cur_image` is the book state the new message will see.
  tok::EncodedMessage sample_message(const s5::SequenceModel& model,
                                     const lob::VolumeImage& cur_image) {
    const int n = cfg_.n_messages;
    const std::size_t w = tok::kTokensPerMessage;
    std::vector<tok::TokenId> tokens;
    tokens.reserve(static_cast<std::size_t>(n) * w);
    for (int i = 1; i < n; ++i)
      tokens.insert(tokens.end(), msgs_[static_cast<std::size_t>(i)].begin(),
                    msgs_[static_cast<std::size_t>(i)].end());
    const std::size_t base = tokens.size();
    tokens.insert(tokens.end(), w, tok::kHid);

    s5::RMat<float> books(n, cfg_.P + 1);
    for (int i = 1; i < n; ++i)
      books.row(i - 1) = s5::book_feature_row<float>(images_[static_cast<std::size_t>(i)],
                                                     cfg_.book_scale)
                             .transpose();
    books.row(n - 1) =
        s5::book_feature_row<float>(cur_image, cfg_.book_scale).transpose();

    auto sample_at = [&](int pos) {
      tokens[base + static_cast<std::size_t>(pos)] = tok::kMsk;
      auto logits = model.logits(tokens, books);
      auto mask = tok::validity_mask(
          std::span<const tok::TokenId>(tokens.data() + base,
                                        static_cast<std::size_t>(pos)),
          pos);
      tokens[base + static_cast<std::size_t>(pos)] = sample_token(logits, mask, pos);
    };

    for (int pos = 0; pos <= 8; ++pos) sample_at(pos);

    // materialize the arrival time from the sampled dt
    std::array<std::int64_t, 4> dtg{};
    for (std::size_t i = 0; i < 4; ++i)
      dtg[i] = static_cast<std::int64_t>(tokens[base + 5 + i] - tok::kTimeGroupLo);
    const std::int64_t dt = tok::detail::from_groups(dtg);
    const std::int64_t time =
        std::min<std::int64_t>(last_time_ns_ + dt, data::kMaxTimeNs);
    auto tg = tok::detail::digit_groups<5>(time);
    for (std::size_t i = 0; i < 5; ++i)
      tokens[base + 9 + i] = tok::detail::time_group_token(tg[i]);

    for (int pos = 14; pos <= 21; ++pos) sample_at(pos);

    tok::EncodedMessage out{};
    std::copy_n(tokens.begin() + static_cast<std::ptrdiff_t>(base), w, out.begin());
    return out;
  }

  // One loop iteration: sample, decode, correct-and-apply, slide the window.
  GenerationStep step(const s5::SequenceModel& model) {
    const lob::Ticks anchor = require_anchor();
    GenerationStep result;
    result.book = sim_.export_volume_image(last_anchor_, cfg_.P);

    auto enc = sample_message(model, result.book);
    result.message = tok::decode(enc);
    auto [outcome, trades] = correct_and_apply(sim_, result.message, anchor);
    result.outcome = outcome;
    result.trades = std::move(trades);
    tally_.add(outcome.action);

    // the corrected message (identical unless discarded) enters the window
    msgs_.erase(msgs_.begin());
    msgs_.push_back(enc);
    images_.erase(images_.begin());
    images_.push_back(result.book);
    last_anchor_ = anchor;
    last_time_ns_ = result.message.time_ns;
    return result;
  }

 private:
  lob::Ticks require_anchor() {
    auto a = sim_.mid_anchor_ticks();
    if (!a) throw lob::UndefinedMid();
    return *a;
  }

  tok::TokenId sample_token(const s5::RVec<float>& logits, const tok::FieldMask& mask,
                            int pos) {
    // candidate set: the syntactic mask minus message-level rejects (size 0)
    std::vector<tok::TokenId> candidates;
    if (mask.na_allowed) candidates.push_back(tok::kNa);
    if (mask.range_allowed) {
      tok::TokenId lo = mask.lo;
      if ((pos == 4 || pos == 16) && lo == tok::kSizeLo) ++lo;  // size >= 1
      for (tok::TokenId t = lo; t <= mask.hi; ++t) candidates.push_back(t);
    }
    // softmax over the candidates only, temperature 1, no truncation
    float max_logit = -std::numeric_limits<float>::infinity();
    for (auto t : candidates) max_logit = std::max(max_logit, logits(t));
    std::vector<double> weights(candidates.size());
    double total = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      weights[i] = std::exp(static_cast<double>(logits(candidates[i]) - max_logit));
      total += weights[i];
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng_);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      r -= weights[i];
      if (r <= 0.0) return candidates[i];
    }
    return candidates.back();
  }

  s5::ModelConfig cfg_;
  std::vector<tok::EncodedMessage> msgs_;   // rolling n messages
  std::vector<lob::VolumeImage> images_;    // rolling n book states
  lob::OrderBookL3 sim_;
  lob::Ticks last_anchor_{0};
  std::int64_t last_time_ns_{0};
  std::mt19937_64 rng_;
  CorrectionTally tally_;
};

struct GenerationResult {
  std::vector<GenerationStep> steps;
  CorrectionTally tally;
};

inline GenerationResult generate(const s5::SequenceModel& model,
                                 const lob::L2Snapshot& snapshot,
                                 std::span<const data::PreprocessedMessage> context,
                                 int steps, std::uint64_t seed) {
  GenerationContext ctx(model.config(), snapshot, context, seed);
  GenerationResult result;
  result.steps.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) result.steps.push_back(ctx.step(model));
  result.tally = ctx.tally();
  return result;
}

}  // namespace lobgen::gen
