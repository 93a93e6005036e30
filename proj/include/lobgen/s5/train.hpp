#pragma once

// Training data assembly and the optimization loop. A sample is a window of
// n consecutive encoded messages plus their aligned book states; one maskable
// position in the last message is replaced by MSK, everything after it by
// HID, and the model is trained to recover the original token.

#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "lobgen/s5/adam.hpp"
#include "lobgen/s5/model.hpp"
#include "lobgen/tok/codec.hpp"

namespace lobgen::s5 {

struct EncodedDay {
  std::vector<tok::EncodedMessage> tokens;
  std::vector<lob::VolumeImage> books;  // state before each message
};

struct Sample {
  std::vector<tok::TokenId> tokens;  // 22n, with MSK/HID applied
  RMat<float> books;                 // n x (P+1)
  tok::TokenId target{};
  int position{};  // masked position within the last message
};

struct TrainDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline RMat<float> book_window(const EncodedDay& day, std::size_t start,
                               const ModelConfig& cfg) {
  RMat<float> books(cfg.n_messages, cfg.P + 1);
  for (int i = 0; i < cfg.n_messages; ++i)
    books.row(i) =
        book_feature_row<float>(day.books[start + i], cfg.book_scale).transpose();
  return books;
}

// Window tokens without masking, flattened message-major.
inline std::vector<tok::TokenId> window_tokens(const EncodedDay& day, std::size_t start,
                                               const ModelConfig& cfg) {
  std::vector<tok::TokenId> out;
  out.reserve(static_cast<std::size_t>(cfg.msg_seq_len()));
  for (int i = 0; i < cfg.n_messages; ++i) {
    const auto& msg = day.tokens[start + i];
    out.insert(out.end(), msg.begin(), msg.end());
  }
  return out;
}

inline Sample make_sample(const EncodedDay& day, std::size_t start,
                          const ModelConfig& cfg, std::mt19937_64& rng) {
  Sample s;
  s.tokens = window_tokens(day, start, cfg);
  s.books = book_window(day, start, cfg);

  const auto& positions = tok::maskable_positions();
  std::uniform_int_distribution<std::size_t> pick(0, positions.size() - 1);
  s.position = positions[pick(rng)];
  const std::size_t base =
      static_cast<std::size_t>(cfg.n_messages - 1) * tok::kTokensPerMessage;
  s.target = s.tokens[base + static_cast<std::size_t>(s.position)];
  s.tokens[base + static_cast<std::size_t>(s.position)] = tok::kMsk;
  for (int p = s.position + 1; p < static_cast<int>(tok::kTokensPerMessage); ++p)
    s.tokens[base + static_cast<std::size_t>(p)] = tok::kHid;
  return s;
}

struct TrainConfig {
  int epochs{3};
  int batch_size{16};
  int stride{0};  // window stride; 0 means n_messages
  std::uint64_t seed{1};
  AdamConfig adam{};
  int log_every{10};

  int effective_stride(const ModelConfig& m) const {
    return stride > 0 ? stride : m.n_messages;
  }
};

struct TrainLogEntry {
  int epoch{};
  long step{};
  double train_loss{};
  double grad_norm{};
};

struct TrainResult {
  std::vector<TrainLogEntry> log;
  std::vector<double> epoch_val_loss;
  long steps{};
};

// Mean loss over fixed (skip 0) windows; no gradient.
template <class T>
double evaluate_loss(const S5ModelT<T>& model, const std::vector<EncodedDay>& days,
                     std::uint64_t seed) {
  const auto& cfg = model.config;
  std::mt19937_64 rng(util::derive_seed(seed, "val"));
  double total = 0.0;
  std::size_t count = 0;
  const std::size_t n = static_cast<std::size_t>(cfg.n_messages);
  for (const auto& day : days) {
    if (day.tokens.size() < n) continue;
    for (std::size_t start = 0; start + n <= day.tokens.size();
         start += static_cast<std::size_t>(cfg.n_messages)) {
      auto s = make_sample(day, start, cfg, rng);
      auto logits = model.forward(
          std::span<const tok::TokenId>(s.tokens.data(), s.tokens.size()), s.books);
      total += static_cast<double>(S5ModelT<T>::cross_entropy(logits, s.target));
      ++count;
    }
  }
  return count > 0 ? total / static_cast<double>(count) : 0.0;
}

template <class T>
TrainResult train(S5ModelT<T>& model, const std::vector<EncodedDay>& train_days,
                  const std::vector<EncodedDay>& val_days, const TrainConfig& cfg,
                  Adam<T>* optimizer = nullptr,
                  const std::function<void(const TrainLogEntry&)>& on_log = {}) {
  const auto& mcfg = model.config;
  Adam<T> local_opt(cfg.adam);
  Adam<T>& opt = optimizer ? *optimizer : local_opt;
  TrainResult result;
  auto grads = S5ModelT<T>::zero_like(model);
  const std::size_t n = static_cast<std::size_t>(mcfg.n_messages);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(util::derive_seed(cfg.seed, "epoch", epoch));
    // each epoch sees a different phase of the day
    std::vector<std::pair<std::size_t, std::size_t>> starts;  // (day, offset)
    for (std::size_t d = 0; d < train_days.size(); ++d) {
      const auto& day = train_days[d];
      if (day.tokens.size() < n) continue;
      std::uniform_int_distribution<std::size_t> skip(0, n - 1);
      for (std::size_t s = skip(rng); s + n <= day.tokens.size();
           s += static_cast<std::size_t>(cfg.effective_stride(mcfg)))
        starts.emplace_back(d, s);
    }
    std::shuffle(starts.begin(), starts.end(), rng);

    for (std::size_t b = 0; b < starts.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(starts.size(), b + cfg.batch_size);
      auto zero = [](const std::string&, auto& t) { t.setZero(); };
      grads.visit(zero, zero);
      double batch_loss = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        auto sample = make_sample(train_days[starts[i].first], starts[i].second, mcfg, rng);
        typename S5ModelT<T>::Cache cache;
        model.forward(
            std::span<const tok::TokenId>(sample.tokens.data(), sample.tokens.size()),
            sample.books, cache);
        batch_loss += static_cast<double>(model.backward(cache, sample.target, grads));
      }
      const double inv = 1.0 / static_cast<double>(e - b);
      auto scale = [&](const std::string&, auto& t) { t *= static_cast<T>(inv); };
      grads.visit(scale, scale);
      batch_loss *= inv;
      if (!std::isfinite(batch_loss))
        throw TrainDiverged("non-finite loss at step " + std::to_string(result.steps));

      const double gnorm = opt.step(model, grads);
      ++result.steps;
      if (cfg.log_every > 0 && result.steps % cfg.log_every == 0) {
        TrainLogEntry entry{epoch, result.steps, batch_loss, gnorm};
        result.log.push_back(entry);
        if (on_log) on_log(entry);
      }
    }
    result.epoch_val_loss.push_back(
        evaluate_loss(model, val_days.empty() ? train_days : val_days, cfg.seed));
  }
  return result;
}

}  // namespace lobgen::s5
