#pragma once

// Two-branch autoregressive token model: an embedded message-token branch
// and a continuous book-state branch, each a stack of S5 blocks, projected
// along the sequence axis to a common length, concatenated on the feature
// axis, run through a joint S5 stack, mean-pooled, and mapped to vocabulary
// logits.

#include <Eigen/Dense>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lobgen/lob/order_book.hpp"
#include "lobgen/s5/layers.hpp"
#include "lobgen/tok/vocabulary.hpp"
#include "lobgen/util/rng.hpp"

namespace lobgen::s5 {

struct ModelConfig {
  int n_messages{24};
  int tokens_per_message{22};
  int vocab_size{static_cast<int>(tok::kVocabSize)};
  int hidden{48};  // H
  int state{48};   // M
  int layers_msg{2};
  int layers_book{1};
  int layers_joint{2};
  int seq_len_joint{0};  // L; 0 means n_messages
  int P{32};
  double book_scale{1e-3};
  int scan_chunks{8};
  std::uint64_t seed{1};

  int msg_seq_len() const { return n_messages * tokens_per_message; }
  int joint_len() const { return seq_len_joint > 0 ? seq_len_joint : n_messages; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Full-scale preset (n=500, 11000-token windows, 6 S5 layers); not used by
// the test suites, which run the desk-scale default above.
inline ModelConfig full_scale_config() {
  ModelConfig cfg;
  cfg.n_messages = 500;
  cfg.hidden = 256;
  cfg.state = 256;
  cfg.layers_msg = 2;
  cfg.layers_book = 1;
  cfg.layers_joint = 3;
  cfg.P = 200;
  return cfg;
}

// Book state row fed to the model: mid change first, then P scaled volumes.
template <class T>
RVec<T> book_feature_row(const lob::VolumeImage& img, double scale) {
  RVec<T> row(img.vols.size() + 1);
  row(0) = static_cast<T>(img.mid_change_ticks);
  for (std::size_t i = 0; i < img.vols.size(); ++i)
    row(static_cast<Eigen::Index>(i) + 1) =
        static_cast<T>(static_cast<double>(img.vols[i]) * scale);
  return row;
}

template <class T>
struct S5ModelT {
  ModelConfig config;

  RMat<T> embedding;  // V x H
  std::vector<S5Block<T>> msg_blocks;
  std::vector<S5Block<T>> book_blocks;  // width P+1
  Dense<T> book_proj;                   // (P+1) -> H
  RMat<T> seq_proj_msg;                 // L x 22n
  RMat<T> seq_proj_book;                // L x n
  std::vector<S5Block<T>> joint_blocks;  // width 2H
  Dense<T> head;                         // 2H -> V

  struct Cache {
    std::vector<tok::TokenId> tokens;
    std::vector<typename S5Block<T>::Cache> msg_caches;
    std::vector<typename S5Block<T>::Cache> book_caches;
    typename Dense<T>::Cache book_proj_cache;
    RMat<T> msg_out;   // 22n x H, input to sequence projection
    RMat<T> book_out;  // n x H
    std::vector<typename S5Block<T>::Cache> joint_caches;
    RMat<T> joint_out;  // L x 2H
    typename Dense<T>::Cache head_cache;
    RVec<T> logits;
  };

  static S5ModelT random_init(const ModelConfig& cfg) {
    S5ModelT model;
    model.config = cfg;
    const int H = cfg.hidden;
    const int M = cfg.state;
    const int V = cfg.vocab_size;
    const int L = cfg.joint_len();
    const int Tm = cfg.msg_seq_len();
    const int W = cfg.P + 1;

    auto init_block = [&](S5Block<T>& blk, int width, std::uint64_t stream) {
      std::mt19937_64 rng(util::derive_seed(cfg.seed, "block", stream));
      std::normal_distribution<double> normal(0.0, 1.0);
      blk.ssm.lambda.resize(M);
      // diagonal approximation of the HiPPO matrix (S4D-Lin style)
      for (int m = 0; m < M; ++m)
        blk.ssm.lambda(m) = std::complex<T>(T(-0.5), static_cast<T>(M_PI * m));
      const double bscale = 1.0 / std::sqrt(static_cast<double>(width));
      const double cscale = 1.0 / std::sqrt(static_cast<double>(M));
      blk.ssm.B.resize(M, width);
      for (int m = 0; m < M; ++m)
        for (int h = 0; h < width; ++h)
          blk.ssm.B(m, h) = std::complex<T>(static_cast<T>(normal(rng) * bscale),
                                            static_cast<T>(normal(rng) * bscale));
      blk.ssm.C.resize(width, M);
      for (int h = 0; h < width; ++h)
        for (int m = 0; m < M; ++m)
          blk.ssm.C(h, m) = std::complex<T>(static_cast<T>(normal(rng) * cscale),
                                            static_cast<T>(normal(rng) * cscale));
      blk.ssm.D.resize(width);
      for (int h = 0; h < width; ++h) blk.ssm.D(h) = static_cast<T>(normal(rng));
      blk.ssm.log_dt.resize(M);
      std::uniform_real_distribution<double> udt(std::log(1e-3), std::log(1e-1));
      for (int m = 0; m < M; ++m) blk.ssm.log_dt(m) = static_cast<T>(udt(rng));
      blk.ln_gamma = RVec<T>::Ones(width);
      blk.ln_beta = RVec<T>::Zero(width);
      blk.gate.W.resize(width, width);
      const double gscale = 1.0 / std::sqrt(static_cast<double>(width));
      for (int i = 0; i < width; ++i)
        for (int j = 0; j < width; ++j)
          blk.gate.W(i, j) = static_cast<T>(normal(rng) * gscale);
      blk.gate.b = RMat<T>::Zero(width, 1);
    };

    std::uint64_t stream = 0;
    model.msg_blocks.resize(cfg.layers_msg);
    for (auto& b : model.msg_blocks) init_block(b, H, stream++);
    model.book_blocks.resize(cfg.layers_book);
    for (auto& b : model.book_blocks) init_block(b, W, stream++);
    model.joint_blocks.resize(cfg.layers_joint);
    for (auto& b : model.joint_blocks) init_block(b, 2 * H, stream++);

    std::mt19937_64 rng(util::derive_seed(cfg.seed, "linear", 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    auto fill = [&](RMat<T>& mat, Eigen::Index r, Eigen::Index c, double scale) {
      mat.resize(r, c);
      for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
          mat(i, j) = static_cast<T>(normal(rng) * scale);
    };
    fill(model.embedding, V, H, 1.0 / std::sqrt(static_cast<double>(H)));
    fill(model.book_proj.W, H, W, 1.0 / std::sqrt(static_cast<double>(W)));
    model.book_proj.b = RMat<T>::Zero(H, 1);
    fill(model.seq_proj_msg, L, Tm, 1.0 / std::sqrt(static_cast<double>(Tm)));
    fill(model.seq_proj_book, L, cfg.n_messages,
         1.0 / std::sqrt(static_cast<double>(cfg.n_messages)));
    fill(model.head.W, V, 2 * H, 1.0 / std::sqrt(static_cast<double>(2 * H)));
    model.head.b = RMat<T>::Zero(V, 1);
    return model;
  }

  static S5ModelT zero_like(const S5ModelT& p) {
    S5ModelT g;
    g.config = p.config;
    g.embedding = RMat<T>::Zero(p.embedding.rows(), p.embedding.cols());
    g.msg_blocks.resize(p.msg_blocks.size());
    for (std::size_t i = 0; i < p.msg_blocks.size(); ++i)
      g.msg_blocks[i].init_zero_like(p.msg_blocks[i]);
    g.book_blocks.resize(p.book_blocks.size());
    for (std::size_t i = 0; i < p.book_blocks.size(); ++i)
      g.book_blocks[i].init_zero_like(p.book_blocks[i]);
    g.book_proj.init_zero_like(p.book_proj);
    g.seq_proj_msg = RMat<T>::Zero(p.seq_proj_msg.rows(), p.seq_proj_msg.cols());
    g.seq_proj_book = RMat<T>::Zero(p.seq_proj_book.rows(), p.seq_proj_book.cols());
    g.joint_blocks.resize(p.joint_blocks.size());
    for (std::size_t i = 0; i < p.joint_blocks.size(); ++i)
      g.joint_blocks[i].init_zero_like(p.joint_blocks[i]);
    g.head.init_zero_like(p.head);
    return g;
  }

  // tokens: 22n ids; books: n x (P+1) feature rows.
  RVec<T> forward(std::span<const tok::TokenId> tokens, const RMat<T>& books,
                  Cache& cache) const {
    const int Tm = config.msg_seq_len();
    if (static_cast<int>(tokens.size()) != Tm)
      throw std::invalid_argument("token sequence length mismatch");
    if (books.rows() != config.n_messages || books.cols() != config.P + 1)
      throw std::invalid_argument("book sequence shape mismatch");

    cache.tokens.assign(tokens.begin(), tokens.end());
    RMat<T> xm(Tm, config.hidden);
    for (int i = 0; i < Tm; ++i) {
      if (tokens[i] >= static_cast<tok::TokenId>(config.vocab_size))
        throw std::invalid_argument("token id outside vocabulary");
      xm.row(i) = embedding.row(tokens[i]);
    }
    cache.msg_caches.resize(msg_blocks.size());
    for (std::size_t i = 0; i < msg_blocks.size(); ++i)
      xm = msg_blocks[i].forward(xm, cache.msg_caches[i], config.scan_chunks);
    cache.msg_out = xm;

    RMat<T> xb = books;
    cache.book_caches.resize(book_blocks.size());
    for (std::size_t i = 0; i < book_blocks.size(); ++i)
      xb = book_blocks[i].forward(xb, cache.book_caches[i], config.scan_chunks);
    xb = book_proj.forward(xb, cache.book_proj_cache);
    cache.book_out = xb;

    const int L = config.joint_len();
    RMat<T> joint(L, 2 * config.hidden);
    joint.leftCols(config.hidden) = seq_proj_msg * cache.msg_out;
    joint.rightCols(config.hidden) = seq_proj_book * cache.book_out;

    cache.joint_caches.resize(joint_blocks.size());
    for (std::size_t i = 0; i < joint_blocks.size(); ++i)
      joint = joint_blocks[i].forward(joint, cache.joint_caches[i],
                                      config.scan_chunks);
    cache.joint_out = joint;

    RMat<T> pooled = joint.colwise().mean();  // 1 x 2H
    RMat<T> logits_row = head.forward(pooled, cache.head_cache);
    cache.logits = logits_row.row(0).transpose();
    return cache.logits;
  }

  RVec<T> forward(std::span<const tok::TokenId> tokens, const RMat<T>& books) const {
    Cache cache;
    return forward(tokens, books, cache);
  }

  // Cross-entropy of `target` under softmax(logits); returns the loss and
  // fills dlogits with the softmax gradient.
  static T cross_entropy(const RVec<T>& logits, tok::TokenId target,
                         RVec<T>* dlogits = nullptr) {
    const T max_logit = logits.maxCoeff();
    RVec<T> shifted = logits - max_logit;
    RVec<T> expv = shifted.exp();
    const T sum = expv.sum();
    const T log_z = std::log(sum) + max_logit;
    const T loss = log_z - logits(static_cast<Eigen::Index>(target));
    if (dlogits) {
      *dlogits = expv / sum;
      (*dlogits)(static_cast<Eigen::Index>(target)) -= T(1);
    }
    return loss;
  }

  // Accumulates parameter gradients for one example into `grad` and returns
  // the loss.
  T backward(const Cache& cache, tok::TokenId target, S5ModelT& grad) const {
    RVec<T> dlogits;
    const T loss = cross_entropy(cache.logits, target, &dlogits);

    RMat<T> gy = dlogits.transpose().matrix();  // 1 x V
    RMat<T> gpooled = head.backward(gy, cache.head_cache, grad.head);  // 1 x 2H

    const int L = config.joint_len();
    RMat<T> gjoint =
        RMat<T>::Ones(L, 1) * (gpooled / static_cast<T>(L));  // mean-pool adjoint
    for (std::size_t i = joint_blocks.size(); i-- > 0;)
      gjoint = joint_blocks[i].backward(gjoint, cache.joint_caches[i],
                                        grad.joint_blocks[i], config.scan_chunks);

    RMat<T> g_am = gjoint.leftCols(config.hidden);
    RMat<T> g_ab = gjoint.rightCols(config.hidden);
    grad.seq_proj_msg += g_am * cache.msg_out.transpose();
    grad.seq_proj_book += g_ab * cache.book_out.transpose();
    RMat<T> gxm = seq_proj_msg.transpose() * g_am;
    RMat<T> gxb = seq_proj_book.transpose() * g_ab;

    gxb = book_proj.backward(gxb, cache.book_proj_cache, grad.book_proj);
    for (std::size_t i = book_blocks.size(); i-- > 0;)
      gxb = book_blocks[i].backward(gxb, cache.book_caches[i],
                                    grad.book_blocks[i], config.scan_chunks);

    for (std::size_t i = msg_blocks.size(); i-- > 0;)
      gxm = msg_blocks[i].backward(gxm, cache.msg_caches[i], grad.msg_blocks[i],
                                   config.scan_chunks);
    for (Eigen::Index i = 0; i < gxm.rows(); ++i)
      grad.embedding.row(cache.tokens[static_cast<std::size_t>(i)]) += gxm.row(i);
    return loss;
  }

  // Uniform visitation of every parameter tensor; `fr` receives real
  // tensors, `fc` complex ones. Order is fixed (checkpoints, Adam state).
  template <class FR, class FC>
  void visit(FR&& fr, FC&& fc) {
    fr("embedding", embedding);
    auto visit_block = [&](const std::string& prefix, S5Block<T>& blk) {
      fc(prefix + ".lambda", blk.ssm.lambda);
      fc(prefix + ".B", blk.ssm.B);
      fc(prefix + ".C", blk.ssm.C);
      fr(prefix + ".D", blk.ssm.D);
      fr(prefix + ".log_dt", blk.ssm.log_dt);
      fr(prefix + ".ln_gamma", blk.ln_gamma);
      fr(prefix + ".ln_beta", blk.ln_beta);
      fr(prefix + ".gate.W", blk.gate.W);
      fr(prefix + ".gate.b", blk.gate.b);
    };
    for (std::size_t i = 0; i < msg_blocks.size(); ++i)
      visit_block("msg." + std::to_string(i), msg_blocks[i]);
    for (std::size_t i = 0; i < book_blocks.size(); ++i)
      visit_block("book." + std::to_string(i), book_blocks[i]);
    fr("book_proj.W", book_proj.W);
    fr("book_proj.b", book_proj.b);
    fr("seq_proj_msg", seq_proj_msg);
    fr("seq_proj_book", seq_proj_book);
    for (std::size_t i = 0; i < joint_blocks.size(); ++i)
      visit_block("joint." + std::to_string(i), joint_blocks[i]);
    fr("head.W", head.W);
    fr("head.b", head.b);
  }

  std::size_t parameter_count() {
    std::size_t count = 0;
    visit([&](const std::string&, auto& m) { count += static_cast<std::size_t>(m.size()); },
          [&](const std::string&, auto& m) {
            count += 2 * static_cast<std::size_t>(m.size());
          });
    return count;
  }
};

using S5Model = S5ModelT<float>;

// Abstract token-scoring interface so generation and evaluation can run
// against stubs as well as the trained network.
struct SequenceModel {
  virtual ~SequenceModel() = default;
  virtual const ModelConfig& config() const = 0;
  virtual RVec<float> logits(std::span<const tok::TokenId> tokens,
                             const RMat<float>& books) const = 0;
};

struct S5SequenceModel final : SequenceModel {
  const S5Model* net;
  explicit S5SequenceModel(const S5Model& m) : net(&m) {}
  const ModelConfig& config() const override { return net->config; }
  RVec<float> logits(std::span<const tok::TokenId> tokens,
                     const RMat<float>& books) const override {
    return net->forward(tokens, books);
  }
};

}  // namespace lobgen::s5
