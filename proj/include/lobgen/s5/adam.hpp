#pragma once

// Adam with global-norm gradient clipping. Complex tensors are treated as
// interleaved real pairs, so real and imaginary parts carry independent
// moment estimates.

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "lobgen/s5/model.hpp"

namespace lobgen::s5 {

namespace detail {

// flattened real view of a parameter tensor
template <class T, class Tensor>
std::pair<T*, std::size_t> real_view(Tensor& t) {
  using Scalar = typename Tensor::Scalar;
  if constexpr (std::is_same_v<Scalar, std::complex<T>>) {
    return {reinterpret_cast<T*>(t.data()), 2 * static_cast<std::size_t>(t.size())};
  } else {
    return {t.data(), static_cast<std::size_t>(t.size())};
  }
}

}  // namespace detail

struct AdamConfig {
  double lr{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  double clip_norm{1.0};  // <= 0 disables clipping
};

template <class T>
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  long step_count() const { return step_; }

  // returns the pre-clip global gradient norm
  double step(S5ModelT<T>& params, S5ModelT<T>& grads) {
    double sq_norm = 0.0;
    for_each_pair(params, grads, [&](const std::string&, T*, T* g, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i)
        sq_norm += static_cast<double>(g[i]) * static_cast<double>(g[i]);
    });
    const double norm = std::sqrt(sq_norm);
    double scale = 1.0;
    if (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm) scale = cfg_.clip_norm / norm;

    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
    for_each_pair(params, grads,
                  [&](const std::string& name, T* p, T* g, std::size_t n) {
                    auto& st = state_[name];
                    if (st.m.size() != n) {
                      st.m.assign(n, 0.0);
                      st.v.assign(n, 0.0);
                    }
                    for (std::size_t i = 0; i < n; ++i) {
                      const double gi = static_cast<double>(g[i]) * scale;
                      st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * gi;
                      st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * gi * gi;
                      const double mhat = st.m[i] / bc1;
                      const double vhat = st.v[i] / bc2;
                      p[i] = static_cast<T>(static_cast<double>(p[i]) -
                                            cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
                    }
                  });
    return norm;
  }

 private:
  struct Moments {
    std::vector<double> m, v;
  };

  template <class F>
  static void for_each_pair(S5ModelT<T>& params, S5ModelT<T>& grads, F&& f) {
    // collect grad views first; visitation order is fixed
    std::vector<std::pair<T*, std::size_t>> gviews;
    auto collect = [&](const std::string&, auto& tensor) {
      gviews.push_back(detail::real_view<T>(tensor));
    };
    grads.visit(collect, collect);
    std::size_t idx = 0;
    auto apply = [&](const std::string& name, auto& tensor) {
      auto [p, n] = detail::real_view<T>(tensor);
      f(name, p, gviews[idx].first, n);
      ++idx;
    };
    params.visit(apply, apply);
  }

  AdamConfig cfg_;
  long step_{0};
  std::unordered_map<std::string, Moments> state_;
};

}  // namespace lobgen::s5
