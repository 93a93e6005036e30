#pragma once

// Network building blocks with explicit forward caches and hand-derived
// backward passes: dense maps, the diagonal S5 layer (complex parameters,
// real loss; adjoints follow the conjugate convention), and the S5 block
// wrapper (pre-layer-norm, SSM, GLU-style gate, residual).

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "lobgen/s5/scan.hpp"

namespace lobgen::s5 {

template <class T>
T gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x / std::sqrt(T(2))));
}
template <class T>
T gelu_grad(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x / std::sqrt(T(2))));
  const T pdf = std::exp(T(-0.5) * x * x) / std::sqrt(T(2) * static_cast<T>(M_PI));
  return cdf + x * pdf;
}
template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// ---------------------------------------------------------------------------
// Dense: y = x W^T + b, applied rowwise to an (L x in) matrix.

template <class T>
struct Dense {
  RMat<T> W;  // out x in
  RMat<T> b;  // out x 1

  struct Cache {
    RMat<T> x;
  };

  RMat<T> forward(const RMat<T>& x, Cache& cache) const {
    cache.x = x;
    return (x * W.transpose()).rowwise() + b.col(0).transpose();
  }

  RMat<T> backward(const RMat<T>& gy, const Cache& cache, Dense& grad) const {
    grad.W += gy.transpose() * cache.x;
    grad.b.col(0) += gy.colwise().sum().transpose();
    return gy * W;
  }

  void init_zero_like(const Dense& p) {
    W = RMat<T>::Zero(p.W.rows(), p.W.cols());
    b = RMat<T>::Zero(p.b.rows(), 1);
  }
};

// ---------------------------------------------------------------------------
// S5 layer: ZOH-discretized diagonal SSM over the sequence axis.
// y_k = Re(C x_k) + D (.) u_k,  x_k = lambda_bar (.) x_{k-1} + B_bar u_k.

template <class T>
struct S5Layer {
  CVec<T> lambda;  // M
  CMat<T> B;       // M x H
  CMat<T> C;       // H x M
  RVec<T> D;       // H
  RVec<T> log_dt;  // M

  struct Cache {
    RMat<T> u;           // L x H
    CMat<T> x;           // L x M states
    CVec<T> lambda_bar;  // M
    CMat<T> b_bar;       // M x H
  };

  Eigen::Index state_dim() const { return lambda.size(); }
  Eigen::Index width() const { return D.size(); }

  RMat<T> forward(const RMat<T>& u, Cache& cache, int scan_chunks = 8) const {
    auto disc = discretize_zoh<T>(lambda, B, log_dt);
    cache.u = u;
    cache.lambda_bar = disc.lambda_bar;
    cache.b_bar = disc.b_bar;
    // b_k = B_bar u_k, rows of (L x M)
    cache.x = u.template cast<std::complex<T>>() * disc.b_bar.transpose();
    linear_scan_parallel<T>(disc.lambda_bar, cache.x, scan_chunks);
    RMat<T> y = (cache.x * C.transpose()).real();
    y.array() += u.array().rowwise() * D.transpose();
    return y;
  }

  RMat<T> backward(const RMat<T>& gy, const Cache& cache, S5Layer& grad,
                   int scan_chunks = 8) const {
    const Eigen::Index L = gy.rows();
    // feedthrough
    grad.D += (gy.array() * cache.u.array()).colwise().sum().transpose();
    RMat<T> gu = gy.array().rowwise() * D.transpose();

    // y = Re(C x): gX = gY conj(C); gC = gY^T conj(X)
    CMat<T> gx = gy.template cast<std::complex<T>>() * C.conjugate();
    grad.C += gy.transpose().template cast<std::complex<T>>() * cache.x.conjugate();

    // scan adjoint: s_k = gx_k + conj(a) s_{k+1}; a reversed linear scan
    CMat<T> s = gx.colwise().reverse().eval();
    CVec<T> a_conj = cache.lambda_bar.conjugate();
    linear_scan_parallel<T>(a_conj, s, scan_chunks);
    s = s.colwise().reverse().eval();

    // ga = sum_k s_k (.) conj(x_{k-1})
    CVec<T> g_lambda_bar = CVec<T>::Zero(state_dim());
    for (Eigen::Index k = 1; k < L; ++k)
      g_lambda_bar +=
          s.row(k).transpose().array() * cache.x.row(k - 1).conjugate().transpose().array();

    // b_k = B_bar u_k: gU += Re(S conj(B_bar)); gB_bar = S^T U
    gu += (s * cache.b_bar.conjugate()).real();
    CMat<T> g_b_bar = s.transpose() * cache.u.template cast<std::complex<T>>();

    // discretization chain
    RVec<T> dt = log_dt.exp();
    CVec<T> dtc = dt.template cast<std::complex<T>>();
    const CVec<T>& lb = cache.lambda_bar;
    CVec<T> phi = (lb - std::complex<T>(1)) / lambda;

    // B_bar = phi (.) rows of B
    CVec<T> g_phi = (g_b_bar.array() * B.conjugate().array()).rowwise().sum();
    grad.B += (phi.conjugate().matrix().asDiagonal() * g_b_bar).eval();

    // lambda_bar = exp(lambda dt)
    CVec<T> g_lambda = (dtc * lb).conjugate() * g_lambda_bar;
    RVec<T> g_dt = ((lambda * lb).conjugate() * g_lambda_bar).real();
    // phi = (exp(lambda dt) - 1) / lambda
    CVec<T> dphi_dlambda = (dtc * lb * lambda - (lb - std::complex<T>(1))) /
                           (lambda * lambda);
    g_lambda += dphi_dlambda.conjugate() * g_phi;
    g_dt += (lb.conjugate() * g_phi).real();

    grad.lambda += g_lambda;
    grad.log_dt += dt * g_dt;
    return gu;
  }

  void init_zero_like(const S5Layer& p) {
    lambda = CVec<T>::Zero(p.lambda.size());
    B = CMat<T>::Zero(p.B.rows(), p.B.cols());
    C = CMat<T>::Zero(p.C.rows(), p.C.cols());
    D = RVec<T>::Zero(p.D.size());
    log_dt = RVec<T>::Zero(p.log_dt.size());
  }
};

// ---------------------------------------------------------------------------
// S5 block: out = x + gelu(y) (.) sigmoid(y Wg^T + bg), y = ssm(layernorm(x)).

template <class T>
struct S5Block {
  S5Layer<T> ssm;
  RVec<T> ln_gamma;  // H
  RVec<T> ln_beta;   // H
  Dense<T> gate;     // H -> H

  static constexpr T kLnEps = T(1e-5);

  struct Cache {
    RMat<T> x;       // input
    RMat<T> xhat;    // normalized pre-scale
    RVec<T> inv_std; // per-row 1/sqrt(var+eps)
    typename S5Layer<T>::Cache ssm_cache;
    RMat<T> y;       // ssm output
    typename Dense<T>::Cache gate_cache;
    RMat<T> gate_pre;  // y Wg^T + bg
  };

  RMat<T> forward(const RMat<T>& x, Cache& cache, int scan_chunks = 8) const {
    const Eigen::Index L = x.rows();
    const Eigen::Index H = x.cols();
    cache.x = x;
    cache.xhat.resize(L, H);
    cache.inv_std.resize(L);
    for (Eigen::Index r = 0; r < L; ++r) {
      T mean = x.row(r).mean();
      RVec<T> centered = x.row(r).transpose().array() - mean;
      T var = centered.square().mean();
      T inv_std = T(1) / std::sqrt(var + kLnEps);
      cache.inv_std(r) = inv_std;
      cache.xhat.row(r) = (centered * inv_std).transpose();
    }
    RMat<T> ln = cache.xhat.array().rowwise() * ln_gamma.transpose();
    ln.array().rowwise() += ln_beta.transpose();
    cache.y = ssm.forward(ln, cache.ssm_cache, scan_chunks);
    cache.gate_pre = gate.forward(cache.y, cache.gate_cache);
    RMat<T> z = cache.y.unaryExpr([](T v) { return gelu(v); }).array() *
                cache.gate_pre.unaryExpr([](T v) { return sigmoid(v); }).array();
    return x + z;
  }

  RMat<T> backward(const RMat<T>& gout, const Cache& cache, S5Block& grad,
                   int scan_chunks = 8) const {
    const Eigen::Index L = gout.rows();
    // z = gelu(y) (.) sigmoid(p), p = gate(y)
    RMat<T> sig = cache.gate_pre.unaryExpr([](T v) { return sigmoid(v); });
    RMat<T> gel = cache.y.unaryExpr([](T v) { return gelu(v); });
    RMat<T> gz = gout;  // residual: gout flows to both x and z
    RMat<T> gp = (gz.array() * gel.array() * sig.array() * (T(1) - sig.array()));
    RMat<T> gy = gz.array() * sig.array() *
                 cache.y.unaryExpr([](T v) { return gelu_grad(v); }).array();
    gy += gate.backward(gp, cache.gate_cache, grad.gate);

    RMat<T> gln = ssm.backward(gy, cache.ssm_cache, grad.ssm, scan_chunks);

    // layer norm backward
    grad.ln_gamma += (gln.array() * cache.xhat.array()).colwise().sum().transpose();
    grad.ln_beta += gln.colwise().sum().transpose().array();
    RMat<T> gx = gout;  // residual path
    const Eigen::Index H = gln.cols();
    for (Eigen::Index r = 0; r < L; ++r) {
      RVec<T> gxhat = gln.row(r).transpose().array() * ln_gamma;
      RVec<T> xhat = cache.xhat.row(r).transpose();
      T inv_std = cache.inv_std(r);
      T mean_g = gxhat.mean();
      T mean_gx = (gxhat * xhat).mean();
      gx.row(r) +=
          ((gxhat - mean_g - xhat * mean_gx) * inv_std).transpose().matrix();
    }
    return gx;
  }

  void init_zero_like(const S5Block& p) {
    ssm.init_zero_like(p.ssm);
    ln_gamma = RVec<T>::Zero(p.ln_gamma.size());
    ln_beta = RVec<T>::Zero(p.ln_beta.size());
    gate.init_zero_like(p.gate);
  }
};

}  // namespace lobgen::s5
