#pragma once

// Diagonal linear recurrence x_k = a (.) x_{k-1} + b_k, evaluated either by
// the plain sequential loop or by an associative (chunked) scan, plus the
// zero-order-hold discretization of the continuous diagonal system.

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace lobgen::s5 {

template <class T>
using CVec = Eigen::Array<std::complex<T>, Eigen::Dynamic, 1>;
template <class T>
using RVec = Eigen::Array<T, Eigen::Dynamic, 1>;
template <class T>
using CMat = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using RMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// In-place: row k of `b` becomes the state x_k.
template <class T>
void linear_scan_sequential(const CVec<T>& a, CMat<T>& b) {
  const Eigen::Index L = b.rows();
  for (Eigen::Index k = 1; k < L; ++k)
    b.row(k).array() += a.transpose() * b.row(k - 1).array();
}

// Chunked associative scan: per-chunk local scans, a scan over chunk
// summaries, then carry application. The chunk count is fixed so results
// are bit-identical regardless of execution order; equal to the sequential
// recurrence up to floating-point reassociation.
template <class T>
void linear_scan_parallel(const CVec<T>& a, CMat<T>& b, int chunks = 8) {
  const Eigen::Index L = b.rows();
  const Eigen::Index M = b.cols();
  if (L <= 1 || chunks <= 1 || L < chunks) {
    linear_scan_sequential(a, b);
    return;
  }
  const Eigen::Index chunk_len = (L + chunks - 1) / chunks;
  const int n_chunks = static_cast<int>((L + chunk_len - 1) / chunk_len);

  // local scans (independent, order-free)
  for (int c = 0; c < n_chunks; ++c) {
    const Eigen::Index s = c * chunk_len;
    const Eigen::Index e = std::min(L, s + chunk_len);
    for (Eigen::Index k = s + 1; k < e; ++k)
      b.row(k).array() += a.transpose() * b.row(k - 1).array();
  }

  // scan over chunk summaries: carry_c = state entering chunk c
  std::vector<CVec<T>> a_pows(static_cast<std::size_t>(chunk_len) + 1);
  a_pows[0] = CVec<T>::Ones(M);
  for (std::size_t p = 1; p < a_pows.size(); ++p) a_pows[p] = a_pows[p - 1] * a;

  CVec<T> carry = CVec<T>::Zero(M);
  for (int c = 0; c < n_chunks; ++c) {
    const Eigen::Index s = c * chunk_len;
    const Eigen::Index e = std::min(L, s + chunk_len);
    if (c > 0) {
      // apply the carry to every row of this chunk
      for (Eigen::Index k = s; k < e; ++k)
        b.row(k).array() +=
            a_pows[static_cast<std::size_t>(k - s + 1)].transpose() *
            carry.transpose();
    }
    carry = b.row(e - 1).transpose().array();
  }
}

template <class T>
struct Discretized {
  CVec<T> lambda_bar;
  CMat<T> b_bar;
};

// ZOH: lambda_bar = exp(lambda * dt); B_bar = ((lambda_bar - 1) / lambda) B
// rowwise, dt = exp(log_dt) per state.
template <class T>
Discretized<T> discretize_zoh(const CVec<T>& lambda, const CMat<T>& B,
                              const RVec<T>& log_dt) {
  Discretized<T> out;
  RVec<T> dt = log_dt.exp();
  out.lambda_bar = (lambda * dt.template cast<std::complex<T>>()).exp();
  CVec<T> phi = (out.lambda_bar - std::complex<T>(1)) / lambda;
  out.b_bar = phi.matrix().asDiagonal() * B;
  return out;
}

}  // namespace lobgen::s5
