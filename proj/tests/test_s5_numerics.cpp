#include <catch2/catch_amalgamated.hpp>
#include <complex>
#include <random>

#include "lobgen/s5/layers.hpp"
#include "lobgen/s5/scan.hpp"

using namespace lobgen::s5;

namespace {

template <class T>
CMat<T> random_cmat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  CMat<T> m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      m(i, j) = std::complex<T>(static_cast<T>(d(rng)), static_cast<T>(d(rng)));
  return m;
}

template <class T>
RMat<T> random_rmat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  RMat<T> m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = static_cast<T>(d(rng));
  return m;
}

// stable decay factors so long scans do not overflow
template <class T>
CVec<T> random_decay(Eigen::Index m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.2, 0.99);
  std::uniform_real_distribution<double> arg(-3.0, 3.0);
  CVec<T> a(m);
  for (Eigen::Index i = 0; i < m; ++i)
    a(i) = std::polar<T>(static_cast<T>(mag(rng)), static_cast<T>(arg(rng)));
  return a;
}

template <class T>
S5Layer<T> random_layer(int H, int M, std::mt19937_64& rng) {
  S5Layer<T> layer;
  std::uniform_real_distribution<double> re(-1.5, -0.2), im(-2.0, 2.0);
  layer.lambda.resize(M);
  for (int i = 0; i < M; ++i)
    layer.lambda(i) = std::complex<T>(static_cast<T>(re(rng)), static_cast<T>(im(rng)));
  layer.B = random_cmat<T>(M, H, rng);
  layer.C = random_cmat<T>(H, M, rng);
  layer.D = random_rmat<T>(H, 1, rng).col(0).array();
  std::uniform_real_distribution<double> ldt(std::log(0.01), std::log(0.5));
  layer.log_dt.resize(M);
  for (int i = 0; i < M; ++i) layer.log_dt(i) = static_cast<T>(ldt(rng));
  return layer;
}

template <class T>
S5Block<T> random_block(int H, int M, std::mt19937_64& rng) {
  S5Block<T> blk;
  blk.ssm = random_layer<T>(H, M, rng);
  blk.ln_gamma = random_rmat<T>(H, 1, rng).col(0).array() * T(0.2) + T(1);
  blk.ln_beta = random_rmat<T>(H, 1, rng).col(0).array() * T(0.2);
  blk.gate.W = random_rmat<T>(H, H, rng) * T(0.4);
  blk.gate.b = random_rmat<T>(H, 1, rng) * T(0.1);
  return blk;
}

}  // namespace

TEST_CASE("parallel scan matches the sequential recurrence") {
  std::mt19937_64 rng(42);
  SECTION("double precision over assorted lengths") {
    for (Eigen::Index L : {1, 2, 3, 7, 8, 9, 100, 1000, 2048}) {
      const Eigen::Index M = 6;
      CVec<double> a = random_decay<double>(M, rng);
      CMat<double> b = random_cmat<double>(L, M, rng);
      CMat<double> expected = b;
      linear_scan_sequential(a, expected);
      CMat<double> got = b;
      linear_scan_parallel(a, got, 8);
      INFO("L = " << L);
      REQUIRE((got - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SECTION("single precision") {
    for (Eigen::Index L : {3, 250, 2048}) {
      const Eigen::Index M = 8;
      CVec<float> a = random_decay<float>(M, rng);
      CMat<float> b = random_cmat<float>(L, M, rng) * 0.5f;
      CMat<float> expected = b;
      linear_scan_sequential(a, expected);
      CMat<float> got = b;
      linear_scan_parallel(a, got, 8);
      INFO("L = " << L);
      REQUIRE((got - expected).cwiseAbs().maxCoeff() < 1e-4f);
    }
  }
  SECTION("result is independent of the chunk count") {
    const Eigen::Index L = 501, M = 4;
    CVec<double> a = random_decay<double>(M, rng);
    CMat<double> b = random_cmat<double>(L, M, rng);
    CMat<double> ref = b;
    linear_scan_parallel(a, ref, 8);
    for (int chunks : {1, 2, 3, 16, 64}) {
      CMat<double> got = b;
      linear_scan_parallel(a, got, chunks);
      REQUIRE((got - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("zero-order-hold discretization") {
  SECTION("lambda = -1, dt = 0.1 gives lambda_bar = exp(-0.1)") {
    CVec<double> lambda(1);
    lambda(0) = std::complex<double>(-1.0, 0.0);
    CMat<double> B = CMat<double>::Ones(1, 1);
    RVec<double> log_dt(1);
    log_dt(0) = std::log(0.1);
    auto d = discretize_zoh<double>(lambda, B, log_dt);
    CHECK(d.lambda_bar(0).real() == Catch::Approx(0.904837418).epsilon(1e-8));
    CHECK(d.lambda_bar(0).imag() == Catch::Approx(0.0).margin(1e-12));
    // B_bar = (exp(-0.1) - 1) / (-1) = 1 - exp(-0.1)
    CHECK(d.b_bar(0, 0).real() == Catch::Approx(1.0 - std::exp(-0.1)).epsilon(1e-8));
  }
  SECTION("discrete recurrence tracks x' = -x + u exactly for piecewise-constant u") {
    // exact solution over one step: x(t+dt) = e^{-dt} x(t) + (1 - e^{-dt}) u
    CVec<double> lambda(1);
    lambda(0) = std::complex<double>(-1.0, 0.0);
    CMat<double> B = CMat<double>::Ones(1, 1);
    RVec<double> log_dt(1);
    log_dt(0) = std::log(0.1);
    auto d = discretize_zoh<double>(lambda, B, log_dt);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    double x_exact = 0.0;
    std::complex<double> x_disc = 0.0;
    const double dt = 0.1;
    for (int k = 0; k < 100; ++k) {
      const double u = ud(rng);
      x_exact = std::exp(-dt) * x_exact + (1.0 - std::exp(-dt)) * u;
      x_disc = d.lambda_bar(0) * x_disc + d.b_bar(0, 0) * u;
      REQUIRE(std::abs(x_disc.real() - x_exact) < 1e-6);
      REQUIRE(std::abs(x_disc.imag()) < 1e-12);
    }
  }
  SECTION("small-step limit: lambda_bar -> 1 + lambda dt, B_bar -> dt B") {
    CVec<double> lambda(1);
    lambda(0) = std::complex<double>(-0.7, 2.3);
    CMat<double> B(1, 1);
    B(0, 0) = std::complex<double>(0.4, -1.1);
    RVec<double> log_dt(1);
    const double dt = 1e-7;
    log_dt(0) = std::log(dt);
    auto d = discretize_zoh<double>(lambda, B, log_dt);
    CHECK(std::abs(d.lambda_bar(0) - (1.0 + lambda(0) * dt)) < 1e-12);
    CHECK(std::abs(d.b_bar(0, 0) - dt * B(0, 0)) < 1e-12);
  }
}

TEST_CASE("impulse response has the closed form Re(C lambda_bar^k B_bar)") {
  std::mt19937_64 rng(17);
  const int H = 3, M = 5, L = 40;
  auto layer = random_layer<double>(H, M, rng);
  layer.D.setZero();  // isolate the state path

  RMat<double> u = RMat<double>::Zero(L, H);
  u(0, 1) = 1.0;  // impulse on channel 1
  typename S5Layer<double>::Cache cache;
  RMat<double> y = layer.forward(u, cache);

  auto d = discretize_zoh<double>(layer.lambda, layer.B, layer.log_dt);
  CVec<double> pow_a = CVec<double>::Ones(M);
  for (int k = 0; k < L; ++k) {
    for (int h = 0; h < H; ++h) {
      std::complex<double> expect = 0.0;
      for (int m = 0; m < M; ++m)
        expect += layer.C(h, m) * pow_a(m) * d.b_bar(m, 1);
      REQUIRE(y(k, h) == Catch::Approx(expect.real()).margin(1e-9));
    }
    pow_a *= d.lambda_bar;
  }
}

namespace {

// scalar probe loss: L = sum(y (.) w) with fixed random weights
template <class Layer>
double probe_loss(const Layer& layer, const RMat<double>& u, const RMat<double>& w) {
  typename Layer::Cache cache;
  RMat<double> y = const_cast<Layer&>(layer).forward(u, cache);
  return (y.array() * w.array()).sum();
}

struct GradPair {
  double analytic;
  double numeric;
};

void require_close(const GradPair& g, const char* what, Eigen::Index i) {
  const double scale = std::max({std::abs(g.analytic), std::abs(g.numeric), 1e-4});
  INFO(what << "[" << i << "] analytic " << g.analytic << " numeric " << g.numeric);
  REQUIRE(std::abs(g.analytic - g.numeric) / scale < 1e-3);
}

}  // namespace

TEST_CASE("S5 layer gradients match central differences") {
  std::mt19937_64 rng(23);
  const int H = 4, M = 4, L = 6;
  auto layer = random_layer<double>(H, M, rng);
  RMat<double> u = random_rmat<double>(L, H, rng);
  RMat<double> w = random_rmat<double>(L, H, rng);
  const double eps = 1e-5;

  typename S5Layer<double>::Cache cache;
  RMat<double> y = layer.forward(u, cache);
  S5Layer<double> grad;
  grad.init_zero_like(layer);
  RMat<double> gu = layer.backward(w, cache, grad);

  SECTION("input gradient") {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      RMat<double> up = u, um = u;
      up(i) += eps;
      um(i) -= eps;
      GradPair g{gu(i), (probe_loss(layer, up, w) - probe_loss(layer, um, w)) / (2 * eps)};
      require_close(g, "u", i);
    }
  }
  SECTION("complex parameters, real and imaginary parts") {
    auto check_complex = [&](auto member, const char* name) {
      auto& tensor = layer.*member;
      auto& gtensor = grad.*member;
      for (Eigen::Index i = 0; i < tensor.size(); ++i) {
        for (int part = 0; part < 2; ++part) {
          auto perturbed = layer;
          auto& pt = (perturbed.*member)(i);
          std::complex<double> delta =
              part == 0 ? std::complex<double>(eps, 0) : std::complex<double>(0, eps);
          pt += delta;
          const double lp = probe_loss(perturbed, u, w);
          pt -= 2.0 * delta;
          const double lm = probe_loss(perturbed, u, w);
          const double numeric = (lp - lm) / (2 * eps);
          const double analytic = part == 0 ? gtensor(i).real() : gtensor(i).imag();
          require_close({analytic, numeric}, name, i);
        }
      }
    };
    check_complex(&S5Layer<double>::lambda, "lambda");
    check_complex(&S5Layer<double>::B, "B");
    check_complex(&S5Layer<double>::C, "C");
  }
  SECTION("real parameters") {
    for (Eigen::Index i = 0; i < layer.D.size(); ++i) {
      auto perturbed = layer;
      perturbed.D(i) += eps;
      const double lp = probe_loss(perturbed, u, w);
      perturbed.D(i) -= 2 * eps;
      const double lm = probe_loss(perturbed, u, w);
      require_close({grad.D(i), (lp - lm) / (2 * eps)}, "D", i);
    }
    for (Eigen::Index i = 0; i < layer.log_dt.size(); ++i) {
      auto perturbed = layer;
      perturbed.log_dt(i) += eps;
      const double lp = probe_loss(perturbed, u, w);
      perturbed.log_dt(i) -= 2 * eps;
      const double lm = probe_loss(perturbed, u, w);
      require_close({grad.log_dt(i), (lp - lm) / (2 * eps)}, "log_dt", i);
    }
  }
}

TEST_CASE("S5 block gradients match central differences") {
  std::mt19937_64 rng(31);
  const int H = 4, M = 3, L = 5;
  auto blk = random_block<double>(H, M, rng);
  RMat<double> u = random_rmat<double>(L, H, rng);
  RMat<double> w = random_rmat<double>(L, H, rng);
  const double eps = 1e-5;

  typename S5Block<double>::Cache cache;
  blk.forward(u, cache);
  S5Block<double> grad;
  grad.init_zero_like(blk);
  RMat<double> gu = blk.backward(w, cache, grad);

  SECTION("input gradient through residual, norm, ssm and gate") {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      RMat<double> up = u, um = u;
      up(i) += eps;
      um(i) -= eps;
      require_close(
          {gu(i), (probe_loss(blk, up, w) - probe_loss(blk, um, w)) / (2 * eps)}, "u", i);
    }
  }
  SECTION("layer-norm scale and shift") {
    for (Eigen::Index i = 0; i < blk.ln_gamma.size(); ++i) {
      auto p = blk;
      p.ln_gamma(i) += eps;
      const double lp = probe_loss(p, u, w);
      p.ln_gamma(i) -= 2 * eps;
      const double lm = probe_loss(p, u, w);
      require_close({grad.ln_gamma(i), (lp - lm) / (2 * eps)}, "ln_gamma", i);
    }
    for (Eigen::Index i = 0; i < blk.ln_beta.size(); ++i) {
      auto p = blk;
      p.ln_beta(i) += eps;
      const double lp = probe_loss(p, u, w);
      p.ln_beta(i) -= 2 * eps;
      const double lm = probe_loss(p, u, w);
      require_close({grad.ln_beta(i), (lp - lm) / (2 * eps)}, "ln_beta", i);
    }
  }
  SECTION("gate weights") {
    for (Eigen::Index i = 0; i < blk.gate.W.size(); ++i) {
      auto p = blk;
      p.gate.W(i) += eps;
      const double lp = probe_loss(p, u, w);
      p.gate.W(i) -= 2 * eps;
      const double lm = probe_loss(p, u, w);
      require_close({grad.gate.W(i), (lp - lm) / (2 * eps)}, "gate.W", i);
    }
  }
  SECTION("ssm lambda inside the block") {
    for (Eigen::Index i = 0; i < blk.ssm.lambda.size(); ++i) {
      for (int part = 0; part < 2; ++part) {
        auto p = blk;
        std::complex<double> delta =
            part == 0 ? std::complex<double>(eps, 0) : std::complex<double>(0, eps);
        p.ssm.lambda(i) += delta;
        const double lp = probe_loss(p, u, w);
        p.ssm.lambda(i) -= 2.0 * delta;
        const double lm = probe_loss(p, u, w);
        const double analytic =
            part == 0 ? grad.ssm.lambda(i).real() : grad.ssm.lambda(i).imag();
        require_close({analytic, (lp - lm) / (2 * eps)}, "ssm.lambda", i);
      }
    }
  }
}
