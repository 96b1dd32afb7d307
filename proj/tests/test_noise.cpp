#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <random>

#include "tenprop/noise.hpp"

using namespace tenprop;
using namespace tenprop::noise;

namespace {

// closed forms for J(w) = s * w * exp(-w/wc)
double ohmic_hight_c(double t, double beta, double wc, double s) {
  return s * wc / (beta * (1.0 + wc * wc * t * t));
}
double ohmic_response(double t, double wc, double s) {
  const double u = 1.0 + wc * wc * t * t;
  return -2.0 * s * t * wc * wc * wc / (u * u);
}

double riemann(const std::function<double(double)>& f, double wmax, double dw) {
  double acc = 0;
  const long n = (long)(wmax / dw);
  for (long i = 0; i < n; ++i) acc += f((i + 0.5) * dw) * dw;
  return acc;
}

template <typename F>
cplx gk(const F& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
             [&](double u) { return f(u).real(); }, a, b, 15, 1e-14) +
         cplx(0, 1) * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                          [&](double u) { return f(u).imag(); }, a, b, 15, 1e-14);
}

// independent cell oracle: int_0^tau int_0^tau f(d*tau + x - y) dx dy reduced to 1D
template <typename F>
cplx cell_oracle(const F& f, double tau, long d) {
  auto g = [&](double v) -> cplx { return (tau - std::abs(v)) * f((double)d * tau + v); };
  return gk(g, -tau, 0.0) + gk(g, 0.0, tau);
}

}  // namespace

TEST_CASE("classical high-temperature covariance matches the Lorentzian closed form") {
  CorrelationSpec spec;
  spec.mode = CorrelationSpec::ExtrinsicHighT;
  spec.beta = 1.0;
  spec.j = ohmic(1.0);
  CHECK(correlation_function(spec, 0.0).real() == doctest::Approx(1.0).epsilon(1e-9));
  for (double t : {0.1, 0.7, 1.0, 3.0, 9.0})
    CHECK(correlation_function(spec, t).real() ==
          doctest::Approx(ohmic_hight_c(t, 1.0, 1.0, 1.0)).epsilon(1e-9));

  spec.beta = 2.5;
  spec.j = ohmic(1.7, 0.6);
  for (double t : {0.0, 0.4, 2.2})
    CHECK(correlation_function(spec, t).real() ==
          doctest::Approx(ohmic_hight_c(t, 2.5, 1.7, 0.6)).epsilon(1e-9));
}

TEST_CASE("bath correlation: odd part matches the closed form, even part a Riemann sum") {
  CorrelationSpec spec;
  spec.mode = CorrelationSpec::Intrinsic;
  spec.beta = 1.0;
  spec.j = ohmic(1.0, 0.75);
  for (double t : {0.1, 0.5, 1.3, 4.0}) {
    CHECK(correlation_function(spec, t).imag() ==
          doctest::Approx(ohmic_response(t, 1.0, 0.75)).epsilon(1e-9));
    CHECK(response_function(spec, t) == doctest::Approx(ohmic_response(t, 1.0, 0.75)).epsilon(1e-9));
  }
  CHECK(correlation_function(spec, 0.0).imag() == 0.0);

  for (double beta : {0.1, 1.0, 10.0}) {
    spec.beta = beta;
    for (double t : {0.0, 0.3, 1.7}) {
      auto f = [&](double w) {
        return 0.75 * w * std::exp(-w) / std::tanh(0.5 * beta * w) * std::cos(w * t);
      };
      const double want = riemann(f, 50.0, 1e-4);
      CHECK(correlation_function(spec, t).real() == doctest::Approx(want).epsilon(1e-8));
    }
  }
}

TEST_CASE("zero-temperature limit drops the thermal factor") {
  CorrelationSpec spec;
  spec.mode = CorrelationSpec::Intrinsic;
  spec.beta = 1e6;
  spec.j = ohmic(1.0);
  for (double t : {0.2, 1.0}) {
    const double want =
        gk([&](double w) -> cplx { return w * std::exp(-w) * std::cos(w * t); }, 0.0, 50.0).real();
    CHECK(correlation_function(spec, t).real() == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("tabulated density reproduces its analytic source") {
  std::vector<double> w, j;
  for (long i = 0; i <= 200000; ++i) {
    w.push_back(50.0 * (double)i / 200000.0);
    j.push_back(w.back() * std::exp(-w.back()));
  }
  CorrelationSpec spec;
  spec.mode = CorrelationSpec::ExtrinsicHighT;
  spec.beta = 1.0;
  spec.j = tabulated(w, j);
  for (double t : {0.0, 0.5, 2.0})
    CHECK(correlation_function(spec, t).real() ==
          doctest::Approx(ohmic_hight_c(t, 1.0, 1.0, 1.0)).epsilon(1e-6));
  CHECK(spec.j(60.0) == 0.0);
  CHECK_THROWS_AS(tabulated({1.0, 0.5}, {0.0, 0.0}), ConfigError);
}

TEST_CASE("white-noise spec has no pointwise covariance and an analytic matrix") {
  CorrelationSpec spec;
  spec.mode = CorrelationSpec::MarkovDelta;
  spec.gamma = 0.8;
  CHECK_THROWS_AS(correlation_function(spec, 0.1), ConfigError);
  CorrelationMatrix cm = build_correlation_matrix(spec, 0.25, 2);
  CHECK(cm.block(0)(0, 0) == cplx(0.8 * 0.25));
  CHECK(cm.block(1)(0, 0) == cplx(0.0));
  CHECK(cm.block(-2)(0, 0) == cplx(0.0));
  CHECK(cm.causal(0)(0, 0) == cplx(0.5 * 0.8 * 0.25));
}

TEST_CASE("classical step-cell blocks match a one-dimensional reduction oracle") {
  CorrelationSpec spec;
  spec.mode = CorrelationSpec::ExtrinsicHighT;
  spec.beta = 1.0;
  spec.j = ohmic(1.0);
  const double tau = 0.25;
  CorrelationMatrix cm = build_correlation_matrix(spec, tau, 4);
  auto c = [&](double u) -> cplx { return ohmic_hight_c(u, 1.0, 1.0, 1.0); };
  for (long d = -4; d <= 4; ++d) {
    const cplx want = cell_oracle(c, tau, d);
    CHECK(std::abs(cm.block(d)(0, 0) - want) < 1e-10);
  }
}

TEST_CASE("complex-noise blocks are causal and match the reduction oracle") {
  CorrelationSpec spec;
  spec.mode = CorrelationSpec::Intrinsic;
  spec.beta = 1.0;
  spec.j = ohmic(1.0, 0.75);
  const double tau = 0.25;
  CorrelationMatrix cm = build_correlation_matrix(spec, tau, 3);

  auto sp = [&](double u) -> cplx { return correlation_function(spec, u, 1e-12).real(); };
  auto rp = [&](double u) -> cplx { return cplx(0, 2.0 * ohmic_response(u, 1.0, 0.75)); };
  for (long d = -3; d <= 3; ++d) {
    CHECK(cm.block(d)(1, 1) == cplx(0.0));
    CHECK(std::abs(cm.block(d)(0, 0) - cell_oracle(sp, tau, d)) < 1e-9);
    if (d > 0) {
      // the conjugate field never leads its source
      CHECK(cm.block(d)(1, 0) == cplx(0.0));
      CHECK(std::abs(cm.block(d)(0, 1) - cell_oracle(rp, tau, d)) < 1e-9);
      CHECK(cm.block(d)(0, 1).imag() < 0.0);  // damping side of the response
    }
    if (d < 0) {
      CHECK(cm.block(d)(0, 1) == cplx(0.0));
      // covariance symmetry: the same cell seen from the earlier side
      CHECK(std::abs(cm.block(d)(1, 0) - cm.block(-d)(0, 1)) < 1e-14);
    }
  }
  // diagonal cell: equal causal triangles of the response on both slots
  const cplx tri = gk([&](double v) -> cplx { return (tau - v) * rp(v); }, 0.0, tau);
  CHECK(std::abs(cm.block(0)(0, 1) - tri) < 1e-9);
  CHECK(std::abs(cm.block(0)(1, 0) - tri) < 1e-9);
}

TEST_CASE("untruncated classical correlation matrix is positive semidefinite") {
  CorrelationSpec spec;
  spec.mode = CorrelationSpec::ExtrinsicHighT;
  spec.beta = 0.7;
  spec.j = ohmic(1.3);
  const long n = 8;
  CorrelationMatrix cm = build_correlation_matrix(spec, 0.3, n - 1);
  RMat big(n, n);
  for (long k = 0; k < n; ++k)
    for (long l = 0; l < n; ++l) big(k, l) = cm.block(k - l)(0, 0).real();
  Eigen::SelfAdjointEigenSolver<RMat> es(big);
  CHECK(es.eigenvalues().minCoeff() > -1e-12 * es.eigenvalues().maxCoeff());
}

TEST_CASE("causal blocks reproduce the symmetric bilinear form") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int mode = 0; mode < 2; ++mode) {
    CorrelationSpec spec;
    spec.mode = mode == 0 ? CorrelationSpec::ExtrinsicHighT : CorrelationSpec::Intrinsic;
    spec.beta = 1.0;
    spec.j = ohmic(1.0, 0.75);
    CorrelationMatrix cm = build_correlation_matrix(spec, 0.25, 3);
    std::vector<Vec> x;
    for (int k = 0; k < 7; ++k) {
      Vec v(cm.m);
      for (int c = 0; c < cm.m; ++c) v[c] = nd(rng);
      x.push_back(v);
    }
    const cplx a = cm.quad_form(x);
    const cplx b = cm.causal_form(x);
    CHECK(std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("multiplet assembly stacks blocks and wires classical cross terms") {
  CorrelationSpec ex;
  ex.mode = CorrelationSpec::ExtrinsicHighT;
  ex.beta = 1.0;
  ex.j = ohmic(1.0);
  CorrelationSpec in;
  in.mode = CorrelationSpec::Intrinsic;
  in.beta = 1.0;
  in.j = ohmic(1.0, 0.75);
  CorrelationMatrix a = build_correlation_matrix(ex, 0.25, 2);
  CorrelationMatrix b = build_correlation_matrix(in, 0.25, 2);

  CorrelationMatrix both = assemble_multinoise({a, b});
  CHECK(both.m == 3);
  for (long d = -2; d <= 2; ++d) {
    CHECK((both.block(d).topLeftCorner(1, 1) - a.block(d)).norm() == 0.0);
    CHECK((both.block(d).bottomRightCorner(2, 2) - b.block(d)).norm() == 0.0);
    CHECK(both.block(d)(0, 1) == cplx(0.0));
    CHECK(both.block(d)(1, 0) == cplx(0.0));
  }

  // two copies of the same classical field, fully cross-correlated, coupled
  // with equal weights act like one field with doubled coupling
  CrossCorrelation xc;
  xc.block_a = 0;
  xc.block_b = 1;
  xc.spec = ex;
  CorrelationMatrix pair = assemble_multinoise({a, a}, {xc});
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::vector<Vec> xs, xp;
  for (int k = 0; k < 6; ++k) {
    const double w = nd(rng);
    Vec s(1), p(2);
    s << w;
    p << w, w;
    xs.push_back(s);
    xp.push_back(p);
  }
  CHECK(std::abs(pair.causal_form(xp) - 4.0 * a.causal_form(xs)) < 1e-10);

  xc.spec = in;
  CHECK_THROWS_AS(assemble_multinoise({a, a}, {xc}), ConfigError);
}
