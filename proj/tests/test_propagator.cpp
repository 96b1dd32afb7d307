#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "tenprop/liouville.hpp"
#include "tenprop/noise.hpp"
#include "tenprop/oracle.hpp"
#include "tenprop/propagator.hpp"
#include "tenprop/stt.hpp"

using namespace tenprop;

namespace {

Mat sigma_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Mat sigma_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

noise::CorrelationSpec markov_spec(double gamma) {
  noise::CorrelationSpec spec;
  spec.mode = noise::CorrelationSpec::MarkovDelta;
  spec.gamma = gamma;
  return spec;
}

noise::CorrelationSpec ohmic_spec(noise::CorrelationSpec::Mode mode, double wc, double beta) {
  noise::CorrelationSpec spec;
  spec.mode = mode;
  spec.beta = beta;
  spec.j = noise::ohmic(wc);
  return spec;
}

// everything one propagation run needs, with stable addresses for the engine
struct Rig {
  liouville::LiouvilleSystem ls;
  liouville::FreePropagator fp;
  noise::CorrelationMatrix cm;
  std::unique_ptr<stt::ExactKernel> ker;
  prop::Engine eng;
};

std::unique_ptr<Rig> make_rig(const liouville::HilbertSystem& sys,
                              const noise::CorrelationSpec& spec, double tau, long mem,
                              prop::StepPolicy pol = {}) {
  auto r = std::make_unique<Rig>();
  r->ls = liouville::build_liouville(sys, spec.n_comp() == 2);
  r->fp = liouville::free_propagator(r->ls, tau);
  liouville::tensorize_propagator(r->ls, r->fp, pol.svd);
  r->cm = noise::build_correlation_matrix(spec, tau, mem);
  r->ker = std::make_unique<stt::ExactKernel>(r->cm, prop::table_entries(r->ls));
  r->eng.ls = &r->ls;
  r->eng.fp = &r->fp;
  r->eng.ker = r->ker.get();
  r->eng.pol = pol;
  return r;
}

Mat devec_step(const liouville::LiouvilleSystem& ls, const Mat& phi, const Mat& rho) {
  Mat padded = Mat::Zero(ls.d, ls.d);
  padded.topLeftCorner(rho.rows(), rho.cols()) = rho;
  const Mat out = liouville::devectorize(phi * liouville::vectorize(padded));
  return out.topLeftCorner(ls.d_phys, ls.d_phys);
}

cplx step_weight(const noise::CorrelationMatrix& cm, const std::vector<double>& freq) {
  Vec x = Vec::Zero(cm.m);
  for (int c = 0; c < cm.m; ++c) x[c] = freq[(std::size_t)c];
  return std::exp(-(x.transpose() * cm.causal(0) * x).value());
}

}  // namespace

TEST_CASE("white-noise fugacity matches the split-step dense form") {
  auto sys = liouville::spin_boson(1.0, 0.5, 0.75);
  const double tau = 0.2, gamma = 0.4;
  auto r = make_rig(sys, markov_spec(gamma), tau, 0);

  const auto& z = r->eng.full_fugacity(1);
  const Mat zd = ttcore::to_dense(z.mpo);

  const Mat uh = liouville::matexp(cplx(0, -tau / 2) * r->ls.l0);
  Mat mid = Mat::Zero(r->ls.d * r->ls.d, r->ls.d * r->ls.d);
  for (const auto& e : r->ls.table)
    mid += liouville::eigenprojector(r->ls, e) * step_weight(r->cm, e.freq);
  const Mat expect = uh * mid * uh;
  CHECK((zd - expect).cwiseAbs().maxCoeff() < 1e-12);

  // the white-noise weight has the closed gaussian form
  for (const auto& e : r->ls.table)
    CHECK(std::abs(step_weight(r->cm, e.freq) -
                   std::exp(-gamma * tau * e.freq[0] * e.freq[0] / 2.0)) < 1e-12);

  // summation order is pinned, so rebuilding is bitwise identical
  auto z2 = prop::build_fugacity(r->ls, r->fp, *r->ker, 1, 1 + r->ker->mem, r->eng.pol);
  CHECK((zd - ttcore::to_dense(z2.mpo)).norm() == 0.0);
}

TEST_CASE("trivial kernel reduces the step to the bare propagator") {
  auto sys = liouville::spin_boson(1.0, 0.5, 0.75);
  const double tau = 0.3;
  auto r = make_rig(sys, markov_spec(0.0), tau, 0);
  const Mat zd = ttcore::to_dense(r->eng.full_fugacity(1).mpo);
  const Mat expect = liouville::matexp(cplx(0, -tau) * r->ls.l0);
  CHECK((zd - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fugacity dense form matches the explicit kron sum") {
  auto sys = liouville::spin_boson(1.0, 0.5, 0.75);
  const double tau = 0.25;
  const long mem = 2;
  auto r = make_rig(sys, ohmic_spec(noise::CorrelationSpec::Intrinsic, 1.0, 1.0), tau, mem);

  // saturated running step: alpha = mem + 1 participates in mem + 1 transfers
  const auto& z = r->eng.full_fugacity(mem + 1);
  Mat expect;
  bool first = true;
  for (long e = 0; e < (long)r->ls.table.size(); ++e) {
    Mat term = ttcore::to_dense(r->fp.mpo[(std::size_t)e]);
    for (long m = mem + 1; m <= 2 * mem + 1; ++m)
      term = liouville::kron(term, r->ker->factor(m, m - (mem + 1), e));
    expect = first ? term : Mat(expect + term);
    first = false;
  }
  CHECK((ttcore::to_dense(z.mpo) - expect).cwiseAbs().maxCoeff() < 1e-10);

  // capped variant stops appending at the horizon
  const auto& zc = r->eng.capped_fugacity(mem + 1, mem + 2);
  first = true;
  for (long e = 0; e < (long)r->ls.table.size(); ++e) {
    Mat term = ttcore::to_dense(r->fp.mpo[(std::size_t)e]);
    for (long m = mem + 1; m <= mem + 2; ++m)
      term = liouville::kron(term, r->ker->factor(m, m - (mem + 1), e));
    expect = first ? term : Mat(expect + term);
    first = false;
  }
  CHECK((ttcore::to_dense(zc.mpo) - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("markov products compose step by step") {
  auto sys = liouville::spin_boson(1.0, 0.5, 0.75);
  const double tau = 0.2;
  auto r = make_rig(sys, markov_spec(0.4), tau, 0);

  const Mat zd = ttcore::to_dense(r->eng.full_fugacity(1).mpo);
  auto phi = prop::build_propagator(r->eng, 3);
  CHECK(phi.n_steps == 3);
  CHECK((ttcore::to_dense(phi.mpo) - Mat(zd * zd * zd)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(phi.bond_log.size() == 3);

  Mat rho0(2, 2);
  rho0 << 0.7, cplx(0.1, 0.2), cplx(0.1, -0.2), 0.3;
  auto series = prop::propagate(r->eng, rho0, 3, {{"sz", sigma_z()}});
  Mat ref = rho0;
  for (long k = 0; k < 3; ++k) {
    ref = devec_step(r->ls, zd, ref);
    CHECK((series.states[(std::size_t)k] - ref).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("propagation reproduces the brute-force path sum") {
  auto sys = liouville::spin_boson(1.0, 0.5, 0.75);
  const double tau = 0.25;
  Mat rho0(2, 2);
  rho0 << 1, 0, 0, 0;

  SUBCASE("memory spanning the whole window") {
    const long mem = 4, n = 4;
    auto r = make_rig(sys, ohmic_spec(noise::CorrelationSpec::Intrinsic, 1.0, 1.0), tau, mem);
    auto ps = oracle::path_sum(r->ls, r->fp, r->cm, n);
    auto series = prop::propagate(r->eng, rho0, n, {{"sz", sigma_z()}});
    for (long k = 0; k < n; ++k) {
      const Mat ref = devec_step(r->ls, ps.phi[(std::size_t)k], rho0);
      CHECK((series.states[(std::size_t)k] - ref).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(series.pts[(std::size_t)k].herm_dev < 1e-6);
      CHECK(series.pts[(std::size_t)k].trace_dev < 5e-3);
    }
    CHECK(series.max_bond.size() == (std::size_t)n);
    CHECK(series.max_bond[1] >= 1);
  }

  SUBCASE("window running past the memory cutoff") {
    const long mem = 2, n = 6;
    auto r = make_rig(sys, ohmic_spec(noise::CorrelationSpec::Intrinsic, 1.0, 1.0), tau, mem);
    auto ps = oracle::path_sum(r->ls, r->fp, r->cm, n);
    auto series = prop::propagate(r->eng, rho0, n, {{"sz", sigma_z()}});
    for (long k = 0; k < n; ++k) {
      const Mat ref = devec_step(r->ls, ps.phi[(std::size_t)k], rho0);
      CHECK((series.states[(std::size_t)k] - ref).cwiseAbs().maxCoeff() < 1e-8);
    }
    // assembled relaxation operator agrees with the deep path sum too
    auto phi = prop::build_propagator(r->eng, n);
    CHECK((ttcore::to_dense(phi.mpo) - ps.phi.back()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("zero coupling evolves unitarily") {
  liouville::HilbertSystem sys;
  sys.h0 = Mat(sigma_x() + 0.5 * sigma_z());
  sys.v = Mat::Zero(2, 2);
  const double tau = 0.25;
  const long n = 5;
  auto r = make_rig(sys, ohmic_spec(noise::CorrelationSpec::Intrinsic, 1.0, 1.0), tau, 3);

  Mat rho0(2, 2);
  rho0 << 1, 0, 0, 0;
  auto series = prop::propagate(r->eng, rho0, n, {});
  for (long k = 1; k <= n; ++k) {
    const Mat u = liouville::matexp(cplx(0, -tau * (double)k) * sys.h0);
    const Mat ref = u * rho0 * u.adjoint();
    CHECK((series.states[(std::size_t)k - 1] - ref).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(series.pts[(std::size_t)k - 1].trace_dev < 1e-10);
  }

  auto phi = prop::build_propagator(r->eng, n);
  const Mat expect = liouville::matexp(cplx(0, -tau * (double)n) * r->ls.l0);
  CHECK((ttcore::to_dense(phi.mpo) - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("commuting coupling gives the closed-form dephasing series") {
  liouville::HilbertSystem sys;
  sys.h0 = sigma_z();
  sys.v = sigma_z();
  const double tau = 0.3;
  const long mem = 3, n = 8;
  auto r = make_rig(sys, ohmic_spec(noise::CorrelationSpec::ExtrinsicHighT, 1.0, 1.0), tau, mem);

  Mat rho0(2, 2);
  rho0 << 0.5, 0.5, 0.5, 0.5;
  auto series = prop::propagate(r->eng, rho0, n, {{"sx", sigma_x()}});
  for (long k = 1; k <= n; ++k) {
    const Mat& rho = series.states[(std::size_t)k - 1];
    CHECK(std::abs(rho(0, 0) - 0.5) < 1e-10);
    CHECK(std::abs(rho(1, 1) - 0.5) < 1e-10);
    // coherence: free phase times the exact gaussian attenuation
    std::vector<Vec> path((std::size_t)k, Vec::Constant(1, 2.0));
    const cplx expect = 0.5 * std::exp(cplx(0, -2.0 * tau * (double)k)) *
                        stt::kernel_exact(r->cm, path);
    CHECK(std::abs(rho(0, 1) - expect) < 1e-9);
  }

  // maximally mixed input is a fixed point
  auto fix = prop::propagate(r->eng, Mat(0.5 * Mat::Identity(2, 2)), n, {});
  for (const auto& s : fix.states)
    CHECK((s - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pure dephasing coherence decays at the white-noise rate") {
  liouville::HilbertSystem sys;
  sys.h0 = Mat::Zero(2, 2);
  sys.v = Mat(0.75 * sigma_z());
  const double tau = 0.25, gamma = 1.0;
  const long n = 8;
  auto r = make_rig(sys, markov_spec(gamma), tau, 0);

  Mat rho0(2, 2);
  rho0 << 0.5, 0.5, 0.5, 0.5;
  auto series = prop::propagate(r->eng, rho0, n, {{"sx", sigma_x()}});
  for (long k = 1; k <= n; ++k) {
    const double t = tau * (double)k;
    const Mat& rho = series.states[(std::size_t)k - 1];
    CHECK(std::abs(rho(0, 1) - 0.5 * std::exp(-2.0 * 0.75 * 0.75 * gamma * t)) < 1e-10);
    CHECK(std::abs(rho(0, 0) - 0.5) < 1e-12);
    CHECK(std::abs(series.pts[(std::size_t)k - 1].values[0].real() -
                   std::exp(-1.125 * t)) < 1e-10);
  }

  auto free_run = make_rig(sys, markov_spec(0.0), tau, 0);
  auto fix = prop::propagate(free_run->eng, rho0, 3, {});
  for (const auto& s : fix.states) CHECK((s - rho0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("step error against the closed markov form shrinks with tau") {
  auto sys = liouville::spin_boson(1.0, 0.5, 0.75);
  const double gamma = 0.5, t = 1.0;
  const Mat exact = prop::markov_propagator(
      liouville::build_liouville(sys, false), gamma, t);

  std::vector<double> errs;
  for (double tau : {0.1, 0.05, 0.025}) {
    auto r = make_rig(sys, markov_spec(gamma), tau, 0);
    auto phi = prop::build_propagator(r->eng, (long)std::llround(t / tau));
    errs.push_back((ttcore::to_dense(phi.mpo) - exact).cwiseAbs().maxCoeff());
  }
  CHECK(errs[0] / errs[1] > 1.8);
  CHECK(errs[1] / errs[2] > 1.8);
  CHECK(errs[2] < 1e-3);

  CHECK_THROWS_AS(prop::markov_propagator(liouville::build_liouville(sys, false), -1.0, 1.0),
                  ConfigError);
}

TEST_CASE("relaxation pushes the qubit below the bias") {
  auto sys = liouville::spin_boson(1.0, 0.5, 0.75);
  const double tau = 0.25;
  const long mem = 4, n = 20;
  auto r = make_rig(sys, ohmic_spec(noise::CorrelationSpec::Intrinsic, 1.0, 1.0), tau, mem);

  Mat rho0(2, 2);
  rho0 << 1, 0, 0, 0;
  auto series = prop::propagate(r->eng, rho0, n, {{"sz", sigma_z()}});
  CHECK(series.pts.back().values[0].real() < -0.1);
  for (const auto& p : series.pts) {
    CHECK(p.herm_dev < 1e-6);
    CHECK(p.trace_dev < 5e-3);
  }
}

TEST_CASE("chain dephasing reaches the symmetry-resolved mixtures") {
  // the ring commutes with reflection through the start site and with the
  // alternating-sign pattern on the zero-velocity momentum pair, so a
  // site-localized start keeps a population ripple 1/4 + (-1)^n/8 forever;
  // a mixture of two adjacent sites carries no conserved overlap and
  // uniformizes completely
  auto sys = liouville::tight_binding_chain(4, 1.0, 1.0, 0.5);
  const double tau = 0.25;

  {
    auto r = make_rig(sys, markov_spec(1.5), tau, 0);
    Mat rho0 = Mat::Zero(4, 4);
    rho0(0, 0) = 1;
    auto series = prop::propagate(r->eng, rho0, 80, {});
    const Mat& fin = series.states.back();
    for (long i = 0; i < 4; ++i)
      CHECK(std::abs(fin(i, i).real() - (i % 2 ? 0.125 : 0.375)) < 0.02);
    const Mat zd = ttcore::to_dense(r->eng.full_fugacity(1).mpo);
    Mat ref = rho0;
    for (int k = 0; k < 80; ++k) ref = devec_step(r->ls, zd, ref);
    CHECK((fin - ref).cwiseAbs().maxCoeff() < 1e-8);
  }

  {
    auto r = make_rig(sys, markov_spec(0.6), tau, 0);
    Mat rho0 = Mat::Zero(4, 4);
    rho0(0, 0) = rho0(1, 1) = 0.5;
    auto series = prop::propagate(r->eng, rho0, 80, {});
    const Mat& fin = series.states.back();
    for (long i = 0; i < 4; ++i) CHECK(std::abs(fin(i, i).real() - 0.25) < 0.02);
    CHECK(std::abs(fin.trace() - 1.0) < 1e-8);
  }
}

TEST_CASE("padded dimensions round-trip through propagation") {
  liouville::HilbertSystem sys;
  Mat h0(3, 3);
  h0 << 0.2, cplx(0.1, 0.3), 0.0, cplx(0.1, -0.3), -0.4, 0.5, 0.0, 0.5, 0.1;
  Mat v = Mat::Zero(3, 3);
  v.diagonal() << 0.3, -0.1, 0.5;
  sys.h0 = h0;
  sys.v = v;
  const double tau = 0.2;
  const long mem = 1, n = 3;
  auto r = make_rig(sys, ohmic_spec(noise::CorrelationSpec::ExtrinsicHighT, 1.0, 1.0), tau, mem);
  REQUIRE(r->ls.d == 4);
  REQUIRE(r->ls.d_phys == 3);

  Mat rho0 = Mat::Zero(3, 3);
  rho0(0, 0) = 0.5;
  rho0(2, 2) = 0.5;
  rho0(0, 2) = rho0(2, 0) = 0.25;
  auto ps = oracle::path_sum(r->ls, r->fp, r->cm, n);
  auto series = prop::propagate(r->eng, rho0, n, {});
  for (long k = 0; k < n; ++k) {
    const Mat ref = devec_step(r->ls, ps.phi[(std::size_t)k], rho0);
    CHECK(ref.rows() == 3);
    CHECK((series.states[(std::size_t)k] - ref).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("inputs outside the contract are rejected") {
  auto sys = liouville::spin_boson(1.0, 0.5, 0.75);
  auto r = make_rig(sys, markov_spec(0.4), 0.2, 0);

  Mat bad_dim = Mat::Identity(3, 3);
  CHECK_THROWS_AS(prop::propagate(r->eng, bad_dim, 1, {}), ConfigError);

  Mat bad_herm(2, 2);
  bad_herm << 0.5, cplx(0.2, 0.1), cplx(0.3, 0.2), 0.5;
  CHECK_THROWS_AS(prop::propagate(r->eng, bad_herm, 1, {}), ConfigError);

  Mat bad_trace = Mat::Identity(2, 2);
  CHECK_THROWS_AS(prop::propagate(r->eng, bad_trace, 1, {}), ConfigError);

  Mat bad_psd(2, 2);
  bad_psd << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(prop::propagate(r->eng, bad_psd, 1, {}), ConfigError);

  // fugacity built from an untensorized free propagator
  auto fp2 = liouville::free_propagator(r->ls, 0.2);
  CHECK_THROWS_AS(prop::build_fugacity(r->ls, fp2, *r->ker, 1, 1, r->eng.pol), ConfigError);

  // state with more trailing sites than the step covers
  const auto& z = r->eng.capped_fugacity(1, 1);
  auto too_long = ttcore::identity_mpo(z.mpo.length() + 1, 2);
  CHECK_THROWS_AS(prop::apply_fugacity(z, too_long, 2, r->eng.pol.svd), ConfigError);
}

TEST_CASE("bond caps are enforced with a report") {
  auto sys = liouville::spin_boson(1.0, 0.5, 0.75);
  prop::StepPolicy pol;
  pol.b_max = 1;
  auto r = make_rig(sys, ohmic_spec(noise::CorrelationSpec::Intrinsic, 1.0, 1.0), 0.25, 4, pol);
  CHECK_THROWS_AS(r->eng.full_fugacity(1), ResourceError);
  try {
    auto r2 = make_rig(sys, ohmic_spec(noise::CorrelationSpec::Intrinsic, 1.0, 1.0), 0.25, 4, pol);
    r2->eng.full_fugacity(1);
  } catch (const ResourceError& err) {
    CHECK(std::string(err.what()).find("bond") != std::string::npos);
  }
}

TEST_CASE("series and bond tables render as csv") {
  auto sys = liouville::spin_boson(1.0, 0.5, 0.75);
  auto r = make_rig(sys, markov_spec(0.4), 0.2, 0);
  Mat rho0(2, 2);
  rho0 << 1, 0, 0, 0;
  auto series = prop::propagate(r->eng, rho0, 3, {{"sz", sigma_z()}, {"sx", sigma_x()}});

  const std::string sc = prop::series_csv(series);
  CHECK(sc.rfind("t,sz,sx,trace_dev,herm_dev\n", 0) == 0);
  CHECK(std::count(sc.begin(), sc.end(), '\n') == 4);

  const std::string bc = prop::bonds_csv(series);
  CHECK(bc.rfind("step,max_bond,bytes\n", 0) == 0);
  CHECK(std::count(bc.begin(), bc.end(), '\n') == 4);
}
