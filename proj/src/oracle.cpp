#include "tenprop/oracle.hpp"

#include <fftw3.h>

#include <cmath>
#include <random>

#include "tenprop/stt.hpp"

namespace tenprop::oracle {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

PathSum path_sum(const liouville::LiouvilleSystem& ls, const liouville::FreePropagator& fp,
                 const noise::CorrelationMatrix& cm, long n_steps, double budget) {
  const long ne = (long)ls.table.size();
  if (std::pow((double)ne, (double)n_steps) > budget)
    throw ResourceError("path summation budget exceeded: " + std::to_string(ne) + "^" +
                        std::to_string(n_steps));
  if (fp.g0.size() != (std::size_t)ne) throw ConfigError("free propagator entry count mismatch");

  const long dim = ls.d * ls.d;
  PathSum out;
  out.phi.assign((std::size_t)n_steps, Mat::Zero(dim, dim));

  std::vector<Vec> mult;
  for (const auto& e : ls.table) {
    Vec x = Vec::Zero(cm.m);
    for (int c = 0; c < cm.m; ++c) x[c] = e.freq[(std::size_t)c];
    mult.push_back(x);
  }

  // depth-first walk; each prefix contributes once to its depth's operator
  std::vector<long> path((std::size_t)n_steps, 0);
  std::vector<cplx> weight((std::size_t)n_steps + 1, 1.0);
  std::vector<Mat> left((std::size_t)n_steps + 1);
  left[0] = Mat::Identity(dim, dim);

  long depth = 1;
  path[0] = 0;
  while (depth > 0) {
    const long e = path[(std::size_t)depth - 1];
    // kernel factor for the newly appended step
    cplx expo = 0;
    const long span = stt::span_of(depth, cm.mem);
    for (long dlt = 0; dlt < span; ++dlt)
      expo += (mult[(std::size_t)e].transpose() * cm.causal(dlt) *
               mult[(std::size_t)path[(std::size_t)(depth - 1 - dlt)]])
                  .value();
    weight[(std::size_t)depth] = weight[(std::size_t)depth - 1] * std::exp(-expo);
    left[(std::size_t)depth] = fp.g0[(std::size_t)e] * left[(std::size_t)depth - 1];
    out.phi[(std::size_t)depth - 1] += weight[(std::size_t)depth] * left[(std::size_t)depth];

    if (depth < n_steps) {
      path[(std::size_t)depth] = 0;
      ++depth;
    } else {
      while (depth > 0 && ++path[(std::size_t)depth - 1] == ne) --depth;
    }
  }
  return out;
}

namespace {

cplx gauss_c(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  const double re = nd(rng), im = nd(rng);
  return cplx(re, im) / std::sqrt(2.0);
}

}  // namespace

NoiseGenerator::NoiseGenerator(const noise::CorrelationSpec& spec, double tf, long n_samples,
                               double psd_tol) {
  tau_fine = tf;
  n = n_samples;
  intrinsic = spec.mode == noise::CorrelationSpec::Intrinsic;
  if (spec.mode == noise::CorrelationSpec::MarkovDelta) {
    white = true;
    white_sd = std::sqrt(spec.gamma / tau_fine);
    ring = 0;
    return;
  }

  ring = 1;
  while (ring < 2 * n) ring <<= 1;

  // even wrap of the covariance, causal wrap of the response
  std::vector<cplx> cov((std::size_t)ring, 0.0), crs((std::size_t)ring, 0.0);
  for (long j = 0; j <= ring / 2; ++j) {
    const cplx c = noise::correlation_function(spec, (double)j * tau_fine);
    cov[(std::size_t)j] = c.real();
    if (j > 0 && j < ring) cov[(std::size_t)(ring - j)] = c.real();
    if (intrinsic && j >= 1)
      crs[(std::size_t)j] = cplx(0, 2.0 * noise::response_function(spec, (double)j * tau_fine));
  }

  buf_in.resize((std::size_t)ring);
  buf_out.resize((std::size_t)ring);
  plan = fftw_plan_dft_1d((int)ring, reinterpret_cast<fftw_complex*>(buf_in.data()),
                          reinterpret_cast<fftw_complex*>(buf_out.data()), FFTW_BACKWARD,
                          FFTW_ESTIMATE);

  // spectra are forward transforms scaled by 1/ring; the plan is backward
  // (the synthesis direction), and on the even covariance the two coincide
  buf_in = cov;
  fftw_execute((fftw_plan)plan);
  lambda.resize(ring);
  for (long k = 0; k < ring; ++k) lambda[k] = buf_out[(std::size_t)k].real() / (double)ring;

  min_eig = lambda.minCoeff();
  const double lmax = std::max(lambda.maxCoeff(), 0.0);
  if (min_eig < -psd_tol * std::max(lmax, 1e-300))
    throw NumericalError("circulant embedding is not positive semidefinite; min eigenvalue " +
                         std::to_string(min_eig) + " (refine the fine grid)");
  for (long k = 0; k < ring; ++k) lambda[k] = std::max(lambda[k], 0.0);

  if (intrinsic) {
    // cross spectrum: the forward transform is the backward one read at -k
    buf_in = crs;
    fftw_execute((fftw_plan)plan);
    mu.resize(ring);
    for (long k = 0; k < ring; ++k)
      mu[k] = buf_out[(std::size_t)((ring - k) % ring)] / (double)ring;
  }
}

NoiseGenerator::~NoiseGenerator() {
  if (plan) fftw_destroy_plan((fftw_plan)plan);
}

std::vector<cplx> NoiseGenerator::transform(std::vector<cplx>& spec_coef) const {
  buf_in = spec_coef;
  fftw_execute((fftw_plan)plan);
  return buf_out;
}

FieldPair NoiseGenerator::draw(std::uint64_t seed, std::uint64_t traj) const {
  FieldPair f;
  f.xi.resize((std::size_t)n);
  if (white) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(traj + 1)));
    std::normal_distribution<double> nd(0.0, white_sd);
    for (long j = 0; j < n; ++j) f.xi[(std::size_t)j] = nd(rng);
    return f;
  }

  if (!intrinsic) {
    // one complex synthesis yields two independent real fields
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(traj / 2 + 1)));
    std::vector<cplx> a((std::size_t)ring);
    for (long k = 0; k < ring; ++k) {
      std::normal_distribution<double> nd;
      const double u = nd(rng), v = nd(rng);
      a[(std::size_t)k] = std::sqrt(lambda[k]) * cplx(u, v);
    }
    auto y = transform(a);
    const bool re = (traj % 2) == 0;
    for (long j = 0; j < n; ++j)
      f.xi[(std::size_t)j] = re ? y[(std::size_t)j].real() : y[(std::size_t)j].imag();
    return f;
  }

  // intrinsic: paired spectral construction matching the bilinear moments
  //   E[a_k a_{-k}] = lambda_k, E[a_k b_{-k}] = mu_k, E[b_k a_{-k}] = mu_{-k},
  //   E[b b] = 0
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(traj + 1)));
  std::normal_distribution<double> nd;
  std::vector<cplx> a((std::size_t)ring, 0.0), b((std::size_t)ring, 0.0);
  const double floor_sq = 1e-14 * std::max(lambda.maxCoeff(), 1e-300);
  for (long k = 1; k < ring / 2; ++k) {
    const long kc = ring - k;
    const double s2 = std::max({lambda[k], std::abs(mu[k]), std::abs(mu[kc]), floor_sq});
    const double s = std::sqrt(s2);
    const cplx g1 = gauss_c(rng), g2 = gauss_c(rng);
    a[(std::size_t)k] = s * g1;
    b[(std::size_t)k] = s * g2;
    a[(std::size_t)kc] = (lambda[k] * std::conj(g1) + mu[kc] * std::conj(g2)) / s;
    b[(std::size_t)kc] = mu[k] * std::conj(g1) / s;
  }
  for (long k : {0L, ring / 2}) {
    // self-conjugate modes; guard the division like the paired case, else a
    // clipped lambda under a leakage-sized mu explodes the conjugate field
    const double l = std::max({lambda[k], std::abs(mu[k]), floor_sq});
    const double u = nd(rng), w = nd(rng);
    a[(std::size_t)k] = std::sqrt(std::max(lambda[k], 0.0)) * u;
    b[(std::size_t)k] = mu[k] / std::sqrt(l) * cplx(u, w);
  }
  auto x = transform(a);
  f.xi.assign(x.begin(), x.begin() + n);
  auto v = transform(b);
  f.nu.assign(v.begin(), v.begin() + n);
  return f;
}

McSeries sle_monte_carlo(const liouville::HilbertSystem& sys, const noise::CorrelationSpec& spec,
                         const Mat& rho0, double tau_fine, double t_max, long n_traj,
                         std::uint64_t seed, const std::vector<prop::Observable>& obs,
                         long report_stride) {
  const long d = sys.d();
  if (rho0.rows() != d || rho0.cols() != d) throw ConfigError("initial state dimension mismatch");
  const long n_fine = (long)std::llround(t_max / tau_fine);
  if (n_fine < 1) throw ConfigError("time window shorter than one fine step");
  const long n_rep = n_fine / report_stride;

  NoiseGenerator gen(spec, tau_fine, n_fine);

  McSeries out;
  for (const auto& o : obs) out.names.push_back(o.name);
  out.t.resize((std::size_t)n_rep);
  for (long r = 0; r < n_rep; ++r) out.t[(std::size_t)r] = (double)((r + 1) * report_stride) * tau_fine;
  out.rho.assign((std::size_t)n_rep, Mat::Zero(d, d));
  std::vector<std::vector<double>> sum((std::size_t)n_rep, std::vector<double>(obs.size(), 0.0));
  auto sumsq = sum;

  const cplx itf(0, tau_fine);
  for (long tr = 0; tr < n_traj; ++tr) {
    FieldPair f = gen.draw(seed, (std::uint64_t)tr);
    Mat rho = rho0;
    for (long j = 0; j < n_fine; ++j) {
      const cplx xi = f.xi[(std::size_t)j];
      const cplx nu = f.nu.empty() ? cplx(0) : f.nu[(std::size_t)j];
      const Mat e = liouville::matexp(-itf * (sys.h0 + (xi + nu) * sys.v));
      const Mat g = liouville::matexp(itf * (sys.h0 + (xi - nu) * sys.v));
      rho = e * rho * g;
      if ((j + 1) % report_stride == 0) {
        const long r = (j + 1) / report_stride - 1;
        out.rho[(std::size_t)r] += rho;
        for (std::size_t o = 0; o < obs.size(); ++o) {
          const double v = (obs[o].op * rho).trace().real();
          sum[(std::size_t)r][o] += v;
          sumsq[(std::size_t)r][o] += v * v;
        }
      }
    }
  }

  out.mean.assign((std::size_t)n_rep, std::vector<double>(obs.size(), 0.0));
  out.se = out.mean;
  for (long r = 0; r < n_rep; ++r) {
    out.rho[(std::size_t)r] /= (double)n_traj;
    for (std::size_t o = 0; o < obs.size(); ++o) {
      const double m = sum[(std::size_t)r][o] / (double)n_traj;
      out.mean[(std::size_t)r][o] = m;
      const double var =
          std::max(0.0, sumsq[(std::size_t)r][o] / (double)n_traj - m * m);
      out.se[(std::size_t)r][o] = std::sqrt(var / (double)std::max<long>(n_traj - 1, 1));
    }
  }
  return out;
}

}  // namespace tenprop::oracle
