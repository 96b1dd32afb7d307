#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tenprop/liouville.hpp"
#include "tenprop/noise.hpp"
#include "tenprop/propagator.hpp"

namespace tenprop::oracle {

std::uint64_t splitmix64(std::uint64_t x);

// Brute-force evaluation of the discrete relaxation operator: the full sum
// over eigentable paths with the exact bilinear kernel weight, no tensor
// factorization and no truncation.  phi[k-1] is the step-k operator.
struct PathSum {
  std::vector<Mat> phi;
};
PathSum path_sum(const liouville::LiouvilleSystem& ls, const liouville::FreePropagator& fp,
                 const noise::CorrelationMatrix& cm, long n_steps, double budget = 1e7);

// One trajectory's field samples on the fine grid (nu empty for real noise).
struct FieldPair {
  std::vector<cplx> xi, nu;
};

// Stationary Gaussian field synthesis by circulant embedding of the
// covariance.  For complex (intrinsic) noise the generator also reproduces
// the causal cross-covariance of the formal conjugate field through a paired
// spectral construction; only bilinear moments are matched, which is all the
// averaged propagator depends on.
class NoiseGenerator {
 public:
  // psd_tol is relative to the largest embedding eigenvalue: dips below
  // -psd_tol*max(lambda) reject the embedding, smaller ones are clipped to
  // zero.  Slowly decaying covariances kink at the wrap point, so a strict
  // tolerance would reject spectra whose clip error is far below any
  // realistic trajectory budget.
  NoiseGenerator(const noise::CorrelationSpec& spec, double tau_fine, long n_samples,
                 double psd_tol = 1e-4);
  NoiseGenerator(const NoiseGenerator&) = delete;
  NoiseGenerator& operator=(const NoiseGenerator&) = delete;
  ~NoiseGenerator();

  FieldPair draw(std::uint64_t seed, std::uint64_t traj) const;

  long samples() const { return n; }
  long ring_size() const { return ring; }
  double min_eigenvalue() const { return min_eig; }
  bool complex_fields() const { return intrinsic; }

 private:
  double tau_fine = 0;
  long n = 0;
  long ring = 0;
  bool intrinsic = false;
  bool white = false;
  double white_sd = 0;
  RVec lambda;   // autospectrum, clipped nonnegative
  Vec mu;        // causal cross spectrum (intrinsic only)
  double min_eig = 0;
  void* plan = nullptr;  // fftw plan on the scratch buffers
  mutable std::vector<cplx> buf_in, buf_out;
  std::vector<cplx> transform(std::vector<cplx>& spec_coef) const;
};

struct McSeries {
  std::vector<double> t;
  std::vector<Mat> rho;                    // ensemble means
  std::vector<std::string> names;
  std::vector<std::vector<double>> mean;   // [time][observable]
  std::vector<std::vector<double>> se;     // standard errors, same shape
};

// Trajectory-averaged solution of the stochastic Liouville equation with
// midpoint exponential stepping on the fine grid; reports every
// report_stride fine steps.
McSeries sle_monte_carlo(const liouville::HilbertSystem& sys, const noise::CorrelationSpec& spec,
                         const Mat& rho0, double tau_fine, double t_max, long n_traj,
                         std::uint64_t seed, const std::vector<prop::Observable>& obs,
                         long report_stride = 1);

}  // namespace tenprop::oracle
