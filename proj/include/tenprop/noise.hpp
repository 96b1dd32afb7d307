#pragma once

#include <vector>

#include "tenprop/types.hpp"

namespace tenprop::noise {

struct SpectralDensity {
  enum Kind { OhmicExp, Tabulated };
  Kind kind = OhmicExp;
  double omega_c = 1.0;
  double scale = 1.0;
  std::vector<double> tab_w, tab_j;  // sorted grid, linear interpolation, 0 outside

  double operator()(double w) const;
  double over_w(double w) const;   // J(w)/w with the w->0 limit taken
  double support_max() const;      // upper integration cutoff
};

SpectralDensity ohmic(double omega_c, double scale = 1.0);
SpectralDensity tabulated(std::vector<double> w, std::vector<double> j);

struct CorrelationSpec {
  enum Mode { ExtrinsicHighT, Intrinsic, MarkovDelta };
  Mode mode = ExtrinsicHighT;
  double beta = 1.0;
  double gamma = 0.0;  // white-noise strength, MarkovDelta only
  SpectralDensity j;
  int n_comp() const { return mode == Intrinsic ? 2 : 1; }
};

// Scalar correlation functions of the underlying stationary process at t >= 0.
// ExtrinsicHighT returns the real classical covariance; Intrinsic returns the
// bath correlation S(t) whose real part drives the symmetric field and whose
// imaginary part enters only through the causal response.
cplx correlation_function(const CorrelationSpec& spec, double t, double abstol = 1e-10);

// response kernel S''(t) alone (odd part; zero for the extrinsic modes)
double response_function(const CorrelationSpec& spec, double t, double abstol = 1e-10);

// Double step-cell integrals of the correlation functions.  Entries couple the
// per-step noise components; the conjugate (anticommutator) component carries
// no variance of its own and only ever follows the classical one, which is
// what keeps the kernel causal.
struct CorrelationMatrix {
  int m = 1;        // components per step
  double tau = 0;
  long mem = 0;     // block cutoff: blocks vanish for |k-l| > mem
  std::vector<Mat> g;       // G(delta), delta = -mem..mem, index delta+mem
  std::vector<Mat> gtilde;  // causal blocks, delta = 0..mem

  const Mat& block(long delta) const { return g[delta + mem]; }
  const Mat& causal(long delta) const { return gtilde[delta]; }

  // full bilinear form (1/2) sum_{k,l} x_k^T G(k-l) x_l over a window of steps
  cplx quad_form(const std::vector<Vec>& x) const;
  // the equivalent causal accumulation sum_n sum_d x_n^T Gt(d) x_{n-d}
  cplx causal_form(const std::vector<Vec>& x) const;
};

// Gauss-Legendre tensor quadrature per cell at the given order, with an
// order-raised refinement pass; disagreement beyond reltol raises.
CorrelationMatrix build_correlation_matrix(const CorrelationSpec& spec, double tau, long mem,
                                           int gl_order = 16, double refine_reltol = 1e-8);

// Cross-correlation between the classical components of two blocks.
struct CrossCorrelation {
  int block_a = 0, block_b = 1;
  CorrelationSpec spec;  // must be a classical (real) mode
};

// Stack independently specified noises into one per-step multiplet, preserving
// each block's component order and wiring optional classical cross terms.
CorrelationMatrix assemble_multinoise(const std::vector<CorrelationMatrix>& blocks,
                                      const std::vector<CrossCorrelation>& cross = {},
                                      int gl_order = 16, double refine_reltol = 1e-8);

}  // namespace tenprop::noise
