#pragma once

#include <cstdint>
#include <vector>

#include "tenprop/noise.hpp"
#include "tenprop/types.hpp"

namespace tenprop::stt {

struct ChebyshevBasis {
  int n = 10;
  double lo = -1.0, hi = 1.0;

  double to_unit(double w) const;            // affine map onto [-1,1]
  void eval(double w, RVec& out) const;      // T_k(to_unit(w)), k = 0..n-1
  std::vector<double> nodes() const;         // mapped Chebyshev zeros, ascending
  std::vector<double> node_pmf() const;      // normalized quadrature weights
};

ChebyshevBasis basis_for_range(double lo, double hi, int n);

// Per-slot stack of coefficient matrices: Gamma(w) = sum_k coef[k] T_k(w).
struct TransferSlot {
  int comp = 0;
  long rows = 1, cols = 1;
  std::vector<Mat> coef;
};

// Factorized transfer function for one step-depth class.  Slots run from the
// current step backwards through the memory window; within one step the noise
// components appear in their multiplet order.
struct LinkingMatrixSet {
  int n_slice = 1;   // transfer function index (1-based)
  int m_comp = 1;
  int span = 1;      // steps covered: min(n_slice, mem+1)
  int n_basis = 10;
  long bond = 10;
  std::vector<ChebyshevBasis> basis;  // per component
  std::vector<TransferSlot> slots;    // span * m_comp

  Mat slot_eval(int s, double w) const;
  // w ordered slot-wise: current step's components first, then one step back...
  cplx eval(const std::vector<double>& w) const;
  std::size_t parameter_count() const;
};

// exponent -sum_d x[0]^T Gt(d) x[d] exponentiated; x[d] is the multiplet d
// steps before the current one, x.size() limits the depth
cplx transfer_function_exact(const noise::CorrelationMatrix& cm, const std::vector<Vec>& x);

// product of the per-step transfer functions over a full path (x[0] earliest);
// equals exp(-quad_form) by the causal split
cplx kernel_exact(const noise::CorrelationMatrix& cm, const std::vector<Vec>& path);

LinkingMatrixSet init_linking_set(int n_slice, long mem, int m_comp, int n_basis, long bond,
                                  const std::vector<ChebyshevBasis>& basis, bool complex_coef,
                                  std::uint64_t seed, double sigma = 1e-2);

struct TrainingConfig {
  long batch = 32;
  double lr = 0.2;
  double lr_decay = 0.5;
  long decay_every = 0;     // 0: max_steps/6
  long max_steps = 20000;
  double target_loss = 0;   // early stop on the validation loss
  long val_points = 256;
  long log_every = 200;
  std::uint64_t seed = 1;
  double init_sigma = 1e-2;
  double momentum = 0.0;    // 0: plain SGD (reference); heavy-ball otherwise
};

struct TrainPoint {
  long step;
  double loss;
};
struct TrainResult {
  std::vector<TrainPoint> curve;  // validation loss at log points
  double final_loss = 0;
  long steps = 0;
};

// node-index tuples, one index per slot
using NodeBatch = std::vector<std::vector<int>>;
NodeBatch sample_training_points(const LinkingMatrixSet& set, long count, std::uint64_t seed);

double loss_on(const LinkingMatrixSet& set, const noise::CorrelationMatrix& cm, const NodeBatch& pts);
// grad[slot][k] matches TransferSlot::coef shapes
void loss_and_grad(const LinkingMatrixSet& set, const noise::CorrelationMatrix& cm,
                   const NodeBatch& pts, double& loss, std::vector<std::vector<Mat>>& grad);

TrainResult train(LinkingMatrixSet& set, const noise::CorrelationMatrix& cm, const TrainingConfig& tc);

// Full trained kernel: one set per depth class n = 1..mem+1.
struct KernelModel {
  int m_comp = 1;
  long mem = 0;
  int n_basis = 10;
  long bond = 10;
  std::vector<ChebyshevBasis> basis;
  std::vector<LinkingMatrixSet> sets;
  std::uint64_t config_hash = 0;
};

// Supplies the per-step kernel factor joining transfer function m to the step
// it reaches back to, evaluated at that step's frequency multiplet.
struct KernelProvider {
  long mem = 0;
  std::vector<std::vector<double>> entries;  // frequency multiplets
  virtual ~KernelProvider() = default;
  // m: 1-based transfer function index; delta = m - alpha
  virtual Mat factor(long m, long delta, long entry) const = 0;
};

// Directly evaluated factors; the interior bond enumerates the multiplet table.
struct ExactKernel : KernelProvider {
  const noise::CorrelationMatrix* cm = nullptr;
  ExactKernel(const noise::CorrelationMatrix& c, std::vector<std::vector<double>> ent);
  Mat factor(long m, long delta, long entry) const override;
};

struct TrainedKernel : KernelProvider {
  const KernelModel* model = nullptr;
  TrainedKernel(const KernelModel& km, std::vector<std::vector<double>> ent);
  Mat factor(long m, long delta, long entry) const override;
};

// span of transfer function m under memory cutoff mem
inline long span_of(long m, long mem) { return std::min(m, mem + 1); }

// Ordered factors forming the step-n kernel core: one matrix per transfer
// function still pending at step n (m = n .. min(n_total, n + mem)), each
// evaluated at step n's multiplet.
std::vector<Mat> kernel_core(const KernelProvider& kp, long n, long n_total, long entry);

}  // namespace tenprop::stt
