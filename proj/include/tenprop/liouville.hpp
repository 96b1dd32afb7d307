#pragma once

#include <utility>
#include <vector>

#include "tenprop/ttcore.hpp"
#include "tenprop/types.hpp"

namespace tenprop::liouville {

// System Hamiltonian and the Hermitian coupling operator the noise multiplies.
struct HilbertSystem {
  Mat h0, v;
  long d() const { return h0.rows(); }
};

Vec vectorize(const Mat& rho);    // column-major stacking, row index fastest
Mat devectorize(const Vec& x);

long qubit_count(long d);         // ceil(log2 d)
Mat pad_pow2(const Mat& m);       // zero-pad to the next power of two

// One frequency multiplet of the coupling superoperators: the difference
// eigenvalue (commutator) and, for complex noise, additionally the sum
// eigenvalue (anticommutator).  pairs lists the (a,b) coupling-eigenspace
// index pairs that share the multiplet.
struct EigenEntry {
  std::vector<double> freq;
  std::vector<std::pair<int, int>> pairs;
  long multiplicity = 0;
};

struct LiouvilleSystem {
  Mat h0, v;        // padded copies
  long d = 0;       // padded dimension
  long d_phys = 0;
  bool complex_noise = false;  // anticommutator channel active
  Mat l0, l1m, l1p;            // d^2 x d^2 superoperators

  std::vector<Mat> vproj;      // eigenspace projectors of v (padded, d x d)
  std::vector<double> veig;    // one eigenvalue per projector
  std::vector<EigenEntry> table;               // sorted lexicographically by freq
  std::vector<std::pair<double, double>> freq_range;  // per noise component
  int n_comp() const { return complex_noise ? 2 : 1; }
};

// grouping_tol is relative to the largest frequency magnitude
LiouvilleSystem build_liouville(const HilbertSystem& sys, bool complex_noise,
                                double grouping_tol = 1e-10);

// Dense spectral projector of the commutator/anticommutator pair for one entry.
Mat eigenprojector(const LiouvilleSystem& ls, const EigenEntry& e);

// Noise-free step split symmetrically around the kernel insertion point.
struct FreePropagator {
  double tau = 0;
  Mat uhalf;                              // exp(-i h0 tau/2) on the padded space
  std::vector<Mat> g0;                    // dense per-entry half-step sandwich
  std::vector<ttcore::TensorTrain> mpo;   // same operators over 2q qubit sites
};

FreePropagator free_propagator(const LiouvilleSystem& ls, double tau);

// Fills FreePropagator::mpo.  Column qubits of rho occupy sites 1..q (most
// significant first), row qubits sites q+1..2q, matching the vectorization
// v = i + d*j.
void tensorize_propagator(const LiouvilleSystem& ls, FreePropagator& fp,
                          const ttcore::SvdPolicy& pol);

// benchmark model builders
HilbertSystem spin_boson(double omega, double epsilon, double alpha);
HilbertSystem tight_binding_chain(long d, double hop, double epsilon, double alpha);

Mat kron(const Mat& a, const Mat& b);
Mat matexp(const Mat& a);

}  // namespace tenprop::liouville
