#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tenprop/types.hpp"

namespace tenprop::ttcore {

// Rank selection: keep the smallest r such that the discarded tail satisfies
// sum_{i>=r} s_i^2 <= eps^2 * sum_{i<r} s_i^2.  max_bond (0 = unlimited) wins
// over eps when both apply.
struct SvdPolicy {
  double eps = 1e-12;
  long max_bond = 0;
};

// One train core.  Entry order is (left bond, phys row, phys col, right bond),
// flattened with the left bond slowest:
//   data[((l*pr + r)*pc + c)*br + b]
// A matrix-product state is the pc == 1 special case.
struct Core {
  long bl = 1, pr = 1, pc = 1, br = 1;
  Vec data;

  Core() = default;
  Core(long bl_, long pr_, long pc_, long br_)
      : bl(bl_), pr(pr_), pc(pc_), br(br_), data(Vec::Zero(bl_ * pr_ * pc_ * br_)) {}

  cplx& at(long l, long r, long c, long b) { return data[((l * pr + r) * pc + c) * br + b]; }
  cplx at(long l, long r, long c, long b) const { return data[((l * pr + r) * pc + c) * br + b]; }
  long phys() const { return pr * pc; }

  // (bl) x (pr*pc*br), rows contiguous
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> left_mat() const;
  // (bl*pr*pc) x (br)
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> right_mat() const;
};

struct TensorTrain {
  std::vector<Core> cores;

  long length() const { return (long)cores.size(); }
  long max_bond() const;
  std::size_t bytes() const;
  std::vector<long> bond_dims() const;  // r_0..r_L (includes the unit edges)
};

// Dense layout convention: row index is the big-endian concatenation of the
// per-site phys rows (site 1 most significant), columns likewise.  A train
// with all pc == 1 densifies to a column vector.
Mat to_dense(const TensorTrain& t);

// Sequential SVD sweep over the given per-site (pr, pc) list.
TensorTrain tt_svd(const Mat& dense, const std::vector<std::pair<long, long>>& phys,
                   const SvdPolicy& pol);

// Direct sum of bond spaces; dense(a) + dense(b).  Phys dims must match.
TensorTrain mpo_add(const TensorTrain& a, const TensorTrain& b);

// Append m as a new rightmost core on a unit bond; dense result is
// kron(dense(a), m).  Requires the last bond of a to be 1.
TensorTrain tensor_append(const TensorTrain& a, const Mat& m);

// Site-wise product contraction a*b (a's phys columns against b's phys rows)
// with interleaved truncation; works for MPO x MPO and MPO x MPS.
TensorTrain zip_up(const TensorTrain& a, const TensorTrain& b, const SvdPolicy& pol);

// Right-to-left orthogonalization followed by a left-to-right truncating sweep.
void recompress(TensorTrain& t, const SvdPolicy& pol);

void scale(TensorTrain& t, cplx s);

TensorTrain identity_mpo(long n_sites, long p);

// Fold a pr==pc==1 core (a pure bond matrix) into its right neighbour, or the
// left one for the last site.  Exact.
void squeeze_site(TensorTrain& t, long site);

// low-level building blocks shared with other modules
struct SvdResult {
  Mat u;
  RVec s;
  Mat v;  // a = u * s.asDiagonal() * v.adjoint()
};
SvdResult truncated_svd(const Mat& a, const SvdPolicy& pol);
long rank_by_policy(const RVec& s, const SvdPolicy& pol);

}  // namespace tenprop::ttcore
