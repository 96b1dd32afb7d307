#include "tenprop/liouville.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>

namespace tenprop::liouville {

Vec vectorize(const Mat& rho) {
  const long d = rho.rows();
  Vec x(d * d);
  for (long j = 0; j < d; ++j)
    for (long i = 0; i < d; ++i) x[i + d * j] = rho(i, j);
  return x;
}

Mat devectorize(const Vec& x) {
  const long d = (long)std::llround(std::sqrt((double)x.size()));
  Mat rho(d, d);
  for (long j = 0; j < d; ++j)
    for (long i = 0; i < d; ++i) rho(i, j) = x[i + d * j];
  return rho;
}

long qubit_count(long d) {
  long q = 0;
  while ((1L << q) < d) ++q;
  return q;
}

Mat pad_pow2(const Mat& m) {
  const long d = m.rows();
  const long dp = 1L << qubit_count(d);
  if (dp == d) return m;
  Mat p = Mat::Zero(dp, dp);
  p.topLeftCorner(d, d) = m;
  return p;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

Mat matexp(const Mat& a) { return a.exp(); }

static void check_hermitian(const Mat& m, const char* name) {
  const double dev = (m - m.adjoint()).norm();
  if (dev > 1e-10 * std::max(1.0, m.norm()))
    throw ConfigError(std::string(name) + " is not Hermitian within tolerance");
}

LiouvilleSystem build_liouville(const HilbertSystem& sys, bool complex_noise, double grouping_tol) {
  if (sys.h0.rows() != sys.h0.cols() || sys.v.rows() != sys.v.cols() ||
      sys.h0.rows() != sys.v.rows() || sys.h0.rows() < 1)
    throw ConfigError("system operators must be square and of equal dimension");
  check_hermitian(sys.h0, "h0");
  check_hermitian(sys.v, "coupling operator");

  LiouvilleSystem ls;
  ls.d_phys = sys.h0.rows();
  ls.h0 = pad_pow2(sys.h0);
  ls.v = pad_pow2(sys.v);
  ls.d = ls.h0.rows();
  ls.complex_noise = complex_noise;

  const Mat id = Mat::Identity(ls.d, ls.d);
  ls.l0 = kron(id, ls.h0) - kron(ls.h0.transpose(), id);
  ls.l1m = kron(id, ls.v) - kron(ls.v.transpose(), id);
  ls.l1p = kron(id, ls.v) + kron(ls.v.transpose(), id);

  Eigen::SelfAdjointEigenSolver<Mat> es(ls.v);
  const RVec ev = es.eigenvalues();
  const Mat u = es.eigenvectors();

  double vmax = 0;
  for (long i = 0; i < ls.d; ++i) vmax = std::max(vmax, std::abs(ev[i]));
  const double tol = grouping_tol * std::max(2.0 * vmax, 1e-300);

  // cluster the sorted eigenvalues into degenerate spaces
  long i = 0;
  while (i < ls.d) {
    long j = i;
    while (j + 1 < ls.d && ev[j + 1] - ev[i] <= tol) ++j;
    Mat p = Mat::Zero(ls.d, ls.d);
    double mean = 0;
    for (long k = i; k <= j; ++k) {
      p += u.col(k) * u.col(k).adjoint();
      mean += ev[k];
    }
    ls.vproj.push_back(p);
    ls.veig.push_back(mean / (double)(j - i + 1));
    i = j + 1;
  }

  const int ns = (int)ls.vproj.size();
  const int nc = complex_noise ? 2 : 1;
  for (int a = 0; a < ns; ++a)
    for (int b = 0; b < ns; ++b) {
      std::vector<double> f = {ls.veig[a] - ls.veig[b]};
      if (complex_noise) f.push_back(ls.veig[a] + ls.veig[b]);
      const long mult = (long)std::llround(ls.vproj[a].trace().real() * ls.vproj[b].trace().real());
      bool merged = false;
      for (auto& e : ls.table) {
        bool same = true;
        for (int c = 0; c < nc; ++c)
          if (std::abs(e.freq[c] - f[c]) > tol) same = false;
        if (same) {
          e.pairs.emplace_back(a, b);
          e.multiplicity += mult;
          merged = true;
          break;
        }
      }
      if (!merged) {
        EigenEntry e;
        e.freq = f;
        e.pairs.emplace_back(a, b);
        e.multiplicity = mult;
        ls.table.push_back(std::move(e));
      }
    }
  std::sort(ls.table.begin(), ls.table.end(), [](const EigenEntry& x, const EigenEntry& y) {
    return std::lexicographical_compare(x.freq.begin(), x.freq.end(), y.freq.begin(), y.freq.end());
  });

  ls.freq_range.assign(nc, {0, 0});
  for (int c = 0; c < nc; ++c) {
    double lo = ls.table.front().freq[c], hi = lo;
    for (const auto& e : ls.table) {
      lo = std::min(lo, e.freq[c]);
      hi = std::max(hi, e.freq[c]);
    }
    ls.freq_range[c] = {lo, hi};
  }
  return ls;
}

Mat eigenprojector(const LiouvilleSystem& ls, const EigenEntry& e) {
  Mat p = Mat::Zero(ls.d * ls.d, ls.d * ls.d);
  for (auto [a, b] : e.pairs) p += kron(ls.vproj[b].conjugate(), ls.vproj[a]);
  return p;
}

FreePropagator free_propagator(const LiouvilleSystem& ls, double tau) {
  FreePropagator fp;
  fp.tau = tau;
  Eigen::SelfAdjointEigenSolver<Mat> es(ls.h0);
  Vec ph(ls.d);
  for (long i = 0; i < ls.d; ++i) ph[i] = std::exp(cplx(0, -0.5 * tau * es.eigenvalues()[i]));
  fp.uhalf = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  for (const auto& e : ls.table) {
    Mat g = Mat::Zero(ls.d * ls.d, ls.d * ls.d);
    for (auto [a, b] : e.pairs) {
      const Mat ma = fp.uhalf * ls.vproj[a] * fp.uhalf;
      const Mat mb = fp.uhalf * ls.vproj[b] * fp.uhalf;
      g += kron(mb.conjugate(), ma);
    }
    fp.g0.push_back(std::move(g));
  }
  return fp;
}

void tensorize_propagator(const LiouvilleSystem& ls, FreePropagator& fp, const ttcore::SvdPolicy& pol) {
  const long q = qubit_count(ls.d);
  const std::vector<std::pair<long, long>> qphys(q, {2, 2});
  fp.mpo.clear();
  for (const auto& e : ls.table) {
    ttcore::TensorTrain acc;
    bool first = true;
    for (auto [a, b] : e.pairs) {
      const Mat ma = fp.uhalf * ls.vproj[a] * fp.uhalf;
      const Mat mb = fp.uhalf * ls.vproj[b] * fp.uhalf;
      ttcore::TensorTrain left = ttcore::tt_svd(mb.conjugate(), qphys, pol);
      ttcore::TensorTrain right = ttcore::tt_svd(ma, qphys, pol);
      for (auto& c : right.cores) left.cores.push_back(std::move(c));
      if (first) {
        acc = std::move(left);
        first = false;
      } else {
        acc = ttcore::mpo_add(acc, left);
        ttcore::recompress(acc, pol);
      }
    }
    fp.mpo.push_back(std::move(acc));
  }
}

HilbertSystem spin_boson(double omega, double epsilon, double alpha) {
  Mat sx(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  return {omega * sx + epsilon * sz, alpha * sz};
}

HilbertSystem tight_binding_chain(long d, double hop, double epsilon, double alpha) {
  if (d < 2) throw ConfigError("chain needs at least two sites");
  Mat h0 = Mat::Zero(d, d);
  Mat v = Mat::Zero(d, d);
  for (long n = 0; n < d; ++n) {
    h0(n, n) = epsilon;
    h0(n, (n + 1) % d) += hop;
    h0((n + 1) % d, n) += hop;
    v(n, n) = alpha * ((n % 2 == 0) ? 1.0 : -1.0);
  }
  return {h0, v};
}

}  // namespace tenprop::liouville
