#include "tenprop/ttcore.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cassert>

namespace tenprop::ttcore {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> Core::left_mat() const {
  return Eigen::Map<const RowMat>(data.data(), bl, pr * pc * br);
}

Eigen::Map<const RowMat> Core::right_mat() const {
  return Eigen::Map<const RowMat>(data.data(), bl * pr * pc, br);
}

long TensorTrain::max_bond() const {
  long m = 1;
  for (const auto& c : cores) m = std::max({m, c.bl, c.br});
  return m;
}

std::size_t TensorTrain::bytes() const {
  std::size_t n = 0;
  for (const auto& c : cores) n += sizeof(cplx) * (std::size_t)c.data.size();
  return n;
}

std::vector<long> TensorTrain::bond_dims() const {
  std::vector<long> b;
  if (cores.empty()) return b;
  b.push_back(cores.front().bl);
  for (const auto& c : cores) b.push_back(c.br);
  return b;
}

long rank_by_policy(const RVec& s, const SvdPolicy& pol) {
  const long n = s.size();
  if (n == 0) return 0;
  double total = 0;
  for (long i = 0; i < n; ++i) total += s[i] * s[i];
  long r = n;
  double tail = 0;
  // tail(r) = sum_{i>=r}; scan candidate ranks from the smallest tail upward
  std::vector<double> tails(n + 1, 0.0);
  for (long i = n - 1; i >= 0; --i) tails[i] = tails[i + 1] + s[i] * s[i];
  for (long cand = 1; cand <= n; ++cand) {
    tail = tails[cand];
    const double kept = total - tail;
    if (tail <= pol.eps * pol.eps * kept) {
      r = cand;
      break;
    }
  }
  if (pol.max_bond > 0) r = std::min(r, pol.max_bond);
  return std::max<long>(r, 1);
}

SvdResult truncated_svd(const Mat& a, const SvdPolicy& pol) {
  const long mn = std::min(a.rows(), a.cols());
  Mat u, v;
  RVec s;
  if (mn <= 48) {
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  } else {
    Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  }
  const long r = rank_by_policy(s, pol);
  return {u.leftCols(r), s.head(r), v.leftCols(r)};
}

Mat to_dense(const TensorTrain& t) {
  const long L = t.length();
  assert(L > 0);
  // running tensor over fused site indices with a trailing open bond
  RowMat buf = RowMat::Ones(1, 1);
  long fused = 1;
  for (long k = 0; k < L; ++k) {
    const Core& c = t.cores[k];
    RowMat nxt = buf * c.left_mat();  // (fused) x (phys*br)
    fused *= c.phys();
    buf = Eigen::Map<RowMat>(nxt.data(), fused, c.br);
  }
  // distribute fused (site-major) index into big-endian (row, col)
  long R = 1, C = 1;
  for (const auto& c : t.cores) {
    R *= c.pr;
    C *= c.pc;
  }
  Mat out(R, C);
  for (long f = 0; f < fused; ++f) {
    long rem = f, row = 0, col = 0;
    long rs = R, cs = C;
    long div = fused;
    for (const auto& c : t.cores) {
      div /= c.phys();
      const long s = rem / div;
      rem %= div;
      rs /= c.pr;
      cs /= c.pc;
      row += (s / c.pc) * rs;
      col += (s % c.pc) * cs;
    }
    out(row, col) = buf(f, 0);
  }
  return out;
}

TensorTrain tt_svd(const Mat& dense, const std::vector<std::pair<long, long>>& phys,
                   const SvdPolicy& pol) {
  const long L = (long)phys.size();
  assert(L > 0);
  long total = 1, R = 1, C = 1;
  for (auto [pr, pc] : phys) {
    total *= pr * pc;
    R *= pr;
    C *= pc;
  }
  assert(dense.rows() == R && dense.cols() == C);

  std::vector<cplx> flat((std::size_t)total);
  for (long f = 0; f < total; ++f) {
    long rem = f, row = 0, col = 0;
    long rs = R, cs = C, div = total;
    for (auto [pr, pc] : phys) {
      div /= pr * pc;
      const long s = rem / div;
      rem %= div;
      rs /= pr;
      cs /= pc;
      row += (s / pc) * rs;
      col += (s % pc) * cs;
    }
    flat[(std::size_t)f] = dense(row, col);
  }

  TensorTrain t;
  long bond = 1;
  long rest = total;
  std::vector<cplx> cur = std::move(flat);
  for (long k = 0; k < L; ++k) {
    const long p = phys[k].first * phys[k].second;
    rest /= p;
    Eigen::Map<RowMat> m(cur.data(), bond * p, rest);
    if (k == L - 1) {
      Core core(bond, phys[k].first, phys[k].second, 1);
      for (long l = 0; l < bond; ++l)
        for (long s = 0; s < p; ++s) core.data[(l * p + s)] = m(l * p + s, 0);
      t.cores.push_back(std::move(core));
      break;
    }
    SvdResult svd = truncated_svd(m, pol);
    const long rk = svd.s.size();
    Core core(bond, phys[k].first, phys[k].second, rk);
    for (long l = 0; l < bond; ++l)
      for (long s = 0; s < p; ++s)
        for (long b = 0; b < rk; ++b) core.data[((l * p + s) * rk) + b] = svd.u(l * p + s, b);
    t.cores.push_back(std::move(core));
    Mat carry = svd.s.asDiagonal() * svd.v.adjoint();  // rk x rest
    cur.assign((std::size_t)(rk * rest), cplx(0));
    Eigen::Map<RowMat>(cur.data(), rk, rest) = carry;
    bond = rk;
  }
  return t;
}

TensorTrain mpo_add(const TensorTrain& a, const TensorTrain& b) {
  const long L = a.length();
  assert(L == b.length());
  TensorTrain t;
  if (L == 1) {
    Core c = a.cores[0];
    c.data += b.cores[0].data;
    t.cores.push_back(std::move(c));
    return t;
  }
  for (long k = 0; k < L; ++k) {
    const Core& x = a.cores[k];
    const Core& y = b.cores[k];
    assert(x.pr == y.pr && x.pc == y.pc);
    const long bl = (k == 0) ? 1 : x.bl + y.bl;
    const long br = (k == L - 1) ? 1 : x.br + y.br;
    Core c(bl, x.pr, x.pc, br);
    for (long r = 0; r < x.pr; ++r)
      for (long cc = 0; cc < x.pc; ++cc) {
        for (long l = 0; l < x.bl; ++l)
          for (long bb = 0; bb < x.br; ++bb) c.at(l, r, cc, bb) = x.at(l, r, cc, bb);
        const long lo = (k == 0) ? 0 : x.bl;
        const long bo = (k == L - 1) ? 0 : x.br;
        for (long l = 0; l < y.bl; ++l)
          for (long bb = 0; bb < y.br; ++bb) c.at(lo + l, r, cc, bo + bb) = y.at(l, r, cc, bb);
      }
    t.cores.push_back(std::move(c));
  }
  return t;
}

TensorTrain tensor_append(const TensorTrain& a, const Mat& m) {
  assert(a.cores.back().br == 1);
  TensorTrain t = a;
  Core c(1, m.rows(), m.cols(), 1);
  for (long r = 0; r < m.rows(); ++r)
    for (long cc = 0; cc < m.cols(); ++cc) c.at(0, r, cc, 0) = m(r, cc);
  t.cores.push_back(std::move(c));
  return t;
}

void scale(TensorTrain& t, cplx s) { t.cores.front().data *= s; }

TensorTrain identity_mpo(long n_sites, long p) {
  TensorTrain t;
  for (long k = 0; k < n_sites; ++k) {
    Core c(1, p, p, 1);
    for (long r = 0; r < p; ++r) c.at(0, r, r, 0) = 1.0;
    t.cores.push_back(std::move(c));
  }
  return t;
}

TensorTrain zip_up(const TensorTrain& a, const TensorTrain& b, const SvdPolicy& pol) {
  const long L = a.length();
  assert(L == b.length());
  TensorTrain t;
  Mat w = Mat::Ones(1, 1);  // (new bond) x (al*bl fused, al-major)
  for (long k = 0; k < L; ++k) {
    const Core& A = a.cores[k];
    const Core& B = b.cores[k];
    assert(A.pc == B.pr);
    const long AL = A.bl, AR = A.br, BL = B.bl, BR = B.br;
    const long P = A.pr, M = A.pc, C = B.pc;
    const long W = w.rows();

    Mat wp(W * BL, AL);
    for (long x = 0; x < W; ++x)
      for (long bl = 0; bl < BL; ++bl)
        for (long al = 0; al < AL; ++al) wp(x * BL + bl, al) = w(x, al * BL + bl);

    Mat xm = wp * A.left_mat();  // (W*BL) x (P*M*AR)

    Mat xp(W * P * AR, BL * M);
    for (long x = 0; x < W; ++x)
      for (long r = 0; r < P; ++r)
        for (long ar = 0; ar < AR; ++ar)
          for (long bl = 0; bl < BL; ++bl)
            for (long m = 0; m < M; ++m)
              xp((x * P + r) * AR + ar, bl * M + m) = xm(x * BL + bl, (r * M + m) * AR + ar);

    Mat bm(BL * M, C * BR);
    for (long bl = 0; bl < BL; ++bl)
      for (long m = 0; m < M; ++m)
        for (long c = 0; c < C; ++c)
          for (long br = 0; br < BR; ++br) bm(bl * M + m, c * BR + br) = B.at(bl, m, c, br);

    Mat z = xp * bm;  // (W*P*AR) x (C*BR)

    Mat tm(W * P * C, AR * BR);
    for (long x = 0; x < W; ++x)
      for (long r = 0; r < P; ++r)
        for (long c = 0; c < C; ++c)
          for (long ar = 0; ar < AR; ++ar)
            for (long br = 0; br < BR; ++br)
              tm((x * P + r) * C + c, ar * BR + br) = z((x * P + r) * AR + ar, c * BR + br);

    if (k == L - 1) {
      assert(AR * BR == 1);
      Core core(W, P, C, 1);
      for (long x = 0; x < W; ++x)
        for (long r = 0; r < P; ++r)
          for (long c = 0; c < C; ++c) core.at(x, r, c, 0) = tm((x * P + r) * C + c, 0);
      t.cores.push_back(std::move(core));
      break;
    }
    SvdResult svd = truncated_svd(tm, pol);
    const long rk = svd.s.size();
    Core core(W, P, C, rk);
    for (long x = 0; x < W; ++x)
      for (long r = 0; r < P; ++r)
        for (long c = 0; c < C; ++c)
          for (long bb = 0; bb < rk; ++bb) core.at(x, r, c, bb) = svd.u((x * P + r) * C + c, bb);
    t.cores.push_back(std::move(core));
    w = svd.s.asDiagonal() * svd.v.adjoint();  // rk x (AR*BR)
  }
  return t;
}

void recompress(TensorTrain& t, const SvdPolicy& pol) {
  const long L = t.length();
  if (L <= 1) return;

  // right-to-left: bring every core to row-orthonormal form, pushing the
  // remainder leftwards (no truncation here)
  for (long k = L - 1; k >= 1; --k) {
    Core& c = t.cores[k];
    const long K = c.pr * c.pc * c.br;
    Mat m = c.left_mat();  // bl x K
    Eigen::HouseholderQR<Mat> qr(m.adjoint());
    const long rn = std::min<long>(c.bl, K);
    Mat q = qr.householderQ() * Mat::Identity(K, rn);
    Mat rr = qr.matrixQR().topRows(rn).triangularView<Eigen::Upper>();  // rn x bl
    Mat qa = q.adjoint();                                               // rn x K
    Core nc(rn, c.pr, c.pc, c.br);
    for (long l = 0; l < rn; ++l)
      for (long j = 0; j < K; ++j) nc.data[l * K + j] = qa(l, j);
    Mat carry = rr.adjoint();  // bl x rn
    Core& p = t.cores[k - 1];
    Mat np = p.right_mat() * carry;  // (bl*pr*pc) x rn
    Core npc(p.bl, p.pr, p.pc, rn);
    for (long i = 0; i < np.rows(); ++i)
      for (long b = 0; b < rn; ++b) npc.data[i * rn + b] = np(i, b);
    t.cores[k] = std::move(nc);
    t.cores[k - 1] = std::move(npc);
  }

  // left-to-right truncating sweep
  for (long k = 0; k < L - 1; ++k) {
    Core& c = t.cores[k];
    Mat m = c.right_mat();  // (bl*pr*pc) x br
    SvdResult svd = truncated_svd(m, pol);
    const long rk = svd.s.size();
    Core nc(c.bl, c.pr, c.pc, rk);
    for (long i = 0; i < m.rows(); ++i)
      for (long b = 0; b < rk; ++b) nc.data[i * rk + b] = svd.u(i, b);
    Mat carry = svd.s.asDiagonal() * svd.v.adjoint();  // rk x br
    Core& nx = t.cores[k + 1];
    Mat nn = carry * nx.left_mat();  // rk x (pr*pc*br)
    Core nxc(rk, nx.pr, nx.pc, nx.br);
    const long K = nx.pr * nx.pc * nx.br;
    for (long l = 0; l < rk; ++l)
      for (long j = 0; j < K; ++j) nxc.data[l * K + j] = nn(l, j);
    t.cores[k] = std::move(nc);
    t.cores[k + 1] = std::move(nxc);
  }
}

void squeeze_site(TensorTrain& t, long site) {
  Core& c = t.cores[site];
  assert(c.pr == 1 && c.pc == 1);
  Mat b(c.bl, c.br);
  for (long l = 0; l < c.bl; ++l)
    for (long r = 0; r < c.br; ++r) b(l, r) = c.at(l, 0, 0, r);
  if (site + 1 < t.length()) {
    Core& nx = t.cores[site + 1];
    Mat nn = b * nx.left_mat();  // bl x (pr*pc*br)
    Core nc(c.bl, nx.pr, nx.pc, nx.br);
    const long K = nx.pr * nx.pc * nx.br;
    for (long l = 0; l < c.bl; ++l)
      for (long j = 0; j < K; ++j) nc.data[l * K + j] = nn(l, j);
    t.cores[site + 1] = std::move(nc);
  } else {
    Core& pv = t.cores[site - 1];
    Mat nn = pv.right_mat() * b;  // (bl*pr*pc) x br
    Core nc(pv.bl, pv.pr, pv.pc, c.br);
    for (long i = 0; i < nn.rows(); ++i)
      for (long j = 0; j < c.br; ++j) nc.data[i * c.br + j] = nn(i, j);
    t.cores[site - 1] = std::move(nc);
  }
  t.cores.erase(t.cores.begin() + site);
}

}  // namespace tenprop::ttcore
