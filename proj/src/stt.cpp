#include "tenprop/stt.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tenprop::stt {

double ChebyshevBasis::to_unit(double w) const {
  const double u = (2.0 * w - lo - hi) / (hi - lo);
  return std::clamp(u, -1.0, 1.0);
}

void ChebyshevBasis::eval(double w, RVec& out) const {
  const double x = to_unit(w);
  out.resize(n);
  out[0] = 1.0;
  if (n > 1) out[1] = x;
  for (int k = 2; k < n; ++k) out[k] = 2.0 * x * out[k - 1] - out[k - 2];
}

std::vector<double> ChebyshevBasis::nodes() const {
  std::vector<double> v((std::size_t)n);
  for (int i = 0; i < n; ++i) {
    const double x = std::cos((2.0 * (n - 1 - i) + 1.0) * pi / (2.0 * n));
    v[(std::size_t)i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
  }
  return v;
}

std::vector<double> ChebyshevBasis::node_pmf() const {
  // Gauss-Chebyshev weights are uniform; keep the normalization explicit
  std::vector<double> w((std::size_t)n, pi / (double)n);
  double s = 0;
  for (double x : w) s += x;
  for (double& x : w) x /= s;
  return w;
}

ChebyshevBasis basis_for_range(double lo, double hi, int n) {
  if (n < 1) throw ConfigError("basis size must be positive");
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {n, lo, hi};
}

Mat LinkingMatrixSet::slot_eval(int s, double w) const {
  const TransferSlot& sl = slots[(std::size_t)s];
  RVec psi;
  basis[(std::size_t)sl.comp].eval(w, psi);
  Mat m = Mat::Zero(sl.rows, sl.cols);
  for (int k = 0; k < n_basis; ++k) m += psi[k] * sl.coef[(std::size_t)k];
  return m;
}

cplx LinkingMatrixSet::eval(const std::vector<double>& w) const {
  Mat acc = slot_eval(0, w[0]);
  for (std::size_t s = 1; s < slots.size(); ++s) acc = acc * slot_eval((int)s, w[s]);
  return acc(0, 0);
}

std::size_t LinkingMatrixSet::parameter_count() const {
  std::size_t p = 0;
  for (const auto& s : slots) p += (std::size_t)(s.rows * s.cols * n_basis);
  return p;
}

cplx transfer_function_exact(const noise::CorrelationMatrix& cm, const std::vector<Vec>& x) {
  cplx e = 0;
  const long depth = std::min<long>((long)x.size() - 1, cm.mem);
  for (long d = 0; d <= depth; ++d) e += (x[0].transpose() * cm.causal(d) * x[(std::size_t)d]).value();
  return std::exp(-e);
}

cplx kernel_exact(const noise::CorrelationMatrix& cm, const std::vector<Vec>& path) {
  return std::exp(-cm.causal_form(path));
}

LinkingMatrixSet init_linking_set(int n_slice, long mem, int m_comp, int n_basis, long bond,
                                  const std::vector<ChebyshevBasis>& basis, bool complex_coef,
                                  std::uint64_t seed, double sigma) {
  LinkingMatrixSet set;
  set.n_slice = n_slice;
  set.m_comp = m_comp;
  set.span = (int)span_of(n_slice, mem);
  set.n_basis = n_basis;
  set.bond = bond;
  set.basis = basis;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int ns = set.span * m_comp;
  for (int s = 0; s < ns; ++s) {
    TransferSlot sl;
    sl.comp = s % m_comp;
    sl.rows = (s == 0) ? 1 : bond;
    sl.cols = (s == ns - 1) ? 1 : bond;
    for (int k = 0; k < n_basis; ++k) {
      Mat c = Mat::Zero(sl.rows, sl.cols);
      if (k == 0)
        for (long i = 0; i < std::min(sl.rows, sl.cols); ++i) c(i, i) = 1.0;
      for (long i = 0; i < sl.rows; ++i)
        for (long j = 0; j < sl.cols; ++j) {
          cplx noise(sigma * nd(rng), 0);
          if (complex_coef) noise += cplx(0, sigma * nd(rng));
          c(i, j) += noise;
        }
      sl.coef.push_back(std::move(c));
    }
    set.slots.push_back(std::move(sl));
  }
  return set;
}

NodeBatch sample_training_points(const LinkingMatrixSet& set, long count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NodeBatch pts;
  std::vector<std::discrete_distribution<int>> dist;
  for (const auto& sl : set.slots) {
    auto pmf = set.basis[(std::size_t)sl.comp].node_pmf();
    dist.emplace_back(pmf.begin(), pmf.end());
  }
  for (long i = 0; i < count; ++i) {
    std::vector<int> p;
    for (auto& d : dist) p.push_back(d(rng));
    pts.push_back(std::move(p));
  }
  return pts;
}

namespace {

struct EvalCache {
  // per slot: node frequencies and basis values psi(node, k)
  std::vector<std::vector<double>> freq;
  std::vector<RMat> psi;
  // per slot, per node: evaluated slot matrix
  std::vector<std::vector<Mat>> m;
};

EvalCache make_cache(const LinkingMatrixSet& set) {
  EvalCache c;
  for (const auto& sl : set.slots) {
    const auto& b = set.basis[(std::size_t)sl.comp];
    auto nodes = b.nodes();
    RMat psi((long)nodes.size(), set.n_basis);
    RVec row;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      b.eval(nodes[i], row);
      psi.row((long)i) = row;
    }
    c.freq.push_back(std::move(nodes));
    c.psi.push_back(std::move(psi));
  }
  c.m.resize(set.slots.size());
  return c;
}

void refresh_cache(const LinkingMatrixSet& set, EvalCache& c) {
  for (std::size_t s = 0; s < set.slots.size(); ++s) {
    const TransferSlot& sl = set.slots[s];
    const long nn = (long)c.freq[s].size();
    c.m[s].assign((std::size_t)nn, Mat());
    for (long i = 0; i < nn; ++i) {
      Mat m = Mat::Zero(sl.rows, sl.cols);
      for (int k = 0; k < set.n_basis; ++k) m += c.psi[s](i, k) * sl.coef[(std::size_t)k];
      c.m[s][(std::size_t)i] = std::move(m);
    }
  }
}

cplx target_value(const LinkingMatrixSet& set, const noise::CorrelationMatrix& cm,
                  const EvalCache& c, const std::vector<int>& idx) {
  std::vector<Vec> x((std::size_t)set.span, Vec::Zero(set.m_comp));
  for (std::size_t s = 0; s < set.slots.size(); ++s) {
    const long d = (long)s / set.m_comp;
    const long comp = (long)s % set.m_comp;
    x[(std::size_t)d][comp] = c.freq[s][(std::size_t)idx[s]];
  }
  return transfer_function_exact(cm, x);
}

}  // namespace

double loss_on(const LinkingMatrixSet& set, const noise::CorrelationMatrix& cm, const NodeBatch& pts) {
  if (pts.empty()) throw ConfigError("loss requires a nonempty sample set");
  EvalCache c = make_cache(set);
  refresh_cache(set, c);
  double acc = 0;
  for (const auto& p : pts) {
    Mat v = c.m[0][(std::size_t)p[0]];
    for (std::size_t s = 1; s < set.slots.size(); ++s) v = v * c.m[s][(std::size_t)p[s]];
    const cplx r = v(0, 0) - target_value(set, cm, c, p);
    acc += std::norm(r);
  }
  return acc / (double)pts.size();
}

void loss_and_grad(const LinkingMatrixSet& set, const noise::CorrelationMatrix& cm,
                   const NodeBatch& pts, double& loss, std::vector<std::vector<Mat>>& grad) {
  if (pts.empty()) throw ConfigError("loss requires a nonempty sample set");
  EvalCache c = make_cache(set);
  refresh_cache(set, c);
  const std::size_t ns = set.slots.size();

  // per (slot, node) accumulated residual-weighted conjugate environments
  std::vector<std::vector<Mat>> env(ns);
  for (std::size_t s = 0; s < ns; ++s)
    env[s].assign(c.freq[s].size(), Mat::Zero(set.slots[s].rows, set.slots[s].cols));

  loss = 0;
  std::vector<Mat> lft(ns), rgt(ns);
  for (const auto& p : pts) {
    lft[0] = Mat::Ones(1, 1);
    for (std::size_t s = 1; s < ns; ++s) lft[s] = lft[s - 1] * c.m[s - 1][(std::size_t)p[s - 1]];
    rgt[ns - 1] = Mat::Ones(1, 1);
    for (std::size_t s = ns - 1; s > 0; --s) rgt[s - 1] = c.m[s][(std::size_t)p[s]] * rgt[s];
    const cplx v = (lft[ns - 1] * c.m[ns - 1][(std::size_t)p[ns - 1]])(0, 0);
    const cplx r = v - target_value(set, cm, c, p);
    loss += std::norm(r);
    for (std::size_t s = 0; s < ns; ++s)
      env[s][(std::size_t)p[s]] += r * (lft[s].adjoint() * rgt[s].adjoint());
  }
  loss /= (double)pts.size();

  grad.assign(ns, {});
  const double w = 2.0 / (double)pts.size();
  for (std::size_t s = 0; s < ns; ++s) {
    grad[s].assign((std::size_t)set.n_basis, Mat::Zero(set.slots[s].rows, set.slots[s].cols));
    for (std::size_t i = 0; i < env[s].size(); ++i)
      for (int k = 0; k < set.n_basis; ++k) grad[s][(std::size_t)k] += w * c.psi[s]((long)i, k) * env[s][i];
  }
}

TrainResult train(LinkingMatrixSet& set, const noise::CorrelationMatrix& cm, const TrainingConfig& tc) {
  TrainResult res;
  const NodeBatch val = sample_training_points(set, tc.val_points, tc.seed ^ 0x5DEECE66DULL);
  std::mt19937_64 rng(tc.seed);
  std::vector<std::discrete_distribution<int>> dist;
  for (const auto& sl : set.slots) {
    auto pmf = set.basis[(std::size_t)sl.comp].node_pmf();
    dist.emplace_back(pmf.begin(), pmf.end());
  }
  const long decay_every = tc.decay_every > 0 ? tc.decay_every : std::max<long>(tc.max_steps / 6, 1);

  double vloss = loss_on(set, cm, val);
  res.curve.push_back({0, vloss});
  if (tc.target_loss > 0 && vloss <= tc.target_loss) {
    res.final_loss = vloss;
    return res;
  }
  NodeBatch batch((std::size_t)tc.batch, std::vector<int>(set.slots.size()));
  std::vector<std::vector<Mat>> grad, vel;
  vel.resize(set.slots.size());
  for (std::size_t s = 0; s < set.slots.size(); ++s)
    vel[s].assign((std::size_t)set.n_basis, Mat::Zero(set.slots[s].rows, set.slots[s].cols));
  for (long step = 1; step <= tc.max_steps; ++step) {
    for (auto& p : batch)
      for (std::size_t s = 0; s < dist.size(); ++s) p[s] = dist[s](rng);
    double bloss;
    loss_and_grad(set, cm, batch, bloss, grad);
    if (!std::isfinite(bloss))
      throw NumericalError("training diverged at step " + std::to_string(step));
    const double lr = tc.lr * std::pow(tc.lr_decay, (double)(step / decay_every));
    for (std::size_t s = 0; s < set.slots.size(); ++s)
      for (int k = 0; k < set.n_basis; ++k) {
        auto& v = vel[s][(std::size_t)k];
        v = tc.momentum * v + grad[s][(std::size_t)k];
        set.slots[s].coef[(std::size_t)k] -= lr * v;
      }
    if (step % tc.log_every == 0 || step == tc.max_steps) {
      vloss = loss_on(set, cm, val);
      if (!std::isfinite(vloss))
        throw NumericalError("training diverged at step " + std::to_string(step));
      res.curve.push_back({step, vloss});
      res.steps = step;
      if (tc.target_loss > 0 && vloss <= tc.target_loss) break;
    }
  }
  res.final_loss = loss_on(set, cm, val);
  return res;
}

ExactKernel::ExactKernel(const noise::CorrelationMatrix& c, std::vector<std::vector<double>> ent) {
  cm = &c;
  mem = c.mem;
  entries = std::move(ent);
}

Mat ExactKernel::factor(long m, long delta, long entry) const {
  const long span = span_of(m, mem);
  const long ne = (long)entries.size();
  const Mat& gt = cm->causal(delta);
  Vec x = Vec::Zero(cm->m);
  for (int c = 0; c < cm->m; ++c) x[c] = entries[(std::size_t)entry][(std::size_t)c];
  auto w = [&](long ep) {
    Vec xe = Vec::Zero(cm->m);
    for (int c = 0; c < cm->m; ++c) xe[c] = entries[(std::size_t)ep][(std::size_t)c];
    return std::exp(-(xe.transpose() * gt * x).value());
  };
  if (span == 1) return Mat::Constant(1, 1, w(entry));
  if (delta == 0) {
    Mat r = Mat::Zero(1, ne);
    r(0, entry) = w(entry);
    return r;
  }
  if (delta == span - 1) {
    Mat col(ne, 1);
    for (long e = 0; e < ne; ++e) col(e, 0) = w(e);
    return col;
  }
  Mat d = Mat::Zero(ne, ne);
  for (long e = 0; e < ne; ++e) d(e, e) = w(e);
  return d;
}

TrainedKernel::TrainedKernel(const KernelModel& km, std::vector<std::vector<double>> ent) {
  model = &km;
  mem = km.mem;
  entries = std::move(ent);
}

std::vector<Mat> kernel_core(const KernelProvider& kp, long n, long n_total, long entry) {
  std::vector<Mat> out;
  for (long m = n; m <= std::min(n_total, n + kp.mem); ++m) out.push_back(kp.factor(m, m - n, entry));
  return out;
}

Mat TrainedKernel::factor(long m, long delta, long entry) const {
  const long cls = std::min(m, mem + 1);
  const LinkingMatrixSet& set = model->sets[(std::size_t)(cls - 1)];
  const int mc = set.m_comp;
  Mat w = set.slot_eval((int)(delta * mc), entries[(std::size_t)entry][0]);
  for (int c = 1; c < mc; ++c)
    w = w * set.slot_eval((int)(delta * mc + c), entries[(std::size_t)entry][(std::size_t)c]);
  return w;
}

}  // namespace tenprop::stt
