#include "tenprop/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tenprop::prop {

namespace {

bool is_zero_multiplet(const std::vector<double>& f) {
  for (double x : f)
    if (x != 0.0) return false;
  return true;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<long> entry_order(const liouville::LiouvilleSystem& ls) {
  std::vector<long> idx;
  for (long e = 0; e < (long)ls.table.size(); ++e)
    if (is_zero_multiplet(ls.table[(std::size_t)e].freq)) idx.push_back(e);
  for (long e = 0; e < (long)ls.table.size(); ++e)
    if (!is_zero_multiplet(ls.table[(std::size_t)e].freq)) idx.push_back(e);
  return idx;
}

std::vector<std::vector<double>> table_entries(const liouville::LiouvilleSystem& ls) {
  std::vector<std::vector<double>> ent;
  for (const auto& e : ls.table) ent.push_back(e.freq);
  return ent;
}

Fugacity build_fugacity(const liouville::LiouvilleSystem& ls, const liouville::FreePropagator& fp,
                        const stt::KernelProvider& ker, long alpha, long horizon,
                        const StepPolicy& pol) {
  if (fp.mpo.size() != ls.table.size()) throw ConfigError("free propagator not tensorized");
  const long mmax = std::min(horizon, alpha + ker.mem);
  Fugacity z;
  z.alpha = alpha;
  z.n_mem_sites = mmax - alpha + 1;

  bool first = true;
  for (long e : entry_order(ls)) {
    ttcore::TensorTrain t = fp.mpo[(std::size_t)e];
    for (long m = alpha; m <= mmax; ++m) t = ttcore::tensor_append(t, ker.factor(m, m - alpha, e));
    if (first) {
      z.mpo = std::move(t);
      first = false;
    } else {
      z.mpo = ttcore::mpo_add(z.mpo, t);
      ttcore::recompress(z.mpo, pol.svd);
    }
  }
  ttcore::recompress(z.mpo, pol.svd);
  if (pol.b_max > 0 && z.mpo.max_bond() > pol.b_max) {
    std::ostringstream os;
    os << "fugacity bond cap " << pol.b_max << " exceeded at step " << alpha << "; bonds:";
    for (long b : z.mpo.bond_dims()) os << " " << b;
    throw ResourceError(os.str());
  }
  return z;
}

const Fugacity& Engine::full_fugacity(long alpha) {
  const long cls = std::min(alpha, ker->mem + 1);
  auto it = full.find(cls);
  if (it == full.end())
    it = full.emplace(cls, build_fugacity(*ls, *fp, *ker, cls, cls + ker->mem, pol)).first;
  return it->second;
}

const Fugacity& Engine::capped_fugacity(long alpha, long horizon) {
  const long j = horizon - alpha;
  const long cls = std::min(alpha, ker->mem + 1);
  auto key = std::make_pair(cls, j);
  auto it = capped.find(key);
  if (it == capped.end())
    it = capped.emplace(key, build_fugacity(*ls, *fp, *ker, cls, cls + j, pol)).first;
  return it->second;
}

ttcore::TensorTrain apply_fugacity(const Fugacity& z, const ttcore::TensorTrain& s, long n_sys,
                                   const ttcore::SvdPolicy& pol) {
  ttcore::TensorTrain in = s;
  const long pad = z.mpo.length() - in.length();
  if (pad < 0) throw ConfigError("fugacity shorter than the state it is applied to");
  for (long p = 0; p < pad; ++p) {
    ttcore::Core c(1, 1, 1, 1);
    c.data[0] = 1.0;
    in.cores.push_back(std::move(c));
  }
  ttcore::TensorTrain out = ttcore::zip_up(z.mpo, in, pol);
  // the step's own transfer site is now scalar; fold it away
  if (out.length() > n_sys && out.cores[(std::size_t)n_sys].pr == 1 &&
      out.cores[(std::size_t)n_sys].pc == 1)
    ttcore::squeeze_site(out, n_sys);
  return out;
}

namespace {

void validate_density(const Mat& rho, long d) {
  if (rho.rows() != d || rho.cols() != d) throw ConfigError("initial state has the wrong dimension");
  const double scale = std::max(1.0, rho.norm());
  if ((rho - rho.adjoint()).norm() > 1e-9 * scale) throw ConfigError("initial state is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-8) throw ConfigError("initial state trace is not one");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  if (es.eigenvalues().minCoeff() < -1e-10) throw ConfigError("initial state is not positive semidefinite");
}

ttcore::TensorTrain state_mps(const liouville::LiouvilleSystem& ls, const Mat& rho,
                              const ttcore::SvdPolicy& pol) {
  Mat padded = Mat::Zero(ls.d, ls.d);
  padded.topLeftCorner(rho.rows(), rho.cols()) = rho;
  const Vec v = liouville::vectorize(padded);
  const long q2 = 2 * liouville::qubit_count(ls.d);
  return ttcore::tt_svd(v, std::vector<std::pair<long, long>>((std::size_t)q2, {2, 1}), pol);
}

Mat read_rho(const liouville::LiouvilleSystem& ls, const ttcore::TensorTrain& s) {
  const Vec v = ttcore::to_dense(s);
  const Mat padded = liouville::devectorize(v);
  return padded.topLeftCorner(ls.d_phys, ls.d_phys);
}

}  // namespace

ObservableSeries propagate(Engine& eng, const Mat& rho0, long n_steps,
                           const std::vector<Observable>& obs) {
  const auto& ls = *eng.ls;
  validate_density(rho0, ls.d_phys);
  const long n_sys = 2 * liouville::qubit_count(ls.d);
  const long mem = eng.ker->mem;

  ObservableSeries series;
  for (const auto& o : obs) series.names.push_back(o.name);

  ttcore::TensorTrain s = state_mps(ls, rho0, eng.pol.svd);
  std::deque<ttcore::TensorTrain> buf = {s};

  for (long k = 1; k <= n_steps; ++k) {
    s = apply_fugacity(eng.full_fugacity(k), s, n_sys, eng.pol.svd);
    buf.push_back(s);
    if ((long)buf.size() > mem + 1) buf.pop_front();

    // close every transfer function reaching past step k from the buffered base
    ttcore::TensorTrain c = buf.front();
    const long base = k - ((long)buf.size() - 1);
    for (long a = base + 1; a <= k; ++a)
      c = apply_fugacity(eng.capped_fugacity(a, k), c, n_sys, eng.pol.svd);

    Mat rho = read_rho(ls, c);
    SeriesPoint pt;
    pt.t = (double)k * eng.fp->tau;
    pt.trace_dev = std::abs(rho.trace() - 1.0);
    pt.herm_dev = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (eng.pol.renormalize_trace && std::abs(rho.trace()) > 0) rho /= rho.trace();
    for (const auto& o : obs) pt.values.push_back((o.op * rho).trace());
    series.pts.push_back(std::move(pt));
    series.max_bond.push_back(s.max_bond());
    series.bytes.push_back(s.bytes());
    series.states.push_back(std::move(rho));
  }
  return series;
}

Propagator build_propagator(Engine& eng, long n_steps) {
  const auto& ls = *eng.ls;
  const long n_sys = 2 * liouville::qubit_count(ls.d);
  Propagator out;
  out.tau = eng.fp->tau;
  out.n_steps = n_steps;
  out.mem = eng.ker->mem;

  ttcore::TensorTrain r = ttcore::identity_mpo(n_sys, 2);
  for (long k = 1; k <= n_steps; ++k) {
    r = apply_fugacity(eng.capped_fugacity(k, n_steps), r, n_sys, eng.pol.svd);
    out.bond_log.push_back(r.max_bond());
  }
  out.mpo = std::move(r);
  return out;
}

Mat markov_propagator(const liouville::LiouvilleSystem& ls, double gamma, double t) {
  if (gamma < 0) throw ConfigError("white-noise strength must be nonnegative");
  const Mat gen = cplx(0, -t) * ls.l0 - (t * gamma / 2.0) * (ls.l1m * ls.l1m);
  return liouville::matexp(gen);
}

std::string series_csv(const ObservableSeries& s) {
  std::ostringstream os;
  os << "t";
  for (const auto& n : s.names) os << "," << n;
  os << ",trace_dev,herm_dev\n";
  for (const auto& p : s.pts) {
    os << fmt17(p.t);
    for (const auto& v : p.values) os << "," << fmt17(v.real());
    os << "," << fmt17(p.trace_dev) << "," << fmt17(p.herm_dev) << "\n";
  }
  return os.str();
}

std::string bonds_csv(const ObservableSeries& s) {
  std::ostringstream os;
  os << "step,max_bond,bytes\n";
  for (std::size_t i = 0; i < s.max_bond.size(); ++i)
    os << (i + 1) << "," << s.max_bond[i] << "," << s.bytes[i] << "\n";
  return os.str();
}

}  // namespace tenprop::prop
