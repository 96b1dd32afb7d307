#include "tenprop/noise.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>

namespace tenprop::noise {

double SpectralDensity::operator()(double w) const {
  if (kind == OhmicExp) return w <= 0 ? 0.0 : scale * w * std::exp(-w / omega_c);
  if (w < tab_w.front() || w > tab_w.back()) return 0.0;
  auto it = std::upper_bound(tab_w.begin(), tab_w.end(), w);
  if (it == tab_w.begin()) return tab_j.front();
  std::size_t hi = (std::size_t)(it - tab_w.begin());
  if (hi >= tab_w.size()) return tab_j.back();
  const std::size_t lo = hi - 1;
  const double f = (w - tab_w[lo]) / (tab_w[hi] - tab_w[lo]);
  return tab_j[lo] + f * (tab_j[hi] - tab_j[lo]);
}

double SpectralDensity::over_w(double w) const {
  if (kind == OhmicExp) return w < 0 ? 0.0 : scale * std::exp(-w / omega_c);
  if (w > 1e-12 * std::max(tab_w.back(), 1.0)) return (*this)(w) / w;
  // limit from the first tabulated segment through the origin
  for (std::size_t i = 0; i < tab_w.size(); ++i)
    if (tab_w[i] > 0) return tab_j[i] / tab_w[i];
  return 0.0;
}

double SpectralDensity::support_max() const {
  return kind == OhmicExp ? 50.0 * omega_c : tab_w.back();
}

SpectralDensity ohmic(double omega_c, double scale) {
  SpectralDensity j;
  j.kind = SpectralDensity::OhmicExp;
  j.omega_c = omega_c;
  j.scale = scale;
  return j;
}

SpectralDensity tabulated(std::vector<double> w, std::vector<double> j) {
  if (w.size() != j.size() || w.size() < 2 || !std::is_sorted(w.begin(), w.end()))
    throw ConfigError("tabulated spectral density needs a sorted grid of matching length");
  SpectralDensity s;
  s.kind = SpectralDensity::Tabulated;
  s.tab_w = std::move(w);
  s.tab_j = std::move(j);
  return s;
}

// w * coth(beta*w/2), finite at w = 0
static double w_coth(double w, double beta) {
  const double x = 0.5 * beta * std::abs(w);
  if (x < 1e-2) return (2.0 / beta) * (1.0 + x * x / 3.0 - x * x * x * x / 45.0);
  return w / std::tanh(0.5 * beta * w);
}

// floor: error level the integrand representation itself supports (tabulated
// densities are piecewise linear, so the Kronrod estimate stalls at the kinks)
template <typename F>
static double adaptive(const F& f, double a, double b, double abstol, double floor_rel = 0) {
  double err = 0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13, &err);
  const double allowed = (10 * abstol + floor_rel) * std::max(1.0, std::abs(val)) + abstol;
  if (err > allowed)
    throw NumericalError("bath integral did not converge to the requested tolerance");
  return val;
}

static double quad_floor(const SpectralDensity& j) {
  return j.kind == SpectralDensity::Tabulated ? 1e-5 : 0.0;
}

cplx correlation_function(const CorrelationSpec& spec, double t, double abstol) {
  const double at = std::abs(t);
  const double wmax = spec.j.support_max();
  switch (spec.mode) {
    case CorrelationSpec::MarkovDelta:
      throw ConfigError("white noise has no pointwise correlation function");
    case CorrelationSpec::ExtrinsicHighT: {
      const double c = adaptive(
          [&](double w) { return spec.j.over_w(w) * std::cos(w * at); }, 0, wmax, abstol,
          quad_floor(spec.j));
      return c / spec.beta;
    }
    case CorrelationSpec::Intrinsic: {
      const double re = adaptive(
          [&](double w) { return spec.j.over_w(w) * w_coth(w, spec.beta) * std::cos(w * at); }, 0,
          wmax, abstol, quad_floor(spec.j));
      const double im = (at == 0) ? 0.0
                                  : -adaptive([&](double w) { return spec.j(w) * std::sin(w * at); },
                                              0, wmax, abstol, quad_floor(spec.j));
      return {re, t < 0 ? -im : im};
    }
  }
  throw ConfigError("unknown correlation mode");
}

double response_function(const CorrelationSpec& spec, double t, double abstol) {
  if (spec.mode != CorrelationSpec::Intrinsic) return 0.0;
  if (t == 0) return 0.0;
  const double at = std::abs(t);
  const double v = -adaptive([&](double w) { return spec.j(w) * std::sin(w * at); }, 0,
                             spec.j.support_max(), abstol, quad_floor(spec.j));
  return t < 0 ? -v : v;
}

cplx CorrelationMatrix::quad_form(const std::vector<Vec>& x) const {
  const long n = (long)x.size();
  cplx s = 0;
  for (long k = 0; k < n; ++k)
    for (long l = 0; l < n; ++l) {
      const long d = k - l;
      if (std::labs(d) > mem) continue;
      s += (x[k].transpose() * block(d) * x[l]).value();
    }
  return 0.5 * s;
}

cplx CorrelationMatrix::causal_form(const std::vector<Vec>& x) const {
  const long n = (long)x.size();
  cplx s = 0;
  for (long k = 0; k < n; ++k)
    for (long d = 0; d <= std::min(k, mem); ++d) s += (x[k].transpose() * causal(d) * x[k - d]).value();
  return s;
}

namespace {

// full Gauss-Legendre rule on [0,1]; boost stores only the positive abscissae
void gl_rule(int order, std::vector<double>& x, std::vector<double>& w) {
  auto expand = [&](const auto& ax, const auto& aw) {
    x.clear();
    w.clear();
    for (std::size_t i = 0; i < ax.size(); ++i) {
      x.push_back(0.5 * (1.0 + ax[i]));
      w.push_back(0.5 * aw[i]);
      if (ax[i] != 0.0) {
        x.push_back(0.5 * (1.0 - ax[i]));
        w.push_back(0.5 * aw[i]);
      }
    }
  };
  using boost::math::quadrature::gauss;
  switch (order) {
    case 8:
      expand(gauss<double, 8>::abscissa(), gauss<double, 8>::weights());
      break;
    case 16:
      expand(gauss<double, 16>::abscissa(), gauss<double, 16>::weights());
      break;
    case 20:
      expand(gauss<double, 20>::abscissa(), gauss<double, 20>::weights());
      break;
    case 24:
      expand(gauss<double, 24>::abscissa(), gauss<double, 24>::weights());
      break;
    case 30:
      expand(gauss<double, 30>::abscissa(), gauss<double, 30>::weights());
      break;
    default:
      throw ConfigError("unsupported cell quadrature order");
  }
}

// cell integral of f(s - s') over s in [delta*tau, (delta+1)*tau), s' in [0, tau)
template <typename F>
cplx cell_integral(const F& f, double tau, long delta, int order) {
  std::vector<double> x, w;
  gl_rule(order, x, w);
  cplx s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      s += w[i] * w[j] * f((double)delta * tau + (x[i] - x[j]) * tau);
  return s * tau * tau;
}

// integral of f(s - s') over the causal triangle s > s' of one diagonal cell
template <typename F>
cplx triangle_integral(const F& f, double tau, int order) {
  std::vector<double> x, w;
  gl_rule(order, x, w);
  cplx s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      s += w[i] * w[j] * x[i] * f(tau * x[i] * (1.0 - x[j]));
  return s * tau * tau;
}

std::vector<Mat> blocks_at_order(const CorrelationSpec& spec, double tau, long mem, int order,
                                 double abstol) {
  const int m = spec.n_comp();
  std::vector<Mat> g(2 * mem + 1, Mat::Zero(m, m));
  if (spec.mode == CorrelationSpec::ExtrinsicHighT) {
    auto c = [&](double u) { return correlation_function(spec, u, abstol).real(); };
    for (long d = 0; d <= mem; ++d) {
      const cplx v = cell_integral(c, tau, d, order);
      g[(std::size_t)(d + mem)](0, 0) = v;
      g[(std::size_t)(mem - d)](0, 0) = v;  // even covariance
    }
  } else {  // Intrinsic
    auto sp = [&](double u) { return correlation_function(spec, u, abstol).real(); };
    auto resp = [&](double u) { return cplx(0, 2.0 * response_function(spec, u, abstol)); };
    for (long d = -mem; d <= mem; ++d) {
      Mat& b = g[(std::size_t)(d + mem)];
      b(0, 0) = cell_integral(sp, tau, std::labs(d), order);
      // the response couples the later classical sample to the earlier
      // conjugate one; covariance symmetry G(-d) = G(d)^T puts the same cell
      // at (1,0) for negative lags, and the equal-time cell splits into two
      // equal causal triangles
      if (d > 0)
        b(0, 1) = cell_integral(resp, tau, d, order);
      else if (d < 0)
        b(1, 0) = cell_integral(resp, tau, -d, order);
      else
        b(0, 1) = b(1, 0) = triangle_integral(resp, tau, order);
    }
  }
  return g;
}

}  // namespace

CorrelationMatrix build_correlation_matrix(const CorrelationSpec& spec, double tau, long mem,
                                           int gl_order, double refine_reltol) {
  if (tau <= 0 || mem < 0) throw ConfigError("step size must be positive and memory non-negative");
  CorrelationMatrix cm;
  cm.m = spec.n_comp();
  cm.tau = tau;
  cm.mem = mem;

  if (spec.mode == CorrelationSpec::MarkovDelta) {
    cm.g.assign((std::size_t)(2 * mem + 1), Mat::Zero(1, 1));
    cm.g[(std::size_t)mem](0, 0) = spec.gamma * tau;
  } else {
    const double abstol = 1e-11;
    cm.g = blocks_at_order(spec, tau, mem, gl_order, abstol);
    const int refined_order = gl_order < 24 ? 24 : 30;
    std::vector<Mat> g2 = blocks_at_order(spec, tau, mem, refined_order, abstol);
    double scale = 0, diff = 0;
    for (std::size_t i = 0; i < cm.g.size(); ++i) {
      scale = std::max(scale, cm.g[i].cwiseAbs().maxCoeff());
      diff = std::max(diff, (cm.g[i] - g2[i]).cwiseAbs().maxCoeff());
    }
    if (diff > refine_reltol * std::max(scale, 1e-300))
      throw NumericalError("cell quadrature did not settle under order refinement");
  }

  cm.gtilde.resize((std::size_t)(mem + 1));
  cm.gtilde[0] = 0.5 * cm.block(0);
  for (long d = 1; d <= mem; ++d) cm.gtilde[(std::size_t)d] = 0.5 * (cm.block(d) + cm.block(-d).transpose());
  return cm;
}

CorrelationMatrix assemble_multinoise(const std::vector<CorrelationMatrix>& blocks,
                                      const std::vector<CrossCorrelation>& cross, int gl_order,
                                      double refine_reltol) {
  if (blocks.empty()) throw ConfigError("no noise blocks to assemble");
  const double tau = blocks.front().tau;
  long mem = 0;
  int m = 0;
  std::vector<int> off;
  for (const auto& b : blocks) {
    if (b.tau != tau) throw ConfigError("noise blocks disagree on the step size");
    mem = std::max(mem, b.mem);
    off.push_back(m);
    m += b.m;
  }

  CorrelationMatrix out;
  out.m = m;
  out.tau = tau;
  out.mem = mem;
  out.g.assign((std::size_t)(2 * mem + 1), Mat::Zero(m, m));
  for (std::size_t ib = 0; ib < blocks.size(); ++ib)
    for (long d = -blocks[ib].mem; d <= blocks[ib].mem; ++d)
      out.g[(std::size_t)(d + mem)].block(off[ib], off[ib], blocks[ib].m, blocks[ib].m) =
          blocks[ib].block(d);

  for (const auto& x : cross) {
    if (x.spec.mode != CorrelationSpec::ExtrinsicHighT)
      throw ConfigError("cross-correlations are supported between classical components only");
    if (x.block_a == x.block_b || x.block_a < 0 || x.block_b < 0 ||
        x.block_a >= (int)blocks.size() || x.block_b >= (int)blocks.size())
      throw ConfigError("cross-correlation block indices out of range");
    auto c = [&](double u) { return correlation_function(x.spec, u, 1e-11).real(); };
    const int oa = off[(std::size_t)x.block_a], ob = off[(std::size_t)x.block_b];
    for (long d = 0; d <= mem; ++d) {
      const cplx v = cell_integral(c, tau, d, gl_order);
      const cplx v2 = cell_integral(c, tau, d, gl_order < 24 ? 24 : 30);
      if (std::abs(v - v2) > refine_reltol * std::max(std::abs(v), 1e-300))
        throw NumericalError("cross-correlation quadrature did not settle under refinement");
      out.g[(std::size_t)(d + mem)](oa, ob) += v;
      out.g[(std::size_t)(d + mem)](ob, oa) += v;
      if (d > 0) {
        out.g[(std::size_t)(mem - d)](oa, ob) += v;
        out.g[(std::size_t)(mem - d)](ob, oa) += v;
      }
    }
  }

  out.gtilde.resize((std::size_t)(mem + 1));
  out.gtilde[0] = 0.5 * out.block(0);
  for (long d = 1; d <= mem; ++d)
    out.gtilde[(std::size_t)d] = 0.5 * (out.block(d) + out.block(-d).transpose());
  return out;
}

}  // namespace tenprop::noise
