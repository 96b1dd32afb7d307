#include "tenprop/commands.hpp"

#include <sys/resource.h>
#include <sys/wait.h>
#include <time.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

#include "tenprop/oracle.hpp"
#include "tenprop/serialize.hpp"
#include "tenprop/types.hpp"

namespace tenprop::cmd {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void prepare_outdir(const cfg::RunConfig& rc, const std::string& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw ResourceError("cannot create output directory '" + outdir + "': " + ec.message());
  cfg::RunConfig resolved = rc;
  resolved.output.directory = outdir;
  ser::write_file(outdir + "/resolved.cfg", cfg::render_config(resolved));
}

Mat embed(const Mat& m, long d) {
  Mat r = Mat::Zero(d, d);
  r.topLeftCorner(m.rows(), m.cols()) = m;
  return r;
}

// shared assembly for the fixture commands
struct Assembly {
  noise::CorrelationSpec spec;
  liouville::HilbertSystem sys;
  liouville::LiouvilleSystem ls;
  std::vector<stt::ChebyshevBasis> basis;
  std::vector<long> sched;
  std::uint64_t hash = 0;
};

Assembly assemble(const cfg::RunConfig& rc) {
  Assembly a;
  a.spec = cfg::build_noise_spec(rc.noise);
  a.sys = cfg::build_system(rc.system);
  a.ls = liouville::build_liouville(a.sys, a.spec.n_comp() == 2);
  for (const auto& [lo, hi] : a.ls.freq_range)
    a.basis.push_back(stt::basis_for_range(lo, hi, rc.stt.n_basis));
  for (long n = 1; n <= rc.grid.memory + 1; ++n) a.sched.push_back(cfg::bond_for(rc.stt, n));
  a.hash = cfg::kernel_config_hash(a.spec, rc.grid.tau, rc.grid.memory, rc.stt.n_basis, a.sched,
                                   a.basis);
  return a;
}

std::string observable_csv(std::uint64_t hash, const std::vector<prop::Observable>& obs,
                           long d_phys, double tau, long n_steps,
                           const std::function<Mat(long)>& rho_at) {
  std::string csv = ser::fixture_header(hash) + "t";
  for (const auto& o : obs) csv += "," + o.name;
  csv += ",trace_dev,herm_dev\n";
  for (long k = 1; k <= n_steps; ++k) {
    const Mat rho = rho_at(k);
    const Mat phys = rho.topLeftCorner(d_phys, d_phys);
    csv += fmt17(tau * (double)k);
    for (const auto& o : obs) csv += "," + fmt17((o.op * phys).trace().real());
    csv += "," + fmt17(std::abs(rho.trace() - 1.0));
    csv += "," + fmt17((rho - rho.adjoint()).cwiseAbs().maxCoeff()) + "\n";
  }
  return csv;
}

struct Fit {
  double slope = 0, intercept = 0, r2 = 1;
};

Fit linfit(const std::vector<double>& x, const std::vector<double>& y) {
  Fit f;
  const double n = (double)x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  f.slope = sxx > 0 ? sxy / sxx : 0;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

long self_rss_kb(pid_t pid) {
  std::ifstream in("/proc/" + std::to_string(pid) + "/statm");
  long pages = 0, resident = 0;
  if (!(in >> pages >> resident)) return -1;
  return resident * (sysconf(_SC_PAGESIZE) / 1024);
}

struct ChildRun {
  int status = 0;
  long peak_kb = 0;
  long mean_kb = 0;
};

// Runs the body in a fork so a per-d resource failure cannot take down the
// sweep; the parent samples the child's resident size for the mean and takes
// the kernel's high-water mark for the peak.
ChildRun run_child(const std::function<void()>& body) {
  const pid_t pid = fork();
  if (pid < 0) throw ResourceError("fork failed");
  if (pid == 0) {
    int code = 0;
    try {
      body();
    } catch (const ConfigError&) {
      code = 2;
    } catch (const NumericalError&) {
      code = 3;
    } catch (const ResourceError&) {
      code = 4;
    } catch (const std::bad_alloc&) {
      code = 4;
    } catch (const std::exception&) {
      code = 1;
    }
    _exit(code);
  }
  rusage ru{};
  int status = 0;
  double sum = 0;
  long count = 0;
  for (;;) {
    const pid_t r = wait4(pid, &status, WNOHANG, &ru);
    if (r == pid) break;
    if (r < 0) throw ResourceError("wait on benchmark child failed");
    const long kb = self_rss_kb(pid);
    if (kb > 0) {
      sum += (double)kb;
      ++count;
    }
    timespec ts{0, 2000000};
    nanosleep(&ts, nullptr);
  }
  ChildRun out;
  out.status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  out.peak_kb = ru.ru_maxrss;
  out.mean_kb = count ? (long)(sum / (double)count) : out.peak_kb;
  return out;
}

struct BondLog {
  long max_bond = 0;
  std::size_t peak_bytes = 0, mean_bytes = 0;
};

BondLog read_bond_log(const std::string& path) {
  const std::string text = ser::read_file(path);
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);  // header
  BondLog out;
  double sum = 0;
  long rows = 0;
  while (std::getline(ss, line)) {
    long step = 0, bond = 0;
    unsigned long long bytes = 0;
    if (std::sscanf(line.c_str(), "%ld,%ld,%llu", &step, &bond, &bytes) != 3)
      throw NumericalError("malformed bond log line: " + line);
    out.max_bond = std::max(out.max_bond, bond);
    out.peak_bytes = std::max(out.peak_bytes, (std::size_t)bytes);
    sum += (double)bytes;
    ++rows;
  }
  if (rows) out.mean_bytes = (std::size_t)(sum / (double)rows);
  return out;
}

}  // namespace

void train(const cfg::RunConfig& rc, const std::string& outdir) {
  prepare_outdir(rc, outdir);
  auto a = assemble(rc);
  const long mem = rc.grid.memory;
  const auto cm = noise::build_correlation_matrix(a.spec, rc.grid.tau, mem);

  stt::KernelModel km;
  km.m_comp = a.spec.n_comp();
  km.mem = mem;
  km.n_basis = rc.stt.n_basis;
  km.bond = *std::max_element(a.sched.begin(), a.sched.end());
  km.basis = a.basis;
  km.config_hash = a.hash;

  for (long n = 1; n <= mem + 1; ++n) {
    auto set = stt::init_linking_set((int)n, mem, km.m_comp, km.n_basis,
                                     a.sched[(std::size_t)n - 1], a.basis, km.m_comp == 2,
                                     oracle::splitmix64(rc.output.seed + 2 * (std::uint64_t)n),
                                     rc.stt.train.init_sigma);
    auto tc = rc.stt.train;
    tc.seed = oracle::splitmix64(rc.output.seed + 2 * (std::uint64_t)n + 1);
    const auto res = stt::train(set, cm, tc);
    ser::write_file(outdir + "/train_curve_n" + std::to_string(n) + ".csv", ser::curve_csv(res));
    km.sets.push_back(std::move(set));
  }
  ser::save_kernel(outdir + "/kernel.qstt", km);
}

void propagate(const cfg::RunConfig& rc, const std::string& outdir) {
  if (rc.grid.n_steps < 1)
    throw ConfigError("propagate: [discretization] n_steps must be at least 1");
  prepare_outdir(rc, outdir);
  auto a = assemble(rc);
  auto fp = liouville::free_propagator(a.ls, rc.grid.tau);
  const ttcore::SvdPolicy svd{rc.stt.svd_tol, 0};
  liouville::tensorize_propagator(a.ls, fp, svd);
  auto entries = prop::table_entries(a.ls);

  noise::CorrelationMatrix cm;
  stt::KernelModel km;
  std::unique_ptr<stt::KernelProvider> ker;
  if (rc.stt.kernel_file.empty()) {
    cm = noise::build_correlation_matrix(a.spec, rc.grid.tau, rc.grid.memory);
    ker = std::make_unique<stt::ExactKernel>(cm, std::move(entries));
  } else {
    km = ser::load_kernel(rc.stt.kernel_file);
    if (km.config_hash != a.hash)
      throw ConfigError("kernel hash mismatch: config expects " + ser::hash_hex(a.hash) +
                        " but '" + rc.stt.kernel_file + "' carries " +
                        ser::hash_hex(km.config_hash));
    ker = std::make_unique<stt::TrainedKernel>(km, std::move(entries));
  }

  prop::Engine eng;
  eng.ls = &a.ls;
  eng.fp = &fp;
  eng.ker = ker.get();
  eng.pol.svd = svd;
  eng.pol.b_max = rc.stt.b_max;

  const auto obs = cfg::build_observables(rc, a.ls.d_phys);
  const auto series =
      prop::propagate(eng, cfg::initial_state(rc.system), rc.grid.n_steps, obs);
  ser::write_file(outdir + "/observables.csv", prop::series_csv(series));
  ser::write_file(outdir + "/bonds.csv", prop::bonds_csv(series));
}

void oracle_fixtures(const cfg::RunConfig& rc, const std::string& outdir) {
  if (rc.grid.n_steps < 1)
    throw ConfigError("oracle: [discretization] n_steps must be at least 1");
  prepare_outdir(rc, outdir);
  auto a = assemble(rc);
  const double tau = rc.grid.tau;
  const long n = rc.grid.n_steps;
  const Mat rho0 = cfg::initial_state(rc.system);
  const auto obs = cfg::build_observables(rc, a.ls.d_phys);
  const Vec v0 = liouville::vectorize(embed(rho0, a.ls.d));

  auto wants = [&](const char* op) {
    return std::find(rc.oracle.ops.begin(), rc.oracle.ops.end(), op) != rc.oracle.ops.end();
  };

  if (wants("path-sum")) {
    auto fp = liouville::free_propagator(a.ls, tau);
    const auto cm = noise::build_correlation_matrix(a.spec, tau, rc.grid.memory);
    const auto ps = oracle::path_sum(a.ls, fp, cm, n);
    auto rho_at = [&](long k) {
      return liouville::devectorize(ps.phi[(std::size_t)k - 1] * v0);
    };
    ser::write_file(outdir + "/oracle_path_sum.csv",
                    observable_csv(a.hash, obs, a.ls.d_phys, tau, n, rho_at));
  }

  if (wants("dense")) {
    const Mat u = liouville::matexp(cplx(0, -tau) * a.ls.l0);
    std::vector<Mat> phi;
    phi.push_back(u);
    for (long k = 1; k < n; ++k) phi.push_back(u * phi.back());
    auto rho_at = [&](long k) {
      return liouville::devectorize(phi[(std::size_t)k - 1] * v0);
    };
    ser::write_file(outdir + "/oracle_dense.csv",
                    observable_csv(a.hash, obs, a.ls.d_phys, tau, n, rho_at));
  }

  if (wants("monte-carlo")) {
    const double tau_fine = rc.oracle.tau_fine > 0 ? rc.oracle.tau_fine : tau / 4.0;
    const double t_max = rc.oracle.t_max > 0 ? rc.oracle.t_max : tau * (double)n;
    const long stride = std::max(1L, (long)std::llround(tau / tau_fine));
    const auto mc = oracle::sle_monte_carlo(a.sys, a.spec, rho0, tau_fine, t_max,
                                            rc.oracle.n_traj, rc.output.seed, obs, stride);
    std::string csv = ser::fixture_header(a.hash) + "t";
    for (const auto& name : mc.names) csv += "," + name;
    for (const auto& name : mc.names) csv += ",se_" + name;
    csv += "\n";
    for (std::size_t k = 0; k < mc.t.size(); ++k) {
      csv += fmt17(mc.t[k]);
      for (double v : mc.mean[k]) csv += "," + fmt17(v);
      for (double v : mc.se[k]) csv += "," + fmt17(v);
      csv += "\n";
    }
    ser::write_file(outdir + "/oracle_mc.csv", csv);
  }
}

void benchmark_scaling(const cfg::RunConfig& rc, const std::string& outdir) {
  if (rc.system.model != "chain")
    throw ConfigError("benchmark-scaling sweeps the chain size; set [system] model = chain");
  if (rc.grid.n_steps < 1)
    throw ConfigError("benchmark-scaling: [discretization] n_steps must be at least 1");
  prepare_outdir(rc, outdir);

  struct Row {
    long d = 0;
    int status = 0;
    ChildRun run;
    BondLog log;
  };
  std::vector<Row> rows;

  for (long d : rc.scaling.d_values) {
    cfg::RunConfig sub = rc;
    sub.system.d = d;
    char tag[16];
    std::snprintf(tag, sizeof tag, "d%02ld", d);
    const std::string subdir = outdir + "/" + tag;
    sub.output.directory = subdir;

    Row row;
    row.d = d;
    row.run = run_child([&] { propagate(sub, subdir); });
    row.status = row.run.status;
    if (row.status == 0) row.log = read_bond_log(subdir + "/bonds.csv");
    rows.push_back(row);
  }

  std::string csv = "d,status,peak_rss_kb,mean_rss_kb,state_peak_bytes,state_mean_bytes,max_bond\n";
  for (const auto& r : rows) {
    csv += std::to_string(r.d) + "," + std::to_string(r.status) + "," +
           std::to_string(r.run.peak_kb) + "," + std::to_string(r.run.mean_kb) + "," +
           std::to_string(r.log.peak_bytes) + "," + std::to_string(r.log.mean_bytes) + "," +
           std::to_string(r.log.max_bond) + "\n";
  }
  ser::write_file(outdir + "/scaling.csv", csv);

  std::vector<double> d_ok;
  std::vector<std::vector<double>> series(4);
  for (const auto& r : rows)
    if (r.status == 0) {
      d_ok.push_back((double)r.d);
      series[0].push_back((double)r.run.peak_kb);
      series[1].push_back((double)r.run.mean_kb);
      series[2].push_back((double)r.log.peak_bytes);
      series[3].push_back((double)r.log.mean_bytes);
    }

  std::string fits = "series,kind,slope,intercept,r2\n";
  if (d_ok.size() >= 2) {
    const char* names[4] = {"rss_peak", "rss_mean", "state_peak", "state_mean"};
    for (int s = 0; s < 4; ++s) {
      const Fit lin = linfit(d_ok, series[s]);
      fits += std::string(names[s]) + ",linear," + fmt17(lin.slope) + "," + fmt17(lin.intercept) +
              "," + fmt17(lin.r2) + "\n";
      std::vector<double> lx, ly;
      for (std::size_t i = 0; i < d_ok.size(); ++i)
        if (series[s][i] > 0) {
          lx.push_back(std::log(d_ok[i]));
          ly.push_back(std::log(series[s][i]));
        }
      if (lx.size() >= 2) {
        const Fit ll = linfit(lx, ly);
        fits += std::string(names[s]) + ",loglog," + fmt17(ll.slope) + "," + fmt17(ll.intercept) +
                "," + fmt17(ll.r2) + "\n";
      }
    }
  }
  ser::write_file(outdir + "/fit.csv", fits);
}

}  // namespace tenprop::cmd
