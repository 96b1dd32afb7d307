#include "tenprop/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tenprop/types.hpp"

namespace tenprop::cfg {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s, const std::string& ctx) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) {
    cur = trim(cur);
    if (cur.empty()) throw ConfigError("config: " + ctx + ": empty list entry in '" + s + "'");
    out.push_back(cur);
  }
  if (out.empty()) throw ConfigError("config: " + ctx + ": empty list");
  return out;
}

double to_double(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: " + ctx + ": bad number '" + s + "'");
}

long to_long(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: " + ctx + ": bad integer '" + s + "'");
}

std::uint64_t to_u64(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos == s.size() && s[0] != '-') return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: " + ctx + ": bad unsigned integer '" + s + "'");
}

using KvMap = std::map<std::string, std::string>;

// Tracks which keys the schema consumed so leftovers can be rejected.
struct SectionReader {
  const KvMap* kv = nullptr;
  std::string name;
  std::set<std::string> seen;

  bool has(const std::string& key) {
    seen.insert(key);
    return kv && kv->count(key);
  }
  std::string str(const std::string& key, const std::string& def) {
    return has(key) ? trim(kv->at(key)) : def;
  }
  double num(const std::string& key, double def) {
    return has(key) ? to_double(kv->at(key), "[" + name + "] " + key) : def;
  }
  long integer(const std::string& key, long def) {
    return has(key) ? to_long(kv->at(key), "[" + name + "] " + key) : def;
  }
  std::uint64_t uint(const std::string& key, std::uint64_t def) {
    return has(key) ? to_u64(kv->at(key), "[" + name + "] " + key) : def;
  }
  std::vector<std::string> list(const std::string& key) {
    if (!has(key)) return {};
    return split_list(kv->at(key), "[" + name + "] " + key);
  }
  void done() {
    if (!kv) return;
    for (const auto& [key, val] : *kv)
      if (!seen.count(key))
        throw ConfigError("config: unknown key '" + key + "' in [" + name + "]");
  }
};

std::map<std::string, KvMap> raw_parse(const std::string& text) {
  std::map<std::string, KvMap> sec;
  std::string cur;
  std::stringstream ss(text);
  std::string line;
  long lno = 0;
  while (std::getline(ss, line)) {
    ++lno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: line " + std::to_string(lno) + ": malformed section header");
      cur = trim(line.substr(1, line.size() - 2));
      if (cur.empty()) throw ConfigError("config: line " + std::to_string(lno) + ": empty section name");
      if (sec.count(cur))
        throw ConfigError("config: duplicate section [" + cur + "]");
      sec[cur];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lno) + ": expected 'key = value'");
    if (cur.empty())
      throw ConfigError("config: line " + std::to_string(lno) + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: line " + std::to_string(lno) + ": empty key");
    if (!sec[cur].emplace(key, val).second)
      throw ConfigError("config: duplicate key '" + key + "' in [" + cur + "]");
  }
  return sec;
}

void check_observable_token(const std::string& t) {
  static const std::set<std::string> plain = {"sx", "sy", "sz", "populations", "msd"};
  if (plain.count(t)) return;
  if (t.rfind("site:", 0) == 0) {
    to_long(t.substr(5), "[output] observables");
    return;
  }
  throw ConfigError("config: [output] observables: unknown observable '" + t + "'");
}

void check_rho0_token(const std::string& t) {
  if (t.rfind("site:", 0) == 0) {
    to_long(t.substr(5), "[system] rho0");
    return;
  }
  if (t.rfind("mixed:", 0) == 0) {
    const auto sites = split_list(t.substr(6), "[system] rho0");
    for (const auto& s : sites) to_long(s, "[system] rho0");
    return;
  }
  if (t.rfind("file:", 0) == 0 && t.size() > 5) return;
  throw ConfigError("config: [system] rho0: bad state spec '" + t + "'");
}

Mat read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open matrix file '" + path + "'");
  long d = 0;
  if (!(in >> d) || d < 1 || d > 4096)
    throw ConfigError("config: matrix file '" + path + "': bad leading dimension");
  Mat m(d, d);
  for (long i = 0; i < d; ++i)
    for (long j = 0; j < d; ++j) {
      cplx z;
      if (!(in >> z))
        throw ConfigError("config: matrix file '" + path + "': expected " + std::to_string(d * d) +
                          " entries");
      m(i, j) = z;
    }
  return m;
}

void require_hermitian(const Mat& m, const std::string& what) {
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ConfigError("config: " + what + " is not Hermitian");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

void fnv(std::uint64_t& h, const void* p, std::size_t n) {
  const auto* b = static_cast<const unsigned char*>(p);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 0x100000001b3ull;
  }
}

void fnv_f64(std::uint64_t& h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  fnv(h, &bits, sizeof bits);
}

void fnv_u64(std::uint64_t& h, std::uint64_t v) { fnv(h, &v, sizeof v); }

}  // namespace

RunConfig parse_config(const std::string& text) {
  auto raw = raw_parse(text);
  static const std::set<std::string> known_sections = {"system", "noise",  "discretization", "stt",
                                                       "output", "oracle", "scaling"};
  for (const auto& [name, kv] : raw)
    if (!known_sections.count(name)) throw ConfigError("config: unknown section [" + name + "]");
  for (const char* req : {"system", "noise", "discretization"})
    if (!raw.count(req)) throw ConfigError(std::string("config: missing section [") + req + "]");

  auto reader = [&](const std::string& name) {
    SectionReader r;
    r.name = name;
    r.kv = raw.count(name) ? &raw.at(name) : nullptr;
    return r;
  };

  RunConfig rc;

  auto sys = reader("system");
  rc.system.model = sys.str("model", "");
  rc.system.d = sys.integer("d", 2);
  rc.system.omega = sys.num("omega", 1.0);
  rc.system.epsilon = sys.num("epsilon", 0.0);
  rc.system.alpha = sys.num("alpha", 0.0);
  rc.system.h0_file = sys.str("h0_file", "");
  rc.system.v_file = sys.str("v_file", "");
  rc.system.rho0 = sys.str("rho0", "site:0");
  sys.done();
  if (rc.system.model != "spin-boson" && rc.system.model != "chain" &&
      rc.system.model != "custom-matrix-files")
    throw ConfigError("config: [system] model must be spin-boson, chain, or custom-matrix-files");
  if (rc.system.model == "spin-boson" && rc.system.d != 2)
    throw ConfigError("config: [system] the spin-boson model is two-level");
  if (rc.system.model == "chain" && rc.system.d < 2)
    throw ConfigError("config: [system] chain needs d >= 2");
  if (rc.system.model == "custom-matrix-files" &&
      (rc.system.h0_file.empty() || rc.system.v_file.empty()))
    throw ConfigError("config: [system] custom-matrix-files needs h0_file and v_file");
  check_rho0_token(rc.system.rho0);

  auto noi = reader("noise");
  rc.noise.mode = noi.str("mode", "");
  rc.noise.beta = noi.num("beta", 1.0);
  rc.noise.omega_c = noi.num("omega_c", 1.0);
  rc.noise.gamma = noi.num("gamma", 0.0);
  rc.noise.spectral_density = noi.str("spectral_density", "");
  noi.done();
  if (rc.noise.mode != "extrinsic" && rc.noise.mode != "intrinsic" && rc.noise.mode != "markov")
    throw ConfigError("config: [noise] mode must be extrinsic, intrinsic, or markov");
  if (rc.noise.beta <= 0) throw ConfigError("config: [noise] beta must be positive");
  if (rc.noise.omega_c <= 0) throw ConfigError("config: [noise] omega_c must be positive");
  if (rc.noise.gamma < 0) throw ConfigError("config: [noise] gamma must be nonnegative");
  if (rc.noise.mode == "markov" && !rc.noise.spectral_density.empty())
    throw ConfigError("config: [noise] markov mode takes gamma, not a spectral density");

  auto grid = reader("discretization");
  rc.grid.tau = grid.num("tau", 0.0);
  rc.grid.n_steps = grid.integer("n_steps", 0);
  rc.grid.memory = grid.integer("memory", 0);
  grid.done();
  if (rc.grid.tau <= 0) throw ConfigError("config: [discretization] tau must be positive");
  if (rc.grid.n_steps < 0) throw ConfigError("config: [discretization] n_steps must be nonnegative");
  if (rc.grid.memory < 0) throw ConfigError("config: [discretization] memory must be nonnegative");

  auto st = reader("stt");
  rc.stt.n_basis = (int)st.integer("n_basis", 10);
  if (st.has("bond")) {
    rc.stt.bond.clear();
    for (const auto& b : split_list(st.kv->at("bond"), "[stt] bond"))
      rc.stt.bond.push_back(to_long(b, "[stt] bond"));
  }
  rc.stt.svd_tol = st.num("svd_tol", 1e-10);
  rc.stt.b_max = st.integer("b_max", 0);
  rc.stt.kernel_file = st.str("kernel_file", "");
  rc.stt.train.max_steps = st.integer("max_steps", rc.stt.train.max_steps);
  rc.stt.train.batch = st.integer("batch", rc.stt.train.batch);
  rc.stt.train.lr = st.num("lr", rc.stt.train.lr);
  rc.stt.train.lr_decay = st.num("lr_decay", rc.stt.train.lr_decay);
  rc.stt.train.decay_every = st.integer("decay_every", rc.stt.train.decay_every);
  rc.stt.train.momentum = st.num("momentum", rc.stt.train.momentum);
  rc.stt.train.target_loss = st.num("target_loss", rc.stt.train.target_loss);
  rc.stt.train.val_points = st.integer("val_points", rc.stt.train.val_points);
  rc.stt.train.log_every = st.integer("log_every", rc.stt.train.log_every);
  rc.stt.train.init_sigma = st.num("init_sigma", rc.stt.train.init_sigma);
  st.done();
  if (rc.stt.n_basis < 1) throw ConfigError("config: [stt] n_basis must be at least 1");
  for (long b : rc.stt.bond)
    if (b < 1) throw ConfigError("config: [stt] bond entries must be at least 1");
  if (rc.stt.svd_tol <= 0) throw ConfigError("config: [stt] svd_tol must be positive");
  if (rc.stt.b_max < 0) throw ConfigError("config: [stt] b_max must be nonnegative");
  const auto& tc = rc.stt.train;
  if (tc.max_steps < 1 || tc.batch < 1 || tc.val_points < 1 || tc.log_every < 1)
    throw ConfigError("config: [stt] training counts must be at least 1");
  if (tc.lr <= 0 || tc.lr_decay <= 0 || tc.lr_decay > 1)
    throw ConfigError("config: [stt] need lr > 0 and lr_decay in (0, 1]");
  if (tc.momentum < 0 || tc.momentum >= 1)
    throw ConfigError("config: [stt] momentum must lie in [0, 1)");
  if (tc.decay_every < 0 || tc.target_loss < 0 || tc.init_sigma < 0)
    throw ConfigError("config: [stt] negative training parameter");

  auto out = reader("output");
  rc.output.directory = out.str("directory", "out");
  rc.output.observables = out.list("observables");
  rc.output.seed = out.uint("seed", 1);
  out.done();
  if (rc.output.directory.empty()) throw ConfigError("config: [output] directory must be nonempty");
  for (const auto& t : rc.output.observables) check_observable_token(t);

  auto ora = reader("oracle");
  if (ora.has("ops")) rc.oracle.ops = split_list(ora.kv->at("ops"), "[oracle] ops");
  rc.oracle.n_traj = ora.integer("n_traj", rc.oracle.n_traj);
  rc.oracle.tau_fine = ora.num("tau_fine", 0.0);
  rc.oracle.t_max = ora.num("t_max", 0.0);
  ora.done();
  for (const auto& op : rc.oracle.ops)
    if (op != "path-sum" && op != "monte-carlo" && op != "dense")
      throw ConfigError("config: [oracle] ops: unknown op '" + op + "'");
  if (rc.oracle.n_traj < 1) throw ConfigError("config: [oracle] n_traj must be at least 1");
  if (rc.oracle.tau_fine < 0 || rc.oracle.t_max < 0)
    throw ConfigError("config: [oracle] negative time parameter");

  auto sca = reader("scaling");
  if (sca.has("d_values")) {
    rc.scaling.d_values.clear();
    for (const auto& s : split_list(sca.kv->at("d_values"), "[scaling] d_values"))
      rc.scaling.d_values.push_back(to_long(s, "[scaling] d_values"));
  }
  sca.done();
  for (std::size_t i = 0; i < rc.scaling.d_values.size(); ++i) {
    const long d = rc.scaling.d_values[i];
    if (d < 2 || d > 32 || (d & (d - 1)))
      throw ConfigError("config: [scaling] d_values must be powers of two in 2..32");
    if (i && rc.scaling.d_values[i - 1] >= d)
      throw ConfigError("config: [scaling] d_values must be strictly increasing");
  }

  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const RunConfig& rc) {
  std::string s;
  auto kv = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };

  s += "[system]\n";
  kv("model", rc.system.model);
  kv("d", std::to_string(rc.system.d));
  kv("omega", fmt(rc.system.omega));
  kv("epsilon", fmt(rc.system.epsilon));
  kv("alpha", fmt(rc.system.alpha));
  if (!rc.system.h0_file.empty()) kv("h0_file", rc.system.h0_file);
  if (!rc.system.v_file.empty()) kv("v_file", rc.system.v_file);
  kv("rho0", rc.system.rho0);

  s += "\n[noise]\n";
  kv("mode", rc.noise.mode);
  kv("beta", fmt(rc.noise.beta));
  kv("omega_c", fmt(rc.noise.omega_c));
  kv("gamma", fmt(rc.noise.gamma));
  if (!rc.noise.spectral_density.empty()) kv("spectral_density", rc.noise.spectral_density);

  s += "\n[discretization]\n";
  kv("tau", fmt(rc.grid.tau));
  kv("n_steps", std::to_string(rc.grid.n_steps));
  kv("memory", std::to_string(rc.grid.memory));

  s += "\n[stt]\n";
  kv("n_basis", std::to_string(rc.stt.n_basis));
  {
    std::vector<std::string> b;
    for (long v : rc.stt.bond) b.push_back(std::to_string(v));
    kv("bond", join(b));
  }
  kv("svd_tol", fmt(rc.stt.svd_tol));
  kv("b_max", std::to_string(rc.stt.b_max));
  if (!rc.stt.kernel_file.empty()) kv("kernel_file", rc.stt.kernel_file);
  kv("max_steps", std::to_string(rc.stt.train.max_steps));
  kv("batch", std::to_string(rc.stt.train.batch));
  kv("lr", fmt(rc.stt.train.lr));
  kv("lr_decay", fmt(rc.stt.train.lr_decay));
  kv("decay_every", std::to_string(rc.stt.train.decay_every));
  kv("momentum", fmt(rc.stt.train.momentum));
  kv("target_loss", fmt(rc.stt.train.target_loss));
  kv("val_points", std::to_string(rc.stt.train.val_points));
  kv("log_every", std::to_string(rc.stt.train.log_every));
  kv("init_sigma", fmt(rc.stt.train.init_sigma));

  s += "\n[output]\n";
  kv("directory", rc.output.directory);
  if (!rc.output.observables.empty()) kv("observables", join(rc.output.observables));
  kv("seed", std::to_string(rc.output.seed));

  s += "\n[oracle]\n";
  kv("ops", join(rc.oracle.ops));
  kv("n_traj", std::to_string(rc.oracle.n_traj));
  kv("tau_fine", fmt(rc.oracle.tau_fine));
  kv("t_max", fmt(rc.oracle.t_max));

  s += "\n[scaling]\n";
  {
    std::vector<std::string> d;
    for (long v : rc.scaling.d_values) d.push_back(std::to_string(v));
    kv("d_values", join(d));
  }
  return s;
}

liouville::HilbertSystem build_system(const SystemConfig& sc) {
  if (sc.model == "spin-boson")
    return liouville::spin_boson(sc.omega, sc.epsilon, sc.alpha);
  if (sc.model == "chain")
    return liouville::tight_binding_chain(sc.d, sc.omega, sc.epsilon, sc.alpha);
  liouville::HilbertSystem sys{read_matrix_file(sc.h0_file), read_matrix_file(sc.v_file)};
  if (sys.h0.rows() != sys.v.rows())
    throw ConfigError("config: h0 and v matrix files disagree on the dimension");
  require_hermitian(sys.h0, "h0_file matrix");
  require_hermitian(sys.v, "v_file matrix");
  return sys;
}

noise::CorrelationSpec build_noise_spec(const NoiseConfig& nc) {
  noise::CorrelationSpec spec;
  spec.beta = nc.beta;
  spec.gamma = nc.gamma;
  if (nc.mode == "markov") {
    spec.mode = noise::CorrelationSpec::MarkovDelta;
    return spec;
  }
  spec.mode = nc.mode == "intrinsic" ? noise::CorrelationSpec::Intrinsic
                                     : noise::CorrelationSpec::ExtrinsicHighT;
  if (nc.spectral_density.empty()) {
    spec.j = noise::ohmic(nc.omega_c);
    return spec;
  }
  std::ifstream in(nc.spectral_density);
  if (!in) throw ConfigError("config: cannot open spectral density '" + nc.spectral_density + "'");
  std::vector<double> w, j;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ls(line);
    double a, b;
    if (!(ls >> a >> b))
      throw ConfigError("config: spectral density '" + nc.spectral_density +
                        "': expected two columns");
    w.push_back(a);
    j.push_back(b);
  }
  spec.j = noise::tabulated(std::move(w), std::move(j));
  return spec;
}

Mat initial_state(const SystemConfig& sc) {
  const long d = build_system(sc).d();
  const std::string& t = sc.rho0;
  auto site_ok = [&](long k) {
    if (k < 0 || k >= d) throw ConfigError("config: rho0 site out of range for d=" + std::to_string(d));
    return k;
  };
  if (t.rfind("site:", 0) == 0) {
    Mat r = Mat::Zero(d, d);
    r(site_ok(to_long(t.substr(5), "rho0")), site_ok(to_long(t.substr(5), "rho0"))) = 1.0;
    return r;
  }
  if (t.rfind("mixed:", 0) == 0) {
    const auto sites = split_list(t.substr(6), "rho0");
    Mat r = Mat::Zero(d, d);
    for (const auto& s : sites) {
      const long k = site_ok(to_long(s, "rho0"));
      r(k, k) += 1.0 / (double)sites.size();
    }
    return r;
  }
  Mat r = read_matrix_file(t.substr(5));
  if (r.rows() != d) throw ConfigError("config: rho0 file dimension does not match the system");
  return r;
}

std::vector<prop::Observable> build_observables(const RunConfig& rc, long d) {
  std::vector<std::string> tokens = rc.output.observables;
  if (tokens.empty()) {
    if (rc.system.model == "spin-boson")
      tokens = {"sx", "sy", "sz"};
    else if (rc.system.model == "chain")
      tokens = {"populations", "msd"};
    else
      tokens = {"populations"};
  }

  std::vector<prop::Observable> obs;
  auto pauli = [&](const std::string& name) {
    if (d != 2) throw ConfigError("config: observable '" + name + "' needs a two-level system");
    Mat m(2, 2);
    if (name == "sx")
      m << 0, 1, 1, 0;
    else if (name == "sy")
      m << 0, cplx(0, -1), cplx(0, 1), 0;
    else
      m << 1, 0, 0, -1;
    obs.push_back({name, m});
  };
  auto site_proj = [&](long k) {
    if (k < 0 || k >= d)
      throw ConfigError("config: observable site out of range for d=" + std::to_string(d));
    Mat m = Mat::Zero(d, d);
    m(k, k) = 1.0;
    obs.push_back({"p" + std::to_string(k), m});
  };
  for (const auto& t : tokens) {
    if (t == "sx" || t == "sy" || t == "sz") {
      pauli(t);
    } else if (t == "populations") {
      for (long k = 0; k < d; ++k) site_proj(k);
    } else if (t == "msd") {
      Mat m = Mat::Zero(d, d);
      for (long k = 0; k < d; ++k) m(k, k) = (double)(k * k);
      obs.push_back({"msd", m});
    } else if (t.rfind("site:", 0) == 0) {
      site_proj(to_long(t.substr(5), "observables"));
    } else {
      throw ConfigError("config: unknown observable '" + t + "'");
    }
  }
  return obs;
}

long bond_for(const SttConfig& sc, long n) {
  const auto& b = sc.bond;
  return b[std::min((std::size_t)std::max(n - 1, 0L), b.size() - 1)];
}

std::uint64_t kernel_config_hash(const noise::CorrelationSpec& spec, double tau, long mem,
                                 int n_basis, const std::vector<long>& bond,
                                 const std::vector<stt::ChebyshevBasis>& basis) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  fnv_u64(h, (std::uint64_t)spec.mode);
  fnv_f64(h, spec.beta);
  fnv_f64(h, spec.gamma);
  fnv_u64(h, (std::uint64_t)spec.j.kind);
  fnv_f64(h, spec.j.omega_c);
  fnv_f64(h, spec.j.scale);
  fnv_u64(h, spec.j.tab_w.size());
  for (std::size_t i = 0; i < spec.j.tab_w.size(); ++i) {
    fnv_f64(h, spec.j.tab_w[i]);
    fnv_f64(h, spec.j.tab_j[i]);
  }
  fnv_f64(h, tau);
  fnv_u64(h, (std::uint64_t)mem);
  fnv_u64(h, (std::uint64_t)n_basis);
  fnv_u64(h, bond.size());
  for (long b : bond) fnv_u64(h, (std::uint64_t)b);
  fnv_u64(h, basis.size());
  for (const auto& b : basis) {
    fnv_f64(h, b.lo);
    fnv_f64(h, b.hi);
  }
  return h;
}

std::uint64_t expected_kernel_hash(const RunConfig& rc) {
  const auto spec = build_noise_spec(rc.noise);
  const auto ls = liouville::build_liouville(build_system(rc.system), spec.n_comp() == 2);
  std::vector<stt::ChebyshevBasis> basis;
  for (const auto& [lo, hi] : ls.freq_range)
    basis.push_back(stt::basis_for_range(lo, hi, rc.stt.n_basis));
  std::vector<long> sched;
  for (long n = 1; n <= rc.grid.memory + 1; ++n) sched.push_back(bond_for(rc.stt, n));
  return kernel_config_hash(spec, rc.grid.tau, rc.grid.memory, rc.stt.n_basis, sched, basis);
}

}  // namespace tenprop::cfg
