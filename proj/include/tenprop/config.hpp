#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tenprop/liouville.hpp"
#include "tenprop/noise.hpp"
#include "tenprop/propagator.hpp"
#include "tenprop/stt.hpp"

namespace tenprop::cfg {

// Sectioned key-value run description.  Parsing materializes every default, so
// a rendered config reproduces the run it came from.

struct SystemConfig {
  std::string model = "spin-boson";  // spin-boson | chain | custom-matrix-files
  long d = 2;
  double omega = 1.0;    // tunnel coupling; the energy unit
  double epsilon = 0.0;  // bias / site energy
  double alpha = 0.0;    // coupling operator scale
  std::string h0_file, v_file;  // custom-matrix-files inputs
  std::string rho0 = "site:0";  // site:<k> | mixed:<k,l,...> | file:<path>
};

struct NoiseConfig {
  std::string mode = "extrinsic";  // extrinsic | intrinsic | markov
  double beta = 1.0;
  double omega_c = 1.0;
  double gamma = 0.0;              // white-noise strength, markov only
  std::string spectral_density;    // two-column (w, J) file; empty: ohmic
};

struct GridConfig {
  double tau = 0.1;
  long n_steps = 0;  // 0: command decides or rejects
  long memory = 0;
};

struct SttConfig {
  int n_basis = 10;
  std::vector<long> bond = {10};  // schedule over n = 1..M+1; short lists repeat the last entry
  double svd_tol = 1e-10;
  long b_max = 0;
  std::string kernel_file;        // propagate input; empty: exact kernel factors
  stt::TrainingConfig train;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> observables;  // empty: model default
  std::uint64_t seed = 1;
};

struct OracleConfig {
  std::vector<std::string> ops = {"path-sum", "monte-carlo", "dense"};
  long n_traj = 1000;
  double tau_fine = 0;  // 0: tau/4
  double t_max = 0;     // 0: n_steps*tau
};

struct ScalingConfig {
  std::vector<long> d_values = {2, 4, 8, 16};
};

struct RunConfig {
  SystemConfig system;
  NoiseConfig noise;
  GridConfig grid;
  SttConfig stt;
  OutputConfig output;
  OracleConfig oracle;
  ScalingConfig scaling;
};

// Throws ConfigError on unknown sections or keys, duplicates, malformed
// values, or invariant violations.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Fixed section and key order; parse(render(rc)) reproduces rc.
std::string render_config(const RunConfig& rc);

liouville::HilbertSystem build_system(const SystemConfig& sc);
noise::CorrelationSpec build_noise_spec(const NoiseConfig& nc);
Mat initial_state(const SystemConfig& sc);

// Expands observable names against the model: sx/sy/sz (two-level),
// populations (p0..p{d-1}), msd, site:<k>.  Empty list picks the model default.
std::vector<prop::Observable> build_observables(const RunConfig& rc, long d);

// bond schedule entry for transfer function n (1-based)
long bond_for(const SttConfig& sc, long n);

// FNV-1a over everything the trained kernel depends on: the noise spec, step,
// memory depth, basis size, bond schedule, and the per-component frequency
// domains.  Deliberately excludes d and n_steps so trained sets transfer
// across chain sizes with the same coupling spectrum.
std::uint64_t kernel_config_hash(const noise::CorrelationSpec& spec, double tau, long mem,
                                 int n_basis, const std::vector<long>& bond,
                                 const std::vector<stt::ChebyshevBasis>& basis);

std::uint64_t expected_kernel_hash(const RunConfig& rc);

}  // namespace tenprop::cfg
