#pragma once

#include <string>

#include "tenprop/config.hpp"

namespace tenprop::cmd {

// Subcommand bodies.  Each writes its artifacts plus the resolved config into
// outdir and signals failure through ConfigError / NumericalError /
// ResourceError; the front end maps those to exit codes.

// One trained linking set per transfer function depth class, saved as
// kernel.qstt, with one training-curve CSV per class.
void train(const cfg::RunConfig& rc, const std::string& outdir);

// observables.csv and bonds.csv from the tensor-network propagation, using
// either the trained kernel named by the config or exact kernel factors.
void propagate(const cfg::RunConfig& rc, const std::string& outdir);

// Reference fixtures: brute-force path summation, trajectory Monte Carlo, and
// dense noise-free evolution, each tagged with the kernel config hash.
void oracle_fixtures(const cfg::RunConfig& rc, const std::string& outdir);

// Repeats the propagation across the configured chain sizes in forked
// children, recording per-process memory, algorithm storage, and bond growth,
// plus linear and log-log fits.  A child failure marks its row and the sweep
// continues.
void benchmark_scaling(const cfg::RunConfig& rc, const std::string& outdir);

}  // namespace tenprop::cmd
