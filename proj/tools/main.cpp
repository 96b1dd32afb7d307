#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdio>

#include "tenprop/commands.hpp"
#include "tenprop/config.hpp"
#include "tenprop/types.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

int dispatch(const std::string& name, const Options& opt) {
  auto rc = tenprop::cfg::load_config(opt.config);
  if (opt.seed_set) rc.output.seed = opt.seed;
  const std::string outdir = opt.out.empty() ? rc.output.directory : opt.out;

  if (name == "train")
    tenprop::cmd::train(rc, outdir);
  else if (name == "propagate")
    tenprop::cmd::propagate(rc, outdir);
  else if (name == "oracle")
    tenprop::cmd::oracle_fixtures(rc, outdir);
  else
    tenprop::cmd::benchmark_scaling(rc, outdir);

  std::printf("%s: artifacts in %s\n", name.c_str(), outdir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noise-averaged density-matrix propagation with tensor-train kernels"};
  app.require_subcommand(1);

  Options opt;
  auto* config_opt = app.add_option("--config", opt.config, "run configuration file");
  auto* seed_opt = app.add_option("--seed", opt.seed, "override the configured seed");
  app.add_option("--threads", opt.threads, "cap worker threads");
  app.add_option("--out", opt.out, "override the configured output directory");

  const std::pair<const char*, const char*> subs[] = {
      {"train", "fit the linking matrix sets and save the kernel"},
      {"propagate", "run the averaged propagation and export series"},
      {"oracle", "generate reference fixtures"},
      {"benchmark-scaling", "sweep the chain size and record memory use"},
  };
  for (const auto& [name, desc] : subs) app.add_subcommand(name, desc)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (config_opt->count() == 0) {
    std::fprintf(stderr, "config error: --config is required\n");
    return 2;
  }
  opt.seed_set = seed_opt->count() > 0;
  if (opt.threads > 0) Eigen::setNbThreads(opt.threads);

  try {
    return dispatch(app.get_subcommands()[0]->get_name(), opt);
  } catch (const tenprop::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const tenprop::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const tenprop::ResourceError& e) {
    std::fprintf(stderr, "resource failure: %s\n", e.what());
    return 4;
  } catch (const std::bad_alloc&) {
    std::fprintf(stderr, "resource failure: out of memory\n");
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
