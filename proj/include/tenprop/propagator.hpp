#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "tenprop/liouville.hpp"
#include "tenprop/stt.hpp"
#include "tenprop/ttcore.hpp"

namespace tenprop::prop {

struct StepPolicy {
  ttcore::SvdPolicy svd;
  long b_max = 0;               // hard cap checked after recompression; 0 = off
  bool renormalize_trace = false;  // applies to the reported states only
};

// One evolution step: the free-propagator MPO summed over the eigentable with
// the step's kernel factors appended, one trailing site per transfer function
// the step participates in.
struct Fugacity {
  long alpha = 0;
  long n_mem_sites = 0;
  ttcore::TensorTrain mpo;
};

// Fixed summation order over the eigentable: zero multiplets first, the rest
// ascending, so repeated builds are bitwise identical.
std::vector<long> entry_order(const liouville::LiouvilleSystem& ls);

// Frequency multiplets in eigentable index order, the layout kernel
// providers expect.
std::vector<std::vector<double>> table_entries(const liouville::LiouvilleSystem& ls);

// horizon caps the reach of the appended factors (m = alpha..min(horizon,
// alpha + mem)); pass alpha + mem (or more) for the uncapped running step.
Fugacity build_fugacity(const liouville::LiouvilleSystem& ls, const liouville::FreePropagator& fp,
                        const stt::KernelProvider& ker, long alpha, long horizon,
                        const StepPolicy& pol);

struct Observable {
  std::string name;
  Mat op;  // on the physical (unpadded) space
};

struct SeriesPoint {
  double t = 0;
  std::vector<cplx> values;
  double trace_dev = 0;
  double herm_dev = 0;
};

struct ObservableSeries {
  std::vector<std::string> names;
  std::vector<SeriesPoint> pts;
  std::vector<long> max_bond;          // running-state bond after each step
  std::vector<std::size_t> bytes;      // running-state storage after each step
  std::vector<Mat> states;             // closed density matrices per step
};

// Shared fugacity caches keyed by the step's depth class; propagation and
// operator assembly draw from the same tables.
struct Engine {
  const liouville::LiouvilleSystem* ls = nullptr;
  const liouville::FreePropagator* fp = nullptr;
  const stt::KernelProvider* ker = nullptr;
  StepPolicy pol;

  std::map<long, Fugacity> full;                        // class
  std::map<std::pair<long, long>, Fugacity> capped;     // (class, horizon - alpha)

  const Fugacity& full_fugacity(long alpha);
  const Fugacity& capped_fugacity(long alpha, long horizon);
};

// Applies one fugacity to a state or operator train: pads trailing dummy
// sites to match, zips, then squeezes the memory sites the step closed.
ttcore::TensorTrain apply_fugacity(const Fugacity& z, const ttcore::TensorTrain& s, long n_sys,
                                   const ttcore::SvdPolicy& pol);

// Incremental propagation: the running state advances with uncapped steps
// while each reported time closes its pending transfer functions from a
// buffered earlier state, so every point is the exact finite-memory result.
ObservableSeries propagate(Engine& eng, const Mat& rho0, long n_steps,
                           const std::vector<Observable>& obs);

struct Propagator {
  ttcore::TensorTrain mpo;   // over the 2q system sites after full closure
  double tau = 0;
  long n_steps = 0;
  long mem = 0;
  std::vector<long> bond_log;  // intermediate max bond after each factor
};

// Ordered product of the n_steps fugacities at horizon n_steps, latest step
// leftmost (positive time ordering).
Propagator build_propagator(Engine& eng, long n_steps);

// Closed-form white-noise relaxation operator exp(-i t L0 - t gamma L1^2 / 2).
Mat markov_propagator(const liouville::LiouvilleSystem& ls, double gamma, double t);

std::string series_csv(const ObservableSeries& s);
std::string bonds_csv(const ObservableSeries& s);

}  // namespace tenprop::prop
