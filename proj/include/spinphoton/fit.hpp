#pragma once

// Derivative-free estimation of the seven fitted model parameters from
// target two-photon density matrices: Nelder-Mead simplex with random
// restarts, common-random-number Overhauser averaging, and leave-one-out
// subset uncertainties.

#include <map>

#include "spinphoton/metrics.hpp"
#include "spinphoton/protocol.hpp"

namespace spinphoton {

struct FitTarget {
  PulseProgram program;  // herald baked into the program
  char readout = 'R';
  Matrix target;  // 4x4 two-photon density matrix
  std::string name;
};

struct FitConfig {
  TrionParams base = TrionParams::table_s1();
  std::vector<std::string> free_names = default_free();
  std::map<std::string, std::pair<double, double>> bounds = default_bounds();
  std::vector<FitTarget> targets;
  int overhauser_samples = 32;
  int restarts = 3;
  int max_iterations = 500;
  std::uint64_t seed = 1;

  // Table S1(b) symbols; angles in units of pi
  static std::vector<std::string> default_free();
  // fitted values +- 5 standard deviations, clipped to physical ranges
  static std::map<std::string, std::pair<double, double>> default_bounds();

  void validate() const;
  std::string to_text() const;  // targets referenced by preset/herald/readout and file
};

struct FitResult {
  std::vector<std::string> names;
  std::map<std::string, double> mean;
  std::map<std::string, double> stddev;
  double best_objective = 1.0;
  std::map<std::string, double> per_target_fidelity;
  int subsets_used = 0;
  bool converged = false;
  std::uint64_t seed = 0;

  std::string to_text() const;
  std::string to_csv() const;  // symbol,mean,std rows
};

double get_param(const TrionParams& p, const std::string& name);
void set_param(TrionParams& p, const std::string& name, double value);

// 1 - mean Uhlmann fidelity across targets, Overhauser averaged with a fixed
// sample stream (common random numbers).
double fit_objective(const TrionParams& p, const std::vector<FitTarget>& targets, int n_oh,
                     std::uint64_t seed, std::map<std::string, double>* per_target = nullptr);

FitResult fit_parameters(const FitConfig& cfg);

// Simulated targets at the given truth (one per protocol preset and
// herald/readout condition, mirroring the measured data set).
std::vector<FitTarget> synthetic_targets(const TrionParams& truth, int n_oh, std::uint64_t seed);

}  // namespace spinphoton
