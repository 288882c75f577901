#pragma once

// Synthetic polarization tomography: Born-rule coincidence counts with shot
// noise, and linear-inversion reconstruction with nearest-PSD projection.
// Analysis bases per photon: RL (circular), HV, DA.

#include <map>

#include "spinphoton/rng.hpp"
#include "spinphoton/types.hpp"

namespace spinphoton {

enum class AnalysisBasis { RL, HV, DA };

std::string basis_name(AnalysisBasis b);
AnalysisBasis basis_from_name(const std::string& name);
// outcome 0 / 1 labels per basis: R/L, H/V, D/A
char outcome_label(AnalysisBasis b, int outcome);
// projector of one outcome in the photon (|R>,|L>) basis
Eigen::Matrix2cd outcome_projector(AnalysisBasis b, int outcome);

using MeasurementSetting = std::vector<AnalysisBasis>;

std::string setting_name(const MeasurementSetting& s);
MeasurementSetting setting_from_name(const std::string& name);
// all 3^n basis combinations
std::vector<MeasurementSetting> complete_settings(int n_photons);

struct CountTable {
  // counts[setting string][outcome string]; expected counts (real-valued) in
  // analytic mode, integers when sampled
  std::map<std::string, std::map<std::string, double>> counts;
  double shots_per_setting = 0.0;  // 0 = analytic (frequencies are exact)
  std::uint64_t seed = 0;
  int n_photons = 0;

  std::string to_csv() const;
  static CountTable from_csv(const std::string& text);
};

// shots = 0 switches to analytic mode with exact Born frequencies.
CountTable simulate_counts(const DensityMatrix& rho, const std::vector<MeasurementSetting>& settings,
                           long shots_per_setting, std::uint64_t seed);

// Linear inversion to a Hermitian estimate, then projection to the nearest
// PSD unit-trace matrix. Requires an informationally complete setting list.
DensityMatrix reconstruct(const CountTable& counts);

}  // namespace spinphoton
