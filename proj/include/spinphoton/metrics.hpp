#pragma once

// Figures of merit: fidelity to pure and mixed targets, Wootters concurrence,
// four-photon visibility, and the time-shift-maximized fidelity.

#include <functional>
#include <optional>

#include "spinphoton/types.hpp"

namespace spinphoton {

struct FidelityReport {
  double value = 0.0;
  std::string target_description;
  double evaluation_time_ns = 0.0;
  double time_shift_ns = 0.0;
  std::optional<double> uncertainty;
};

// <psi| rho |psi>
double fidelity(const Matrix& rho, const Vector& psi);
double fidelity(const DensityMatrix& rho, const Ket& target);
// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for mixed targets.
double uhlmann_fidelity(const Matrix& rho, const Matrix& sigma);

double concurrence(const Matrix& rho_two_qubit);

struct VisibilityCounts {
  double c_rrrr = 0.0;  // C_{R1 R2 R3 R4}
  double c_rlll = 0.0;  // C_{R1 L2 L3 L4}
  double c_rrrl = 0.0;  // C_{R1 R2 R3 L4}
  double c_rllr = 0.0;  // C_{R1 L2 L3 R4}
};
double visibility(const VisibilityCounts& counts);

// max_{t' in [t-window, t+window]} <psi(t')| rho(t) |psi(t')> on a 1 ps grid.
FidelityReport max_fidelity_timeshift(const std::function<Matrix(double)>& rho_of_t,
                                      const std::function<Vector(double)>& target_of_t, double t_ns,
                                      double window_ns, double step_ns = 1e-3);

}  // namespace spinphoton
