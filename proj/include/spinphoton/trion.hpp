#pragma once

// Four-level trion model: two ground spin states and two trion states,
// circularly polarized decay channels, Zeeman and Overhauser Hamiltonians,
// instantaneous excitation / spin-rotation pulses with pure dephasing.
//
// Level order: |up>, |down>, |T_up>, |T_down> (trion with hole spin up/down).
// Units: time in ns, angular frequencies in rad/ns (hbar = 1), fields in mT.

#include <optional>
#include <string>

#include "spinphoton/qcore.hpp"
#include "spinphoton/rng.hpp"

namespace spinphoton {

// mu_B / hbar, from CODATA mu_B/h = 13.996244936 GHz/T.
inline constexpr double mu_bohr_rad_ns_mt = 8.7941000444e-2;

struct TrionParams {
  double t1_ns = 0.2;          // emitter lifetime
  double b_mt = 60.0;          // static field along y
  double tau_ex_ns = 0.6;      // excitation period
  double tau_osrp_ns = 0.3;    // OSRP delay after excitation
  double b_oh_mt = 9.0;        // Overhauser std-dev per axis
  double g_e = 0.60;           // electron g-factor
  double g_h = 0.30;           // hole g-factor
  double lambda_ex = 0.94;     // excitation purity
  double phi_ex_rad = 0.02 * M_PI;  // excitation polarization angle
  double lambda_osrp = 0.74;   // OSRP purity
  double theta_osrp_rad = 1.03 * M_PI;  // OSRP rotation at nominal pi
  bool pulse_area_normalized = false;   // rescale R_ex generator by sqrt(2)

  double gamma() const { return 1.0 / t1_ns; }
  double delta_e() const { return mu_bohr_rad_ns_mt * g_e * b_mt; }
  double delta_h() const { return mu_bohr_rad_ns_mt * g_h * b_mt; }

  void validate() const;

  // Flat key-value document mirroring the parameter-table names
  // (t1_ps, b_mt, tau_ex_ps, tau_osrp_ps, b_oh_mt, g_e, g_h, lambda_ex,
  //  phi_ex_pi, lambda_osrp, theta_osrp_pi).
  std::string to_text() const;
  static TrionParams from_text(const std::string& text);

  static TrionParams table_s1();
  // Vanishing-imperfection limit; g_e is tuned so that tau_ex is exactly a
  // quarter Larmor period.
  static TrionParams ideal_limit();
  static TrionParams near_term();
  static std::optional<TrionParams> preset(const std::string& name);
};

struct OverhauserSample {
  Eigen::Vector3d b_mt = Eigen::Vector3d::Zero();
};

OverhauserSample sample_overhauser(double sigma_mt, SplitRng& rng);

// --- basis convention ---
inline constexpr int idx_up = 0;
inline constexpr int idx_down = 1;
inline constexpr int idx_trion_up = 2;
inline constexpr int idx_trion_down = 3;

Eigen::Matrix4cd sigma_r();  // |up><T_up|
Eigen::Matrix4cd sigma_l();  // |down><T_down|
Eigen::Matrix4cd sigma_h();  // (sigma_L + sigma_R)/sqrt(2)
Eigen::Matrix4cd sigma_v();  // -i (sigma_L - sigma_R)/sqrt(2)
Eigen::Matrix4cd pauli_electron(int i);  // i in {0..3}; ground-manifold block
Eigen::Matrix4cd pauli_hole(int i);      // trion-manifold block
Eigen::Matrix4cd ground_projector();

// --- model operators ---

// (Delta_e/2) sigma_y^e + (Delta_h/2) sigma_y^h + (1/2) g_e mu_B B_OH . sigma^e
Eigen::Matrix4cd hamiltonian(const TrionParams& p, const OverhauserSample& s);
// 2x2 restriction to the ground manifold (used for spin-only segments).
Eigen::Matrix2cd ground_hamiltonian(const TrionParams& p, const OverhauserSample& s);

// 16x16 master-equation generator with decay gamma on both circular channels.
Matrix liouvillian_matrix(const TrionParams& p, const OverhauserSample& s);
SuperOperator liouvillian(const TrionParams& p, const OverhauserSample& s);

// exp(-i pi (cos(phi) sigma_yH + sin(phi) sigma_yV)/2), literal generator.
Eigen::Matrix4cd excitation_unitary(const TrionParams& p);
// exp(-i theta sigma_z^e / 2)
Eigen::Matrix4cd osrp_unitary(double theta_rad);

// exp(-1/2 log(lambda) D_{sigma_z}) for a diagonal sigma_z operator; entries
// (a,b) are damped by lambda^((z_a - z_b)^2 / 4).
Matrix dephasing_superop(const Eigen::Matrix4cd& sigma_z_diag, double lambda);

// Dephasing then unitary conjugation, as 16x16 superoperators on the trion.
Matrix excitation_channel(const TrionParams& p);
// OSRP dephasing scales with pulse energy: lambda_osrp^(|theta|/theta_osrp),
// so the fitted purity applies at the nominal-pi point and zero power is the
// identity channel.
double osrp_effective_lambda(const TrionParams& p, double theta_rad);
Matrix osrp_channel(const TrionParams& p, double theta_rad);
// 4x4 superoperator of the same OSRP channel restricted to the spin qubit.
Eigen::Matrix4cd osrp_spin_channel(const TrionParams& p, double theta_rad);

}  // namespace spinphoton
