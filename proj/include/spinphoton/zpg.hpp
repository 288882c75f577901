#pragma once

// Zero-photon-generator conditioning and reconstruction of the
// time-integrated spin-photon emission process map.
//
// For a polarizing beam splitter measuring polarization p with detector
// efficiencies eta (p) and eta_bar (orthogonal), the conditioned state with
// zero clicks evolves under L - eta*gamma*J_p - eta_bar*gamma*J_pbar, and the
// four threshold-detection states follow by inclusion-exclusion.

#include <array>
#include <map>

#include "spinphoton/trion.hpp"

namespace spinphoton {

// Poincare parametrization p = (cos theta, sin theta e^{i phi}) in the (H,V)
// Jones basis. R = (pi/4, -pi/2), L = (pi/4, +pi/2).
struct PolarizationAxis {
  double theta = 0.0;
  double phi = 0.0;
  std::string name;

  static PolarizationAxis r() { return {M_PI / 4, -M_PI / 2, "R"}; }
  static PolarizationAxis l() { return {M_PI / 4, M_PI / 2, "L"}; }
  static PolarizationAxis h() { return {0.0, 0.0, "H"}; }
  static PolarizationAxis v() { return {M_PI / 2, 0.0, "V"}; }
  static PolarizationAxis d() { return {M_PI / 4, 0.0, "D"}; }
  static PolarizationAxis a() { return {M_PI / 4, M_PI, "A"}; }

  Eigen::Matrix4cd dipole() const {
    return std::cos(theta) * sigma_h() +
           std::sin(theta) * std::exp(ci * phi) * sigma_v();
  }
  PolarizationAxis orthogonal() const {
    return {M_PI / 2 - theta, phi + M_PI, name.empty() ? "" : name + "_orth"};
  }
  // Photon-qubit ket in the (|R>,|L>) basis; the conjugate Jones coefficients
  // so that a p-click projects onto exactly this state.
  Eigen::Vector2cd photon_ket() const;
};

// A detection basis pair and the photon Pauli |p><p| - |pbar><pbar|.
struct DetectionBasis {
  PolarizationAxis p;
  Eigen::Matrix2cd photon_pauli() const;
};

// Default informationally complete set: (R/L, H/V, D/A).
std::array<DetectionBasis, 3> default_detection_bases();

struct ThresholdQuartet {
  Eigen::Matrix4cd rho00, rho10, rho01, rho11;  // unnormalized conditioned states
  PolarizationAxis axis;
  double t = 0.0;
  // P_p(t): at least one p photon, exactly zero pbar.
  double detection_probability() const { return rho10.trace().real(); }
};

Matrix zpg_generator(const Matrix& liouvillian, const PolarizationAxis& p, int eta, int eta_bar,
                     double gamma);
SuperOperator zpg_generator(const SuperOperator& liouvillian, const PolarizationAxis& p, int eta,
                            int eta_bar, double gamma);

ThresholdQuartet threshold_quartet(const Eigen::Matrix4cd& rho0, const PolarizationAxis& p,
                                   double t, const Matrix& liouvillian, double gamma);

// Reconstructed post-selected map from a spin qubit to (photon (x) spin).
class ProcessMap {
 public:
  ProcessMap() = default;
  ProcessMap(Matrix transfer, double t, bool post_selected = true);

  const Matrix& transfer() const { return m_; }  // 16 x 4, column stacking
  double evaluation_time() const { return t_; }
  bool post_selected() const { return post_selected_; }

  Eigen::Matrix4cd apply(const Eigen::Matrix2cd& rho_spin) const;
  // normalized output plus its pre-normalization trace
  std::pair<Eigen::Matrix4cd, double> apply_normalized(const Eigen::Matrix2cd& rho_spin) const;

  Matrix choi() const { return choi_matrix(m_, 2, 4); }

  std::string to_json() const;
  static ProcessMap from_json(const std::string& text);

 private:
  Matrix m_ = Matrix::Zero(16, 4);
  double t_ = 0.0;
  bool post_selected_ = true;
};

// Emission context for one (params, sample) draw: Liouvillian, excitation
// channel, and per-time cached process maps.
class TrionEmission {
 public:
  TrionEmission(const TrionParams& p, const OverhauserSample& s);

  const TrionParams& params() const { return p_; }
  const Matrix& liouvillian() const { return liou_; }

  const ProcessMap& map(double t) const;
  ProcessMap reconstruct(double t, const std::array<DetectionBasis, 3>& bases) const;

  // condition number of the 64x64 design matrix (fixed by the basis choice)
  static double design_condition_number();

 private:
  TrionParams p_;
  OverhauserSample s_;
  Matrix liou_;
  Matrix exc_;
  mutable std::map<double, ProcessMap> cache_;
};

ProcessMap emission_process_map(const TrionParams& p, const OverhauserSample& s, double t);

}  // namespace spinphoton
