#include "spinphoton/trion.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace spinphoton {

void TrionParams::validate() const {
  if (t1_ns <= 0) throw ValidationError("TrionParams: T1 must be positive");
  if (lambda_ex <= 0 || lambda_ex > 1) throw ValidationError("TrionParams: lambda_ex outside (0,1]");
  if (lambda_osrp <= 0 || lambda_osrp > 1)
    throw ValidationError("TrionParams: lambda_osrp outside (0,1]");
  if (b_oh_mt < 0) throw ValidationError("TrionParams: negative Overhauser std-dev");
  if (tau_ex_ns <= 0 || tau_osrp_ns < 0) throw ValidationError("TrionParams: bad pulse timing");
  if (theta_osrp_rad <= 0) throw ValidationError("TrionParams: OSRP calibration must be positive");
}

std::string TrionParams::to_text() const {
  std::ostringstream os;
  os.precision(12);
  os << "t1_ps = " << t1_ns * 1e3 << "\n";
  os << "b_mt = " << b_mt << "\n";
  os << "tau_ex_ps = " << tau_ex_ns * 1e3 << "\n";
  os << "tau_osrp_ps = " << tau_osrp_ns * 1e3 << "\n";
  os << "b_oh_mt = " << b_oh_mt << "\n";
  os << "g_e = " << g_e << "\n";
  os << "g_h = " << g_h << "\n";
  os << "lambda_ex = " << lambda_ex << "\n";
  os << "phi_ex_pi = " << phi_ex_rad / M_PI << "\n";
  os << "lambda_osrp = " << lambda_osrp << "\n";
  os << "theta_osrp_pi = " << theta_osrp_rad / M_PI << "\n";
  if (pulse_area_normalized) os << "pulse_area_normalized = 1\n";
  return os.str();
}

TrionParams TrionParams::from_text(const std::string& text) {
  std::map<std::string, double> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      auto e = s.find_last_not_of(" \t\r");
      if (e != std::string::npos) s.erase(e + 1);
    };
    trim(key);
    trim(val);
    if (key.empty()) continue;
    try {
      kv[key] = std::stod(val);
    } catch (const std::exception&) {
      throw ValidationError("TrionParams: bad value for key '" + key + "'");
    }
  }
  TrionParams p;
  auto take = [&](const std::string& key, double& target, double scale = 1.0) {
    auto it = kv.find(key);
    if (it != kv.end()) {
      target = it->second * scale;
      kv.erase(it);
    }
  };
  take("t1_ps", p.t1_ns, 1e-3);
  take("b_mt", p.b_mt);
  take("tau_ex_ps", p.tau_ex_ns, 1e-3);
  take("tau_osrp_ps", p.tau_osrp_ns, 1e-3);
  take("b_oh_mt", p.b_oh_mt);
  take("g_e", p.g_e);
  take("g_h", p.g_h);
  take("lambda_ex", p.lambda_ex);
  take("phi_ex_pi", p.phi_ex_rad, M_PI);
  take("lambda_osrp", p.lambda_osrp);
  take("theta_osrp_pi", p.theta_osrp_rad, M_PI);
  double norm_flag = 0.0;
  take("pulse_area_normalized", norm_flag);
  p.pulse_area_normalized = norm_flag != 0.0;
  if (!kv.empty()) throw ValidationError("TrionParams: unknown key '" + kv.begin()->first + "'");
  p.validate();
  return p;
}

TrionParams TrionParams::table_s1() { return TrionParams{}; }

TrionParams TrionParams::ideal_limit() {
  TrionParams p;
  p.t1_ns = 1e-3;
  p.b_oh_mt = 0.0;
  p.g_h = 0.0;
  p.lambda_ex = 1.0;
  p.phi_ex_rad = 0.0;
  p.lambda_osrp = 1.0;
  p.theta_osrp_rad = M_PI;
  // quarter Larmor period exactly equal to the pulse spacing
  p.g_e = (M_PI / 2.0) / (mu_bohr_rad_ns_mt * p.b_mt * p.tau_ex_ns);
  return p;
}

TrionParams TrionParams::near_term() {
  TrionParams p;
  p.t1_ns = 0.1;
  p.b_oh_mt = 0.9;
  p.lambda_osrp = 0.99;  // OSRP gate fidelity (1+lambda)/2 = 0.995
  p.theta_osrp_rad = M_PI;
  p.phi_ex_rad = 0.0;
  return p;
}

std::optional<TrionParams> TrionParams::preset(const std::string& name) {
  if (name == "tableS1" || name == "table-s1") return table_s1();
  if (name == "ideal") return ideal_limit();
  if (name == "near-term" || name == "nearterm") return near_term();
  return std::nullopt;
}

OverhauserSample sample_overhauser(double sigma_mt, SplitRng& rng) {
  if (sigma_mt < 0) throw ValidationError("sample_overhauser: negative sigma");
  OverhauserSample s;
  if (sigma_mt > 0)
    s.b_mt << sigma_mt * rng.normal(), sigma_mt * rng.normal(), sigma_mt * rng.normal();
  return s;
}

Eigen::Matrix4cd sigma_r() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(idx_up, idx_trion_up) = 1.0;
  return m;
}

Eigen::Matrix4cd sigma_l() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(idx_down, idx_trion_down) = 1.0;
  return m;
}

Eigen::Matrix4cd sigma_h() { return (sigma_l() + sigma_r()) / std::sqrt(2.0); }

Eigen::Matrix4cd sigma_v() { return -ci * (sigma_l() - sigma_r()) / std::sqrt(2.0); }

static Eigen::Matrix4cd embed_qubit_block(int i, int a, int b) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  Eigen::Matrix2cd s = pauli(i);
  m(a, a) = s(0, 0);
  m(a, b) = s(0, 1);
  m(b, a) = s(1, 0);
  m(b, b) = s(1, 1);
  return m;
}

Eigen::Matrix4cd pauli_electron(int i) { return embed_qubit_block(i, idx_up, idx_down); }

Eigen::Matrix4cd pauli_hole(int i) { return embed_qubit_block(i, idx_trion_up, idx_trion_down); }

Eigen::Matrix4cd ground_projector() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(idx_up, idx_up) = 1.0;
  m(idx_down, idx_down) = 1.0;
  return m;
}

Eigen::Matrix4cd hamiltonian(const TrionParams& p, const OverhauserSample& s) {
  Eigen::Matrix4cd h = 0.5 * p.delta_e() * pauli_electron(2) + 0.5 * p.delta_h() * pauli_hole(2);
  for (int k = 0; k < 3; ++k)
    h += 0.5 * p.g_e * mu_bohr_rad_ns_mt * s.b_mt[k] * pauli_electron(k + 1);
  return h;
}

Eigen::Matrix2cd ground_hamiltonian(const TrionParams& p, const OverhauserSample& s) {
  Eigen::Matrix2cd h = 0.5 * p.delta_e() * pauli_y();
  for (int k = 0; k < 3; ++k)
    h += 0.5 * p.g_e * mu_bohr_rad_ns_mt * s.b_mt[k] * pauli(k + 1);
  return h;
}

Matrix liouvillian_matrix(const TrionParams& p, const OverhauserSample& s) {
  p.validate();
  return liouvillian_superop(hamiltonian(p, s), {sigma_r(), sigma_l()}, {p.gamma(), p.gamma()});
}

SuperOperator liouvillian(const TrionParams& p, const OverhauserSample& s) {
  return SuperOperator(liouvillian_matrix(p, s), {{"trion", 4}});
}

Eigen::Matrix4cd excitation_unitary(const TrionParams& p) {
  Eigen::Matrix4cd syh = -ci * (sigma_h() - sigma_h().adjoint());
  Eigen::Matrix4cd syv = -ci * (sigma_v() - sigma_v().adjoint());
  Eigen::Matrix4cd gen = std::cos(p.phi_ex_rad) * syh + std::sin(p.phi_ex_rad) * syv;
  if (p.pulse_area_normalized) gen *= std::sqrt(2.0);
  Matrix g = -ci * M_PI / 2.0 * gen;
  return expm(g);
}

Eigen::Matrix4cd osrp_unitary(double theta_rad) {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  u(idx_up, idx_up) = std::exp(-ci * theta_rad / 2.0);
  u(idx_down, idx_down) = std::exp(ci * theta_rad / 2.0);
  return u;
}

Matrix dephasing_superop(const Eigen::Matrix4cd& sigma_z_diag, double lambda) {
  if (lambda <= 0 || lambda > 1) throw ValidationError("dephasing: lambda outside (0,1]");
  Matrix s = Matrix::Zero(16, 16);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double za = sigma_z_diag(a, a).real();
      double zb = sigma_z_diag(b, b).real();
      double damp = std::pow(lambda, (za - zb) * (za - zb) / 4.0);
      s(b * 4 + a, b * 4 + a) = damp;  // element (a,b) of rho, column stacking
    }
  return s;
}

Matrix excitation_channel(const TrionParams& p) {
  p.validate();
  return dephasing_superop(pauli_hole(3), p.lambda_ex) * unitary_superop(excitation_unitary(p));
}

// Optically induced dephasing scales with the pulse energy: the purity
// lambda_osrp is fitted at the nominal-pi operating point and a rotation of
// theta costs lambda^(|theta|/theta_osrp).
double osrp_effective_lambda(const TrionParams& p, double theta_rad) {
  return std::pow(p.lambda_osrp, std::abs(theta_rad) / p.theta_osrp_rad);
}

Matrix osrp_channel(const TrionParams& p, double theta_rad) {
  p.validate();
  return dephasing_superop(pauli_electron(3), osrp_effective_lambda(p, theta_rad)) *
         unitary_superop(osrp_unitary(theta_rad));
}

Eigen::Matrix4cd osrp_spin_channel(const TrionParams& p, double theta_rad) {
  p.validate();
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  u(0, 0) = std::exp(-ci * theta_rad / 2.0);
  u(1, 1) = std::exp(ci * theta_rad / 2.0);
  Eigen::Matrix4cd chan = kron(u.conjugate(), u);
  double lambda = osrp_effective_lambda(p, theta_rad);
  chan.row(1) *= lambda;
  chan.row(2) *= lambda;
  return chan;
}

}  // namespace spinphoton
