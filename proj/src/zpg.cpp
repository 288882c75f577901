#include "spinphoton/zpg.hpp"

#include <json.hpp>
#include <sstream>

namespace spinphoton {

using nlohmann::json;

Eigen::Vector2cd PolarizationAxis::photon_ket() const {
  cxd ch = std::cos(theta);
  cxd cv = std::sin(theta) * std::exp(ci * phi);
  cxd a_r = (ch + ci * cv) / std::sqrt(2.0);
  cxd a_l = (ch - ci * cv) / std::sqrt(2.0);
  Eigen::Vector2cd ket;
  ket << std::conj(a_r), std::conj(a_l);
  return ket;
}

Eigen::Matrix2cd DetectionBasis::photon_pauli() const {
  Eigen::Vector2cd kp = p.photon_ket();
  Eigen::Vector2cd ko = p.orthogonal().photon_ket();
  return kp * kp.adjoint() - ko * ko.adjoint();
}

std::array<DetectionBasis, 3> default_detection_bases() {
  return {DetectionBasis{PolarizationAxis::r()}, DetectionBasis{PolarizationAxis::h()},
          DetectionBasis{PolarizationAxis::d()}};
}

Matrix zpg_generator(const Matrix& liouvillian, const PolarizationAxis& p, int eta, int eta_bar,
                     double gamma) {
  if ((eta != 0 && eta != 1) || (eta_bar != 0 && eta_bar != 1))
    throw ValidationError("zpg_generator: detector efficiencies must be 0 or 1");
  Matrix g = liouvillian;
  if (eta) g -= gamma * jump_superop(p.dipole());
  if (eta_bar) g -= gamma * jump_superop(p.orthogonal().dipole());
  return g;
}

SuperOperator zpg_generator(const SuperOperator& liouvillian, const PolarizationAxis& p, int eta,
                            int eta_bar, double gamma) {
  return SuperOperator(zpg_generator(liouvillian.entries(), p, eta, eta_bar, gamma),
                       liouvillian.labels());
}

ThresholdQuartet threshold_quartet(const Eigen::Matrix4cd& rho0, const PolarizationAxis& p,
                                   double t, const Matrix& liouvillian, double gamma) {
  if (t < 0) throw ValidationError("threshold_quartet: negative time");
  Vector v = vectorize(rho0);
  Vector z00 = expm(liouvillian * t) * v;
  Vector z01 = expm(zpg_generator(liouvillian, p, 0, 1, gamma) * t) * v;
  Vector z10 = expm(zpg_generator(liouvillian, p, 1, 0, gamma) * t) * v;
  Vector z11 = expm(zpg_generator(liouvillian, p, 1, 1, gamma) * t) * v;

  ThresholdQuartet q;
  q.axis = p;
  q.t = t;
  q.rho00 = unvectorize(z11, 4);
  q.rho10 = unvectorize(z01 - z11, 4);
  q.rho01 = unvectorize(z10 - z11, 4);
  q.rho11 = unvectorize(z00 - z10 - z01 + z11, 4);
  for (const auto* m : {&q.rho00, &q.rho10, &q.rho01, &q.rho11})
    if (m->trace().real() < -1e-8)
      throw NumericalError("threshold_quartet: conditioned trace below -1e-8");
  return q;
}

ProcessMap::ProcessMap(Matrix transfer, double t, bool post_selected)
    : m_(std::move(transfer)), t_(t), post_selected_(post_selected) {
  if (m_.rows() != 16 || m_.cols() != 4) throw ValidationError("ProcessMap: transfer must be 16x4");
}

Eigen::Matrix4cd ProcessMap::apply(const Eigen::Matrix2cd& rho_spin) const {
  return unvectorize(m_ * vectorize(rho_spin), 4);
}

std::pair<Eigen::Matrix4cd, double> ProcessMap::apply_normalized(
    const Eigen::Matrix2cd& rho_spin) const {
  Eigen::Matrix4cd out = apply(rho_spin);
  double tr = out.trace().real();
  if (tr <= 0) throw NumericalError("ProcessMap: nonpositive output trace");
  return {out / tr, tr};
}

std::string ProcessMap::to_json() const {
  json j;
  j["rows"] = 16;
  j["cols"] = 4;
  j["t_ns"] = t_;
  j["post_selected"] = post_selected_;
  std::vector<double> re, im;
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 4; ++c) {
      re.push_back(m_(r, c).real());
      im.push_back(m_(r, c).imag());
    }
  j["re"] = re;
  j["im"] = im;
  return j.dump(2);
}

ProcessMap ProcessMap::from_json(const std::string& text) {
  json j = json::parse(text);
  auto re = j.at("re").get<std::vector<double>>();
  auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != 64 || im.size() != 64) throw ValidationError("ProcessMap JSON: wrong size");
  Matrix m(16, 4);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 4; ++c) {
      size_t k = static_cast<size_t>(r) * 4 + c;
      m(r, c) = cxd(re[k], im[k]);
    }
  return ProcessMap(std::move(m), j.value("t_ns", 0.0), j.value("post_selected", true));
}

// ---- reconstruction ----

static std::array<Eigen::Vector2cd, 4> reconstruction_inputs() {
  std::array<Eigen::Vector2cd, 4> kets;
  kets[0] << 1, 0;
  kets[1] << 0, 1;
  kets[2] << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  kets[3] << 1 / std::sqrt(2.0), ci / std::sqrt(2.0);
  return kets;
}

namespace {
struct DesignSystem {
  Eigen::JacobiSVD<Matrix> svd;
  double condition = 0.0;
};
}  // namespace

// Rows are ordered (k, j, i): input state k, photon Pauli j (I + one per
// detection basis), spin Pauli i.
static DesignSystem build_design(const std::array<DetectionBasis, 3>& bases) {
  auto inputs = reconstruction_inputs();
  std::array<Eigen::Matrix2cd, 4> photon_paulis = {Eigen::Matrix2cd::Identity(),
                                                   bases[0].photon_pauli(), bases[1].photon_pauli(),
                                                   bases[2].photon_pauli()};
  Matrix a(64, 64);
  int row = 0;
  for (const auto& ket : inputs) {
    Matrix rho_in = ket * ket.adjoint();
    Eigen::RowVectorXcd v_in = vectorize(rho_in).transpose();
    for (const auto& pj : photon_paulis)
      for (int i = 0; i < 4; ++i) {
        Matrix obs = kron(pj, Matrix(pauli(i)));
        Eigen::RowVectorXcd v_obs = vectorize(obs).adjoint();
        a.row(row++) = kron(v_in, v_obs);
      }
  }
  DesignSystem sys;
  sys.svd.compute(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = sys.svd.singularValues();
  sys.condition = sv(0) / sv(sv.size() - 1);
  return sys;
}

TrionEmission::TrionEmission(const TrionParams& p, const OverhauserSample& s)
    : p_(p), s_(s), liou_(liouvillian_matrix(p, s)), exc_(excitation_channel(p)) {}

double TrionEmission::design_condition_number() {
  static const double cond = build_design(default_detection_bases()).condition;
  return cond;
}

ProcessMap TrionEmission::reconstruct(double t,
                                      const std::array<DetectionBasis, 3>& bases) const {
  auto inputs = reconstruction_inputs();

  Matrix e11[3], e01[3], e10[3];
  double gamma = p_.gamma();
  for (int b = 0; b < 3; ++b) {
    const auto& ax = bases[b].p;
    e01[b] = expm(zpg_generator(liou_, ax, 0, 1, gamma) * t);
    e10[b] = expm(zpg_generator(liou_, ax, 1, 0, gamma) * t);
    e11[b] = expm(zpg_generator(liou_, ax, 1, 1, gamma) * t);
  }

  Vector bvec(64);
  int row = 0;
  for (const auto& ket : inputs) {
    Eigen::Matrix4cd rho4 = Eigen::Matrix4cd::Zero();
    rho4.topLeftCorner<2, 2>() = ket * ket.adjoint();
    Vector v = exc_ * vectorize(rho4);

    // spin states conditioned on one click in p / pbar per basis
    std::array<Eigen::Matrix2cd, 3> s_p, s_pbar;
    std::array<double, 3> denom;
    for (int b = 0; b < 3; ++b) {
      Vector v11 = e11[b] * v;
      s_p[b] = unvectorize(Vector(e01[b] * v - v11), 4).topLeftCorner<2, 2>();
      s_pbar[b] = unvectorize(Vector(e10[b] * v - v11), 4).topLeftCorner<2, 2>();
      denom[b] = (s_p[b].trace() + s_pbar[b].trace()).real();
      if (denom[b] <= 1e-9)
        throw NumericalError("process map: no emission yet in basis " + bases[b].p.name);
    }

    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) {
        Eigen::Matrix2cd si = pauli(i);
        cxd val;
        if (j == 0)
          val = (si * (s_p[0] + s_pbar[0])).trace() / denom[0];
        else
          val = (si * (s_p[j - 1] - s_pbar[j - 1])).trace() / denom[j - 1];
        bvec(row++) = val;
      }
  }

  const bool default_set =
      bases[0].p.name == "R" && bases[1].p.name == "H" && bases[2].p.name == "D";
  Vector mvec;
  double cond;
  if (default_set) {
    static const DesignSystem sys = build_design(default_detection_bases());
    cond = sys.condition;
    mvec = sys.svd.solve(bvec);
  } else {
    DesignSystem sys = build_design(bases);
    cond = sys.condition;
    mvec = sys.svd.solve(bvec);
  }
  if (cond > 1e8)
    throw NumericalError("process map: design matrix ill-conditioned (cond " +
                         std::to_string(cond) + ") for bases " + bases[0].p.name + "/" +
                         bases[1].p.name + "/" + bases[2].p.name);
  return ProcessMap(Matrix(Eigen::Map<const Matrix>(mvec.data(), 16, 4)), t, true);
}

const ProcessMap& TrionEmission::map(double t) const {
  auto it = cache_.find(t);
  if (it != cache_.end()) return it->second;
  auto [pos, _] = cache_.emplace(t, reconstruct(t, default_detection_bases()));
  return pos->second;
}

ProcessMap emission_process_map(const TrionParams& p, const OverhauserSample& s, double t) {
  return TrionEmission(p, s).reconstruct(t, default_detection_bases());
}

}  // namespace spinphoton
