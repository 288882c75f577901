#include "spinphoton/protocol.hpp"

#include <algorithm>
#include <sstream>

namespace spinphoton {

void PulseProgram::validate() const {
  if (events.empty()) throw ValidationError("PulseProgram: no events");
  double prev = -1e300;
  bool seen_excite = false;
  for (const auto& e : events) {
    if (e.at_ns <= prev) throw ValidationError("PulseProgram: timestamps must strictly increase");
    prev = e.at_ns;
    if (e.kind == PulseEvent::Kind::Osrp && !seen_excite)
      throw ValidationError("PulseProgram: OSRP before the first excitation");
    if (e.kind == PulseEvent::Kind::Excite) seen_excite = true;
  }
  if (events.front().kind != PulseEvent::Kind::Excite)
    throw ValidationError("PulseProgram: first event must be an excitation (heralding photon)");
  if (!seen_excite) throw ValidationError("PulseProgram: program needs at least one excitation");
  if (herald != 'R' && herald != 'L') throw ValidationError("PulseProgram: herald must be R or L");
  if (readout != 'R' && readout != 'L')
    throw ValidationError("PulseProgram: readout must be R or L");
  if (evaluation_after_ns <= 0) throw ValidationError("PulseProgram: evaluation time must be > 0");
}

std::vector<double> PulseProgram::excite_times() const {
  std::vector<double> t;
  for (const auto& e : events)
    if (e.kind == PulseEvent::Kind::Excite) t.push_back(e.at_ns);
  return t;
}

std::string PulseProgram::to_text() const {
  std::ostringstream os;
  os.precision(12);
  if (!name.empty()) os << "# program: " << name << "\n";
  os << "herald " << herald << "\n";
  os << "readout " << readout << "\n";
  os << "evaluate_after_ps " << evaluation_after_ns * 1e3 << "\n";
  for (const auto& e : events) {
    switch (e.kind) {
      case PulseEvent::Kind::Excite: os << "excite " << e.at_ns * 1e3 << "\n"; break;
      case PulseEvent::Kind::Osrp:
        os << "osrp " << e.at_ns * 1e3 << " " << e.theta_nominal_rad / M_PI << "\n";
        break;
      case PulseEvent::Kind::EndSequence: os << "end " << e.at_ns * 1e3 << "\n"; break;
    }
  }
  return os.str();
}

PulseProgram PulseProgram::from_text(const std::string& text) {
  PulseProgram prog;
  prog.events.clear();
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "herald" || word == "readout") {
      std::string b;
      ls >> b;
      if (b.size() != 1) throw ValidationError("PulseProgram: bad basis '" + b + "'");
      (word == "herald" ? prog.herald : prog.readout) = b[0];
    } else if (word == "evaluate_after_ps") {
      double ps;
      if (!(ls >> ps)) throw ValidationError("PulseProgram: bad evaluation time");
      prog.evaluation_after_ns = ps * 1e-3;
    } else if (word == "excite") {
      double ps;
      if (!(ls >> ps)) throw ValidationError("PulseProgram: excite needs a time");
      prog.events.push_back({PulseEvent::Kind::Excite, ps * 1e-3, 0.0});
    } else if (word == "osrp") {
      double ps, theta_pi;
      if (!(ls >> ps >> theta_pi)) throw ValidationError("PulseProgram: osrp needs time and angle");
      prog.events.push_back({PulseEvent::Kind::Osrp, ps * 1e-3, theta_pi * M_PI});
    } else if (word == "end") {
      double ps;
      if (!(ls >> ps)) throw ValidationError("PulseProgram: end needs a time");
      prog.events.push_back({PulseEvent::Kind::EndSequence, ps * 1e-3, 0.0});
    } else {
      throw ValidationError("PulseProgram: unknown directive '" + word + "'");
    }
  }
  prog.validate();
  return prog;
}

static PulseProgram four_pulse(const TrionParams& p, const std::string& name, bool osrp1,
                               bool osrp2) {
  PulseProgram prog;
  prog.name = name;
  double tau = p.tau_ex_ns;
  for (int k = 0; k < 4; ++k) prog.events.push_back({PulseEvent::Kind::Excite, k * tau, 0.0});
  if (osrp1) prog.events.push_back({PulseEvent::Kind::Osrp, tau + p.tau_osrp_ns, M_PI});
  if (osrp2) prog.events.push_back({PulseEvent::Kind::Osrp, 2 * tau + p.tau_osrp_ns, M_PI});
  std::sort(prog.events.begin(), prog.events.end(),
            [](const PulseEvent& a, const PulseEvent& b) { return a.at_ns < b.at_ns; });
  prog.evaluation_after_ns = tau;
  return prog;
}

PulseProgram PulseProgram::lc4(const TrionParams& p) { return four_pulse(p, "lc4", false, false); }
PulseProgram PulseProgram::ghz4(const TrionParams& p) { return four_pulse(p, "ghz4", true, true); }
PulseProgram PulseProgram::rlc1(const TrionParams& p) { return four_pulse(p, "rlc1", true, false); }
PulseProgram PulseProgram::rlc2(const TrionParams& p) { return four_pulse(p, "rlc2", false, true); }

PulseProgram PulseProgram::visibility_scan(const TrionParams& p, double phi2_rad) {
  PulseProgram prog;
  prog.name = "visibility-scan";
  double tau = p.tau_ex_ns;
  prog.events.push_back({PulseEvent::Kind::Excite, 0.0, 0.0});
  prog.events.push_back({PulseEvent::Kind::Excite, tau, 0.0});
  prog.events.push_back({PulseEvent::Kind::Osrp, tau + p.tau_osrp_ns, M_PI});
  prog.events.push_back({PulseEvent::Kind::Excite, 2 * tau, 0.0});
  // theta_2 = pi interval: twice the quarter period, OSRP at its midpoint
  prog.events.push_back({PulseEvent::Kind::Osrp, 3 * tau, phi2_rad});
  prog.events.push_back({PulseEvent::Kind::Excite, 4 * tau, 0.0});
  prog.evaluation_after_ns = tau;
  return prog;
}

std::optional<PulseProgram> PulseProgram::preset(const std::string& name, const TrionParams& p) {
  if (name == "lc4") return lc4(p);
  if (name == "ghz4") return ghz4(p);
  if (name == "rlc1") return rlc1(p);
  if (name == "rlc2") return rlc2(p);
  if (name == "visibility-scan") return visibility_scan(p, 0.0);
  return std::nullopt;
}

// ---- step compilation ----

namespace {

struct Step {
  enum class Kind { Emission, SpinChannel, TargetGate };
  Kind kind = Kind::Emission;
  double map_time = 0.0;  // Emission
  bool herald = false;    // Emission: project this photon and drop it
  Eigen::Matrix4cd chan;  // SpinChannel superoperator on the spin qubit
  Eigen::Matrix2cd gate;  // TargetGate on the ideal target spin
};

Eigen::Matrix2cd ry2(double t) {
  Eigen::Matrix2cd m;
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

Eigen::Matrix2cd rz2(double t) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = std::exp(-ci * t / 2.0);
  m(1, 1) = std::exp(ci * t / 2.0);
  return m;
}

Eigen::Matrix4cd spin_unitary_channel(const TrionParams& p, const OverhauserSample& s, double dt) {
  Matrix u = expm(Matrix(-ci * dt * ground_hamiltonian(p, s)));
  return kron(u.conjugate(), u);
}

// Chronological stream: the emission map covers the segment up to the first
// OSRP (or the interval end); OSRPs and remaining free segments act on the
// spin qubit. Target gates carry the ideal-protocol rotations, nominal pi/2
// per tau_ex between pulses and the physical Larmor rate after the last one.
std::vector<Step> compile_steps(const PulseProgram& prog, const TrionParams& p,
                                const OverhauserSample& s) {
  prog.validate();
  std::vector<double> pulses = prog.excite_times();
  std::vector<std::pair<double, double>> osrps;
  for (const auto& e : prog.events)
    if (e.kind == PulseEvent::Kind::Osrp) osrps.emplace_back(e.at_ns, e.theta_nominal_rad);

  const double nominal_rate = (M_PI / 2) / p.tau_ex_ns;
  const double theta_scale = p.theta_osrp_rad / M_PI;
  const int n_pulses = static_cast<int>(pulses.size());

  std::vector<Step> steps;
  for (int k = 0; k < n_pulses; ++k) {
    double t0 = pulses[k];
    bool final_interval = (k == n_pulses - 1);
    double t1 = final_interval ? t0 + prog.evaluation_after_ns : pulses[k + 1];
    double target_rate = final_interval ? p.delta_e() : nominal_rate;

    std::vector<std::pair<double, double>> inside;
    for (const auto& o : osrps)
      if (o.first > t0 && o.first < t1) inside.push_back(o);

    double d0 = (inside.empty() ? t1 : inside.front().first) - t0;
    Step em;
    em.kind = Step::Kind::Emission;
    em.map_time = d0;
    em.herald = (k == 0);
    steps.push_back(em);
    if (std::abs(target_rate * d0) > 1e-12) {
      Step tg;
      tg.kind = Step::Kind::TargetGate;
      tg.gate = ry2(target_rate * d0);
      steps.push_back(tg);
    }

    for (size_t j = 0; j < inside.size(); ++j) {
      Step oc;
      oc.kind = Step::Kind::SpinChannel;
      oc.chan = osrp_spin_channel(p, inside[j].second * theta_scale);
      steps.push_back(oc);
      if (std::abs(inside[j].second) > 1e-12) {
        Step tg;
        tg.kind = Step::Kind::TargetGate;
        tg.gate = rz2(inside[j].second);
        steps.push_back(tg);
      }

      double seg_end = (j + 1 < inside.size()) ? inside[j + 1].first : t1;
      double dj = seg_end - inside[j].first;
      if (dj > 1e-12) {
        Step fc;
        fc.kind = Step::Kind::SpinChannel;
        fc.chan = spin_unitary_channel(p, s, dj);
        steps.push_back(fc);
        Step tr;
        tr.kind = Step::Kind::TargetGate;
        tr.gate = ry2(target_rate * dj);
        steps.push_back(tr);
      }
    }
  }
  return steps;
}

Eigen::Vector2cd herald_ket(char basis) {
  return basis == 'R' ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
}

// growing register with the spin as the least significant qubit
struct DenseRegister {
  Matrix rho = Matrix::Zero(2, 2);
  int n_photons = 0;
  double herald_prob = 1.0;

  void emission(const ProcessMap& m, bool herald, char herald_basis) {
    if (herald) {
      if (rho.rows() != 2) throw ValidationError("run_sequence: herald must be the first photon");
      Eigen::Matrix4cd out = m.apply(rho);
      Eigen::Vector2cd h = herald_ket(herald_basis);
      Eigen::Matrix2cd branch = Eigen::Matrix2cd::Zero();
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          for (int pp = 0; pp < 2; ++pp)
            for (int qq = 0; qq < 2; ++qq)
              branch(c, d) += std::conj(h(pp)) * h(qq) * out(pp * 2 + c, qq * 2 + d);
      herald_prob = branch.trace().real();
      if (herald_prob <= 0) throw NumericalError("run_sequence: zero herald probability");
      rho = branch / herald_prob;
      return;
    }
    if (n_photons + 1 > max_register_photons)
      throw ValidationError("run_sequence: register exceeds the 14-photon ceiling");
    Eigen::Index half = rho.rows() / 2;
    Matrix out = Matrix::Zero(rho.rows() * 2, rho.rows() * 2);
    const Matrix& t = m.transfer();
    for (Eigen::Index x = 0; x < half; ++x)
      for (Eigen::Index y = 0; y < half; ++y)
        for (int p = 0; p < 2; ++p)
          for (int c = 0; c < 2; ++c)
            for (int q = 0; q < 2; ++q)
              for (int d = 0; d < 2; ++d) {
                cxd acc = 0.0;
                for (int a = 0; a < 2; ++a)
                  for (int b = 0; b < 2; ++b)
                    acc += t((q * 2 + d) * 4 + (p * 2 + c), b * 2 + a) * rho(x * 2 + a, y * 2 + b);
                out(x * 4 + p * 2 + c, y * 4 + q * 2 + d) = acc;
              }
    rho.swap(out);
    ++n_photons;
  }

  void spin_channel(const Eigen::Matrix4cd& k) {
    Eigen::Index half = rho.rows() / 2;
    Matrix out = Matrix::Zero(rho.rows(), rho.rows());
    for (Eigen::Index x = 0; x < half; ++x)
      for (Eigen::Index y = 0; y < half; ++y)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) {
            cxd acc = 0.0;
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b < 2; ++b) acc += k(d * 2 + c, b * 2 + a) * rho(x * 2 + a, y * 2 + b);
            out(x * 2 + c, y * 2 + d) = acc;
          }
    rho.swap(out);
  }
};

}  // namespace

JointState run_sequence(const TrionParams& p, const PulseProgram& prog,
                        const OverhauserSample& s) {
  TrionEmission emission(p, s);
  return run_sequence(emission, prog, s);
}

JointState run_sequence(const TrionEmission& emission, const PulseProgram& prog,
                        const OverhauserSample& s) {
  const TrionParams& p = emission.params();
  std::vector<Step> steps = compile_steps(prog, p, s);

  DenseRegister reg;
  reg.rho = Matrix::Identity(2, 2) / 2.0;  // spin begins the sequence mixed
  for (const auto& step : steps) {
    switch (step.kind) {
      case Step::Kind::Emission:
        reg.emission(emission.map(step.map_time), step.herald, prog.herald);
        break;
      case Step::Kind::SpinChannel: reg.spin_channel(step.chan); break;
      case Step::Kind::TargetGate: break;  // dense run carries no target
    }
  }

  Labels labels;
  for (int k = 0; k < reg.n_photons; ++k) labels.push_back({"ph" + std::to_string(k + 2), 2});
  labels.push_back({"spin", 2});
  return {DensityMatrix((reg.rho + reg.rho.adjoint()) / 2.0, labels, true), reg.herald_prob,
          true};
}

std::pair<DensityMatrix, double> herald_and_readout(const JointState& js, char readout) {
  if (!js.heralded) throw ValidationError("herald_and_readout: state is not heralded");
  int n_photons = static_cast<int>(js.rho.labels().size()) - 1;
  if (n_photons < 3) throw ValidationError("herald_and_readout: register too small");
  if (readout != 'R' && readout != 'L')
    throw ValidationError("herald_and_readout: readout must be R or L");

  const std::string last = js.rho.labels()[n_photons - 1].name;
  Eigen::Vector2cd k = herald_ket(readout);
  auto [branch, prob] = measure_project(js.rho, Operator(Matrix(k * k.adjoint()), {{last, 2}}), last);

  std::vector<std::string> keep;
  for (int i = 0; i + 1 < n_photons; ++i) keep.push_back(js.rho.labels()[i].name);
  DensityMatrix reduced = partial_trace(branch, keep);
  if (prob <= 0) throw NumericalError("herald_and_readout: zero branch probability");
  return {reduced.renormalized(), prob};
}

JointState overhauser_average(const TrionParams& p, const PulseProgram& prog, int n_samples,
                              std::uint64_t seed) {
  if (n_samples < 1) throw ValidationError("overhauser_average: need at least one sample");
  SplitRng rng(seed, 0x0433);
  Matrix acc;
  double prob_acc = 0.0;
  Labels labels;
  for (int k = 0; k < n_samples; ++k) {
    SplitRng child = rng.child(k);
    OverhauserSample s = sample_overhauser(p.b_oh_mt, child);
    JointState js = run_sequence(p, prog, s);
    if (k == 0) {
      acc = js.rho.entries();
      labels = js.rho.labels();
    } else {
      acc += js.rho.entries();
    }
    prob_acc += js.branch_probability;
  }
  acc /= n_samples;
  return {DensityMatrix(std::move(acc), std::move(labels), true), prob_acc / n_samples, true};
}

// ---- conditional S_z traces ----

namespace {

// Spin state conditioned on a single herald click by `delay`, from one
// threshold quartet (cheaper than the full map for scalar traces).
std::pair<Eigen::Matrix2cd, double> heralded_spin(const TrionEmission& em, double delay,
                                                  char basis) {
  const TrionParams& p = em.params();
  Eigen::Matrix4cd rho4 = Eigen::Matrix4cd::Zero();
  rho4(idx_up, idx_up) = 0.5;
  rho4(idx_down, idx_down) = 0.5;
  rho4 = unvectorize(Vector(excitation_channel(p) * vectorize(Matrix(rho4))), 4);
  PolarizationAxis axis = basis == 'R' ? PolarizationAxis::r() : PolarizationAxis::l();
  ThresholdQuartet q = threshold_quartet(rho4, axis, delay, em.liouvillian(), p.gamma());
  Eigen::Matrix2cd branch = q.rho10.topLeftCorner<2, 2>();
  double prob = branch.trace().real();
  if (prob <= 0) throw NumericalError("heralded_spin: zero herald probability");
  return {branch / prob, prob};
}

// R / L click rates of a probe pulse, with the conditioned propagators
// prepared once per Overhauser sample.
struct ProbeKernel {
  Matrix exc;            // excitation channel
  Matrix e01, e10, e11;  // zero-click propagators at the probe time, axis R

  ProbeKernel(const TrionParams& p, const Matrix& liou) : exc(excitation_channel(p)) {
    double t_probe = 10 * p.t1_ns;
    PolarizationAxis axis = PolarizationAxis::r();
    e01 = expm(zpg_generator(liou, axis, 0, 1, p.gamma()) * t_probe);
    e10 = expm(zpg_generator(liou, axis, 1, 0, p.gamma()) * t_probe);
    e11 = expm(zpg_generator(liou, axis, 1, 1, p.gamma()) * t_probe);
  }

  std::pair<double, double> rates(const Eigen::Matrix2cd& rho_spin) const {
    Eigen::Matrix4cd rho4 = Eigen::Matrix4cd::Zero();
    rho4.topLeftCorner<2, 2>() = rho_spin;
    Vector v = exc * vectorize(Matrix(rho4));
    Vector v11 = e11 * v;
    double p_r = unvectorize(Vector(e01 * v - v11), 4).trace().real();
    double p_l = unvectorize(Vector(e10 * v - v11), 4).trace().real();
    return {p_r, p_l};
  }
};

bool uniform_grid(const std::vector<double>& xs) {
  if (xs.size() < 3) return false;
  double step = xs[1] - xs[0];
  if (std::abs(xs[0] - step) > 1e-9) return false;
  for (size_t i = 1; i < xs.size(); ++i)
    if (std::abs(xs[i] - xs[i - 1] - step) > 1e-9) return false;
  return true;
}

}  // namespace

std::vector<double> sz_larmor_trace(const TrionParams& p, const std::vector<double>& delays_ns,
                                    int n_samples, std::uint64_t seed) {
  for (double d : delays_ns)
    if (d <= 0) throw ValidationError("sz_larmor_trace: delays must be positive");
  std::vector<double> counts_r(delays_ns.size(), 0.0), counts_l(delays_ns.size(), 0.0);
  bool stepping = uniform_grid(delays_ns);
  SplitRng rng(seed, 0x5a1);
  for (int k = 0; k < n_samples; ++k) {
    SplitRng child = rng.child(k);
    OverhauserSample s = sample_overhauser(p.b_oh_mt, child);
    TrionEmission em(p, s);
    ProbeKernel probe(p, em.liouvillian());

    Eigen::Matrix4cd rho4 = Eigen::Matrix4cd::Zero();
    rho4(idx_up, idx_up) = 0.5;
    rho4(idx_down, idx_down) = 0.5;
    Vector v0 = probe.exc * vectorize(Matrix(rho4));

    PolarizationAxis axis = PolarizationAxis::r();
    Matrix g01 = zpg_generator(em.liouvillian(), axis, 0, 1, p.gamma());
    Matrix g11 = zpg_generator(em.liouvillian(), axis, 1, 1, p.gamma());

    auto accumulate = [&](size_t i, const Vector& v01, const Vector& v11) {
      Eigen::Matrix2cd branch = unvectorize(Vector(v01 - v11), 4).topLeftCorner<2, 2>();
      double p_h = branch.trace().real();
      auto [ir, il] = probe.rates(branch / p_h);
      counts_r[i] += p_h * ir;
      counts_l[i] += p_h * il;
    };

    if (stepping) {
      double step = delays_ns[1] - delays_ns[0];
      Matrix s01 = expm(g01 * step), s11 = expm(g11 * step);
      Vector v01 = v0, v11 = v0;
      for (size_t i = 0; i < delays_ns.size(); ++i) {
        v01 = s01 * v01;
        v11 = s11 * v11;
        accumulate(i, v01, v11);
      }
    } else {
      for (size_t i = 0; i < delays_ns.size(); ++i) {
        Vector v01 = expm(g01 * delays_ns[i]) * v0;
        Vector v11 = expm(g11 * delays_ns[i]) * v0;
        accumulate(i, v01, v11);
      }
    }
  }
  std::vector<double> sz(delays_ns.size());
  for (size_t i = 0; i < sz.size(); ++i)
    sz[i] = (counts_r[i] - counts_l[i]) / (counts_r[i] + counts_l[i]);
  return sz;
}

std::vector<double> sz_osrp_trace(const TrionParams& p, const std::vector<double>& thetas_rad,
                                  int n_samples, std::uint64_t seed) {
  std::vector<double> counts_r(thetas_rad.size(), 0.0), counts_l(thetas_rad.size(), 0.0);
  SplitRng rng(seed, 0x5a2);
  double half = p.tau_ex_ns / 2.0;  // nominal pi/4 precession on each side
  for (int k = 0; k < n_samples; ++k) {
    SplitRng child = rng.child(k);
    OverhauserSample s = sample_overhauser(p.b_oh_mt, child);
    TrionEmission em(p, s);
    ProbeKernel probe(p, em.liouvillian());
    auto [spin0, p_h] = heralded_spin(em, half, 'R');
    Eigen::Matrix4cd free_half = spin_unitary_channel(p, s, half);
    for (size_t i = 0; i < thetas_rad.size(); ++i) {
      Eigen::Matrix4cd chain = free_half * osrp_spin_channel(p, thetas_rad[i]);
      Eigen::Matrix2cd spin = unvectorize(Vector(Matrix(chain) * vectorize(Matrix(spin0))), 2);
      auto [ir, il] = probe.rates(spin);
      counts_r[i] += p_h * ir;
      counts_l[i] += p_h * il;
    }
  }
  std::vector<double> sz(thetas_rad.size());
  for (size_t i = 0; i < sz.size(); ++i)
    sz[i] = (counts_r[i] - counts_l[i]) / (counts_r[i] + counts_l[i]);
  return sz;
}

// ---- ideal target conversion ----

ideal::GateList to_ideal_gates(const PulseProgram& prog, const TrionParams& p) {
  prog.validate();
  std::vector<double> pulses = prog.excite_times();
  std::vector<std::pair<double, double>> osrps;
  for (const auto& e : prog.events)
    if (e.kind == PulseEvent::Kind::Osrp) osrps.emplace_back(e.at_ns, e.theta_nominal_rad);

  const double nominal_rate = (M_PI / 2) / p.tau_ex_ns;
  ideal::GateList gates;
  for (size_t k = 0; k + 1 < pulses.size(); ++k) {
    double t0 = pulses[k], t1 = pulses[k + 1];
    std::vector<std::pair<double, double>> inside;
    for (const auto& o : osrps)
      if (o.first > t0 && o.first < t1) inside.push_back(o);

    double quarters = nominal_rate * (t1 - t0) / (M_PI / 2);
    if (std::abs(quarters - std::round(quarters)) > 1e-6)
      throw ValidationError("to_ideal_gates: interval precession is not a multiple of pi/2");

    double seg_start = t0;
    for (const auto& o : inside) {
      double ang = nominal_rate * (o.first - seg_start);
      if (std::abs(ang) > 1e-9) gates.push_back(ideal::Gate::ry(ang));
      if (std::abs(o.second - M_PI) < 1e-9)
        gates.push_back(ideal::Gate::z());
      else if (std::abs(o.second) > 1e-9)
        gates.push_back(ideal::Gate::rz(o.second));
      seg_start = o.first;
    }
    double ang = nominal_rate * (t1 - seg_start);
    if (std::abs(ang) > 1e-9) gates.push_back(ideal::Gate::ry(ang));
    gates.push_back(ideal::Gate::emit());
  }
  return gates;
}

PulseProgram program_from_gates(const ideal::GateList& gates, const TrionParams& p,
                                const std::string& name) {
  PulseProgram prog;
  prog.name = name;
  prog.events.push_back({PulseEvent::Kind::Excite, 0.0, 0.0});
  double t = 0.0;
  bool pending_z = false, pending_ry = false;
  for (const auto& g : gates) {
    switch (g.kind) {
      case ideal::Gate::Kind::Ry:
        if (std::abs(g.angle - M_PI / 2) > 1e-9)
          throw ValidationError("program_from_gates: only Ry(pi/2) groups supported");
        pending_ry = true;
        break;
      case ideal::Gate::Kind::Z: pending_z = true; break;
      case ideal::Gate::Kind::Emit: {
        if (pending_z && pending_ry) throw ValidationError("program_from_gates: mixed Ry+Z group");
        if (pending_z) prog.events.push_back({PulseEvent::Kind::Osrp, t + p.tau_osrp_ns, M_PI});
        prog.events.push_back({PulseEvent::Kind::Excite, t + p.tau_ex_ns, 0.0});
        t += p.tau_ex_ns;
        pending_z = pending_ry = false;
        break;
      }
      case ideal::Gate::Kind::MeasureSpin: break;  // expressed via StreamingOptions
      default: throw ValidationError("program_from_gates: unsupported gate in sequence");
    }
  }
  prog.evaluation_after_ns = p.tau_ex_ns;
  return prog;
}

// ---- streaming contraction ----

namespace {

// Contraction environment: W(tp, sp) holds the target-bond x sim-spin
// tensor with the already-emitted photons contracted between bra target,
// simulated state, and ket target.
struct StreamState {
  Eigen::Matrix4cd w = Eigen::Matrix4cd::Zero();  // (tp = u'*2+u, sp = b*2+a)
  Eigen::Matrix2cd g = Eigen::Matrix2cd::Zero();  // target Gram G(u,u') = conj(T_u) T_u'
  Eigen::Matrix2cd n = Eigen::Matrix2cd::Zero();  // sim reduced spin state
  double herald_prob = 1.0;

  void init(const Eigen::Vector2cd& target_init, const Eigen::Matrix2cd& rho_h) {
    for (int u = 0; u < 2; ++u)
      for (int up = 0; up < 2; ++up)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            w(up * 2 + u, b * 2 + a) = std::conj(target_init(u)) * target_init(up) * rho_h(a, b);
    g = target_init.conjugate() * target_init.transpose();
    n = rho_h;
  }

  void emission(const ProcessMap& m) {
    const Matrix& t = m.transfer();
    Eigen::Matrix4cd w2 = Eigen::Matrix4cd::Zero();
    for (int u = 0; u < 2; ++u)
      for (int up = 0; up < 2; ++up)
        for (int c = 0; c < 2; ++c)
          for (int cp = 0; cp < 2; ++cp) {
            cxd acc = 0.0;
            for (int a = 0; a < 2; ++a)
              for (int b = 0; b < 2; ++b)
                acc += t((up * 2 + cp) * 4 + (u * 2 + c), b * 2 + a) * w(up * 2 + u, b * 2 + a);
            w2(up * 2 + u, cp * 2 + c) = acc;
          }
    w = w2;
    g = Eigen::Matrix2cd(g.diagonal().asDiagonal());  // bond decoheres in z
    Eigen::Matrix2cd n2 = Eigen::Matrix2cd::Zero();
    for (int c = 0; c < 2; ++c)
      for (int cp = 0; cp < 2; ++cp) {
        cxd acc = 0.0;
        for (int p = 0; p < 2; ++p)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              acc += t((p * 2 + cp) * 4 + (p * 2 + c), b * 2 + a) * n(a, b);
        n2(c, cp) = acc;
      }
    n = n2;
  }

  void spin_channel(const Eigen::Matrix4cd& k) {
    w = w * k.transpose();
    n = unvectorize(Vector(Matrix(k) * vectorize(Matrix(n))), 2);
  }

  void target_gate(const Eigen::Matrix2cd& gate) {
    w = kron(gate, gate.conjugate()) * w;
    g = gate.conjugate() * g * gate.transpose();
  }

  double fidelity(const Eigen::Matrix2cd& extra, bool readout_x) const {
    Eigen::Matrix4cd wx = kron(extra, extra.conjugate()) * w;
    Eigen::Matrix2cd gx = extra.conjugate() * g * extra.transpose();
    if (!readout_x) return wx.trace().real() / (gx.trace().real() * n.trace().real());
    double num = wx.sum().real() / 4.0;
    double tgt = gx.sum().real() / 2.0;
    double sim = n.sum().real() / 2.0;
    return num / (tgt * sim);
  }
};

Eigen::Matrix2cd ry2_only(double t) {
  Eigen::Matrix2cd m;
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

StreamState run_stream(const TrionParams& p, const PulseProgram& prog, const OverhauserSample& s) {
  TrionEmission emission(p, s);
  std::vector<Step> steps = compile_steps(prog, p, s);
  if (steps.empty() || steps.front().kind != Step::Kind::Emission || !steps.front().herald)
    throw ValidationError("streaming_fidelity: program must start with the heralding pulse");

  Eigen::Matrix2cd mixed = Eigen::Matrix2cd::Identity() / 2.0;
  Eigen::Matrix4cd out = emission.map(steps.front().map_time).apply(mixed);
  Eigen::Vector2cd h = herald_ket(prog.herald);
  Eigen::Matrix2cd branch = Eigen::Matrix2cd::Zero();
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 2; ++d)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          branch(c, d) += std::conj(h(a)) * h(b) * out(a * 2 + c, b * 2 + d);
  double prob = branch.trace().real();
  if (prob <= 0) throw NumericalError("streaming_fidelity: zero herald probability");

  StreamState st;
  st.init(h, branch / prob);
  st.herald_prob = prob;

  for (size_t i = 1; i < steps.size(); ++i) {
    const auto& step = steps[i];
    switch (step.kind) {
      case Step::Kind::Emission: st.emission(emission.map(step.map_time)); break;
      case Step::Kind::SpinChannel: st.spin_channel(step.chan); break;
      case Step::Kind::TargetGate: st.target_gate(step.gate); break;
    }
  }
  return st;
}

StreamingResult maximize_over_shift(const std::vector<StreamState>& states, const TrionParams& p,
                                    const StreamingOptions& opts, double herald_prob) {
  auto averaged = [&](const Eigen::Matrix2cd& extra) {
    double acc = 0.0;
    for (const auto& st : states) acc += st.fidelity(extra, opts.spin_readout_x);
    return acc / states.size();
  };
  StreamingResult res;
  res.herald_probability = herald_prob;
  if (opts.shift_window_ns <= 0) {
    res.fidelity = averaged(Eigen::Matrix2cd::Identity());
    return res;
  }
  double best = -1.0, best_shift = 0.0;
  int half = static_cast<int>(std::round(opts.shift_window_ns / opts.shift_step_ns));
  for (int k = -half; k <= half; ++k) {
    double shift = k * opts.shift_step_ns;
    double f = averaged(ry2_only(p.delta_e() * shift));
    if (f > best) {
      best = f;
      best_shift = shift;
    }
  }
  res.fidelity = best;
  res.best_shift_ns = best_shift;
  return res;
}

}  // namespace

StreamingResult streaming_fidelity(const TrionParams& p, const PulseProgram& prog,
                                   const OverhauserSample& s, const StreamingOptions& opts) {
  std::vector<StreamState> states{run_stream(p, prog, s)};
  return maximize_over_shift(states, p, opts, states.front().herald_prob);
}

StreamingResult streaming_fidelity_averaged(const TrionParams& p, const PulseProgram& prog,
                                            int n_samples, std::uint64_t seed,
                                            const StreamingOptions& opts) {
  if (n_samples < 1) throw ValidationError("streaming_fidelity_averaged: need samples");
  SplitRng rng(seed, 0x57f);
  std::vector<StreamState> states;
  states.reserve(n_samples);
  double prob_acc = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    SplitRng child = rng.child(k);
    OverhauserSample s = sample_overhauser(p.b_oh_mt, child);
    states.push_back(run_stream(p, prog, s));
    prob_acc += states.back().herald_prob;
  }
  return maximize_over_shift(states, p, opts, prob_acc / n_samples);
}

}  // namespace spinphoton
