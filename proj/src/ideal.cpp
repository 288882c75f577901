#include "spinphoton/ideal.hpp"

#include <sstream>

namespace spinphoton::ideal {

namespace {

struct Register {
  Vector amps;     // dim 2^(n_photons + has_spin), spin least significant
  int n_photons = 0;
  bool has_spin = true;

  int qubits() const { return n_photons + (has_spin ? 1 : 0); }

  void check_capacity() const {
    if (qubits() + 1 > max_statevector_qubits)
      throw ValidationError("ideal: statevector register exceeds qubit cap");
  }

  void emit() {
    if (!has_spin) throw ValidationError("ideal: emission after spin measurement");
    check_capacity();
    Eigen::Index n = amps.size();
    Vector out = Vector::Zero(2 * n);
    // amplitude (x, s) -> (x, p = s, s)
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index x = i >> 1;
      Eigen::Index s = i & 1;
      out((x << 2) | (s << 1) | s) = amps(i);
    }
    amps.swap(out);
    ++n_photons;
  }

  void spin_gate(const Eigen::Matrix2cd& g) {
    Eigen::Index n = amps.size();
    for (Eigen::Index i = 0; i < n; i += 2) {
      cxd a0 = amps(i), a1 = amps(i + 1);
      amps(i) = g(0, 0) * a0 + g(0, 1) * a1;
      amps(i + 1) = g(1, 0) * a0 + g(1, 1) * a1;
    }
  }

  int resolve_photon(int photon) const {
    int k = photon < 0 ? n_photons - 1 : photon;
    if (k < 0 || k >= n_photons) throw ValidationError("ideal: photon index out of range");
    return k;
  }

  void photon_z(int photon) {
    int k = resolve_photon(photon);
    int shift = qubits() - 1 - k;  // bit position of photon k
    for (Eigen::Index i = 0; i < amps.size(); ++i)
      if ((i >> shift) & 1) amps(i) = -amps(i);
  }

  // Project qubit at bit position `shift` onto `ket`, remove it, normalize.
  void project_out(int shift, const Eigen::Vector2cd& ket) {
    Eigen::Index n = amps.size();
    Vector out = Vector::Zero(n / 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index bit = (i >> shift) & 1;
      Eigen::Index lo = i & ((Eigen::Index(1) << shift) - 1);
      Eigen::Index hi = i >> (shift + 1);
      out((hi << shift) | lo) += std::conj(ket(bit)) * amps(i);
    }
    double norm = out.norm();
    if (norm < 1e-14) throw ValidationError("ideal: measurement branch has zero amplitude");
    amps = out / norm;
  }

  void measure_spin(char basis, int outcome) {
    if (!has_spin) throw ValidationError("ideal: spin already measured");
    amps.normalize();
    Eigen::Vector2cd ket;
    if (basis == 'z')
      ket = outcome == 0 ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
    else if (basis == 'x')
      ket = outcome == 0 ? Eigen::Vector2cd(1, 1).normalized()
                         : Eigen::Vector2cd(1, -1).normalized();
    else
      throw ValidationError("ideal: unknown measurement basis");
    project_out(0, ket);
    has_spin = false;
  }

  void measure_photon(int photon, char basis, int outcome) {
    int k = resolve_photon(photon);
    int shift = qubits() - 1 - k;
    Eigen::Vector2cd ket;
    if (basis == 'z')
      ket = outcome == 0 ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
    else if (basis == 'x')
      ket = outcome == 0 ? Eigen::Vector2cd(1, 1).normalized()
                         : Eigen::Vector2cd(1, -1).normalized();
    else
      throw ValidationError("ideal: unknown measurement basis");
    project_out(shift, ket);
    --n_photons;
  }
};

Eigen::Matrix2cd ry_matrix(double t) {
  Eigen::Matrix2cd m;
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

Eigen::Matrix2cd rz_matrix(double t) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = std::exp(-ci * t / 2.0);
  m(1, 1) = std::exp(ci * t / 2.0);
  return m;
}

}  // namespace

Ket ideal_protocol_state(const GateList& gates, const Eigen::Vector2cd& init) {
  Register reg;
  reg.amps = init.normalized();
  bool spin_measured = false;
  for (const auto& g : gates) {
    if (spin_measured && g.kind != Gate::Kind::Zp && g.kind != Gate::Kind::MeasurePhoton)
      throw ValidationError("ideal: spin gate after spin measurement");
    switch (g.kind) {
      case Gate::Kind::Emit: reg.emit(); break;
      case Gate::Kind::Ry: reg.spin_gate(ry_matrix(g.angle)); break;
      case Gate::Kind::Rz: reg.spin_gate(rz_matrix(g.angle)); break;
      case Gate::Kind::Z: reg.spin_gate(pauli_z()); break;
      case Gate::Kind::H: {
        Eigen::Matrix2cd h;
        h << 1, 1, 1, -1;
        reg.spin_gate(h / std::sqrt(2.0));
        break;
      }
      case Gate::Kind::Zp: reg.photon_z(g.photon); break;
      case Gate::Kind::MeasureSpin:
        reg.measure_spin(g.basis, g.outcome);
        spin_measured = true;
        break;
      case Gate::Kind::MeasurePhoton: reg.measure_photon(g.photon, g.basis, g.outcome); break;
    }
  }
  double n = reg.amps.norm();
  if (std::abs(n - 1.0) > 1e-12) reg.amps /= n;
  Labels labels;
  for (int k = 0; k < reg.n_photons; ++k) labels.push_back({"p" + std::to_string(k + 1), 2});
  if (!spin_measured) labels.push_back({"spin", 2});
  return Ket(reg.amps, labels);
}

Ket ideal_protocol_state(const GateList& gates) {
  return ideal_protocol_state(gates, Eigen::Vector2cd(1, 0));
}

int CaterpillarGraph::qubits() const {
  int n = spine();
  for (int p : pendants) {
    if (p < 0) throw ValidationError("caterpillar: negative pendant count");
    n += p;
  }
  return n;
}

Ket caterpillar_state(const CaterpillarGraph& g) {
  if (g.spine() == 0) throw ValidationError("caterpillar: empty spine");
  int n = g.qubits();
  if (n > max_statevector_qubits) throw ValidationError("caterpillar: too many qubits");

  // qubit indices: spine node i, then its pendants
  std::vector<int> spine_idx(g.spine());
  std::vector<std::pair<int, int>> edges;
  int q = 0;
  for (int i = 0; i < g.spine(); ++i) {
    spine_idx[i] = q++;
    if (i > 0) edges.emplace_back(spine_idx[i - 1], spine_idx[i]);
    for (int pnd = 0; pnd < g.pendants[i]; ++pnd) edges.emplace_back(spine_idx[i], q++);
  }

  Eigen::Index dim = Eigen::Index(1) << n;
  Vector amps = Vector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  for (Eigen::Index x = 0; x < dim; ++x) {
    int sign = 0;
    for (auto [a, b] : edges) {
      int ba = (x >> (n - 1 - a)) & 1;
      int bb = (x >> (n - 1 - b)) & 1;
      sign ^= ba & bb;
    }
    if (sign) amps(x) = -amps(x);
  }
  Labels labels;
  for (int k = 0; k < n; ++k) labels.push_back({"q" + std::to_string(k + 1), 2});
  return Ket(std::move(amps), std::move(labels));
}

double overlap_phase_free(const Ket& a, const Ket& b) {
  if (a.dim() != b.dim()) throw ValidationError("overlap: dimension mismatch");
  return std::abs(a.amplitudes().dot(b.amplitudes()));
}

bool verify_equivalence(const GateList& lhs, const GateList& corrections, const GateList& rhs,
                        int trials, std::uint64_t seed) {
  SplitRng rng(seed, 0x1dea);
  for (int trial = 0; trial < trials; ++trial) {
    // random emitter-reachable prefix: heralded spin, a few emissions with
    // random intervening spin gates
    GateList prefix{Gate::ry(M_PI / 2)};
    int steps = static_cast<int>(rng.uniform01() * 4);  // 0..3 photons
    for (int s = 0; s < steps; ++s) {
      prefix.push_back(Gate::emit());
      switch (static_cast<int>(rng.uniform01() * 4)) {
        case 0: break;
        case 1: prefix.push_back(Gate::z()); break;
        case 2: prefix.push_back(Gate::ry(M_PI / 2)); break;
        default: prefix.push_back(Gate::h()); break;
      }
    }

    GateList left = prefix;
    left.insert(left.end(), lhs.begin(), lhs.end());
    left.insert(left.end(), corrections.begin(), corrections.end());
    GateList right = prefix;
    right.insert(right.end(), rhs.begin(), rhs.end());

    Ket a = ideal_protocol_state(left);
    Ket b = ideal_protocol_state(right);
    if (a.dim() != b.dim()) throw ValidationError("verify_equivalence: register mismatch");
    if (std::abs(overlap_phase_free(a, b) - 1.0) > 1e-10) return false;
  }
  return true;
}

GateList lc_gates(int n_photons) {
  GateList g;
  for (int k = 0; k < n_photons; ++k) {
    g.push_back(Gate::ry(M_PI / 2));
    g.push_back(Gate::emit());
  }
  return g;
}

GateList ghz_gates(int n_photons) {
  GateList g{Gate::ry(M_PI / 2), Gate::emit()};
  for (int k = 1; k < n_photons; ++k) {
    g.push_back(Gate::z());
    g.push_back(Gate::emit());
  }
  return g;
}

GateList rlc1_gates() {
  return {Gate::ry(M_PI / 2), Gate::emit(), Gate::z(),          Gate::emit(),
          Gate::ry(M_PI / 2), Gate::emit()};
}

GateList rlc2_gates() {
  return {Gate::ry(M_PI / 2), Gate::emit(), Gate::ry(M_PI / 2), Gate::emit(),
          Gate::z(),          Gate::emit()};
}

GateList caterpillar_gates(const CaterpillarGraph& g) {
  GateList out;
  for (int i = 0; i < g.spine(); ++i) {
    out.push_back(Gate::ry(M_PI / 2));
    out.push_back(Gate::emit());
    for (int p = 0; p < g.pendants[i]; ++p) {
      out.push_back(Gate::z());
      out.push_back(Gate::emit());
    }
  }
  return out;
}

std::string gates_to_text(const GateList& gates) {
  std::ostringstream os;
  os.precision(12);
  for (const auto& g : gates) {
    switch (g.kind) {
      case Gate::Kind::Emit: os << "emit\n"; break;
      case Gate::Kind::Ry: os << "ry " << g.angle / M_PI << "\n"; break;
      case Gate::Kind::Rz: os << "rz " << g.angle / M_PI << "\n"; break;
      case Gate::Kind::Z: os << "z\n"; break;
      case Gate::Kind::H: os << "h\n"; break;
      case Gate::Kind::Zp: os << "zp " << g.photon << "\n"; break;
      case Gate::Kind::MeasureSpin:
        os << "measure_spin " << g.basis << " " << g.outcome << "\n";
        break;
      case Gate::Kind::MeasurePhoton:
        os << "measure_photon " << g.photon << " " << g.basis << " " << g.outcome << "\n";
        break;
    }
  }
  return os.str();
}

GateList gates_from_text(const std::string& text) {
  GateList gates;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "emit") {
      gates.push_back(Gate::emit());
    } else if (word == "ry" || word == "rz") {
      double a_pi;
      if (!(ls >> a_pi)) throw ValidationError("gate list: missing angle for " + word);
      gates.push_back(word == "ry" ? Gate::ry(a_pi * M_PI) : Gate::rz(a_pi * M_PI));
    } else if (word == "z") {
      gates.push_back(Gate::z());
    } else if (word == "h") {
      gates.push_back(Gate::h());
    } else if (word == "zp") {
      int k = -1;
      ls >> k;
      gates.push_back(Gate::zp(k));
    } else if (word == "measure_spin") {
      char basis = 'z';
      int outcome = 0;
      ls >> basis >> outcome;
      gates.push_back(Gate::measure_spin(basis, outcome));
    } else if (word == "measure_photon") {
      int k;
      char basis = 'z';
      int outcome = 0;
      if (!(ls >> k)) throw ValidationError("gate list: missing photon index");
      ls >> basis >> outcome;
      gates.push_back(Gate::measure_photon(k, basis, outcome));
    } else {
      throw ValidationError("gate list: unknown gate '" + word + "'");
    }
  }
  return gates;
}

}  // namespace spinphoton::ideal
