#pragma once

// Exact pure-state oracle for the decoherence-free protocol: spin gates,
// conditional emission E_s (a|up> + b|down> -> a|R,up> + b|L,down>),
// caterpillar graph states, and local-Clifford equivalence checks.
//
// Register layout matches the simulator: photons in emission order (leftmost
// most significant), spin last. Photon basis |0> = |R>, |1> = |L>.

#include <string>
#include <vector>

#include "spinphoton/rng.hpp"
#include "spinphoton/types.hpp"

namespace spinphoton::ideal {

struct Gate {
  enum class Kind { Emit, Ry, Rz, Z, H, Zp, MeasureSpin, MeasurePhoton };
  Kind kind = Kind::Emit;
  double angle = 0.0;   // Ry/Rz, radians
  int photon = -1;      // Zp/MeasurePhoton; -1 = newest photon
  char basis = 'z';     // measurements: 'z' or 'x'
  int outcome = 0;      // projected outcome (0 = first basis state)

  static Gate emit() { return {Kind::Emit}; }
  static Gate ry(double angle) { return {Kind::Ry, angle}; }
  static Gate rz(double angle) { return {Kind::Rz, angle}; }
  static Gate z() { return {Kind::Z}; }
  static Gate h() { return {Kind::H}; }
  static Gate zp(int photon = -1) { return {Kind::Zp, 0.0, photon}; }
  static Gate measure_spin(char basis, int outcome = 0) {
    return {Kind::MeasureSpin, 0.0, -1, basis, outcome};
  }
  static Gate measure_photon(int photon, char basis, int outcome = 0) {
    return {Kind::MeasurePhoton, 0.0, photon, basis, outcome};
  }
};

using GateList = std::vector<Gate>;

inline constexpr int max_statevector_qubits = 20;

// Exact statevector over (photons..., spin). init is the spin ket.
Ket ideal_protocol_state(const GateList& gates, const Eigen::Vector2cd& init);
Ket ideal_protocol_state(const GateList& gates);  // init |up>

struct CaterpillarGraph {
  std::vector<int> pendants;  // per spine node, number of attached leaves
  int spine() const { return static_cast<int>(pendants.size()); }
  int qubits() const;
};

// Standard graph state: |+>^n with CZ on every edge. Qubit order: each spine
// node followed by its pendant leaves.
Ket caterpillar_state(const CaterpillarGraph& g);

// True iff (corrections . lhs)|G> equals rhs|G> up to global phase for
// `trials` random emitter-reachable initial states.
bool verify_equivalence(const GateList& lhs, const GateList& corrections, const GateList& rhs,
                        int trials, std::uint64_t seed = 17);

// Gate-list builders for the canonical protocol targets (emissions after the
// heralding photon; spin heralded |up> and precessed into |+>).
GateList lc_gates(int n_photons);
GateList ghz_gates(int n_photons);
GateList rlc1_gates();
GateList rlc2_gates();
// One new spine node per Ry(pi/2)+emit, pendants via Z+emit.
GateList caterpillar_gates(const CaterpillarGraph& g);

std::string gates_to_text(const GateList& gates);
GateList gates_from_text(const std::string& text);

double overlap_phase_free(const Ket& a, const Ket& b);

}  // namespace spinphoton::ideal
