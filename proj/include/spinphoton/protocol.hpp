#pragma once

// Compiles a pulse program into a multipartite spin-photon density matrix.
// Each excitation grows the register by one photon qubit via the emission
// process map; OSRPs and free precession act on the spin qubit between maps;
// photon qubits are frozen once emitted. Photon #1 heralds the spin.

#include <optional>

#include "spinphoton/ideal.hpp"
#include "spinphoton/zpg.hpp"

namespace spinphoton {

struct PulseEvent {
  enum class Kind { Excite, Osrp, EndSequence };
  Kind kind = Kind::Excite;
  double at_ns = 0.0;
  double theta_nominal_rad = 0.0;  // Osrp: applied rotation is nominal * (theta_osrp/pi)
};

struct PulseProgram {
  std::string name;
  std::vector<PulseEvent> events;  // strictly increasing timestamps
  char herald = 'R';
  char readout = 'R';
  double evaluation_after_ns = 0.6;  // after the final pulse

  void validate() const;
  std::vector<double> excite_times() const;

  std::string to_text() const;
  static PulseProgram from_text(const std::string& text);

  static PulseProgram lc4(const TrionParams& p);
  static PulseProgram ghz4(const TrionParams& p);
  static PulseProgram rlc1(const TrionParams& p);
  static PulseProgram rlc2(const TrionParams& p);
  static PulseProgram visibility_scan(const TrionParams& p, double phi2_rad);
  static std::optional<PulseProgram> preset(const std::string& name, const TrionParams& p);
};

struct JointState {
  DensityMatrix rho;  // labels [ph2..phn, spin]
  double branch_probability = 1.0;
  bool heralded = false;
};

inline constexpr int max_register_photons = 14;

JointState run_sequence(const TrionParams& p, const PulseProgram& prog,
                        const OverhauserSample& s);
// Variant reusing a prepared emission context (shares cached process maps
// across programs evaluated at the same parameter/sample point).
JointState run_sequence(const TrionEmission& emission, const PulseProgram& prog,
                        const OverhauserSample& s);

// Projects the last photon on R/L, traces out spin and that photon,
// normalizes; returns the branch probability.
std::pair<DensityMatrix, double> herald_and_readout(const JointState& js, char readout);

JointState overhauser_average(const TrionParams& p, const PulseProgram& prog, int n_samples,
                              std::uint64_t seed);

// Conditional S_z traces. Larmor: two-pulse sequence, one point per delay.
// OSRP: three-pulse sequence with precession tau_ex/2 on both sides of a
// variable-angle rotation.
std::vector<double> sz_larmor_trace(const TrionParams& p, const std::vector<double>& delays_ns,
                                    int n_samples, std::uint64_t seed);
std::vector<double> sz_osrp_trace(const TrionParams& p, const std::vector<double>& thetas_rad,
                                  int n_samples, std::uint64_t seed);

// Ideal gate list for a program: herald sets the initial spin, interval
// precessions become Ry (pi/2 per tau_ex), OSRPs become Rz of the nominal
// angle. Interval rotations must be multiples of pi/2.
ideal::GateList to_ideal_gates(const PulseProgram& prog, const TrionParams& p);

// Inverse for the scaling presets: groups of [Ry(pi/2), emit] / [Z, emit].
PulseProgram program_from_gates(const ideal::GateList& gates, const TrionParams& p,
                                const std::string& name);

// Streaming evaluation of <target|rho|target> for long sequences without
// storing the register: contracts photon by photon against the ideal target
// of the same program, optionally projecting the spin on |+> at the end and
// maximizing over a target time shift in [-window, +window].
struct StreamingOptions {
  bool spin_readout_x = false;
  double shift_window_ns = 0.0;
  double shift_step_ns = 1e-3;
};
struct StreamingResult {
  double fidelity = 0.0;
  double best_shift_ns = 0.0;
  double herald_probability = 0.0;
};
StreamingResult streaming_fidelity(const TrionParams& p, const PulseProgram& prog,
                                   const OverhauserSample& s, const StreamingOptions& opts);
// Overhauser-averaged variant (averages the contracted numerators and
// normalizations sample by sample, equivalent to averaging the full state).
StreamingResult streaming_fidelity_averaged(const TrionParams& p, const PulseProgram& prog,
                                            int n_samples, std::uint64_t seed,
                                            const StreamingOptions& opts);

}  // namespace spinphoton
