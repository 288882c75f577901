#pragma once

// End-to-end computations behind the CLI subcommands: the fidelity table,
// visibility scan, S_z traces, scaling curves, and tomography round trips.

#include "spinphoton/fit.hpp"
#include "spinphoton/tomography.hpp"

namespace spinphoton::pipeline {

// ideal 4-partite target of a program, spin precessed t_after past pulse 4
Vector ideal_target_ket(const PulseProgram& prog, const TrionParams& p, double t_after_ns);
// ideal two-photon target after heralding and readout of the last photon
Vector ideal_two_photon_target(const PulseProgram& prog, const TrionParams& p, char readout);

struct FidelityRow {
  std::string protocol;
  char herald = 'R';
  char readout = 'R';
  double f2 = 0.0;
  double concurrence_value = 0.0;
  double f2_sigma = 0.0;
};

struct FidelityTable {
  std::vector<FidelityRow> rows;
  std::map<std::string, double> f4;
  std::map<std::string, double> f4_sigma;
  std::string to_csv() const;  // protocol,herald,readout,F2,C,F4,sigma
};

// Central values from `oh_samples` Overhauser draws; uncertainties from
// `param_sets` parameter draws (Table S1(b) spread) with `oh_per_set` draws
// each. param_sets = 0 disables the uncertainty pass.
FidelityTable fidelity_table(const TrionParams& p, int oh_samples, std::uint64_t seed,
                             int param_sets = 100, int oh_per_set = 100);

struct VisibilityPoint {
  double phi2_rad = 0.0;
  double v = 0.0;
};
std::vector<VisibilityPoint> visibility_curve(const TrionParams& p, int points,
                                              double phi2_max_rad, int oh_samples,
                                              std::uint64_t seed);
double visibility_amplitude(const std::vector<VisibilityPoint>& curve);

struct TracePoint {
  double x = 0.0;  // delay ns (Larmor) or rotation angle rad (OSRP)
  double sz = 0.0;
};
std::vector<TracePoint> larmor_curve(const TrionParams& p, double t_max_ns, double step_ns,
                                     int oh_samples, std::uint64_t seed);
std::vector<TracePoint> osrp_curve(const TrionParams& p, double theta_max_rad, int points,
                                   int oh_samples, std::uint64_t seed);
// oscillation period from the mean spacing of upward zero crossings
double extract_period(const std::vector<TracePoint>& curve);
// first time the |extremum| envelope falls below half its initial value
double envelope_half_time(const std::vector<TracePoint>& curve);

enum class ScalingProtocol { Ghz, Lc, Caterpillar };
struct ScalingPoint {
  int photons = 0;
  double fidelity = 0.0;
};
ideal::CaterpillarGraph caterpillar10();
std::vector<ScalingPoint> scaling_curve(const TrionParams& p, ScalingProtocol kind, int n_min,
                                        int n_max, int oh_samples, std::uint64_t seed);
double caterpillar_fidelity(const TrionParams& p, const ideal::CaterpillarGraph& g, int oh_samples,
                            std::uint64_t seed);
// R^2 of a linear fit to log-fidelity vs photon number
double log_linear_r2(const std::vector<ScalingPoint>& curve);

struct TomoRoundTrip {
  double fidelity = 0.0;
  double trace_dist = 0.0;
};
TomoRoundTrip tomo_roundtrip(const DensityMatrix& rho, long shots_per_setting,
                             std::uint64_t seed);

}  // namespace spinphoton::pipeline
