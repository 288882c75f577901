#include "spinphoton/pipeline.hpp"

#include <set>
#include <sstream>

namespace spinphoton::pipeline {

Vector ideal_target_ket(const PulseProgram& prog, const TrionParams& p, double t_after_ns) {
  ideal::GateList gates = to_ideal_gates(prog, p);
  gates.push_back(ideal::Gate::ry(p.delta_e() * t_after_ns));
  Eigen::Vector2cd init = prog.herald == 'R' ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
  return ideal::ideal_protocol_state(gates, init).amplitudes();
}

Vector ideal_two_photon_target(const PulseProgram& prog, const TrionParams& p, char readout) {
  ideal::GateList gates = to_ideal_gates(prog, p);
  Eigen::Vector2cd init = prog.herald == 'R' ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
  Ket full = ideal::ideal_protocol_state(gates, init);
  DensityMatrix joint = DensityMatrix::from_ket(full);

  int n_photons = static_cast<int>(joint.labels().size()) - 1;
  const std::string last = joint.labels()[n_photons - 1].name;
  Eigen::Vector2cd k = readout == 'R' ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1);
  auto [branch, prob] =
      measure_project(joint, Operator(Matrix(k * k.adjoint()), {{last, 2}}), last);
  std::vector<std::string> keep;
  for (int i = 0; i + 1 < n_photons; ++i) keep.push_back(joint.labels()[i].name);
  Matrix reduced = partial_trace(branch, keep).entries() / prob;

  // the readout disentangles the spin, so the reduced pair is pure
  Eigen::SelfAdjointEigenSolver<Matrix> es(reduced);
  int top;
  es.eigenvalues().maxCoeff(&top);
  if (es.eigenvalues()(top) < 1.0 - 1e-9)
    throw NumericalError("ideal_two_photon_target: conditioned pair is not pure");
  return es.eigenvectors().col(top);
}

// averaged joint states for several (name, program) groups sharing one
// Overhauser stream and per-sample emission context
static std::map<std::string, Matrix> averaged_groups(
    const TrionParams& p, const std::vector<std::pair<std::string, PulseProgram>>& programs,
    int oh_samples, std::uint64_t seed) {
  std::map<std::string, Matrix> acc;
  SplitRng rng(seed, 0x9a9);
  for (int k = 0; k < oh_samples; ++k) {
    SplitRng child = rng.child(k);
    OverhauserSample s = sample_overhauser(p.b_oh_mt, child);
    TrionEmission emission(p, s);
    for (const auto& [key, prog] : programs) {
      JointState js = run_sequence(emission, prog, s);
      auto it = acc.find(key);
      if (it == acc.end())
        acc.emplace(key, js.rho.entries());
      else
        it->second += js.rho.entries();
    }
  }
  for (auto& [_, m] : acc) m /= oh_samples;
  return acc;
}

namespace {

struct Condition {
  const char* protocol;
  char herald;
  char readout;
};

constexpr Condition table_conditions[] = {
    {"lc4", 'R', 'R'},  {"lc4", 'R', 'L'},  {"lc4", 'L', 'R'}, {"lc4", 'L', 'L'},
    {"ghz4", 'R', 'R'}, {"ghz4", 'R', 'L'}, {"rlc1", 'R', 'R'}, {"rlc1", 'R', 'L'},
    {"rlc2", 'R', 'R'}, {"rlc2", 'R', 'L'}};

struct TableValues {
  std::map<std::string, double> f2;  // key protocol+herald+readout
  std::map<std::string, double> f4;  // key protocol
  std::map<std::string, double> conc;
};

TableValues compute_table_values(const TrionParams& p, int oh_samples, std::uint64_t seed) {
  std::vector<std::pair<std::string, PulseProgram>> programs;
  std::set<std::string> seen;
  for (const auto& c : table_conditions) {
    PulseProgram prog = *PulseProgram::preset(c.protocol, p);
    prog.herald = c.herald;
    std::string key = std::string(c.protocol) + c.herald;
    if (seen.insert(key).second) programs.emplace_back(key, prog);
  }
  auto groups = averaged_groups(p, programs, oh_samples, seed);

  TableValues out;
  Labels labels = {{"ph2", 2}, {"ph3", 2}, {"ph4", 2}, {"spin", 2}};
  for (const auto& c : table_conditions) {
    PulseProgram prog = *PulseProgram::preset(c.protocol, p);
    prog.herald = c.herald;
    const Matrix& joint = groups.at(std::string(c.protocol) + c.herald);
    JointState js{DensityMatrix(joint, labels, true), 1.0, true};
    auto [rho2, prob] = herald_and_readout(js, c.readout);
    Vector target = ideal_two_photon_target(prog, p, c.readout);
    std::string key = std::string(c.protocol) + c.herald + c.readout;
    out.f2[key] = fidelity(rho2.entries(), target);
    out.conc[key] = concurrence(nearest_psd_unit_trace(rho2.entries()));
  }
  for (const char* proto : {"lc4", "ghz4", "rlc1", "rlc2"}) {
    PulseProgram prog = *PulseProgram::preset(proto, p);
    const Matrix& joint = groups.at(std::string(proto) + 'R');
    auto rho_of_t = [&](double) { return joint; };
    auto target_of_t = [&](double t) { return ideal_target_ket(prog, p, t); };
    FidelityReport rep =
        max_fidelity_timeshift(rho_of_t, target_of_t, prog.evaluation_after_ns, p.t1_ns);
    out.f4[proto] = rep.value;
  }
  return out;
}

}  // namespace

std::string FidelityTable::to_csv() const {
  std::ostringstream os;
  os << "protocol,herald,readout,F2,C,F4,sigma_F2,sigma_F4\n";
  char buf[256];
  for (const auto& r : rows) {
    double f4v = f4.count(r.protocol) ? f4.at(r.protocol) : 0.0;
    double f4s = f4_sigma.count(r.protocol) ? f4_sigma.at(r.protocol) : 0.0;
    std::snprintf(buf, sizeof(buf), "%s,%c,%c,%.4f,%.4f,%.4f,%.4f,%.4f\n", r.protocol.c_str(),
                  r.herald, r.readout, r.f2, r.concurrence_value, f4v, r.f2_sigma, f4s);
    os << buf;
  }
  return os.str();
}

FidelityTable fidelity_table(const TrionParams& p, int oh_samples, std::uint64_t seed,
                             int param_sets, int oh_per_set) {
  TableValues central = compute_table_values(p, oh_samples, seed);

  // parameter-sampling uncertainties: draw fitted parameters from their
  // reported spread, each averaged over its own Overhauser stream
  std::map<std::string, double> f2_var, f4_var;
  if (param_sets > 0) {
    struct Spread {
      const char* name;
      double sigma;
      double lo, hi;
    };
    const Spread spreads[] = {{"b_oh_mt", 0.5, 0.0, 50.0},      {"g_e", 0.04, 0.01, 2.0},
                              {"g_h", 0.06, 0.0, 2.0},          {"lambda_ex", 0.06, 0.05, 1.0},
                              {"phi_ex_pi", 0.02, -0.5, 0.5},   {"lambda_osrp", 0.09, 0.05, 1.0},
                              {"theta_osrp_pi", 0.05, 0.0, 2.0}};
    std::map<std::string, std::vector<double>> f2_samples, f4_samples;
    SplitRng rng(seed, 0x5e7);
    for (int set = 0; set < param_sets; ++set) {
      SplitRng child = rng.child(set);
      TrionParams q = p;
      for (const auto& sp : spreads) {
        double v = get_param(p, sp.name) + sp.sigma * child.normal();
        set_param(q, sp.name, std::clamp(v, sp.lo, sp.hi));
      }
      TableValues tv = compute_table_values(q, oh_per_set, child.raw());
      for (const auto& [key, val] : tv.f2) f2_samples[key].push_back(val);
      for (const auto& [key, val] : tv.f4) f4_samples[key].push_back(val);
    }
    auto stddev = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= v.size();
      double var = 0.0;
      for (double x : v) var += (x - m) * (x - m);
      return std::sqrt(var / (v.size() > 1 ? v.size() - 1 : 1));
    };
    for (const auto& [key, vals] : f2_samples) f2_var[key] = stddev(vals);
    for (const auto& [key, vals] : f4_samples) f4_var[key] = stddev(vals);
  }

  FidelityTable table;
  for (const auto& c : table_conditions) {
    FidelityRow row;
    row.protocol = c.protocol;
    row.herald = c.herald;
    row.readout = c.readout;
    std::string key = std::string(c.protocol) + c.herald + c.readout;
    row.f2 = central.f2.at(key);
    row.concurrence_value = central.conc.at(key);
    if (f2_var.count(key)) row.f2_sigma = f2_var.at(key);
    table.rows.push_back(row);
  }
  table.f4 = central.f4;
  table.f4_sigma = f4_var;
  return table;
}

std::vector<VisibilityPoint> visibility_curve(const TrionParams& p, int points,
                                              double phi2_max_rad, int oh_samples,
                                              std::uint64_t seed) {
  if (points < 2) throw ValidationError("visibility_curve: need at least two points");
  std::vector<VisibilityPoint> out;
  for (int i = 0; i < points; ++i) {
    double phi2 = phi2_max_rad * i / (points - 1);
    PulseProgram prog = PulseProgram::visibility_scan(p, phi2);
    JointState avg = overhauser_average(p, prog, oh_samples, seed);
    DensityMatrix photons = partial_trace(avg.rho, {"ph2", "ph3", "ph4"});
    auto prob = [&](int b2, int b3, int b4) {
      int idx = (b2 << 2) | (b3 << 1) | b4;
      return std::max(0.0, photons.entries()(idx, idx).real());
    };
    VisibilityCounts counts{prob(0, 0, 0), prob(1, 1, 1), prob(0, 0, 1), prob(1, 1, 0)};
    out.push_back({phi2, visibility(counts)});
  }
  return out;
}

double visibility_amplitude(const std::vector<VisibilityPoint>& curve) {
  double lo = 1.0, hi = -1.0;
  for (const auto& pt : curve) {
    lo = std::min(lo, pt.v);
    hi = std::max(hi, pt.v);
  }
  return (hi - lo) / 2.0;
}

std::vector<TracePoint> larmor_curve(const TrionParams& p, double t_max_ns, double step_ns,
                                     int oh_samples, std::uint64_t seed) {
  std::vector<double> delays;
  for (double t = step_ns; t <= t_max_ns; t += step_ns) delays.push_back(t);
  std::vector<double> sz = sz_larmor_trace(p, delays, oh_samples, seed);
  std::vector<TracePoint> out(delays.size());
  for (size_t i = 0; i < delays.size(); ++i) out[i] = {delays[i], sz[i]};
  return out;
}

std::vector<TracePoint> osrp_curve(const TrionParams& p, double theta_max_rad, int points,
                                   int oh_samples, std::uint64_t seed) {
  std::vector<double> thetas;
  for (int i = 0; i < points; ++i) thetas.push_back(theta_max_rad * i / (points - 1));
  std::vector<double> sz = sz_osrp_trace(p, thetas, oh_samples, seed);
  std::vector<TracePoint> out(thetas.size());
  for (size_t i = 0; i < thetas.size(); ++i) out[i] = {thetas[i], sz[i]};
  return out;
}

double extract_period(const std::vector<TracePoint>& curve) {
  std::vector<double> crossings;
  for (size_t i = 1; i < curve.size(); ++i)
    if (curve[i - 1].sz < 0 && curve[i].sz >= 0) {
      double frac = -curve[i - 1].sz / (curve[i].sz - curve[i - 1].sz);
      crossings.push_back(curve[i - 1].x + frac * (curve[i].x - curve[i - 1].x));
    }
  if (crossings.size() < 2) throw NumericalError("extract_period: fewer than two zero crossings");
  return (crossings.back() - crossings.front()) / (crossings.size() - 1);
}

double envelope_half_time(const std::vector<TracePoint>& curve) {
  // local |extrema| of the oscillation
  std::vector<TracePoint> env;
  for (size_t i = 1; i + 1 < curve.size(); ++i) {
    bool peak = (curve[i].sz - curve[i - 1].sz) * (curve[i + 1].sz - curve[i].sz) <= 0;
    if (peak) env.push_back({curve[i].x, std::abs(curve[i].sz)});
  }
  if (env.size() < 3) throw NumericalError("envelope_half_time: too few extrema");
  double a0 = env.front().sz;
  for (size_t i = 1; i < env.size(); ++i) {
    if (env[i].sz <= a0 / 2) {
      double x0 = env[i - 1].x, x1 = env[i].x;
      double y0 = env[i - 1].sz, y1 = env[i].sz;
      double frac = (a0 / 2 - y0) / (y1 - y0);
      return x0 + frac * (x1 - x0);
    }
  }
  throw NumericalError("envelope_half_time: envelope never fell to half amplitude");
}

ideal::CaterpillarGraph caterpillar10() { return {{1, 2, 1, 2}}; }

std::vector<ScalingPoint> scaling_curve(const TrionParams& p, ScalingProtocol kind, int n_min,
                                        int n_max, int oh_samples, std::uint64_t seed) {
  if (n_min < 2 || n_max < n_min) throw ValidationError("scaling_curve: bad photon range");
  std::vector<ScalingPoint> out;
  for (int n = n_min; n <= n_max; ++n) {
    ideal::GateList gates;
    switch (kind) {
      case ScalingProtocol::Ghz: gates = ideal::ghz_gates(n); break;
      case ScalingProtocol::Lc: gates = ideal::lc_gates(n); break;
      case ScalingProtocol::Caterpillar:
        throw ValidationError("scaling_curve: caterpillar is a single-point evaluation");
    }
    PulseProgram prog = program_from_gates(gates, p, "scaling");
    StreamingOptions opts;
    opts.spin_readout_x = true;
    opts.shift_window_ns = p.t1_ns;
    StreamingResult res = streaming_fidelity_averaged(p, prog, oh_samples, seed, opts);
    out.push_back({n, res.fidelity});
  }
  return out;
}

double caterpillar_fidelity(const TrionParams& p, const ideal::CaterpillarGraph& g, int oh_samples,
                            std::uint64_t seed) {
  PulseProgram prog = program_from_gates(ideal::caterpillar_gates(g), p, "caterpillar");
  StreamingOptions opts;
  opts.spin_readout_x = true;
  opts.shift_window_ns = p.t1_ns;
  return streaming_fidelity_averaged(p, prog, oh_samples, seed, opts).fidelity;
}

double log_linear_r2(const std::vector<ScalingPoint>& curve) {
  if (curve.size() < 3) throw ValidationError("log_linear_r2: need at least three points");
  double n = static_cast<double>(curve.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& pt : curve) {
    double x = pt.photons, y = std::log(pt.fidelity);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  double cov = sxy - sx * sy / n;
  double vx = sxx - sx * sx / n;
  double vy = syy - sy * sy / n;
  if (vx <= 0 || vy <= 0) return 1.0;
  return cov * cov / (vx * vy);
}

TomoRoundTrip tomo_roundtrip(const DensityMatrix& rho, long shots_per_setting,
                             std::uint64_t seed) {
  int n = 0;
  while ((1 << n) < rho.dim()) ++n;
  CountTable counts = simulate_counts(rho, complete_settings(n), shots_per_setting, seed);
  DensityMatrix est = reconstruct(counts);
  TomoRoundTrip out;
  out.trace_dist = trace_distance(est.entries(), rho.entries());
  out.fidelity = uhlmann_fidelity(est.entries(), rho.entries());
  return out;
}

}  // namespace spinphoton::pipeline
