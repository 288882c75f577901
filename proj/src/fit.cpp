#include "spinphoton/fit.hpp"

#include <numeric>
#include <sstream>

namespace spinphoton {

std::vector<std::string> FitConfig::default_free() {
  return {"b_oh_mt", "g_e", "g_h", "lambda_ex", "phi_ex_pi", "lambda_osrp", "theta_osrp_pi"};
}

std::map<std::string, std::pair<double, double>> FitConfig::default_bounds() {
  return {
      {"b_oh_mt", {6.5, 11.5}},        // 9.0(5) +- 5 sigma
      {"g_e", {0.40, 0.80}},           // 0.60(4)
      {"g_h", {0.0, 0.60}},            // 0.30(6)
      {"lambda_ex", {0.64, 1.0}},      // 0.94(6)
      {"phi_ex_pi", {-0.08, 0.12}},    // 0.02(2) pi
      {"lambda_osrp", {0.29, 1.0}},    // 0.74(9)
      {"theta_osrp_pi", {0.78, 1.28}}  // 1.03(5) pi
  };
}

void FitConfig::validate() const {
  if (targets.empty()) throw ValidationError("FitConfig: need at least one target");
  if (free_names.empty()) throw ValidationError("FitConfig: no free parameters");
  if (overhauser_samples < 1) throw ValidationError("FitConfig: need Overhauser samples");
  for (const auto& name : free_names) {
    auto it = bounds.find(name);
    if (it == bounds.end()) throw ValidationError("FitConfig: missing bounds for " + name);
    double v = get_param(base, name);
    if (v < it->second.first || v > it->second.second)
      throw ValidationError("FitConfig: initial " + name + " outside its bounds");
  }
  for (const auto& t : targets)
    if (t.target.rows() != 4 || t.target.cols() != 4)
      throw ValidationError("FitConfig: targets must be 4x4 two-photon matrices");
}

std::string FitConfig::to_text() const {
  std::ostringstream os;
  os << "seed " << seed << "\n";
  os << "overhauser_samples " << overhauser_samples << "\n";
  os << "restarts " << restarts << "\n";
  os << "max_iterations " << max_iterations << "\n";
  os << "free";
  for (const auto& n : free_names) os << " " << n;
  os << "\n";
  for (const auto& [name, b] : bounds)
    os << "bound " << name << " " << b.first << " " << b.second << "\n";
  for (const auto& t : targets)
    os << "target " << t.program.name << " " << t.program.herald << " " << t.readout << "\n";
  return os.str();
}

double get_param(const TrionParams& p, const std::string& name) {
  if (name == "b_oh_mt") return p.b_oh_mt;
  if (name == "g_e") return p.g_e;
  if (name == "g_h") return p.g_h;
  if (name == "lambda_ex") return p.lambda_ex;
  if (name == "phi_ex_pi") return p.phi_ex_rad / M_PI;
  if (name == "lambda_osrp") return p.lambda_osrp;
  if (name == "theta_osrp_pi") return p.theta_osrp_rad / M_PI;
  throw ValidationError("unknown fit parameter '" + name + "'");
}

void set_param(TrionParams& p, const std::string& name, double value) {
  if (name == "b_oh_mt")
    p.b_oh_mt = value;
  else if (name == "g_e")
    p.g_e = value;
  else if (name == "g_h")
    p.g_h = value;
  else if (name == "lambda_ex")
    p.lambda_ex = value;
  else if (name == "phi_ex_pi")
    p.phi_ex_rad = value * M_PI;
  else if (name == "lambda_osrp")
    p.lambda_osrp = value;
  else if (name == "theta_osrp_pi")
    p.theta_osrp_rad = value * M_PI;
  else
    throw ValidationError("unknown fit parameter '" + name + "'");
}

// conditioned two-photon matrices for every (program,herald) group at fixed
// parameters, averaged over a common Overhauser stream
static std::map<std::string, Matrix> simulate_groups(const TrionParams& p,
                                                     const std::vector<FitTarget>& targets,
                                                     int n_oh, std::uint64_t seed) {
  std::map<std::string, const PulseProgram*> groups;
  for (const auto& t : targets) groups.emplace(t.program.name + t.program.herald, &t.program);

  std::map<std::string, Matrix> acc;
  SplitRng rng(seed, 0xf17);
  for (int k = 0; k < n_oh; ++k) {
    SplitRng child = rng.child(k);
    OverhauserSample s = sample_overhauser(p.b_oh_mt, child);
    TrionEmission emission(p, s);
    for (const auto& [key, prog] : groups) {
      JointState js = run_sequence(emission, *prog, s);
      auto it = acc.find(key);
      if (it == acc.end())
        acc.emplace(key, js.rho.entries());
      else
        it->second += js.rho.entries();
    }
  }
  for (auto& [_, m] : acc) m /= n_oh;
  return acc;
}

double fit_objective(const TrionParams& p, const std::vector<FitTarget>& targets, int n_oh,
                     std::uint64_t seed, std::map<std::string, double>* per_target) {
  p.validate();
  auto groups = simulate_groups(p, targets, n_oh, seed);
  double acc = 0.0;
  for (const auto& t : targets) {
    const Matrix& joint = groups.at(t.program.name + t.program.herald);
    JointState js{DensityMatrix(joint, {{"ph2", 2}, {"ph3", 2}, {"ph4", 2}, {"spin", 2}}, true),
                  1.0, true};
    auto [rho2, prob] = herald_and_readout(js, t.readout);
    double f = uhlmann_fidelity(rho2.entries(), t.target);
    if (per_target) (*per_target)[t.name] = f;
    acc += f;
  }
  return 1.0 - acc / targets.size();
}

// ---- Nelder-Mead ----

namespace {

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;
};

Eigen::VectorXd clamp_to(const Eigen::VectorXd& v, const std::vector<std::pair<double, double>>& b) {
  Eigen::VectorXd out = v;
  for (int i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], b[i].first, b[i].second);
  return out;
}

struct NmResult {
  Eigen::VectorXd x;
  double f = 1.0;
  bool converged = false;
};

NmResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                     const Eigen::VectorXd& x0, const std::vector<std::pair<double, double>>& bounds,
                     int max_iters, double ftol = 1e-6) {
  const int d = static_cast<int>(x0.size());
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  Simplex s;
  s.x.push_back(clamp_to(x0, bounds));
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd xi = x0;
    double step = 0.08 * (bounds[i].second - bounds[i].first);
    xi[i] += (xi[i] + step <= bounds[i].second) ? step : -step;
    s.x.push_back(clamp_to(xi, bounds));
  }
  for (const auto& xi : s.x) s.f.push_back(objective(xi));

  auto order = [&]() {
    std::vector<int> idx(s.x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return s.f[a] < s.f[b]; });
    Simplex t;
    for (int i : idx) {
      t.x.push_back(s.x[i]);
      t.f.push_back(s.f[i]);
    }
    s = t;
  };

  NmResult res;
  for (int iter = 0; iter < max_iters; ++iter) {
    order();
    if (std::abs(s.f.back() - s.f.front()) < ftol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += s.x[i];
    centroid /= d;

    Eigen::VectorXd xr = clamp_to(centroid + alpha * (centroid - s.x.back()), bounds);
    double fr = objective(xr);
    if (fr < s.f.front()) {
      Eigen::VectorXd xe = clamp_to(centroid + gamma * (centroid - s.x.back()), bounds);
      double fe = objective(xe);
      if (fe < fr) {
        s.x.back() = xe;
        s.f.back() = fe;
      } else {
        s.x.back() = xr;
        s.f.back() = fr;
      }
    } else if (fr < s.f[d - 1]) {
      s.x.back() = xr;
      s.f.back() = fr;
    } else {
      Eigen::VectorXd xc = clamp_to(centroid + rho * (s.x.back() - centroid), bounds);
      double fc = objective(xc);
      if (fc < s.f.back()) {
        s.x.back() = xc;
        s.f.back() = fc;
      } else {
        for (size_t i = 1; i < s.x.size(); ++i) {
          s.x[i] = clamp_to(s.x.front() + sigma * (s.x[i] - s.x.front()), bounds);
          s.f[i] = objective(s.x[i]);
        }
      }
    }
  }
  order();
  res.x = s.x.front();
  res.f = s.f.front();
  return res;
}

}  // namespace

std::vector<FitTarget> synthetic_targets(const TrionParams& truth, int n_oh, std::uint64_t seed) {
  std::vector<FitTarget> targets;
  struct Cond {
    const char* preset;
    char herald;
    char readout;
  };
  const Cond conds[] = {{"lc4", 'R', 'R'},  {"lc4", 'R', 'L'},  {"lc4", 'L', 'R'},
                        {"lc4", 'L', 'L'},  {"ghz4", 'R', 'R'}, {"ghz4", 'R', 'L'},
                        {"rlc1", 'R', 'R'}, {"rlc1", 'R', 'L'}, {"rlc2", 'R', 'R'},
                        {"rlc2", 'R', 'L'}};
  for (const auto& c : conds) {
    PulseProgram prog = *PulseProgram::preset(c.preset, truth);
    prog.herald = c.herald;
    prog.readout = c.readout;
    FitTarget t;
    t.program = prog;
    t.readout = c.readout;
    t.name = std::string(c.preset) + "_" + c.herald + c.readout;
    targets.push_back(std::move(t));
  }
  // simulate the conditioned pairs at the truth with the same CRN stream the
  // objective uses, so the truth is the exact optimum
  std::map<std::string, Matrix> groups;
  {
    TrionParams p = truth;
    std::map<std::string, const PulseProgram*> progs;
    for (const auto& t : targets) progs.emplace(t.program.name + t.program.herald, &t.program);
    SplitRng rng(seed, 0xf17);
    for (int k = 0; k < n_oh; ++k) {
      SplitRng child = rng.child(k);
      OverhauserSample s = sample_overhauser(p.b_oh_mt, child);
      TrionEmission emission(p, s);
      for (const auto& [key, prog] : progs) {
        JointState js = run_sequence(emission, *prog, s);
        auto it = groups.find(key);
        if (it == groups.end())
          groups.emplace(key, js.rho.entries());
        else
          it->second += js.rho.entries();
      }
    }
    for (auto& [_, m] : groups) m /= n_oh;
  }
  for (auto& t : targets) {
    JointState js{DensityMatrix(groups.at(t.program.name + t.program.herald),
                                {{"ph2", 2}, {"ph3", 2}, {"ph4", 2}, {"spin", 2}}, true),
                  1.0, true};
    auto [rho2, prob] = herald_and_readout(js, t.readout);
    t.target = rho2.entries();
  }
  return targets;
}

FitResult fit_parameters(const FitConfig& cfg) {
  cfg.validate();
  const int d = static_cast<int>(cfg.free_names.size());
  std::vector<std::pair<double, double>> bounds;
  for (const auto& name : cfg.free_names) bounds.push_back(cfg.bounds.at(name));

  auto vector_to_params = [&](const Eigen::VectorXd& x) {
    TrionParams p = cfg.base;
    for (int i = 0; i < d; ++i) set_param(p, cfg.free_names[i], x[i]);
    return p;
  };
  auto run_objective = [&](const std::vector<FitTarget>& targets) {
    return [&cfg, &targets, vector_to_params](const Eigen::VectorXd& x) {
      return fit_objective(vector_to_params(x), targets, cfg.overhauser_samples, cfg.seed);
    };
  };

  Eigen::VectorXd x0(d);
  for (int i = 0; i < d; ++i) x0[i] = get_param(cfg.base, cfg.free_names[i]);

  // full fit with restarts; the first start is the configured base point
  SplitRng restart_rng(cfg.seed, 0xf2e);
  NmResult best;
  best.f = 2.0;
  bool any_converged = false;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    Eigen::VectorXd start = x0;
    if (r > 0)
      for (int i = 0; i < d; ++i)
        start[i] = bounds[i].first + restart_rng.uniform01() * (bounds[i].second - bounds[i].first);
    NmResult res = nelder_mead(run_objective(cfg.targets), start, bounds, cfg.max_iterations);
    any_converged = any_converged || res.converged;
    if (res.f < best.f) best = res;
  }

  FitResult out;
  out.names = cfg.free_names;
  out.seed = cfg.seed;
  out.best_objective = best.f;
  out.converged = any_converged;

  TrionParams p_best = vector_to_params(best.x);
  std::map<std::string, double> per_target;
  fit_objective(p_best, cfg.targets, cfg.overhauser_samples, cfg.seed, &per_target);
  out.per_target_fidelity = per_target;

  // leave-one-target-out refits from the best point
  std::vector<Eigen::VectorXd> subset_fits;
  if (cfg.targets.size() >= 2) {
    for (size_t drop = 0; drop < cfg.targets.size(); ++drop) {
      std::vector<FitTarget> subset;
      for (size_t i = 0; i < cfg.targets.size(); ++i)
        if (i != drop) subset.push_back(cfg.targets[i]);
      NmResult res =
          nelder_mead(run_objective(subset), best.x, bounds, std::max(60, cfg.max_iterations / 4));
      subset_fits.push_back(res.x);
    }
  } else {
    subset_fits.push_back(best.x);
  }
  out.subsets_used = static_cast<int>(subset_fits.size());

  for (int i = 0; i < d; ++i) {
    double m = 0.0;
    for (const auto& x : subset_fits) m += x[i];
    m /= subset_fits.size();
    double var = 0.0;
    for (const auto& x : subset_fits) var += (x[i] - m) * (x[i] - m);
    var = subset_fits.size() > 1 ? var / (subset_fits.size() - 1) : 0.0;
    out.mean[cfg.free_names[i]] = m;
    out.stddev[cfg.free_names[i]] = std::sqrt(var);
  }
  return out;
}

std::string FitResult::to_text() const {
  std::ostringstream os;
  os.precision(8);
  os << "best_objective " << best_objective << "\n";
  os << "converged " << (converged ? 1 : 0) << "\n";
  os << "subsets_used " << subsets_used << "\n";
  os << "seed " << seed << "\n";
  for (const auto& name : names)
    os << "param " << name << " " << mean.at(name) << " " << stddev.at(name) << "\n";
  for (const auto& [name, f] : per_target_fidelity) os << "target_fidelity " << name << " " << f << "\n";
  return os.str();
}

std::string FitResult::to_csv() const {
  std::ostringstream os;
  os << "symbol,mean,std\n";
  os.precision(8);
  for (const auto& name : names)
    os << name << "," << mean.at(name) << "," << stddev.at(name) << "\n";
  return os.str();
}

}  // namespace spinphoton
