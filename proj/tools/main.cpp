// spinphoton: batch front-end for the trion spin-photon graph-state
// simulator. Subcommands: simulate, ideal, fidelity-table, visibility-scan,
// sz-trace, fit, tomo-roundtrip, scaling.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinphoton/manifest.hpp"
#include "spinphoton/pipeline.hpp"

namespace fs = std::filesystem;
using namespace spinphoton;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string default_outdir() {
  if (const char* env = std::getenv("SPINPHOTON_OUTDIR")) return env;
  return "out";
}

TrionParams load_params(const std::string& spec) {
  if (auto preset = TrionParams::preset(spec)) return *preset;
  return TrionParams::from_text(read_file(spec));
}

PulseProgram load_program(const std::string& spec, const TrionParams& p) {
  if (auto preset = PulseProgram::preset(spec, p)) return *preset;
  return PulseProgram::from_text(read_file(spec));
}

ideal::GateList load_gates(const std::string& spec, const TrionParams& p) {
  if (auto prog = PulseProgram::preset(spec, p)) return to_ideal_gates(*prog, p);
  return ideal::gates_from_text(read_file(spec));
}

std::string format_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  char buf[64];
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.9g", row[i]);
      os << (i ? "," : "") << buf;
    }
    os << "\n";
  }
  return os.str();
}

struct CommonOpts {
  std::string out = default_outdir();
  std::uint64_t seed = 7;
  std::string params = "tableS1";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--seed", opts.seed, "manifest seed for all randomness");
  cmd->add_option("--params", opts.params, "parameter preset name or file");
}

RunManifest make_manifest(const std::string& command, const CommonOpts& opts) {
  RunManifest m;
  m.command = command;
  m.seed = opts.seed;
  m.output_dir = opts.out;
  m.inputs.push_back("params=" + opts.params);
  return m;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"trion spin-photon caterpillar graph-state simulator"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a pulse program and emit the density matrix");
  CommonOpts sim_opts;
  add_common(sim, sim_opts);
  std::string sim_program = "lc4";
  char sim_herald = 'R';
  int sim_samples = 300;
  sim->add_option("--program", sim_program, "program preset name or file");
  sim->add_option("--herald", sim_herald, "herald basis R|L");
  sim->add_option("--samples", sim_samples, "Overhauser samples");

  // ideal
  auto* idl = app.add_subcommand("ideal", "statevector of an ideal gate list");
  CommonOpts idl_opts;
  add_common(idl, idl_opts);
  std::string idl_gates = "lc4";
  std::string idl_init = "R";
  idl->add_option("--gates", idl_gates, "gate list preset or file");
  idl->add_option("--init", idl_init, "initial spin from heralding R|L");

  // fidelity-table
  auto* tab = app.add_subcommand("fidelity-table", "simulated two-photon and 4-partite fidelities");
  CommonOpts tab_opts;
  add_common(tab, tab_opts);
  std::string tab_preset = "all";
  int tab_samples = 300, tab_param_sets = 100, tab_param_oh = 100;
  tab->add_option("--preset", tab_preset, "protocol selection (all)");
  tab->add_option("--samples", tab_samples, "Overhauser samples for central values");
  tab->add_option("--param-sets", tab_param_sets, "parameter draws for uncertainties (0 = off)");
  tab->add_option("--param-oh", tab_param_oh, "Overhauser samples per parameter draw");

  // visibility-scan
  auto* vis = app.add_subcommand("visibility-scan", "four-photon visibility vs phi2");
  CommonOpts vis_opts;
  add_common(vis, vis_opts);
  int vis_points = 31, vis_samples = 300;
  double vis_max_pi = 3.0;
  vis->add_option("--points", vis_points, "number of phi2 points");
  vis->add_option("--samples", vis_samples, "Overhauser samples per point");
  vis->add_option("--max-pi", vis_max_pi, "scan end in units of pi");

  // sz-trace
  auto* szc = app.add_subcommand("sz-trace", "conditional S_z traces");
  CommonOpts sz_opts;
  add_common(szc, sz_opts);
  std::string sz_mode = "larmor";
  double sz_tmax = 6.0, sz_step = 0.02, sz_theta_max_pi = 4.0;
  int sz_points = 81, sz_samples = 200;
  szc->add_option("--mode", sz_mode, "larmor | osrp");
  szc->add_option("--t-max", sz_tmax, "largest delay (ns, larmor mode)");
  szc->add_option("--step", sz_step, "delay step (ns, larmor mode)");
  szc->add_option("--theta-max-pi", sz_theta_max_pi, "largest OSRP angle / pi (osrp mode)");
  szc->add_option("--points", sz_points, "points (osrp mode)");
  szc->add_option("--samples", sz_samples, "Overhauser samples");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit model parameters to target density matrices");
  CommonOpts fit_opts;
  add_common(fit_cmd, fit_opts);
  std::string fit_config;
  bool fit_synthetic = false;
  int fit_oh = 32, fit_restarts = 3, fit_iters = 500;
  fit_cmd->add_option("--config", fit_config, "fit configuration file");
  fit_cmd->add_flag("--synthetic", fit_synthetic, "fit synthetic targets generated at --params");
  fit_cmd->add_option("--oh-samples", fit_oh, "Overhauser samples per objective");
  fit_cmd->add_option("--restarts", fit_restarts, "optimizer restarts");
  fit_cmd->add_option("--max-iterations", fit_iters, "simplex iterations per start");

  // tomo-roundtrip
  auto* tomo = app.add_subcommand("tomo-roundtrip", "simulate counts and reconstruct");
  CommonOpts tomo_opts;
  add_common(tomo, tomo_opts);
  std::string tomo_state = "bell";
  long tomo_shots = 1000000;
  tomo->add_option("--state", tomo_state, "density matrix JSON file or 'bell'");
  tomo->add_option("--shots", tomo_shots, "shots per setting (0 = analytic)");

  // scaling
  auto* sca = app.add_subcommand("scaling", "GHZ/LC/caterpillar fidelity vs photon number");
  CommonOpts sca_opts;
  add_common(sca, sca_opts);
  sca_opts.params = "near-term";
  std::string sca_protocol = "ghz";
  int sca_min = 2, sca_max = 30, sca_samples = 100;
  sca->add_option("--protocol", sca_protocol, "ghz | lc | caterpillar");
  sca->add_option("--min", sca_min, "smallest photon number");
  sca->add_option("--max", sca_max, "largest photon number");
  sca->add_option("--samples", sca_samples, "Overhauser samples");

  CLI11_PARSE(app, argc, argv);
  auto t_start = std::chrono::steady_clock::now();

  if (*sim) {
    TrionParams p = load_params(sim_opts.params);
    PulseProgram prog = load_program(sim_program, p);
    prog.herald = sim_herald;
    RunManifest m = make_manifest("simulate", sim_opts);
    m.inputs.push_back("program=" + sim_program);
    m.sample_counts["overhauser"] = sim_samples;

    JointState avg = overhauser_average(p, prog, sim_samples, sim_opts.seed);
    m.write_artifact("state.json", avg.rho.to_json());

    auto rho_of_t = [&](double) { return avg.rho.entries(); };
    auto target_of_t = [&](double t) { return pipeline::ideal_target_ket(prog, p, t); };
    FidelityReport rep = max_fidelity_timeshift(rho_of_t, target_of_t, prog.evaluation_after_ns,
                                                p.t1_ns);
    nlohmann::json j;
    j["fidelity"] = rep.value;
    j["evaluation_time_ns"] = rep.evaluation_time_ns;
    j["time_shift_ns"] = rep.time_shift_ns;
    j["herald_probability"] = avg.branch_probability;
    j["target"] = prog.name + " ideal state";
    m.write_artifact("fidelity.json", j.dump(2));

    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    m.save();
    std::cout << "simulate: F = " << rep.value << " (shift " << rep.time_shift_ns * 1e3
              << " ps), artifacts in " << sim_opts.out << "\n";
  } else if (*idl) {
    TrionParams p = load_params(idl_opts.params);
    ideal::GateList gates = load_gates(idl_gates, p);
    Eigen::Vector2cd init = idl_init == "L" ? Eigen::Vector2cd(0, 1) : Eigen::Vector2cd(1, 0);
    Ket psi = ideal::ideal_protocol_state(gates, init);

    nlohmann::json j;
    j["dim"] = psi.dim();
    j["labels"] = nlohmann::json::array();
    for (const auto& l : psi.labels()) j["labels"].push_back({{"name", l.name}, {"dim", l.dim}});
    std::vector<double> re, im;
    for (int i = 0; i < psi.dim(); ++i) {
      re.push_back(psi.amplitudes()(i).real());
      im.push_back(psi.amplitudes()(i).imag());
    }
    j["re"] = re;
    j["im"] = im;

    RunManifest m = make_manifest("ideal", idl_opts);
    m.inputs.push_back("gates=" + idl_gates);
    m.write_artifact("statevector.json", j.dump(2));
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    m.save();
    std::cout << "ideal: " << psi.dim() << "-dim statevector written to " << idl_opts.out << "\n";
  } else if (*tab) {
    if (tab_preset != "all") throw ValidationError("fidelity-table: only --preset all is defined");
    TrionParams p = load_params(tab_opts.params);
    pipeline::FidelityTable table =
        pipeline::fidelity_table(p, tab_samples, tab_opts.seed, tab_param_sets, tab_param_oh);

    RunManifest m = make_manifest("fidelity-table", tab_opts);
    m.sample_counts["overhauser"] = tab_samples;
    m.sample_counts["param_sets"] = tab_param_sets;
    m.write_artifact("fidelity_table.csv", table.to_csv());
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    m.save();
    std::cout << table.to_csv();
  } else if (*vis) {
    TrionParams p = load_params(vis_opts.params);
    auto curve =
        pipeline::visibility_curve(p, vis_points, vis_max_pi * M_PI, vis_samples, vis_opts.seed);
    std::vector<std::vector<double>> rows;
    for (const auto& pt : curve) rows.push_back({pt.phi2_rad / M_PI, pt.v});

    RunManifest m = make_manifest("visibility-scan", vis_opts);
    m.sample_counts["overhauser"] = vis_samples;
    m.write_artifact("visibility.csv", format_csv({"phi2_pi", "V"}, rows));
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    m.save();
    std::cout << "visibility-scan: amplitude " << pipeline::visibility_amplitude(curve)
              << ", points " << curve.size() << "\n";
  } else if (*szc) {
    TrionParams p = load_params(sz_opts.params);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> header;
    if (sz_mode == "larmor") {
      auto curve = pipeline::larmor_curve(p, sz_tmax, sz_step, sz_samples, sz_opts.seed);
      header = {"delay_ns", "Sz"};
      for (const auto& pt : curve) rows.push_back({pt.x, pt.sz});
    } else if (sz_mode == "osrp") {
      auto curve =
          pipeline::osrp_curve(p, sz_theta_max_pi * M_PI, sz_points, sz_samples, sz_opts.seed);
      header = {"theta_pi", "Sz"};
      for (const auto& pt : curve) rows.push_back({pt.x / M_PI, pt.sz});
    } else {
      throw ValidationError("sz-trace: mode must be larmor or osrp");
    }
    RunManifest m = make_manifest("sz-trace", sz_opts);
    m.inputs.push_back("mode=" + sz_mode);
    m.sample_counts["overhauser"] = sz_samples;
    m.write_artifact("sz.csv", format_csv(header, rows));
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    m.save();
    std::cout << "sz-trace (" << sz_mode << "): " << rows.size() << " points written\n";
  } else if (*fit_cmd) {
    TrionParams p = load_params(fit_opts.params);
    FitConfig cfg;
    cfg.base = p;
    cfg.overhauser_samples = fit_oh;
    cfg.restarts = fit_restarts;
    cfg.max_iterations = fit_iters;
    cfg.seed = fit_opts.seed;
    if (fit_synthetic) {
      cfg.targets = synthetic_targets(p, fit_oh, fit_opts.seed);
    } else if (!fit_config.empty()) {
      // structured text: lines "target <preset> <herald> <readout> <json path>"
      // plus optional "free ..." / "bound name lo hi" / numeric keys
      std::istringstream is(read_file(fit_config));
      std::string line;
      std::vector<std::string> free_names;
      while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word == "seed") ls >> cfg.seed;
        else if (word == "overhauser_samples") ls >> cfg.overhauser_samples;
        else if (word == "restarts") ls >> cfg.restarts;
        else if (word == "max_iterations") ls >> cfg.max_iterations;
        else if (word == "free") {
          std::string n;
          while (ls >> n) free_names.push_back(n);
        } else if (word == "bound") {
          std::string n;
          double lo, hi;
          if (!(ls >> n >> lo >> hi)) throw ValidationError("fit config: bad bound line");
          cfg.bounds[n] = {lo, hi};
        } else if (word == "target") {
          std::string preset, path;
          char herald, readout;
          if (!(ls >> preset >> herald >> readout >> path))
            throw ValidationError("fit config: bad target line");
          auto prog = PulseProgram::preset(preset, p);
          if (!prog) throw ValidationError("fit config: unknown program preset " + preset);
          prog->herald = herald;
          prog->readout = readout;
          FitTarget t;
          t.program = *prog;
          t.readout = readout;
          t.name = preset + "_" + herald + readout;
          t.target = DensityMatrix::from_json(read_file(path)).entries();
          cfg.targets.push_back(std::move(t));
        } else {
          throw ValidationError("fit config: unknown directive '" + word + "'");
        }
      }
      if (!free_names.empty()) cfg.free_names = free_names;
    } else {
      throw ValidationError("fit: provide --config or --synthetic");
    }

    FitResult result = fit_parameters(cfg);
    RunManifest m = make_manifest("fit", fit_opts);
    m.sample_counts["overhauser"] = cfg.overhauser_samples;
    m.sample_counts["targets"] = static_cast<long>(cfg.targets.size());
    m.write_artifact("fit_result.txt", result.to_text());
    m.write_artifact("fit_result.csv", result.to_csv());
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    m.save();
    std::cout << result.to_text();
    if (!result.converged) {
      std::cerr << "fit: optimizer did not converge within the restart budget; best-so-far "
                   "reported\n";
    }
  } else if (*tomo) {
    CommonOpts& opts = tomo_opts;
    DensityMatrix rho = [&]() {
      if (tomo_state == "bell") {
        Vector bell(4);
        bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
        return DensityMatrix::from_ket(Ket(bell, {{"ph2", 2}, {"ph3", 2}}));
      }
      return DensityMatrix::from_json(read_file(tomo_state));
    }();
    int n = 0;
    while ((1 << n) < rho.dim()) ++n;
    CountTable counts = simulate_counts(rho, complete_settings(n), tomo_shots, opts.seed);
    DensityMatrix est = reconstruct(counts);

    nlohmann::json j;
    j["shots_per_setting"] = tomo_shots;
    j["fidelity"] = uhlmann_fidelity(est.entries(), rho.entries());
    j["trace_distance"] = trace_distance(est.entries(), rho.entries());
    RunManifest m = make_manifest("tomo-roundtrip", opts);
    m.inputs.push_back("state=" + tomo_state);
    m.sample_counts["shots_per_setting"] = tomo_shots;
    m.write_artifact("counts.csv", counts.to_csv());
    m.write_artifact("reconstructed.json", est.to_json());
    m.write_artifact("tomo.json", j.dump(2));
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    m.save();
    std::cout << "tomo-roundtrip: trace distance "
              << trace_distance(est.entries(), rho.entries()) << "\n";
  } else if (*sca) {
    TrionParams p = load_params(sca_opts.params);
    RunManifest m = make_manifest("scaling", sca_opts);
    m.inputs.push_back("protocol=" + sca_protocol);
    m.sample_counts["overhauser"] = sca_samples;

    if (sca_protocol == "caterpillar") {
      double f =
          pipeline::caterpillar_fidelity(p, pipeline::caterpillar10(), sca_samples, sca_opts.seed);
      nlohmann::json j;
      j["photons"] = pipeline::caterpillar10().qubits();
      j["fidelity"] = f;
      m.write_artifact("scaling.json", j.dump(2));
      m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      m.save();
      std::cout << "scaling caterpillar-10: F = " << f << "\n";
    } else {
      pipeline::ScalingProtocol kind = sca_protocol == "ghz" ? pipeline::ScalingProtocol::Ghz
                                                             : pipeline::ScalingProtocol::Lc;
      auto curve = pipeline::scaling_curve(p, kind, sca_min, sca_max, sca_samples, sca_opts.seed);
      std::vector<std::vector<double>> rows;
      for (const auto& pt : curve) rows.push_back({double(pt.photons), pt.fidelity});
      nlohmann::json j;
      j["protocol"] = sca_protocol;
      j["log_linear_r2"] = pipeline::log_linear_r2(curve);
      m.write_artifact("scaling.csv", format_csv({"photons", "F"}, rows));
      m.write_artifact("scaling.json", j.dump(2));
      m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      m.save();
      std::cout << "scaling " << sca_protocol << ": " << curve.size() << " points, log-linear R^2 "
                << j["log_linear_r2"].get<double>() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ValidationError& e) {
    nlohmann::json j;
    j["error"] = {{"type", "validation"}, {"message", e.what()}};
    std::cerr << j.dump() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    nlohmann::json j;
    j["error"] = {{"type", "numerical"}, {"message", e.what()}};
    std::cerr << j.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    nlohmann::json j;
    j["error"] = {{"type", "internal"}, {"message", e.what()}};
    std::cerr << j.dump() << "\n";
    return 1;
  }
}
