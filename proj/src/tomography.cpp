#include "spinphoton/tomography.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace spinphoton {

std::string basis_name(AnalysisBasis b) {
  switch (b) {
    case AnalysisBasis::RL: return "RL";
    case AnalysisBasis::HV: return "HV";
    case AnalysisBasis::DA: return "DA";
  }
  throw ValidationError("basis_name: bad basis");
}

AnalysisBasis basis_from_name(const std::string& name) {
  if (name == "RL") return AnalysisBasis::RL;
  if (name == "HV") return AnalysisBasis::HV;
  if (name == "DA") return AnalysisBasis::DA;
  throw ValidationError("unknown analysis basis '" + name + "'");
}

char outcome_label(AnalysisBasis b, int outcome) {
  static const char* labels[3] = {"RL", "HV", "DA"};
  return labels[static_cast<int>(b)][outcome];
}

Eigen::Matrix2cd outcome_projector(AnalysisBasis b, int outcome) {
  Eigen::Vector2cd k;
  switch (b) {
    case AnalysisBasis::RL: k = outcome == 0 ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1); break;
    case AnalysisBasis::HV:
      k = outcome == 0 ? Eigen::Vector2cd(1, 1) : Eigen::Vector2cd(1, -1);
      k /= std::sqrt(2.0);
      break;
    case AnalysisBasis::DA:
      k = outcome == 0 ? Eigen::Vector2cd(1, ci) : Eigen::Vector2cd(1, -ci);
      k /= std::sqrt(2.0);
      break;
  }
  return k * k.adjoint();
}

std::string setting_name(const MeasurementSetting& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += basis_name(s[i]);
  }
  return out;
}

MeasurementSetting setting_from_name(const std::string& name) {
  MeasurementSetting s;
  std::stringstream ss(name);
  std::string part;
  while (std::getline(ss, part, ',')) s.push_back(basis_from_name(part));
  if (s.empty()) throw ValidationError("empty measurement setting");
  return s;
}

std::vector<MeasurementSetting> complete_settings(int n_photons) {
  if (n_photons < 1 || n_photons > 3)
    throw ValidationError("complete_settings: supported for 1..3 photons");
  std::vector<MeasurementSetting> out;
  int total = 1;
  for (int i = 0; i < n_photons; ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    MeasurementSetting s;
    int c = code;
    for (int i = 0; i < n_photons; ++i) {
      s.push_back(static_cast<AnalysisBasis>(c % 3));
      c /= 3;
    }
    out.push_back(s);
  }
  return out;
}

std::string CountTable::to_csv() const {
  std::ostringstream os;
  os << "setting,outcome,count\n";
  os.precision(17);
  for (const auto& [setting, row] : counts)
    for (const auto& [outcome, value] : row) os << setting << ";" << outcome << ";" << value << "\n";
  // settings contain commas, so rows are ';' separated after the header
  return os.str();
}

CountTable CountTable::from_csv(const std::string& text) {
  CountTable table;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (first) {
      first = false;
      if (line.rfind("setting", 0) == 0) continue;
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string setting, outcome, value;
    if (!std::getline(ss, setting, ';') || !std::getline(ss, outcome, ';') ||
        !std::getline(ss, value, ';'))
      throw ValidationError("CountTable: malformed row '" + line + "'");
    table.counts[setting][outcome] = std::stod(value);
    table.n_photons = static_cast<int>(setting_from_name(setting).size());
  }
  double shots = 0.0;
  if (!table.counts.empty())
    for (const auto& [_, v] : table.counts.begin()->second) shots += v;
  table.shots_per_setting = shots;
  return table;
}

static std::string outcome_string(const MeasurementSetting& s, int code) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    int bit = (code >> (s.size() - 1 - i)) & 1;
    out += outcome_label(s[i], bit);
  }
  return out;
}

CountTable simulate_counts(const DensityMatrix& rho,
                           const std::vector<MeasurementSetting>& settings,
                           long shots_per_setting, std::uint64_t seed) {
  if (shots_per_setting < 0) throw ValidationError("simulate_counts: negative shots");
  if (settings.empty()) throw ValidationError("simulate_counts: no settings");
  int n = static_cast<int>(settings.front().size());
  if (rho.dim() != (1 << n)) throw ValidationError("simulate_counts: setting arity mismatch");

  CountTable table;
  table.shots_per_setting = static_cast<double>(shots_per_setting);
  table.seed = seed;
  table.n_photons = n;

  SplitRng rng(seed, 0x70e0);
  int outcomes = 1 << n;
  for (size_t si = 0; si < settings.size(); ++si) {
    const auto& s = settings[si];
    if (static_cast<int>(s.size()) != n)
      throw ValidationError("simulate_counts: inconsistent setting arity");
    std::vector<double> probs(outcomes);
    for (int code = 0; code < outcomes; ++code) {
      Matrix proj = Matrix::Identity(1, 1);
      for (size_t q = 0; q < s.size(); ++q) {
        int bit = (code >> (s.size() - 1 - q)) & 1;
        proj = kron(proj, outcome_projector(s[q], bit));
      }
      probs[code] = std::max(0.0, (proj * rho.entries()).trace().real());
    }
    auto& row = table.counts[setting_name(s)];
    if (shots_per_setting == 0) {
      for (int code = 0; code < outcomes; ++code) row[outcome_string(s, code)] = probs[code];
    } else {
      std::vector<double> cdf(outcomes);
      double acc = 0.0;
      for (int code = 0; code < outcomes; ++code) {
        acc += probs[code];
        cdf[code] = acc;
      }
      std::vector<long> tally(outcomes, 0);
      SplitRng child = rng.child(si);
      for (long shot = 0; shot < shots_per_setting; ++shot)
        ++tally[child.categorical(cdf.data(), outcomes)];
      for (int code = 0; code < outcomes; ++code)
        row[outcome_string(s, code)] = static_cast<double>(tally[code]);
    }
  }
  return table;
}

DensityMatrix reconstruct(const CountTable& table) {
  if (table.counts.empty()) throw ValidationError("reconstruct: empty count table");
  int n = table.n_photons;
  if (n < 1 || n > 3) throw ValidationError("reconstruct: supported for 1..3 photons");

  // completeness check
  std::set<std::string> have;
  for (const auto& [setting, _] : table.counts) have.insert(setting);
  std::string missing;
  for (const auto& s : complete_settings(n))
    if (!have.count(setting_name(s))) missing += (missing.empty() ? "" : " ") + setting_name(s);
  if (!missing.empty())
    throw ValidationError("reconstruct: incomplete settings, missing bases: " + missing);

  // Pauli-string expectations <P_1 ... P_n>, averaging over all settings
  // whose bases match every non-identity slot
  int n_strings = 1;
  for (int i = 0; i < n; ++i) n_strings *= 4;
  std::vector<double> expect(n_strings, 0.0);
  std::vector<int> hits(n_strings, 0);

  for (const auto& [setting_str, row] : table.counts) {
    MeasurementSetting s = setting_from_name(setting_str);
    double total = 0.0;
    for (const auto& [_, v] : row) total += v;
    if (total <= 0) throw ValidationError("reconstruct: empty setting " + setting_str);

    // every Pauli string measurable in this setting: slot i is identity or
    // the Pauli of basis s[i]
    for (int mask = 0; mask < (1 << n); ++mask) {
      int string_code = 0;
      for (int i = n - 1; i >= 0; --i) {
        int pauli_idx = 0;
        if ((mask >> i) & 1) pauli_idx = static_cast<int>(s[n - 1 - i]) + 1;
        string_code = string_code * 4 + pauli_idx;
      }
      double acc = 0.0;
      for (const auto& [outcome, v] : row) {
        int sign = 1;
        for (int i = 0; i < n; ++i) {
          if (!((mask >> (n - 1 - i)) & 1)) continue;
          char label = outcome[i];
          sign *= (label == outcome_label(s[i], 0)) ? 1 : -1;
        }
        acc += sign * v;
      }
      expect[string_code] += acc / total;
      ++hits[string_code];
    }
  }

  // assemble rho = 2^-n sum <P> P; digit order 0=I, 1=Z(RL), 2=X(HV), 3=Y(DA)
  int dim = 1 << n;
  std::array<Eigen::Matrix2cd, 4> paulis = {Eigen::Matrix2cd::Identity(), pauli_z(), pauli_x(),
                                            pauli_y()};

  Matrix est = Matrix::Zero(dim, dim);
  for (int code = 0; code < n_strings; ++code) {
    if (hits[code] == 0) continue;
    double value = expect[code] / hits[code];
    Matrix op = Matrix::Identity(1, 1);
    int c = code;
    std::vector<int> digits(n);
    for (int i = n - 1; i >= 0; --i) {
      digits[i] = c % 4;
      c /= 4;
    }
    for (int i = 0; i < n; ++i) op = kron(op, paulis[digits[i]]);
    est += value * op;
  }
  est /= dim;

  Matrix phys = nearest_psd_unit_trace(est);
  Labels labels;
  for (int i = 0; i < n; ++i) labels.push_back({"ph" + std::to_string(i + 2), 2});
  return DensityMatrix(std::move(phys), std::move(labels), true);
}

}  // namespace spinphoton
