#include "spinphoton/types.hpp"

#include <json.hpp>

namespace spinphoton {

using nlohmann::json;

int label_index(const Labels& labels, const std::string& name) {
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i].name == name) return static_cast<int>(i);
  throw ValidationError("unknown subsystem tag: " + name);
}

static void check_label_dims(int dim, const Labels& labels, const char* what) {
  if (labels_dim(labels) != dim)
    throw ValidationError(std::string(what) + ": dim does not match product of subsystem dims");
}

Ket::Ket(Vector amplitudes, Labels labels) : amps_(std::move(amplitudes)), labels_(std::move(labels)) {
  if (amps_.size() == 0) throw ValidationError("Ket: empty amplitude vector");
  check_label_dims(static_cast<int>(amps_.size()), labels_, "Ket");
}

Ket Ket::normalized(Vector amplitudes, Labels labels) {
  double n = amplitudes.norm();
  if (n == 0.0) throw ValidationError("Ket: cannot normalize zero vector");
  return Ket(amplitudes / n, std::move(labels));
}

Operator::Operator(Matrix entries, Labels labels)
    : entries_(std::move(entries)), labels_(std::move(labels)) {
  if (entries_.rows() != entries_.cols()) throw ValidationError("Operator: non-square matrix");
  check_label_dims(static_cast<int>(entries_.rows()), labels_, "Operator");
}

bool Operator::is_hermitian(double tol) const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool Operator::is_projector(double tol) const {
  return is_hermitian(tol) && (entries_ * entries_ - entries_).cwiseAbs().maxCoeff() <= tol;
}

DensityMatrix::DensityMatrix(Matrix entries, Labels labels, bool normalized)
    : entries_(std::move(entries)), labels_(std::move(labels)), normalized_(normalized) {
  if (entries_.rows() != entries_.cols()) throw ValidationError("DensityMatrix: non-square matrix");
  check_label_dims(static_cast<int>(entries_.rows()), labels_, "DensityMatrix");
}

DensityMatrix DensityMatrix::from_ket(const Ket& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), psi.labels());
}

DensityMatrix DensityMatrix::renormalized() const {
  double t = trace();
  if (t <= 0.0) throw NumericalError("DensityMatrix: cannot renormalize, trace <= 0");
  return DensityMatrix(entries_ / t, labels_, true);
}

void DensityMatrix::validate(double herm_tol, double trace_tol, double eig_tol) const {
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > herm_tol)
    throw ValidationError("DensityMatrix: not Hermitian within tolerance");
  double t = trace();
  if (normalized_) {
    if (std::abs(t - 1.0) > trace_tol) throw ValidationError("DensityMatrix: trace != 1");
  } else if (t < -trace_tol || t > 1.0 + trace_tol) {
    throw ValidationError("DensityMatrix: branch trace outside [0,1]");
  }
  if (min_eigenvalue(entries_) < -eig_tol)
    throw ValidationError("DensityMatrix: negative eigenvalue beyond tolerance");
}

std::string DensityMatrix::to_json() const {
  json j;
  j["dim"] = dim();
  j["labels"] = json::array();
  for (const auto& l : labels_) j["labels"].push_back({{"name", l.name}, {"dim", l.dim}});
  std::vector<double> re, im;
  re.reserve(entries_.size());
  im.reserve(entries_.size());
  for (int r = 0; r < dim(); ++r)
    for (int c = 0; c < dim(); ++c) {
      re.push_back(entries_(r, c).real());
      im.push_back(entries_(r, c).imag());
    }
  j["re"] = re;
  j["im"] = im;
  j["normalized"] = normalized_;
  return j.dump(2);
}

DensityMatrix DensityMatrix::from_json(const std::string& text) {
  json j = json::parse(text);
  int dim = j.at("dim").get<int>();
  Labels labels;
  for (const auto& l : j.at("labels"))
    labels.push_back({l.at("name").get<std::string>(), l.at("dim").get<int>()});
  auto re = j.at("re").get<std::vector<double>>();
  auto im = j.at("im").get<std::vector<double>>();
  if (static_cast<int>(re.size()) != dim * dim || im.size() != re.size())
    throw ValidationError("DensityMatrix JSON: wrong entry count");
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      size_t k = static_cast<size_t>(r) * dim + c;
      m(r, c) = cxd(re[k], im[k]);
    }
  bool normalized = j.value("normalized", true);
  DensityMatrix rho(std::move(m), std::move(labels), normalized);
  rho.validate();
  return rho;
}

SuperOperator::SuperOperator(Matrix entries, Labels labels)
    : entries_(std::move(entries)), labels_(std::move(labels)) {
  if (entries_.rows() != entries_.cols()) throw ValidationError("SuperOperator: non-square matrix");
  int d = labels_dim(labels_);
  if (entries_.rows() != static_cast<Eigen::Index>(d) * d)
    throw ValidationError("SuperOperator: matrix is not dim^2 x dim^2");
  dim_ = d;
}

bool SuperOperator::is_trace_preserving_generator(double tol) const {
  Vector vec_id = vectorize(Matrix::Identity(dim_, dim_));
  return (vec_id.transpose() * entries_).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace spinphoton
