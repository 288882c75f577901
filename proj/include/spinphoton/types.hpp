#pragma once

// Labeled quantum objects on small multi-qubit (plus one four-level)
// registers. Values are immutable in spirit: operations return new objects.

#include <string>
#include <vector>

#include "spinphoton/linalg.hpp"

namespace spinphoton {

// Validation failures (bad inputs, broken invariants) vs numerical failures
// (conditioning, PSD violations). The CLI maps these to exit codes 2 and 3.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Subsystem {
  std::string name;
  int dim = 2;
  bool operator==(const Subsystem&) const = default;
};

using Labels = std::vector<Subsystem>;

inline int labels_dim(const Labels& labels) {
  int d = 1;
  for (const auto& l : labels) d *= l.dim;
  return d;
}
inline std::vector<int> label_dims(const Labels& labels) {
  std::vector<int> dims;
  dims.reserve(labels.size());
  for (const auto& l : labels) dims.push_back(l.dim);
  return dims;
}
int label_index(const Labels& labels, const std::string& name);

class Ket {
 public:
  Ket(Vector amplitudes, Labels labels);
  static Ket normalized(Vector amplitudes, Labels labels);

  int dim() const { return static_cast<int>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }
  const Labels& labels() const { return labels_; }
  double norm() const { return amps_.norm(); }

 private:
  Vector amps_;
  Labels labels_;
};

class Operator {
 public:
  Operator(Matrix entries, Labels labels);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  const Labels& labels() const { return labels_; }
  bool is_hermitian(double tol = 1e-12) const;
  bool is_projector(double tol = 1e-10) const;

 private:
  Matrix entries_;
  Labels labels_;
};

class DensityMatrix {
 public:
  // normalized = false admits post-selected branches with trace in [0,1].
  DensityMatrix(Matrix entries, Labels labels, bool normalized = true);
  static DensityMatrix from_ket(const Ket& psi);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  const Labels& labels() const { return labels_; }
  bool normalized() const { return normalized_; }
  double trace() const { return entries_.trace().real(); }
  DensityMatrix renormalized() const;

  void validate(double herm_tol = 1e-10, double trace_tol = 1e-10, double eig_tol = 1e-8) const;

  std::string to_json() const;
  static DensityMatrix from_json(const std::string& text);

 private:
  Matrix entries_;
  Labels labels_;
  bool normalized_;
};

class SuperOperator {
 public:
  SuperOperator(Matrix entries, Labels labels);

  int dim() const { return dim_; }               // Hilbert-space dimension d
  const Matrix& entries() const { return entries_; }  // d^2 x d^2
  const Labels& labels() const { return labels_; }

  // vec(I)^T G = 0, the trace-preserving generator condition.
  bool is_trace_preserving_generator(double tol = 1e-10) const;

 private:
  Matrix entries_;
  Labels labels_;
  int dim_;
};

}  // namespace spinphoton
