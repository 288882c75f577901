#pragma once

// Dense complex linear algebra helpers shared by every module. All density
// matrix vectorization in this project is column-stacking: vec(A X B) =
// (B^T (x) A) vec(X), so Eigen's default column-major Map is the vec map.

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace spinphoton {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cxd ci{0.0, 1.0};

template <typename DerivedA, typename DerivedB>
Matrix kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename Derived>
Vector vectorize(const Eigen::MatrixBase<Derived>& m) {
  Matrix c = m;
  return Eigen::Map<const Vector>(c.data(), c.size());
}

inline Matrix unvectorize(const Vector& v, Eigen::Index dim) {
  if (v.size() != dim * dim) throw std::invalid_argument("unvectorize: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

// Pade scaling-and-squaring via Eigen's MatrixFunctions module.
template <typename Derived>
Matrix expm(const Eigen::MatrixBase<Derived>& m) {
  Matrix a = m;
  return a.exp();
}

template <typename Derived>
Matrix dagger(const Eigen::MatrixBase<Derived>& m) {
  return m.adjoint();
}

inline Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd s;
  s << 0, 1, 1, 0;
  return s;
}
inline Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd s;
  s << 0, -ci, ci, 0;
  return s;
}
inline Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd s;
  s << 1, 0, 0, -1;
  return s;
}
inline Eigen::Matrix2cd pauli(int i) {
  switch (i) {
    case 0: return Eigen::Matrix2cd::Identity();
    case 1: return pauli_x();
    case 2: return pauli_y();
    case 3: return pauli_z();
  }
  throw std::invalid_argument("pauli: index out of range");
}

// Reduced matrix over the kept subsystems. dims are per-subsystem dimensions
// (leftmost factor most significant), keep lists subsystem positions.
Matrix partial_trace_raw(const Matrix& rho, const std::vector<int>& dims,
                         const std::vector<int>& keep);

// I (x) ... (x) op (x) ... (x) I with op at position pos.
Matrix embed_op(const Matrix& op, const std::vector<int>& dims, int pos);

inline double trace_distance(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((a - b + (a - b).adjoint()) / 2.0);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

inline double min_eigenvalue(const Matrix& herm) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((herm + herm.adjoint()) / 2.0);
  return es.eigenvalues().minCoeff();
}

// Nearest PSD unit-trace matrix in Frobenius norm (eigenvalue clipping with
// trace redistribution).
Matrix nearest_psd_unit_trace(const Matrix& herm);

}  // namespace spinphoton
