#include "spinphoton/metrics.hpp"

namespace spinphoton {

double fidelity(const Matrix& rho, const Vector& psi) {
  if (rho.rows() != psi.size()) throw ValidationError("fidelity: dimension mismatch");
  double f = (psi.adjoint() * rho * psi).value().real() / psi.squaredNorm();
  return f;
}

double fidelity(const DensityMatrix& rho, const Ket& target) {
  return fidelity(rho.entries(), target.amplitudes());
}

static Matrix hermitian_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

double uhlmann_fidelity(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows()) throw ValidationError("uhlmann_fidelity: dimension mismatch");
  Matrix sr = hermitian_sqrt(rho);
  Matrix inner = hermitian_sqrt(sr * sigma * sr);
  double f = inner.trace().real();
  return f * f;
}

double concurrence(const Matrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw ValidationError("concurrence: need a 4x4 state");
  if (min_eigenvalue(rho) < -1e-8)
    throw ValidationError("concurrence: input not positive semidefinite");
  Matrix yy = kron(pauli_y(), pauli_y());
  Matrix r = rho * yy * rho.conjugate() * yy;
  Eigen::ComplexEigenSolver<Matrix> es(r);
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) lam[i] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

double visibility(const VisibilityCounts& c) {
  for (double v : {c.c_rrrr, c.c_rlll, c.c_rrrl, c.c_rllr})
    if (v < 0) throw ValidationError("visibility: negative count");
  double denom = c.c_rrrr + c.c_rlll + c.c_rrrl + c.c_rllr;
  if (denom <= 0) throw ValidationError("visibility: zero denominator");
  return (c.c_rrrr + c.c_rlll - c.c_rrrl - c.c_rllr) / denom;
}

FidelityReport max_fidelity_timeshift(const std::function<Matrix(double)>& rho_of_t,
                                      const std::function<Vector(double)>& target_of_t, double t_ns,
                                      double window_ns, double step_ns) {
  if (window_ns < 0) throw ValidationError("max_fidelity_timeshift: negative window");
  if (step_ns <= 0) throw ValidationError("max_fidelity_timeshift: empty grid");
  Matrix rho = rho_of_t(t_ns);

  FidelityReport report;
  report.evaluation_time_ns = t_ns;
  if (window_ns == 0.0) {
    report.value = fidelity(rho, target_of_t(t_ns));
    return report;
  }
  int half = static_cast<int>(std::round(window_ns / step_ns));
  double best = -1.0, best_shift = 0.0;
  for (int k = -half; k <= half; ++k) {
    double shift = k * step_ns;
    double f = fidelity(rho, target_of_t(t_ns + shift));
    if (f > best) {
      best = f;
      best_shift = shift;
    }
  }
  report.value = best;
  report.time_shift_ns = best_shift;
  return report;
}

}  // namespace spinphoton
