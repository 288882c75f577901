#pragma once

// Core operations on labeled states and channels: tensor products, partial
// traces, propagation under superoperator generators, projective branches,
// and the standard Lindblad building blocks in column-stacking convention.

#include "spinphoton/types.hpp"

namespace spinphoton {

Ket tensor(const Ket& a, const Ket& b);
Operator tensor(const Operator& a, const Operator& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep);

// exp(G t) applied to vec(rho); generators here are time-independent between
// pulses so the dense exponential is exact.
DensityMatrix propagate(const SuperOperator& g, double t_ns, const DensityMatrix& rho);

// Unnormalized branch (P(x)I) rho (P(x)I) and its probability.
std::pair<DensityMatrix, double> measure_project(const DensityMatrix& rho,
                                                 const Operator& projector,
                                                 const std::string& subsystem);

// --- superoperator builders (raw matrices; column stacking) ---

// -i (I (x) H - H^T (x) I)
Matrix commutator_superop(const Matrix& h);
// sigma . sigma^dag - 1/2 {sigma^dag sigma, .}
Matrix dissipator_superop(const Matrix& sigma);
// sigma . sigma^dag
Matrix jump_superop(const Matrix& sigma);
// -i[H,.] + sum_k rate_k D_{sigma_k}
Matrix liouvillian_superop(const Matrix& h, const std::vector<Matrix>& jumps,
                           const std::vector<double>& rates);
// conjugation rho -> U rho U^dag
Matrix unitary_superop(const Matrix& u);

Matrix apply_superop(const Matrix& s, const Matrix& rho);

// Choi matrix sum_ij E_ij (x) S(E_ij) of a (possibly rectangular) transfer
// matrix S mapping vec of dim_in x dim_in to vec of dim_out x dim_out.
Matrix choi_matrix(const Matrix& s, int dim_in, int dim_out);

}  // namespace spinphoton
