#pragma once

// Shared generators for randomized tests.

#include "spinphoton/qcore.hpp"
#include "spinphoton/rng.hpp"

namespace spinphoton::testutil {

inline Vector random_ket(int dim, SplitRng& rng) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cxd(rng.normal(), rng.normal());
  return v / v.norm();
}

inline Matrix random_density(int dim, SplitRng& rng, int rank = 0) {
  if (rank <= 0) rank = dim;
  Matrix a(dim, rank);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = cxd(rng.normal(), rng.normal());
  Matrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline Matrix random_unitary(int dim, SplitRng& rng) {
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = cxd(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

}  // namespace spinphoton::testutil
