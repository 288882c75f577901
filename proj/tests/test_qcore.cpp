#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spinphoton/qcore.hpp"
#include "test_util.hpp"

using namespace spinphoton;

namespace {

Ket basis_ket(int which, const std::string& name) {
  Vector v = Vector::Zero(2);
  v(which) = 1.0;
  return Ket(v, {{name, 2}});
}

// brute-force index contraction, independent of partial_trace_raw
Matrix ptrace_oracle_3q(const Matrix& rho, const std::vector<int>& keep) {
  int nk = static_cast<int>(keep.size());
  int dk = 1 << nk;
  Matrix out = Matrix::Zero(dk, dk);
  auto bit = [](int x, int q) { return (x >> (2 - q)) & 1; };  // qubit q of flat index
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) {
      bool traced_match = true;
      for (int q = 0; q < 3; ++q) {
        bool kept = std::find(keep.begin(), keep.end(), q) != keep.end();
        if (!kept && bit(r, q) != bit(c, q)) traced_match = false;
      }
      if (!traced_match) continue;
      int ro = 0, co = 0;
      for (int i = 0; i < nk; ++i) {
        ro = (ro << 1) | bit(r, keep[i]);
        co = (co << 1) | bit(c, keep[i]);
      }
      out(ro, co) += rho(r, c);
    }
  return out;
}

}  // namespace

TEST_CASE("tensor products") {
  Operator i2(Matrix::Identity(2, 2), {{"a", 2}});
  Operator i2b(Matrix::Identity(2, 2), {{"b", 2}});
  CHECK((tensor(i2, i2b).entries() - Matrix::Identity(4, 4)).norm() == doctest::Approx(0.0));

  Ket k0 = basis_ket(0, "a");
  Ket k1 = basis_ket(1, "b");
  Vector expect(4);
  expect << 0, 1, 0, 0;
  CHECK((tensor(k0, k1).amplitudes() - expect).norm() == doctest::Approx(0.0));

  Operator za(Matrix(pauli_z()), {{"a", 2}});
  Operator zb(Matrix(pauli_z()), {{"b", 2}});
  Matrix zz = tensor(za, zb).entries();
  Vector diag(4);
  diag << 1, -1, -1, 1;
  CHECK((zz - Matrix(diag.asDiagonal())).norm() == doctest::Approx(0.0));

  CHECK_THROWS_AS(tensor(i2, i2), ValidationError);
}

TEST_CASE("partial trace") {
  Vector bell(4);
  bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
  DensityMatrix rho = DensityMatrix::from_ket(Ket(bell, {{"q1", 2}, {"q2", 2}}));
  DensityMatrix red = partial_trace(rho, {"q1"});
  CHECK((red.entries() - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() < 1e-14);

  SplitRng rng(11, 0);
  Matrix ra = testutil::random_density(2, rng);
  Matrix rb = testutil::random_density(2, rng);
  DensityMatrix prod = tensor(DensityMatrix(ra, {{"A", 2}}), DensityMatrix(rb, {{"B", 2}}));
  CHECK((partial_trace(prod, {"A"}).entries() - ra).cwiseAbs().maxCoeff() < 1e-14);

  // random 3-qubit state vs explicit index-summation oracle
  Matrix r3 = testutil::random_density(8, rng);
  DensityMatrix rho3(r3, {{"x", 2}, {"y", 2}, {"z", 2}});
  for (auto keep : std::vector<std::vector<int>>{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}}) {
    std::vector<std::string> names;
    for (int k : keep) names.push_back(std::string(1, "xyz"[k]));
    Matrix got = partial_trace(rho3, names).entries();
    Matrix want = ptrace_oracle_3q(r3, keep);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
  }

  // tracing out everything leaves the scalar trace
  Matrix all = partial_trace_raw(r3, {2, 2, 2}, {});
  CHECK(std::abs(all(0, 0).real() - 1.0) < 1e-12);

  CHECK_THROWS_AS(partial_trace(rho3, {"nope"}), ValidationError);
}

TEST_CASE("propagate: decay, identity, unitarity, semigroup") {
  // two-level decay at gamma = 5/ns; |1> is the excited state
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 1) = 1.0;
  Matrix gen = liouvillian_superop(Matrix::Zero(2, 2), {sigma}, {5.0});
  SuperOperator g(gen, {{"tls", 2}});
  CHECK(g.is_trace_preserving_generator());

  Matrix excited = Matrix::Zero(2, 2);
  excited(1, 1) = 1.0;
  DensityMatrix rho(excited, {{"tls", 2}});

  DensityMatrix same = propagate(g, 0.0, rho);
  CHECK((same.entries() - excited).cwiseAbs().maxCoeff() < 1e-14);

  DensityMatrix later = propagate(g, 0.2, rho);
  CHECK(later.entries()(1, 1).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

  // semigroup property
  SplitRng rng(5, 1);
  DensityMatrix r0(testutil::random_density(2, rng), {{"tls", 2}});
  DensityMatrix one = propagate(g, 0.7, r0);
  DensityMatrix two = propagate(g, 0.3, propagate(g, 0.4, r0));
  CHECK((one.entries() - two.entries()).cwiseAbs().maxCoeff() < 1e-10);

  // purely Hamiltonian generator conserves purity
  Matrix h = Matrix(pauli_y()) * 1.7;
  SuperOperator gu(commutator_superop(h), {{"tls", 2}});
  DensityMatrix pure = DensityMatrix::from_ket(Ket(testutil::random_ket(2, rng), {{"tls", 2}}));
  DensityMatrix rot = propagate(gu, 2.1, pure);
  CHECK(purity(rot.entries()) == doctest::Approx(1.0).epsilon(1e-10));

  DensityMatrix bad(Matrix::Identity(4, 4) / 4.0, {{"a", 2}, {"b", 2}});
  CHECK_THROWS_AS(propagate(g, 0.1, bad), ValidationError);
  CHECK_THROWS_AS(propagate(g, -0.1, rho), ValidationError);
}

TEST_CASE("trace preservation of random Lindblad generators") {
  SplitRng rng(23, 2);
  for (int rep = 0; rep < 4; ++rep) {
    Matrix h = testutil::random_density(4, rng) * 3.0;  // Hermitian
    Matrix j1(4, 4), j2(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        j1(i, j) = cxd(rng.normal(), rng.normal());
        j2(i, j) = cxd(rng.normal(), rng.normal());
      }
    Matrix gen = liouvillian_superop(h, {j1, j2}, {0.8, 1.3});
    SuperOperator g(gen, {{"sys", 4}});
    CHECK(g.is_trace_preserving_generator());
    for (int k = 0; k < 100; ++k) {
      Matrix rho = testutil::random_density(4, rng);
      double dtr = unvectorize(Vector(gen * vectorize(rho)), 4).trace().real();
      CHECK(std::abs(dtr) < 1e-10);
    }
  }
}

TEST_CASE("measure_project") {
  Operator up(Matrix((Eigen::Matrix2cd() << 1, 0, 0, 0).finished()), {{"spin", 2}});

  DensityMatrix rup = DensityMatrix::from_ket(basis_ket(0, "spin"));
  auto [b1, p1] = measure_project(rup, up, "spin");
  CHECK(p1 == doctest::Approx(1.0));

  Vector plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  DensityMatrix rplus = DensityMatrix::from_ket(Ket(plus, {{"spin", 2}}));
  auto [b2, p2] = measure_project(rplus, up, "spin");
  CHECK(p2 == doctest::Approx(0.5));

  Vector bell(4);
  bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
  DensityMatrix rbell = DensityMatrix::from_ket(Ket(bell, {{"q1", 2}, {"q2", 2}}));
  Operator p0(Matrix((Eigen::Matrix2cd() << 1, 0, 0, 0).finished()), {{"q1", 2}});
  auto [b3, p3] = measure_project(rbell, p0, "q1");
  CHECK(p3 == doctest::Approx(0.5));
  Matrix expect = Matrix::Zero(4, 4);
  expect(0, 0) = 0.5;
  CHECK((b3.entries() - expect).cwiseAbs().maxCoeff() < 1e-14);

  Operator notproj(Matrix(pauli_x() * 0.7), {{"spin", 2}});
  CHECK_THROWS_AS(measure_project(rup, notproj, "spin"), ValidationError);
}

TEST_CASE("density matrix json round trip") {
  SplitRng rng(31, 3);
  DensityMatrix rho(testutil::random_density(4, rng), {{"ph2", 2}, {"spin", 2}});
  std::string text = rho.to_json();
  DensityMatrix back = DensityMatrix::from_json(text);
  CHECK((back.entries() - rho.entries()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(back.labels() == rho.labels());

  // invariant violations are rejected on load
  std::string bad = text;
  auto pos = bad.find("\"re\"");
  REQUIRE(pos != std::string::npos);
  DensityMatrix skew(rho.entries() + Matrix::Constant(4, 4, cxd(0, 0.5)),
                     {{"ph2", 2}, {"spin", 2}});
  CHECK_THROWS(DensityMatrix::from_json(skew.to_json()));
}

TEST_CASE("choi matrix and nearest psd projection") {
  SplitRng rng(7, 4);
  Matrix u = testutil::random_unitary(2, rng);
  Matrix choi = choi_matrix(unitary_superop(u), 2, 2);
  CHECK(min_eigenvalue(choi) > -1e-12);

  Matrix herm = testutil::random_density(4, rng);
  herm(0, 0) -= 0.4;  // push one direction negative
  herm = (herm + herm.adjoint()) / 2.0;
  Matrix proj = nearest_psd_unit_trace(herm);
  CHECK(min_eigenvalue(proj) > -1e-12);
  CHECK(proj.trace().real() == doctest::Approx(1.0).epsilon(1e-12));

  Matrix good = testutil::random_density(4, rng);
  CHECK((nearest_psd_unit_trace(good) - good).cwiseAbs().maxCoeff() < 1e-10);
}
