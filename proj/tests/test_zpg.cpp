#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spinphoton/zpg.hpp"
#include "test_util.hpp"

using namespace spinphoton;

namespace {

std::vector<PolarizationAxis> six_axes() {
  return {PolarizationAxis::r(), PolarizationAxis::l(), PolarizationAxis::h(),
          PolarizationAxis::v(), PolarizationAxis::d(), PolarizationAxis::a()};
}

Eigen::Matrix4cd excited_mixed_spin(const TrionParams& p) {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  rho(idx_up, idx_up) = 0.5;
  rho(idx_down, idx_down) = 0.5;
  return unvectorize(Vector(excitation_channel(p) * vectorize(rho)), 4);
}

PolarizationAxis axis_from_photon_ket(const Eigen::Vector2cd& ket) {
  // invert: ket = (conj(a_r), conj(a_l)), a_r = (c_H + i c_V)/sqrt2, ...
  cxd ar = std::conj(ket(0));
  cxd al = std::conj(ket(1));
  cxd ch = (ar + al) / std::sqrt(2.0);
  cxd cv = -ci * (ar - al) / std::sqrt(2.0);
  double theta = std::atan2(std::abs(cv), std::abs(ch));
  cxd phase = std::abs(ch) > 1e-12 ? ch / std::abs(ch) : cxd(1, 0);
  double phi = std::abs(cv) > 1e-12 ? std::arg(cv / phase) : 0.0;
  return {theta, phi, "custom"};
}

}  // namespace

TEST_CASE("polarization axes and dipoles") {
  CHECK((PolarizationAxis::r().dipole() - sigma_r()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((PolarizationAxis::l().dipole() - sigma_l()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((PolarizationAxis::h().dipole() - sigma_h()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((PolarizationAxis::v().dipole() - sigma_v()).cwiseAbs().maxCoeff() < 1e-14);

  // photon kets: R -> |0>, L -> |1>, H -> |+>
  CHECK((PolarizationAxis::r().photon_ket() - Eigen::Vector2cd(1, 0)).norm() < 1e-14);
  CHECK((PolarizationAxis::l().photon_ket() - Eigen::Vector2cd(0, 1)).norm() < 1e-14);
  CHECK((PolarizationAxis::h().photon_ket() - Eigen::Vector2cd(1, 1).normalized()).norm() < 1e-14);

  // orthogonality of every axis against its partner
  for (const auto& ax : six_axes()) {
    CHECK(std::abs(ax.photon_ket().dot(ax.orthogonal().photon_ket())) < 1e-13);
    // two detection channels address orthogonal dipoles: sum of jump traces
    // against the ground projector stays zero
    Eigen::Matrix4cd cross = ax.dipole() * ax.orthogonal().dipole().adjoint() +
                             ax.orthogonal().dipole() * ax.dipole().adjoint();
    CHECK(std::abs((ground_projector() * cross).trace()) < 1e-13);
  }

  // detection-basis Paulis for R/L, H/V, D/A are exactly Z, X, Y
  auto bases = default_detection_bases();
  CHECK((bases[0].photon_pauli() - pauli_z()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((bases[1].photon_pauli() - pauli_x()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((bases[2].photon_pauli() - pauli_y()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("zpg generator") {
  TrionParams p = TrionParams::table_s1();
  Matrix l = liouvillian_matrix(p, {});

  SUBCASE("both detectors off returns the Liouvillian") {
    Matrix g = zpg_generator(l, PolarizationAxis::r(), 0, 0, p.gamma());
    CHECK((g - l).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("survival probability of a bright state is exp(-t/T1)") {
    TrionParams p0 = p;
    p0.b_mt = 0.0;  // no hole mixing: every trajectory emits R
    Matrix l0 = liouvillian_matrix(p0, {});
    Matrix g = zpg_generator(l0, PolarizationAxis::r(), 1, 0, p0.gamma());
    Matrix rho = Matrix::Zero(4, 4);
    rho(idx_trion_up, idx_trion_up) = 1.0;
    for (double t : {0.1, 0.2, 0.5, 1.5}) {
      double tr = unvectorize(Vector(expm(g * t) * vectorize(rho)), 4).trace().real();
      CHECK(tr == doctest::Approx(std::exp(-t / p0.t1_ns)).epsilon(1e-10));
    }
    double late = unvectorize(Vector(expm(g * 3.0) * vectorize(rho)), 4).trace().real();
    CHECK(late < 1e-6);
  }

  SUBCASE("ground states are dark") {
    Matrix g = zpg_generator(l, PolarizationAxis::d(), 1, 1, p.gamma());
    Matrix rho = Matrix::Zero(4, 4);
    rho(idx_up, idx_up) = 1.0;
    for (double t : {0.3, 1.0, 4.0}) {
      double tr = unvectorize(Vector(expm(g * t) * vectorize(rho)), 4).trace().real();
      CHECK(tr == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  CHECK_THROWS_AS(zpg_generator(l, PolarizationAxis::r(), 2, 0, p.gamma()), ValidationError);
}

TEST_CASE("threshold quartet") {
  TrionParams p = TrionParams::table_s1();
  Matrix l = liouvillian_matrix(p, {});
  SplitRng rng(21, 0);

  SUBCASE("completeness over random states and all six axes") {
    for (int k = 0; k < 20; ++k) {
      Matrix rho0 = testutil::random_density(4, rng);
      double t = 0.2 + rng.uniform01();
      Matrix unconditioned = unvectorize(Vector(expm(l * t) * vectorize(rho0)), 4);
      for (const auto& ax : six_axes()) {
        ThresholdQuartet q = threshold_quartet(rho0, ax, t, l, p.gamma());
        Eigen::Matrix4cd sum = q.rho00 + q.rho10 + q.rho01 + q.rho11;
        CHECK((sum - unconditioned).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }

  SUBCASE("single emission: symmetric circular channels, no double clicks") {
    TrionParams ps = p;
    ps.b_mt = 0.0;
    ps.lambda_ex = 1.0;
    ps.phi_ex_rad = 0.0;
    Matrix ls = liouvillian_matrix(ps, {});
    Eigen::Matrix4cd rho0 = excited_mixed_spin(ps);
    double t = 10 * ps.t1_ns;
    ThresholdQuartet q = threshold_quartet(rho0, PolarizationAxis::r(), t, ls, ps.gamma());
    double p_r = q.rho10.trace().real();
    double p_l = q.rho01.trace().real();
    CHECK(std::abs(p_r - p_l) < 1e-6);
    CHECK(q.rho11.trace().real() <= 1e-6);
  }

  SUBCASE("zero-click trace is monotone nonincreasing") {
    Eigen::Matrix4cd rho0 = excited_mixed_spin(p);
    Matrix g = zpg_generator(l, PolarizationAxis::h(), 1, 1, p.gamma());
    double prev = rho0.trace().real();
    for (int i = 1; i <= 50; ++i) {
      double t = 2.5 * i / 50.0;
      double tr = unvectorize(Vector(expm(g * t) * vectorize(rho0)), 4).trace().real();
      CHECK(tr <= prev + 1e-10);
      prev = tr;
    }
  }
}

TEST_CASE("emission process map") {
  SUBCASE("pure circular selection rules in the decoherence-free limit") {
    TrionParams p = TrionParams::table_s1();
    p.b_mt = 0.0;
    p.b_oh_mt = 0.0;
    p.lambda_ex = 1.0;
    p.phi_ex_rad = 0.0;
    ProcessMap map = emission_process_map(p, {}, 20 * p.t1_ns);
    Eigen::Matrix2cd up = Eigen::Matrix2cd::Zero();
    up(0, 0) = 1.0;
    Eigen::Matrix4cd out = map.apply(up);
    CHECK(out.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out(0, 0).real() == doctest::Approx(1.0).epsilon(1e-8));  // |R,up><R,up|
  }

  TrionParams p = TrionParams::table_s1();
  SplitRng rng(33, 1);
  OverhauserSample s = sample_overhauser(p.b_oh_mt, rng);
  TrionEmission emission(p, s);

  SUBCASE("linearity before normalization") {
    const ProcessMap& map = emission.map(0.6);
    Matrix r1 = testutil::random_density(2, rng);
    Matrix r2 = testutil::random_density(2, rng);
    double a = 0.37;
    Eigen::Matrix4cd lhs = map.apply(a * r1 + (1 - a) * r2);
    Eigen::Matrix4cd rhs = a * map.apply(Eigen::Matrix2cd(r1)) + (1 - a) * map.apply(Eigen::Matrix2cd(r2));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("round trip against directly simulated conditioned correlators") {
    double t = 0.6;
    const ProcessMap& map = emission.map(t);
    // 5th test state, not used in reconstruction
    Vector psi = testutil::random_ket(2, rng);
    Eigen::Matrix2cd rho5 = psi * psi.adjoint();
    Eigen::Matrix4cd out = map.apply(rho5);

    Eigen::Matrix4cd rho0 = Eigen::Matrix4cd::Zero();
    rho0.topLeftCorner<2, 2>() = rho5;
    rho0 = unvectorize(Vector(excitation_channel(p) * vectorize(Matrix(rho0))), 4);

    auto bases = default_detection_bases();
    for (int b = 0; b < 3; ++b) {
      ThresholdQuartet q =
          threshold_quartet(rho0, bases[b].p, t, emission.liouvillian(), p.gamma());
      Eigen::Matrix2cd s_p = q.rho10.topLeftCorner<2, 2>();
      Eigen::Matrix2cd s_pb = q.rho01.topLeftCorner<2, 2>();
      double denom = (s_p.trace() + s_pb.trace()).real();
      for (int i = 0; i < 4; ++i) {
        Eigen::Matrix2cd si = pauli(i);
        double direct = ((si * (s_p - s_pb)).trace() / denom).real();
        Matrix obs = kron(bases[b].photon_pauli(), si);
        double from_map = (obs.adjoint() * out).trace().real();
        CHECK(std::abs(direct - from_map) < 1e-6);
        if (b == 0) {
          double direct_id = ((si * (s_p + s_pb)).trace() / denom).real();
          double map_id = (kron(Matrix::Identity(2, 2), Matrix(si)).adjoint() * out).trace().real();
          CHECK(std::abs(direct_id - map_id) < 1e-6);
        }
      }
    }
  }

  SUBCASE("choi positivity at the fitted operating point") {
    for (double t : {0.3, 0.6, 1.2}) {
      const ProcessMap& map = emission.map(t);
      CHECK(min_eigenvalue(map.choi()) > -1e-6);
    }
  }

  SUBCASE("reconstruction is basis-consistent under a rotated IC set") {
    double t = 0.6;
    const ProcessMap& ref = emission.map(t);

    // common qubit rotation applied to the three canonical detection axes
    Eigen::Matrix2cd u =
        (Matrix(-ci * 0.4 / 2.0 * pauli_x()).exp()) * (Matrix(-ci * 0.7 / 2.0 * pauli_z()).exp());
    std::array<DetectionBasis, 3> rotated;
    auto defaults = default_detection_bases();
    for (int b = 0; b < 3; ++b)
      rotated[b] = DetectionBasis{axis_from_photon_ket(u * defaults[b].p.photon_ket())};

    ProcessMap alt = emission.reconstruct(t, rotated);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      Matrix rho = testutil::random_density(2, rng);
      worst = std::max(worst, trace_distance(ref.apply(Eigen::Matrix2cd(rho)), alt.apply(Eigen::Matrix2cd(rho))));
    }
    CHECK(worst < 1e-6);
  }

  SUBCASE("json round trip") {
    const ProcessMap& map = emission.map(0.6);
    ProcessMap back = ProcessMap::from_json(map.to_json());
    CHECK((back.transfer() - map.transfer()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(back.evaluation_time() == doctest::Approx(0.6));
  }

  SUBCASE("design matrix is well conditioned") {
    CHECK(TrionEmission::design_condition_number() < 1e3);
  }

  SUBCASE("too-early evaluation reports no emission") {
    CHECK_THROWS_AS(emission.reconstruct(1e-12, default_detection_bases()), NumericalError);
  }
}
