#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "solver/cone_algebra.hpp"
#include "uavmec/common.hpp"
#include "uavmec/solver.hpp"

using namespace uavmec;

TEST_SUITE("solver") {
  TEST_CASE("one-dimensional bound LP") {
    LinearProgram lp;
    lp.c = Eigen::VectorXd::Ones(1);
    lp.lower = Eigen::VectorXd::Constant(1, 3.0);
    lp.upper = Eigen::VectorXd::Constant(1, 10.0);
    const SolveResult r = solve_lp(lp);
    REQUIRE(r.optimal());
    CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-7));
  }

  TEST_CASE("simplex edge LP") {
    LinearProgram lp;
    lp.c = Eigen::Vector2d(-1.0, -1.0);
    lp.A_ineq = Eigen::MatrixXd::Ones(1, 2);
    lp.b_ineq = Eigen::VectorXd::Ones(1);
    lp.lower = Eigen::VectorXd::Zero(2);
    const SolveResult r = solve_lp(lp);
    REQUIRE(r.optimal());
    CHECK(r.objective == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK(r.x.sum() == doctest::Approx(1.0).epsilon(1e-7));
  }

  TEST_CASE("projection onto box via quadratic objective") {
    ConeProgram cp;
    cp.core.c = Eigen::Vector2d(-2.0, -4.0);
    cp.core.objective_offset = 5.0;
    cp.core.lower = Eigen::VectorXd::Zero(2);
    cp.core.upper = Eigen::VectorXd::Ones(2);
    cp.Q = Eigen::MatrixXd::Identity(2, 2);
    const SolveResult r = solve_socp(cp);
    REQUIRE(r.optimal());
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("norm cone with fixed point") {
    ConeProgram cp;
    cp.core.c = Eigen::Vector3d(0.0, 0.0, 1.0);
    cp.core.A_eq = Eigen::MatrixXd::Zero(2, 3);
    cp.core.A_eq(0, 0) = 1.0;
    cp.core.A_eq(1, 1) = 1.0;
    cp.core.b_eq = Eigen::Vector2d(3.0, 4.0);
    SecondOrderCone q;
    q.A = Eigen::MatrixXd::Zero(2, 3);
    q.A(0, 0) = 1.0;
    q.A(1, 1) = 1.0;
    q.b = Eigen::VectorXd::Zero(2);
    q.c = Eigen::Vector3d(0.0, 0.0, 1.0);
    cp.cones.push_back(q);
    const SolveResult r = solve_socp(cp);
    REQUIRE(r.optimal());
    CHECK(r.x[2] == doctest::Approx(5.0).epsilon(1e-6));
  }

  TEST_CASE("infeasible and unbounded are reported distinctly") {
    LinearProgram inf;
    inf.c = Eigen::VectorXd::Ones(1);
    inf.A_ineq = Eigen::MatrixXd::Ones(2, 1);
    inf.A_ineq(1, 0) = -1.0;
    inf.b_ineq = Eigen::Vector2d(1.0, -2.0);  // x <= 1 and x >= 2
    CHECK(solve_lp(inf).status == SolveStatus::infeasible);

    LinearProgram unb;
    unb.c = Eigen::Vector2d(-1.0, 0.0);
    unb.A_ineq = Eigen::MatrixXd::Zero(1, 2);
    unb.A_ineq(0, 1) = 1.0;
    unb.b_ineq = Eigen::VectorXd::Ones(1);
    unb.lower = Eigen::VectorXd::Zero(2);
    CHECK(solve_lp(unb).status == SolveStatus::unbounded);
  }

  TEST_CASE("equality-only problems") {
    LinearProgram lp;
    lp.c = Eigen::Vector2d(1.0, 1.0);
    lp.A_eq = Eigen::MatrixXd::Ones(1, 2);
    lp.b_eq = Eigen::VectorXd::Constant(1, 2.0);
    const SolveResult r = solve_lp(lp);
    CHECK(r.status == SolveStatus::optimal);
    CHECK(r.objective == doctest::Approx(2.0));
    lp.c = Eigen::Vector2d(1.0, 0.0);
    CHECK(solve_lp(lp).status == SolveStatus::unbounded);
  }

  TEST_CASE("random LPs match vertex enumeration") {
    gen::Rng rng(7);
    for (int k = 0; k < 30; ++k) {
      const LinearProgram lp = gen::random_lp(rng, 5, 5, k % 3 == 0);
      const double ref = oracle::lp_vertex_enumeration(lp);
      const SolveResult r = solve_lp(lp);
      REQUIRE(r.optimal());
      CHECK(std::abs(r.objective - ref) <= 1e-6);
      CHECK(check_solution(lp, r.x).feasible(1e-6));
    }
  }

  TEST_CASE("random two-variable SOCPs match a dense grid") {
    gen::Rng rng(11);
    for (int k = 0; k < 4; ++k) {
      const ConeProgram cp = gen::random_socp2(rng, k % 2 == 1);
      const SolveResult r = solve_socp(cp);
      REQUIRE(r.optimal());
      const double grid = oracle::grid_min_2d(cp, -1.0, 1.0, 1e-3);
      CHECK(r.objective <= grid + 1e-9);
      CHECK(grid - r.objective <= 1e-3);
      CHECK(check_solution(cp, r.x).feasible(1e-7));
    }
  }

  TEST_CASE("objective scaling leaves the argmin unchanged") {
    gen::Rng rng(3);
    for (int k = 0; k < 10; ++k) {
      LinearProgram lp = gen::random_lp(rng);
      const SolveResult a = solve_lp(lp);
      lp.c *= 37.5;
      const SolveResult b = solve_lp(lp);
      REQUIRE(a.optimal());
      REQUIRE(b.optimal());
      CHECK((a.x - b.x).norm() <= 1e-5 * (1.0 + a.x.norm()));
    }
  }

  TEST_CASE("deterministic results") {
    gen::Rng rng(5);
    const ConeProgram cp = gen::random_socp2(rng, true);
    const SolveResult a = solve_socp(cp), b = solve_socp(cp);
    CHECK(a.iterations == b.iterations);
    CHECK((a.x.array() == b.x.array()).all());
  }

  TEST_CASE("non-PSD quadratic is rejected") {
    ConeProgram cp;
    cp.core.c = Eigen::Vector2d::Zero();
    cp.Q = Eigen::Matrix2d(Eigen::Vector2d(1.0, -1.0).asDiagonal());
    CHECK_THROWS_AS(solve_socp(cp), ConfigError);
  }

  TEST_CASE("dimension errors are rejected") {
    LinearProgram lp;
    lp.c = Eigen::VectorXd::Ones(2);
    lp.A_ineq = Eigen::MatrixXd::Ones(1, 3);
    lp.b_ineq = Eigen::VectorXd::Ones(1);
    CHECK_THROWS_AS(solve_lp(lp), ConfigError);
    lp.A_ineq = Eigen::MatrixXd::Ones(1, 2);
    lp.lower = Eigen::Vector2d(1.0, 0.0);
    lp.upper = Eigen::Vector2d(0.0, 0.0);
    CHECK_THROWS_AS(solve_lp(lp), ConfigError);
  }

  TEST_CASE("verifier measures violations from the data") {
    ConeProgram cp;
    cp.core.c = Eigen::Vector2d::Zero();
    cp.core.A_ineq = Eigen::MatrixXd::Ones(1, 2);
    cp.core.b_ineq = Eigen::VectorXd::Ones(1);
    SecondOrderCone q;
    q.A = Eigen::MatrixXd::Identity(2, 2);
    q.b = Eigen::VectorXd::Zero(2);
    q.c = Eigen::VectorXd::Zero(2);
    q.d = 1.0;
    cp.cones.push_back(q);
    const FeasibilityReport r = check_solution(cp, Eigen::Vector2d(3.0, 4.0));
    CHECK(r.inequality == doctest::Approx(6.0));
    CHECK(r.cones == doctest::Approx(4.0));
    CHECK_FALSE(r.feasible(1e-9));
  }

  TEST_CASE("json round trip preserves the problem") {
    gen::Rng rng(9);
    ConeProgram cp = gen::random_socp2(rng, true);
    cp.core.upper[1] = kInf;
    const ConeProgram back = cone_program_from_json(to_json(cp));
    CHECK(to_json(back) == to_json(cp));
    CHECK(back.core.upper[1] == kInf);
    CHECK((back.cones[0].A - cp.cones[0].A).norm() == 0.0);
  }

  TEST_CASE("Nesterov-Todd scaling satisfies W z = W^-1 s") {
    using namespace uavmec::detail;
    gen::Rng rng(21);
    const ConeLayout K(2, {3, 4});
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXd s = gen::normal_vec(rng, K.m), z = gen::normal_vec(rng, K.m);
      s.head(2) = s.head(2).cwiseAbs().array() + 0.1;
      z.head(2) = z.head(2).cwiseAbs().array() + 0.1;
      for (std::size_t k = 0; k < K.dim.size(); ++k) {
        const int o = K.offset[k], d = K.dim[k];
        s[o] = s.segment(o + 1, d - 1).norm() + 0.5;
        z[o] = z.segment(o + 1, d - 1).norm() + 0.5;
      }
      Scaling W;
      REQUIRE(compute_scaling(K, s, z, W));
      Eigen::VectorXd wz, winv_s;
      apply_w(K, W, z, wz, false);
      apply_w(K, W, s, winv_s, true);
      CHECK((wz - winv_s).norm() <= 1e-10 * (1.0 + wz.norm()));
      Eigen::VectorXd back;
      apply_w(K, W, winv_s, back, false);
      CHECK((back - s).norm() <= 1e-10 * (1.0 + s.norm()));
      const Eigen::VectorXd q = cone_division(K, W.lambda, s);
      CHECK((cone_product(K, W.lambda, q) - s).norm() <= 1e-10 * (1.0 + s.norm()));
    }
  }
}
