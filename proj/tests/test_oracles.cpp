#include <doctest.h>

#include <cmath>

#include "km/oracles.hpp"
#include "test_util.hpp"

using namespace km;

TEST_CASE("exhaustive enumeration finds the worked minimum") {
  BqpInstance inst(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 0.25),
                   0.0);
  const OracleResult res = bqp_exhaustive(inst, true);
  CHECK(res.best_objective == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(res.best_psi == IndicatorVector({1, 0}));
  REQUIRE(res.full_table.has_value());
  REQUIRE(res.full_table->size() == 4);
  // Enumeration order is lexicographic: 00, 01, 10, 11.
  CHECK((*res.full_table)[0].second == doctest::Approx(0.0));
  CHECK((*res.full_table)[1].second == doctest::Approx(0.5).epsilon(1e-12));
  CHECK((*res.full_table)[2].second == doctest::Approx(-1.0));
  CHECK((*res.full_table)[3].second == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("enumeration tie-break is lexicographic") {
  BqpInstance zero(Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Zero(3), 0.0);
  const OracleResult res = bqp_exhaustive(zero);
  CHECK(res.best_objective == 0.0);
  CHECK(res.best_psi == IndicatorVector::zeros(3));
}

TEST_CASE("a dominant linear term selects the full support") {
  BqpInstance inst(Eigen::MatrixXd::Identity(3, 3),
                   Eigen::VectorXd::Constant(3, 100.0), 0.0);
  const OracleResult res = bqp_exhaustive(inst);
  CHECK(res.best_psi == IndicatorVector::ones(3));
}

TEST_CASE("enumeration refuses oversized problems") {
  BqpInstance big(Eigen::MatrixXd::Identity(21, 21),
                  Eigen::VectorXd::Zero(21), 0.0);
  CHECK_THROWS_AS(bqp_exhaustive(big), std::invalid_argument);
}

TEST_CASE("finite differences recover simple gradients") {
  const Eigen::VectorXd u = Eigen::Vector3d(0.3, -1.2, 2.0);

  const Eigen::VectorXd g_linear =
      fd_gradient([](const Eigen::VectorXd& p) { return p.sum(); }, u);
  CHECK(g_linear.isApprox(Eigen::VectorXd::Ones(3), 1e-9));

  // Central differences are exact for quadratics up to rounding.
  Eigen::MatrixXd Q(3, 3);
  Q << 2, 1, 0, 1, 3, 1, 0, 1, 4;
  const Eigen::VectorXd g_quad = fd_gradient(
      [&](const Eigen::VectorXd& p) { return p.dot(Q * p); }, u);
  CHECK((g_quad - 2.0 * Q * u).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("enumeration lower-bounds every rounded solution") {
  Rng rng(109);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 5);
    std::vector<SimplexVector> thetas;
    std::vector<double> ps;
    for (int k = 0; k < d + 2; ++k) {
      thetas.push_back(test::random_simplex(d, rng));
      ps.push_back(rng.next_uniform());
    }
    const BqpInstance inst = build_bqp(thetas, ps);
    const OracleResult res = bqp_exhaustive(inst, true);
    for (const auto& [psi, obj] : *res.full_table) {
      CHECK(res.best_objective <= obj + 1e-15);
    }
  }
}
