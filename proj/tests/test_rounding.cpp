#include <doctest.h>

#include <cmath>

#include "km/oracles.hpp"
#include "km/rounding.hpp"
#include "test_util.hpp"

using namespace km;

TEST_CASE("factorization scales eigenpairs without a cholesky") {
  PositivePairs pairs;
  pairs.values = Eigen::VectorXd::Constant(1, 1.0);
  pairs.vectors = Eigen::MatrixXd::Zero(3, 1);
  pairs.vectors(0, 0) = 1.0;
  const FactorizedX fac = factorize(pairs, 4.0);
  CHECK(fac.rank == 1);
  CHECK(fac.L(0, 0) == doctest::Approx(2.0));
  CHECK(fac.L(1, 0) == 0.0);

  Rng rng(97);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + static_cast<int>(rng.next_u64() % 6);
    const Eigen::MatrixXd M = test::random_symmetric(n, rng);
    const SymmetricSpectrum sp = exact_evd(M * M.transpose());
    PositivePairs pos;
    std::vector<int> keep;
    for (int k = 0; k < n; ++k) {
      if (sp.eigenvalues[k] > 1e-10) keep.push_back(k);
    }
    pos.values.resize(keep.size());
    pos.vectors.resize(n, keep.size());
    for (size_t k = 0; k < keep.size(); ++k) {
      pos.values[static_cast<int>(k)] = sp.eigenvalues[keep[k]];
      pos.vectors.col(static_cast<int>(k)) = sp.eigenvectors.col(keep[k]);
    }
    const double gamma = 1.0 + 10.0 * rng.next_uniform();
    const FactorizedX fac2 = factorize(pos, gamma);
    Eigen::MatrixXd target = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < pos.values.size(); ++k) {
      target += gamma * pos.values[k] * pos.vectors.col(k) *
                pos.vectors.col(k).transpose();
    }
    CHECK((fac2.L * fac2.L.transpose() - target).cwiseAbs().maxCoeff() <= 1e-8);
  }

  PositivePairs bad;
  bad.values = Eigen::VectorXd::Constant(1, -1.0);
  bad.vectors = Eigen::MatrixXd::Identity(2, 1);
  CHECK_THROWS_AS(factorize(bad, 1.0), std::invalid_argument);
}

TEST_CASE("rank-one factors recover their sign vector exactly") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 8);
    Eigen::VectorXd x(d + 1);
    for (int k = 0; k <= d; ++k) x[k] = rng.next_u64() & 1 ? 1.0 : -1.0;
    // X* = x x' has the single positive eigenpair (D+1, x/||x||).
    PositivePairs pairs;
    pairs.values = Eigen::VectorXd::Constant(1, static_cast<double>(d + 1));
    pairs.vectors = x.normalized();
    const FactorizedX fac = factorize(pairs, 1.0);

    LiftedBqp lifted = lift(BqpInstance(Eigen::MatrixXd::Zero(d, d),
                                        Eigen::VectorXd::Zero(d), 0.0));
    const IndicatorVector psi = round_bqp(lifted, fac, {5, trial + 1u});
    for (int j = 0; j < d; ++j) {
      CHECK(psi.bit(j) == (x[0] * x[j + 1] > 0.0));
    }
  }
}

TEST_CASE("end-to-end rounding finds the enumerated minimizer") {
  BqpInstance inst(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, 0.25),
                   0.0);
  const LiftedBqp lifted = lift(inst);
  DualConfig cfg;
  const DualState st = solve_enhanced_gd(lifted, cfg, Eigen::VectorXd::Ones(3));
  const PositivePairs pairs = positive_eigenpairs(lifted, st.u, EigMode::Exact);
  const IndicatorVector psi =
      round_bqp(lifted, factorize(pairs, cfg.gamma), {100, 7});
  CHECK(psi.bit(0) == 1);
  CHECK(psi.bit(1) == 0);
  CHECK(inst.objective(psi) == doctest::Approx(-1.0).epsilon(1e-12));
  const OracleResult oracle = bqp_exhaustive(inst);
  CHECK(oracle.best_objective == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(psi == oracle.best_psi);
}

TEST_CASE("more randomizations never hurt under a shared stream") {
  Rng rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 8;
    std::vector<SimplexVector> thetas;
    std::vector<double> ps;
    for (int k = 0; k < 12; ++k) {
      thetas.push_back(test::random_simplex(d, rng));
      ps.push_back(rng.next_uniform());
    }
    const BqpInstance inst = build_bqp(thetas, ps);
    const LiftedBqp lifted = lift(inst);
    DualConfig cfg;
    const DualState st =
        solve_enhanced_gd(lifted, cfg, Eigen::VectorXd::Ones(d + 1));
    const PositivePairs pairs =
        positive_eigenpairs(lifted, st.u, EigMode::Exact);
    const FactorizedX fac = factorize(pairs, cfg.gamma);
    const uint64_t seed = 1000 + trial;
    const IndicatorVector one = round_bqp(lifted, fac, {1, seed});
    const IndicatorVector hundred = round_bqp(lifted, fac, {100, seed});
    CHECK(inst.objective(hundred) <= inst.objective(one) + 1e-12);

    // Determinism under a fixed seed.
    CHECK(round_bqp(lifted, fac, {100, seed}) == hundred);
  }
}

TEST_CASE("homogenized and native objectives rank candidates identically") {
  Rng rng(107);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 6);
    std::vector<SimplexVector> thetas;
    std::vector<double> ps;
    for (int k = 0; k < d + 3; ++k) {
      thetas.push_back(test::random_simplex(d, rng));
      ps.push_back(rng.next_uniform());
    }
    const BqpInstance inst = build_bqp(thetas, ps);
    const LiftedBqp lifted = lift(inst);
    // Random +-1 candidates, scored both ways after recovery.
    int best_homogenized = -1, best_native = -1;
    double score_h = 1e300, score_n = 1e300;
    for (int c = 0; c < 40; ++c) {
      Eigen::VectorXd x_tilde(d + 1);
      for (int j = 0; j <= d; ++j) {
        x_tilde[j] = rng.next_u64() & 1 ? 1.0 : -1.0;
      }
      const double sh = lifted.homogenized_objective(x_tilde);
      std::vector<uint8_t> bits(d);
      for (int j = 0; j < d; ++j) {
        bits[j] = x_tilde[0] * x_tilde[j + 1] > 0.0 ? 1 : 0;
      }
      const double sn = inst.objective(IndicatorVector(bits));
      if (sh < score_h) {
        score_h = sh;
        best_homogenized = c;
      }
      if (sn < score_n) {
        score_n = sn;
        best_native = c;
      }
      CHECK(sh + lifted.const_offset + inst.rho ==
            doctest::Approx(sn).epsilon(1e-10));
    }
    CHECK(best_homogenized == best_native);
  }
}

TEST_CASE("zero samples discretize to plus one") {
  // A factor with zero rows pins those sample coordinates at exactly 0;
  // the discretization must map them to +1 deterministically.
  PositivePairs pairs;
  pairs.values = Eigen::VectorXd::Constant(1, 4.0);
  pairs.vectors = Eigen::MatrixXd::Zero(3, 1);
  pairs.vectors(1, 0) = 1.0;  // rows 0 and 2 stay zero
  const FactorizedX fac = factorize(pairs, 1.0);
  const LiftedBqp lifted = lift(BqpInstance(Eigen::MatrixXd::Zero(2, 2),
                                            Eigen::VectorXd::Zero(2), 0.0));
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const IndicatorVector psi = round_bqp(lifted, fac, {3, seed});
    // x(1) = sign(0) = +1, so psi(2) = (x(1)*x(3) + 1)/2 with x(3) = +1.
    CHECK(psi.bit(1) == 1);
  }
}

TEST_CASE("degenerate factors still produce feasible output") {
  const LiftedBqp lifted = lift(BqpInstance(Eigen::MatrixXd::Identity(3, 3),
                                            Eigen::VectorXd::Zero(3), 0.0));
  FactorizedX fac;
  fac.rank = 0;
  const IndicatorVector psi = round_bqp(lifted, fac, {50, 11});
  CHECK(psi.dim() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK((psi.bit(j) == 0 || psi.bit(j) == 1));
  }
  // Identical seeds agree.
  CHECK(round_bqp(lifted, fac, {50, 11}) == psi);
}
