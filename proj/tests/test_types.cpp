#include <doctest.h>

#include "km/types.hpp"
#include "test_util.hpp"

using namespace km;

TEST_CASE("simplex vector accepts and renormalizes near-simplex entries") {
  SimplexVector v({0.4, 0.2, 0.1, 0.3});
  CHECK(v.dim() == 4);
  CHECK(v.vec().sum() == doctest::Approx(1.0).epsilon(1e-15));

  Eigen::VectorXd drifted(3);
  drifted << 0.5, 0.25, 0.25 + 5e-10;
  SimplexVector w(drifted);
  CHECK(w.vec().sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("simplex vector rejects bad input") {
  CHECK_THROWS_AS(SimplexVector({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(SimplexVector({1.2, -0.2}), std::invalid_argument);
  CHECK_THROWS_AS(SimplexVector(Eigen::VectorXd::Ones(1)),
                  std::invalid_argument);
  // Tiny negatives from rounding clamp to zero.
  Eigen::VectorXd v(2);
  v << 1.0 + 1e-13, -1e-13;
  SimplexVector s(v);
  CHECK(s[1] == 0.0);
}

TEST_CASE("indicator vector is exactly binary") {
  IndicatorVector psi({1, 0, 1, 1});
  CHECK(psi.dim() == 4);
  CHECK(psi.support() == std::vector<int>{0, 2, 3});
  CHECK(IndicatorVector::ones(3).support().size() == 3);
  CHECK(IndicatorVector::zeros(3).support().empty());

  Eigen::VectorXd v(2);
  v << 1.0, 0.5;
  CHECK_THROWS_AS(IndicatorVector{v}, std::invalid_argument);
  CHECK_THROWS_AS(IndicatorVector({2, 0}), std::invalid_argument);
}

TEST_CASE("rating dataset validates and maps ids") {
  std::vector<RatingDataset::RawTriple> raw = {
      {196, 242, 0.6, Split::Train},
      {196, 302, 0.8, Split::Test},
      {22, 242, 1.0, Split::Train},
  };
  RatingDataset data(raw, 5.0);
  CHECK(data.num_users() == 2);
  CHECK(data.num_items() == 2);
  CHECK(data.raw_user_id(0) == 196);
  CHECK(data.dense_user(22) == 1);
  CHECK(data.dense_item(999) == -1);
  CHECK(data.train_count() == 2);
  CHECK(data.test_count() == 1);

  raw.push_back({196, 242, 0.2, Split::Train});
  CHECK_THROWS_AS(RatingDataset(raw, 5.0), std::invalid_argument);

  CHECK_THROWS_AS(RatingDataset({{1, 1, 1.5, Split::Train}}, 5.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(RatingDataset({{1, 1, 0.5, Split::Train}}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("dataset split relabeling keeps triples") {
  RatingDataset data({{1, 1, 0.2, Split::Train}, {1, 2, 0.4, Split::Train}},
                     1.0);
  auto relabeled = data.with_splits({Split::Test, Split::Train});
  CHECK(relabeled.triples()[0].split == Split::Test);
  CHECK(relabeled.triples()[1].split == Split::Train);
  CHECK(relabeled.triples()[0].p == 0.2);
  CHECK_THROWS_AS(data.with_splits({Split::Test}), std::invalid_argument);
}

TEST_CASE("km params validate shared dimension") {
  KmParams params;
  params.dim = 4;
  params.theta.emplace(0, SimplexVector({0.4, 0.2, 0.1, 0.3}));
  params.psi.emplace(0, IndicatorVector({1, 0, 1, 1}));
  CHECK_NOTHROW(params.validate());
  params.psi.emplace(1, IndicatorVector({1, 0}));
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}
