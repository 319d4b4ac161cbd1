#include <doctest.h>

#include <Eigen/SVD>
#include <random>

#include "helpers.hpp"
#include "rkbs/error.hpp"
#include "rkbs/measure.hpp"

using namespace rkbs;
using testutil::idx;
using testutil::vec;

TEST_CASE("tv_norm") {
  CHECK(tv_norm(AtomicVectorMeasure(2)) == 0.0);

  AtomicVectorMeasure one(2);
  one.add(idx(3), vec({3, 4}));
  CHECK(tv_norm(one) == 5.0);

  AtomicVectorMeasure two(2);
  two.add(idx(0), vec({1, 0}));
  two.add(idx(1), vec({0, -2}));
  CHECK(tv_norm(two) == 3.0);
}

TEST_CASE("atoms stay sorted and merged") {
  AtomicVectorMeasure mu(1);
  mu.add(idx(4), vec({1}));
  mu.add(idx(1), vec({2}));
  mu.add(idx(4), vec({-1}));
  REQUIRE(mu.size() == 1);
  CHECK(mu.atoms()[0].location.index() == 1);

  AtomicVectorMeasure e(1);
  e.add(ParameterPoint::euclidean(vec({0.5, 1.0})), vec({1}));
  e.add(ParameterPoint::euclidean(vec({0.5, 1.0 + 1e-13})), vec({1}));
  e.add(ParameterPoint::euclidean(vec({0.5, 1.0 + 1e-9})), vec({1}));
  REQUIRE(e.size() == 2);
  CHECK(e.atoms()[0].weight[0] == 2.0);

  CHECK_THROWS_AS(mu.add(idx(0), vec({1, 2})), Error);
  CHECK_THROWS_AS(mu.add(ParameterPoint::euclidean(vec({1.0})), vec({1})), Error);
  CHECK_THROWS_AS(ParameterPoint::discrete(-1), Error);
}

TEST_CASE("linear_combine") {
  std::mt19937_64 rng(1);
  const auto mu = testutil::random_measure(rng, 2, 4);
  const auto nu = testutil::random_measure(rng, 2, 3);

  const auto same = linear_combine(1.0, mu, 0.0, nu);
  REQUIRE(same.size() == mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) CHECK(same.atoms()[k].weight == mu.atoms()[k].weight);

  CHECK(linear_combine(1.0, mu, -1.0, mu).empty());

  AtomicVectorMeasure a(2), b(2);
  a.add(idx(0), vec({2, 0}));
  b.add(idx(0), vec({0, 2}));
  const auto c = linear_combine(0.5, a, 0.5, b);
  REQUIRE(c.size() == 1);
  CHECK(c.atoms()[0].weight == vec({1, 1}));

  CHECK_THROWS_AS(linear_combine(1.0, AtomicVectorMeasure(1), 1.0, AtomicVectorMeasure(2)), Error);
}

TEST_CASE("apply_linear_to_weights") {
  AtomicVectorMeasure mu(2);
  mu.add(idx(2), vec({3, 4}));
  CHECK(apply_linear_to_weights(mu, Eigen::MatrixXd::Identity(2, 2)).atoms()[0].weight == vec({3, 4}));
  CHECK(apply_linear_to_weights(mu, Eigen::MatrixXd::Zero(2, 2)).empty());
  Eigen::MatrixXd first(1, 2);
  first << 1, 0;
  const auto proj = apply_linear_to_weights(mu, first);
  CHECK(proj.target_dim() == 1);
  CHECK(tv_norm(proj) == 3.0);
  CHECK_THROWS_AS(apply_linear_to_weights(mu, Eigen::MatrixXd::Identity(3, 3)), Error);
}

TEST_CASE("pushforward") {
  AtomicVectorMeasure mu(1);
  mu.add(idx(1), vec({1}));
  mu.add(idx(2), vec({2}));
  const auto id = pushforward(mu, [](const ParameterPoint& p) { return p; });
  CHECK(id.size() == 2);
  const auto collapsed = pushforward(mu, [](const ParameterPoint&) { return idx(0); });
  REQUIRE(collapsed.size() == 1);
  CHECK(collapsed.atoms()[0].location.index() == 0);
  CHECK(collapsed.atoms()[0].weight[0] == 3.0);

  AtomicVectorMeasure e(1);
  e.add(ParameterPoint::euclidean(vec({1, 0})), vec({5}));
  const auto scaled = pushforward(e, [](const ParameterPoint& p) { return ParameterPoint::euclidean(2.0 * p.coords()); });
  CHECK(scaled.atoms()[0].location.coords() == vec({2, 0}));
  CHECK(scaled.atoms()[0].weight[0] == 5.0);
}

TEST_CASE("integrate") {
  AtomicVectorMeasure mu(1);
  mu.add(idx(1), vec({2}));
  mu.add(idx(3), vec({4}));
  CHECK(integrate(mu, [](const ParameterPoint&) { return 1.0; })[0] == 6.0);
  CHECK(integrate(mu, [](const ParameterPoint&) { return 0.0; })[0] == 0.0);
  CHECK(integrate(mu, [](const ParameterPoint& p) { return double(p.index()); })[0] == 14.0);
}

TEST_CASE("extreme_point_check examples") {
  AtomicVectorMeasure single(2);
  single.add(idx(5), vec({0.6, 0.8}));
  CHECK(std::holds_alternative<Extreme>(extreme_point_check(single)));

  AtomicVectorMeasure e1(2);
  e1.add(idx(0), vec({1, 0}));
  CHECK(std::holds_alternative<Extreme>(extreme_point_check(e1)));

  AtomicVectorMeasure split(2);
  split.add(idx(0), vec({0.5, 0}));
  split.add(idx(1), vec({0, 0.5}));
  const auto r = extreme_point_check(split);
  REQUIRE(std::holds_alternative<Decomposition>(r));
  const auto& d = std::get<Decomposition>(r);
  CHECK(d.t == 0.5);
  REQUIRE(d.first.size() == 1);
  REQUIRE(d.second.size() == 1);
  CHECK(d.first.atoms()[0].location.index() == 0);
  CHECK(d.first.atoms()[0].weight == vec({1, 0}));
  CHECK(d.second.atoms()[0].location.index() == 1);
  CHECK(d.second.atoms()[0].weight == vec({0, 1}));

  AtomicVectorMeasure big(1);
  big.add(idx(0), vec({2}));
  try {
    extreme_point_check(big);
    FAIL("expected NotUnitBall");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotUnitBall);
  }
}

TEST_CASE("norm properties on random measures") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> count(0, 6), dim(1, 3);
  std::uniform_real_distribution<double> scalar(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = dim(rng);
    const auto mu = testutil::random_measure(rng, m, count(rng), 10);
    const auto nu = testutil::random_measure(rng, m, count(rng), 10);
    CHECK(tv_norm(linear_combine(1, mu, 1, nu)) <= tv_norm(mu) + tv_norm(nu) + 1e-12);

    const double a = scalar(rng);
    CHECK(tv_norm(linear_combine(a, mu, 0, mu)) == doctest::Approx(std::abs(a) * tv_norm(mu)).epsilon(1e-14));

    Eigen::MatrixXd P = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(P).singularValues()[0];
    if (s > 0) P /= s;
    CHECK(tv_norm(apply_linear_to_weights(mu, P)) <= tv_norm(mu) + 1e-12);

    const auto shifted = pushforward(mu, [](const ParameterPoint& p) { return idx(std::int64_t(p.index()) + 7); });
    CHECK(tv_norm(shifted) == doctest::Approx(tv_norm(mu)).epsilon(1e-15));
    const auto folded = pushforward(mu, [](const ParameterPoint& p) { return idx(std::int64_t(p.index() % 3)); });
    CHECK(tv_norm(folded) <= tv_norm(mu) + 1e-12);
  }
}
