#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "rkbs/error.hpp"
#include "rkbs/oracle.hpp"
#include "rkbs/sparse_solver.hpp"

using namespace rkbs;
using testutil::idx;
using testutil::vec;

namespace {

oracle::TinyInstance affine_instance(std::vector<Eigen::VectorXd> xs, Eigen::MatrixXd t, std::size_t grid_end,
                                     double lambda) {
  oracle::TinyInstance inst{std::move(xs), std::move(t), InputAffine{0}, {}, lambda};
  inst.basis = InputAffine{static_cast<std::size_t>(inst.inputs.front().size())};
  for (std::size_t g = 0; g < grid_end; ++g) inst.grid.push_back(idx(static_cast<std::int64_t>(g)));
  return inst;
}

}  // namespace

TEST_CASE("brute_force_regularized closed forms") {
  SUBCASE("dominant lambda") {
    Eigen::MatrixXd t(2, 1);
    t << 1, -1;
    auto inst = affine_instance({vec({1}), vec({2})}, t, 2, 100.0);
    const auto r = oracle::brute_force_regularized(inst);
    CHECK(r.certified);
    CHECK(r.measure.empty());
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("single atom grid") {
    Eigen::MatrixXd t(1, 2);
    t << 3, 4;
    auto inst = affine_instance({vec({0.7})}, t, 1, 2.5);
    const auto r = oracle::brute_force_regularized(inst);
    CHECK(r.certified);
    REQUIRE(r.measure.size() == 1);
    CHECK((r.measure.atoms()[0].weight - prox_group(vec({3, 4}), 2.5)).norm() < 1e-10);
  }
  SUBCASE("deterministic") {
    const auto inst = oracle::random_instance(5);
    const auto a = oracle::brute_force_regularized(inst), b = oracle::brute_force_regularized(inst);
    CHECK(a.objective == b.objective);
    CHECK(a.iterations == b.iterations);
  }
}

TEST_CASE("enumerate_supports closed forms") {
  SUBCASE("zero targets") {
    auto inst = affine_instance({vec({1, 2})}, Eigen::MatrixXd::Zero(1, 1), 3, 1.0);
    const auto r = oracle::enumerate_supports(inst);
    CHECK(r.tv == 0.0);
    CHECK(r.support.empty());
  }
  SUBCASE("one sample") {
    auto inst = affine_instance({vec({1, -4})}, Eigen::MatrixXd::Constant(1, 1, 2.0), 3, 1.0);
    const auto r = oracle::enumerate_supports(inst);
    CHECK(r.tv == doctest::Approx(0.5).epsilon(1e-10));
  }
  SUBCASE("infeasible") {
    auto inst = affine_instance({vec({0})}, Eigen::MatrixXd::Constant(1, 1, 1.0), 1, 1.0);
    inst.grid = {idx(1)};
    CHECK_THROWS_AS(oracle::enumerate_supports(inst), Error);
  }
}

TEST_CASE("size caps") {
  auto inst = affine_instance({vec({1})}, Eigen::MatrixXd::Zero(1, 1), 2, 1.0);
  for (int g = 0; g < 20; ++g) inst.grid.push_back(idx(1));
  try {
    inst.validate();
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CapExceeded);
  }
}

TEST_CASE("finite differences") {
  SUBCASE("linear model is exact to O(h^2)") {
    AtomicVectorMeasure mu(1);
    mu.add(idx(0), vec({0.5}));
    mu.add(idx(1), vec({-1.5}));
    const DeepMeasureNetwork net({{InputAffine{1}, mu, 1}});
    Dataset data{{vec({2.0}), vec({-1.0})}, {vec({1.0}), vec({0.0})}};
    const auto fd = oracle::finite_difference_gradient(net, data, LossFunction::squared());
    // d/dw0 = mean(r), d/dw1 = mean(r x)
    double g0 = 0, g1 = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      const double r = 0.5 - 1.5 * data.x[i][0] - data.y[i][0];
      g0 += r / 2;
      g1 += r * data.x[i][0] / 2;
    }
    CHECK(fd[0][0][0] == doctest::Approx(g0).epsilon(1e-9));
    CHECK(fd[0][1][0] == doctest::Approx(g1).epsilon(1e-9));
  }
  SUBCASE("zero risk function") {
    AtomicVectorMeasure mu(1);
    mu.add(idx(0), vec({1.0}));
    const DeepMeasureNetwork net({{InputAffine{1}, mu, 1}});
    Dataset data{{vec({2.0})}, {vec({1.0})}};
    const auto fd = oracle::finite_difference_gradient(net, data, LossFunction::squared());
    CHECK(std::abs(fd[0][0][0]) < 1e-10);
  }
}

TEST_CASE("random instances are feasible and reproducible") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto a = oracle::random_instance(seed), b = oracle::random_instance(seed);
    CHECK(a.targets == b.targets);
    CHECK(a.grid.size() >= 2);
    CHECK(a.grid.size() <= 8);
    CHECK(a.inputs.size() <= 3);
    CHECK_NOTHROW(a.validate());
    CHECK_NOTHROW(oracle::enumerate_supports(a));
  }
}

TEST_CASE("batch comparison") {
  const auto s = oracle::compare_batch(20, 500);
  CHECK(s.instances == 20);
  CHECK(s.ok());
  CHECK(s.worst_objective_diff <= 1e-6);
  CHECK(s.worst_tv_rel_diff <= 1e-4);
}
