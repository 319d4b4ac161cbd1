#pragma once

// Slow reference solvers for tiny instances. They share nothing with the
// sparse solver beyond basis evaluation and are meant for tests.

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "rkbs/basis.hpp"
#include "rkbs/measure.hpp"
#include "rkbs/network.hpp"
#include "rkbs/trainer.hpp"

namespace rkbs::oracle {

inline constexpr std::size_t kMaxGrid = 12;
inline constexpr std::size_t kMaxSamples = 4;
inline constexpr std::size_t kMaxTargetDim = 2;

struct TinyInstance {
  std::vector<Eigen::VectorXd> inputs;  // N
  Eigen::MatrixXd targets;              // N x m
  BasisFunction basis;
  std::vector<ParameterPoint> grid;
  std::optional<double> lambda;

  /// Throws Errc::CapExceeded beyond the size caps.
  void validate() const;
  /// F(i, g) = rho(x_i, grid[g])
  Eigen::MatrixXd features() const;
};

struct RegularizedOptimum {
  AtomicVectorMeasure measure;
  double objective = 0.0;
  double dual_gap = 0.0;
  double max_score = 0.0;
  std::size_t iterations = 0;
  bool certified = false;  // max_score <= lambda (1 + 1e-8) and small gap
};

/// Proximal gradient on a dense weight row for every grid point, step 1/L
/// with L the squared spectral norm of the feature matrix.
RegularizedOptimum brute_force_regularized(const TinyInstance& inst,
                                           std::size_t max_iters = 1'000'000);

struct InterpolationOptimum {
  double tv = 0.0;
  std::vector<ParameterPoint> support;
  AtomicVectorMeasure measure;
};

/// min TV subject to exact interpolation, over every support of size
/// min(N*m, |grid|); each support is solved by iteratively reweighted least
/// squares. Throws Errc::Infeasible when no support interpolates within 1e-8.
InterpolationOptimum enumerate_supports(const TinyInstance& inst);

/// Central differences of the empirical risk with respect to every weight
/// entry, laid out like grad_weights.
WeightGradients finite_difference_gradient(const DeepMeasureNetwork& net, const Dataset& data,
                                           const LossFunction& loss, double h = 1e-5);

/// Exhaustive LMO scan: index and score of the best grid point for the
/// residual matrix R (N x m). Ties go to the smallest index.
std::pair<std::size_t, double> lmo_scan(const TinyInstance& inst, const Eigen::MatrixXd& R);

/// Seeded tiny fixture: discrete neural basis (relu or tanh) over the grid
/// {0..G-1}, G in 2..8, N in 1..3, m in 1..2, lambda in [0.5, 1.5). Draws
/// are repeated until the feature matrix has full row rank, so exact
/// interpolation is feasible.
TinyInstance random_instance(std::uint64_t seed);

struct BatchSummary {
  std::size_t instances = 0;
  std::size_t rejected = 0;  // fixtures whose oracle certificate failed
  double worst_objective_diff = 0.0;
  double worst_tv_rel_diff = 0.0;
  std::size_t support_violations = 0;
  std::size_t failures = 0;  // instances outside the tolerances

  bool ok() const { return failures == 0 && support_violations == 0; }
};

/// Solver vs oracle on `count` certified fixtures drawn from seeds
/// base_seed, base_seed + 1, ...; objectives must agree within 1e-6
/// absolute and interpolation TVs within 1e-4 relative.
BatchSummary compare_batch(std::size_t count, std::uint64_t base_seed);

}  // namespace rkbs::oracle
