#pragma once

// Sparse measure recovery over a candidate grid of parameters:
//
//   regularized:    min_mu  1/2 sum_i |f_mu(x_i) - t_i|^2 + lambda |mu|_TV
//   interpolation:  min_mu  |mu|_TV   s.t.  f_mu(x_i) = t_i   (to a residual tolerance)
//
// Both use fully-corrective conditional gradient. The linear minimization
// oracle ranges over the extreme points y*delta_theta of the unit TV ball,
// so every iterate is a finite sum of atoms.

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rkbs/basis.hpp"
#include "rkbs/measure.hpp"

namespace rkbs {

struct LayerConstraintSet {
  std::vector<Eigen::VectorXd> inputs;  // x_i, i = 1..N
  Eigen::MatrixXd targets;              // N x m, row i is t_i
  BasisFunction basis;

  std::size_t num_samples() const noexcept { return inputs.size(); }
  std::size_t target_dim() const noexcept { return static_cast<std::size_t>(targets.cols()); }
  void validate() const;
};

struct GridRefinement {
  bool enabled = false;
  std::size_t steps = 0;
  double shrink = 0.5;
};

class CandidateGrid {
 public:
  /// Indices begin, begin+1, ..., end-1.
  static CandidateGrid discrete(std::uint64_t begin, std::uint64_t end);
  /// Axis-aligned box with counts[a] equispaced points per axis (the midpoint
  /// when counts[a] == 1). Points are enumerated lexicographically.
  static CandidateGrid euclidean(Eigen::VectorXd lower, Eigen::VectorXd upper,
                                 std::vector<std::size_t> counts);

  CandidateGrid& with_refinement(GridRefinement r);

  bool is_discrete() const noexcept { return discrete_; }
  std::size_t size() const noexcept { return size_; }
  ParameterPoint point(std::size_t i) const;
  const GridRefinement& refinement() const noexcept { return refine_; }
  /// Grid spacing per axis (euclidean only).
  const Eigen::VectorXd& spacing() const noexcept { return spacing_; }

 private:
  CandidateGrid() = default;
  bool discrete_ = true;
  std::uint64_t begin_ = 0;
  std::size_t size_ = 0;
  Eigen::VectorXd lower_, upper_, spacing_;
  std::vector<std::size_t> counts_;
  GridRefinement refine_;
};

struct HomotopyConfig {
  double lambda_start = 0.0;  // <= 0: LMO score at the zero measure
  double decay = 0.5;
  double min_lambda = 1e-10;
};

struct SolverConfig {
  double lambda = 1.0;
  std::size_t max_atoms = 1000;
  std::size_t max_outer_iters = 1000;
  std::size_t fc_inner_iters = 500;
  double tolerance_residual = 1e-6;
  double tolerance_gap = 1e-3;
  HomotopyConfig homotopy;

  void validate() const;
};

/// Feature matrix F (N x K) with F(i, k) = rho(x_i, theta_k).
Eigen::MatrixXd feature_matrix(const LayerConstraintSet& c, std::span<const ParameterPoint> points);

/// (f_mu(x_i))_i as an N x m matrix.
Eigen::MatrixXd evaluate_on_constraints(const AtomicVectorMeasure& mu, const LayerConstraintSet& c);

/// max_i |f_mu(x_i) - t_i|_2
double max_residual(const AtomicVectorMeasure& mu, const LayerConstraintSet& c);

struct LmoResult {
  ParameterPoint theta;
  Eigen::VectorXd direction;  // unit vector y*
  double score = 0.0;         // |sum_i r_i rho(x_i, theta*)|_2
};

/// argmax over the grid of |sum_i r_i rho(x_i, theta)|_2; ties go to the
/// earliest grid point. `residuals` is N x m.
LmoResult lmo(const Eigen::MatrixXd& residuals, const LayerConstraintSet& c,
              const CandidateGrid& grid);

/// Proximal operator of tau*|.|_2 (block soft-thresholding).
Eigen::VectorXd prox_group(const Eigen::VectorXd& w, double tau);

struct SolverTraceRow {
  std::size_t iter;
  double lambda;
  double objective;
  double score;
  std::size_t atoms;
  double residual;
};

struct RegularizedSolution {
  AtomicVectorMeasure measure;
  double objective = 0.0;
  double dual_gap = 0.0;
  double max_score = 0.0;  // final LMO score
  bool converged = false;
  std::vector<SolverTraceRow> trace;
};

/// Fully-corrective conditional gradient for the regularized problem.
/// `warm_start` atoms seed the active set. Throws Errc::AtomBudgetExceeded
/// when cfg.max_atoms would be exceeded before the gap closes.
RegularizedSolution solve_regularized(const LayerConstraintSet& c, const CandidateGrid& grid,
                                      const SolverConfig& cfg,
                                      const AtomicVectorMeasure* warm_start = nullptr);

struct InterpolationSolution {
  AtomicVectorMeasure measure;
  double tv = 0.0;
  double residual = 0.0;
  double final_lambda = 0.0;
  std::vector<SolverTraceRow> trace;
};

/// Lambda-homotopy on solve_regularized until max_i residual <=
/// cfg.tolerance_residual, followed by reduce_support to at most N*m atoms.
/// Throws Errc::Infeasible when lambda drops below the homotopy minimum.
InterpolationSolution solve_interpolation(const LayerConstraintSet& c, const CandidateGrid& grid,
                                          const SolverConfig& cfg);

/// Removes atoms without changing (f_mu(x_i))_i, up to rounding, and without
/// increasing TV, until at most `max_atoms` remain or the atoms' images
/// u_k = rho(x_., theta_k) w_k^T / |w_k| are linearly independent. Each
/// step moves the coefficients c_k = |w_k| along a null vector of [u_k]
/// whose entries sum to <= 0 until one of them vanishes.
AtomicVectorMeasure reduce_support(const AtomicVectorMeasure& mu, const LayerConstraintSet& c,
                                   std::size_t max_atoms);

}  // namespace rkbs
