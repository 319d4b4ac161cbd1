#pragma once

// Layer-wise sparsification of a trained deep measure network. Layers are
// processed from the output (l = L) down to the input (l = 0). Layer l is
// refit as a TV-minimal interpolant of the hidden representations
// x^{(l)} -> x^{(l+1)}, restricted to the coordinates the already sparsified
// layer l+1 reads. The result has at most N * d_{l+1} atoms per layer and is
// exported as a finite network.

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "rkbs/network.hpp"
#include "rkbs/sparse_solver.hpp"
#include "rkbs/trainer.hpp"

namespace rkbs {

/// reps[l][i] = x_i^{(l)}, l = 0..L+1.
using Representations = std::vector<std::vector<Eigen::VectorXd>>;

Representations hidden_representations(const DeepMeasureNetwork& net,
                                       const std::vector<Eigen::VectorXd>& inputs);

/// Coordinates of x^{(l+1)} read by layer l+1 (0-based, ascending). For the
/// output layer every coordinate is kept.
struct Projection {
  std::vector<std::size_t> selected;
  std::size_t ambient_dim = 1;  // max(selected) + 1, at least 1

  /// P as a |selected| x source_dim matrix.
  Eigen::MatrixXd matrix(std::size_t source_dim) const;
  Eigen::VectorXd compact(const Eigen::VectorXd& v) const;
  /// Inverse of compact: zeros everywhere except the selected coordinates.
  Eigen::VectorXd embed(const Eigen::VectorXd& compact_v) const;
};

/// Projection induced by layer l+1 of `net` onto the output of layer l.
/// Throws Errc::UnsupportedBasis if layer l+1 is not discrete.
Projection project_layer(const DeepMeasureNetwork& net, std::size_t l);

/// Zeroes the unselected coordinates of every weight and truncates the
/// target dimension to p.ambient_dim. TV does not increase.
AtomicVectorMeasure project_measure(const AtomicVectorMeasure& mu, const Projection& p);

/// Discrete index grid of every admissible atom of `layer`.
CandidateGrid default_grid(const LayerMeasure& layer);

struct PipelineConfig {
  SolverConfig solver;
  double lambda = 1.0;
  LossFunction loss = LossFunction::squared();
  double objective_tolerance = 1e-6;
  double tv_tolerance = 1e-9;
  std::size_t threads = 1;
};

struct LayerRefit {
  LayerMeasure layer;
  std::size_t targets = 0;    // |S|, coordinates interpolated
  double residual = 0.0;      // max_i |f(x_i^{(l)}) - x_i^{(l+1)}[S]|
  double tv_reduced = 0.0;    // TV of the projected, support-reduced current layer
  std::string source;         // "solver" or "reduced"
  std::string note;           // solver error when it was not usable
  std::vector<SolverTraceRow> trace;
};

/// Refits layer l of `net` against `reps` (computed from `net`). Two
/// feasible candidates are compared: the interpolation solver's solution and
/// the current layer after projection and support reduction. The one with
/// the smaller regularized objective on the spliced network wins, provided
/// its TV does not exceed the current layer's.
LayerRefit sparsify_layer(std::size_t l, const Representations& reps, const DeepMeasureNetwork& net,
                          const CandidateGrid& grid, const Dataset& data, const PipelineConfig& cfg);

/// Replaces layer l and shrinks the input dimension of layer l+1 to match.
DeepMeasureNetwork splice(const DeepMeasureNetwork& net, std::size_t l, LayerMeasure layer);

struct LayerReport {
  std::size_t layer = 0;
  std::size_t width_before = 0;   // non-bias atoms
  std::size_t width_after = 0;
  std::size_t support_after = 0;  // all atoms
  std::size_t bound = 0;          // N * (coordinates read downstream)
  double tv_before = 0.0;
  double tv_reduced = 0.0;
  double tv_after = 0.0;
  double residual = 0.0;
  std::string source;
  std::string note;
  std::vector<SolverTraceRow> solver_trace;
};

struct SparsifyReport {
  std::size_t num_samples = 0;
  double lambda = 0.0;
  double tolerance_residual = 0.0;
  double objective_tolerance = 0.0;
  std::vector<LayerReport> layers;
  std::vector<std::size_t> output_dims;  // d_0, d_1, ..., d_{L+1} of the exported network
  double objective_before = 0.0;
  double objective_after = 0.0;
  double phi_bound = 0.0;          // sum_l |mu_l|_TV after sparsification
  double corollary_bound = 0.0;    // sum of W-column norms over windows
  double max_output_deviation = 0.0;
  double certified_deviation = 0.0;

  bool widths_ok() const;
  bool objective_ok() const;
  bool deviation_ok() const;
  bool tv_ok(double tol = 1e-9) const;
  bool phi_ok(double tol = 1e-9) const;
  bool all_ok() const;
};

struct RepresenterResult {
  DeepMeasureNetwork sparse;
  FiniteNetwork finite;
  SparsifyReport report;
};

/// Runs the pipeline. `grids[l]`, when given, overrides default_grid for
/// layer l. Solver errors carry the layer index in their message.
RepresenterResult run_representer(const DeepMeasureNetwork& net, const Dataset& data,
                                  const PipelineConfig& cfg,
                                  const std::vector<std::optional<CandidateGrid>>& grids = {});

}  // namespace rkbs
