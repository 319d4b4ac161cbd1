#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "rkbs/basis.hpp"
#include "rkbs/measure.hpp"

namespace rkbs {

/// One integral layer  x -> sum_k w_k rho(x, theta_k)  from R^input_dim to
/// R^output_dim.
struct LayerMeasure {
  BasisFunction basis;
  AtomicVectorMeasure measure;
  std::size_t input_dim;

  std::size_t output_dim() const noexcept { return measure.target_dim(); }
  /// Non-bias atoms (index 0 of a discrete basis is the constant feature).
  std::size_t width() const;
};

/// Composition f_L o ... o f_0 of integral layers. Layer 0 is input-affine;
/// hidden layers have finite ambient dimension (max atom index + 1 is enough
/// since every atom reads a single coordinate).
class DeepMeasureNetwork {
 public:
  explicit DeepMeasureNetwork(std::vector<LayerMeasure> layers);

  std::span<const LayerMeasure> layers() const noexcept { return layers_; }
  const LayerMeasure& layer(std::size_t l) const { return layers_.at(l); }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  /// L in the notation f_L o ... o f_0.
  std::size_t depth() const noexcept { return layers_.size() - 1; }
  std::size_t input_dim() const noexcept { return layers_.front().input_dim; }
  std::size_t output_dim() const noexcept { return layers_.back().output_dim(); }
  /// d_0, d_1, ..., d_{L+1} ambient dimensions.
  std::vector<std::size_t> dims() const;

  /// Replaces layer l; the chain invariants are re-checked.
  void set_layer(std::size_t l, LayerMeasure layer);

 private:
  void validate() const;
  std::vector<LayerMeasure> layers_;
};

Eigen::VectorXd apply_layer(const LayerMeasure& layer, const Eigen::VectorXd& x);
Eigen::VectorXd forward(const DeepMeasureNetwork& net, const Eigen::VectorXd& x);

/// sum_l |mu_l|_TV, an upper bound for the complexity Phi(f).
double complexity_upper_bound(const DeepMeasureNetwork& net);

/// Lipschitz bound of one layer w.r.t. the euclidean norm:
/// C * sqrt(sum_k (|w_k| beta_k)^2) over non-bias atoms (each atom reads its
/// own coordinate). Only defined for discrete bases.
double layer_lipschitz_bound(const LayerMeasure& layer);

/// x^{(l+1)} = W^{(l+1)} sigma(x^{(l)}) + b^{(l+1)}, with x^{(1)} = W^{(1)} x + b^{(1)}.
struct FiniteNetwork {
  Activation activation = Activation::relu();
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::size_t input_dim() const { return static_cast<std::size_t>(weights.front().cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(weights.back().rows()); }
  /// d_1, ..., d_L
  std::vector<std::size_t> hidden_widths() const;
  void validate() const;
};

Eigen::VectorXd forward_finite(const FiniteNetwork& net, const Eigen::VectorXd& x);

/// Finite network with one hidden unit per non-bias atom. Offsets c of a
/// hidden basis are folded into the biases of the preceding affine map and
/// windows beta into the weight columns. Throws Errc::UnsupportedBasis unless
/// layer 0 is input-affine and every other layer is discrete-neural with a
/// shared activation.
FiniteNetwork export_finite(const DeepMeasureNetwork& net);

/// sum_l sum_k ( sum_j |W^{(l+1)}_{jk} / beta_k|^2 )^{1/2}, with the bias
/// columns (offsets removed) counted as k = 0 with beta = 1. `source` supplies
/// the windows; `finite` must be export_finite(source) or a network with the
/// same shapes.
double discrete_corollary_bound(const FiniteNetwork& finite, const DeepMeasureNetwork& source);

}  // namespace rkbs
