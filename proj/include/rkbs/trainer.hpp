#pragma once

// Proximal-gradient training of a discrete neural network of atomic
// measures on
//
//   (1/N) sum_i loss(f(x_i), y_i) + lambda * sum_l |mu_l|_TV
//
// Atom locations stay fixed; the prox of the TV term zeroes whole atoms.

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rkbs/basis.hpp"
#include "rkbs/network.hpp"

namespace rkbs {

class LossFunction {
 public:
  enum class Kind { Squared, Logistic };

  /// 1/2 |yhat - y|^2
  static LossFunction squared() { return LossFunction(Kind::Squared); }
  /// sum_j log(1 + exp(-y_j yhat_j)), labels y_j in {-1, +1}
  static LossFunction logistic() { return LossFunction(Kind::Logistic); }

  Kind kind() const noexcept { return kind_; }
  const char* name() const noexcept { return kind_ == Kind::Squared ? "squared" : "logistic"; }
  double value(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y) const;

 private:
  explicit LossFunction(Kind k) : kind_(k) {}
  Kind kind_;
};

struct Dataset {
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> y;

  std::size_t size() const noexcept { return x.size(); }
  std::size_t input_dim() const { return static_cast<std::size_t>(x.front().size()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(y.front().size()); }
  void validate() const;
};

struct TrainConfig {
  std::vector<std::size_t> init_widths{32};  // hidden neurons per hidden layer
  double lambda = 1.0;
  std::size_t steps = 2000;
  double step_size = 0.1;
  std::uint64_t seed = 0;
  double init_scale = 0.0;  // <= 0: 1/sqrt(fan-in)
  Activation activation = Activation::relu();
  WindowSequence window = WindowSequence::geometric(0.9);
  double offset = 0.0;
  bool exempt_bias = false;  // skip the prox on index-0 atoms
  std::size_t threads = 1;
  double divergence_factor = 10.0;

  void validate() const;
};

struct TrainTraceRow {
  std::size_t step;
  double risk;
  double tv_total;
  double objective;
  std::size_t atoms_alive;
};

double empirical_risk(const DeepMeasureNetwork& net, const Dataset& data, const LossFunction& loss,
                      std::size_t threads = 1);

/// empirical_risk + lambda * complexity_upper_bound
double objective(const DeepMeasureNetwork& net, const Dataset& data, const LossFunction& loss,
                 double lambda, std::size_t threads = 1);

/// grads[l][k] is d risk / d w_k for the k-th atom of layer l, in the
/// measure's atom order.
using WeightGradients = std::vector<std::vector<Eigen::VectorXd>>;

/// Reverse-mode gradient of the empirical risk. Per-sample contributions are
/// summed in sample order, so the result does not depend on `threads`.
WeightGradients grad_weights(const DeepMeasureNetwork& net, const Dataset& data,
                             const LossFunction& loss, std::size_t threads = 1);

/// Layer 0: input-affine with atoms 0..d. Hidden layer l: bias atom 0 and
/// atoms 1..init_widths[l-1]. Weights uniform in (-s, s).
DeepMeasureNetwork init_network(const TrainConfig& cfg, std::size_t input_dim,
                                std::size_t output_dim);

struct TrainResult {
  DeepMeasureNetwork net;
  std::vector<TrainTraceRow> trace;
};

/// Proximal gradient with backtracking: a step that would increase the
/// objective is retried with half the step size. Throws
/// Errc::DivergenceDetected if the objective leaves divergence_factor times
/// its initial value or becomes non-finite.
TrainResult train_prox(const TrainConfig& cfg, const Dataset& data, const LossFunction& loss);

/// Runs body(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace rkbs
