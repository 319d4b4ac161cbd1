#pragma once

// Basis functions rho(x, theta) of the integral layers:
//
//   InputAffine      rho(x, 0) = 1,  rho(x, j) = x_j            (1 <= j <= d)
//   DiscreteNeural   rho(x, 0) = 1,  rho(x, n) = sigma(x_{n-1} + c) beta_{n-1}
//   ContinuousNeural rho(x, th) = sigma(<x, th> + c) exp(-|th|^2 / (2 s^2))

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>

#include "rkbs/measure.hpp"

namespace rkbs {

class Activation {
 public:
  enum class Kind { Relu, LeakyRelu, Tanh, Custom };

  static Activation relu();
  static Activation leaky_relu(double slope);
  static Activation tanh();
  /// A user-supplied Lipschitz function; not serializable.
  static Activation custom(std::string name, std::function<double(double)> fn,
                           std::function<double(double)> derivative, double lipschitz_constant);

  double operator()(double a) const;
  /// Derivative, with the subgradient 0 chosen for relu at 0.
  double derivative(double a) const;

  Kind kind() const noexcept { return kind_; }
  double slope() const noexcept { return slope_; }
  double lipschitz_constant() const noexcept { return lipschitz_; }
  bool zero_at_zero() const noexcept { return zero_at_zero_; }
  /// Lowercase name: "relu", "leaky_relu", "tanh" or the custom name.
  const std::string& name() const noexcept { return name_; }

  friend bool operator==(const Activation& a, const Activation& b) {
    return a.kind_ == b.kind_ && a.slope_ == b.slope_ && a.name_ == b.name_;
  }

 private:
  Kind kind_ = Kind::Relu;
  double slope_ = 0.0;
  double lipschitz_ = 1.0;
  bool zero_at_zero_ = true;
  std::string name_ = "relu";
  std::function<double(double)> fn_;
  std::function<double(double)> derivative_;
};

/// Positive weights beta_n. Geometric: q^n. InverseSquare: 1/(1+n)^2.
class WindowSequence {
 public:
  enum class Kind { ConstantOne, Geometric, InverseSquare };

  static WindowSequence constant_one() { return WindowSequence(Kind::ConstantOne, 1.0); }
  static WindowSequence geometric(double q);
  static WindowSequence inverse_square() { return WindowSequence(Kind::InverseSquare, 0.0); }

  double operator()(std::uint64_t n) const;
  /// sup_n beta_n (= beta_0 for every shipped kind).
  double sup() const noexcept { return 1.0; }

  Kind kind() const noexcept { return kind_; }
  double ratio() const noexcept { return q_; }
  std::string name() const;

  friend bool operator==(const WindowSequence&, const WindowSequence&) = default;

 private:
  WindowSequence(Kind k, double q) : kind_(k), q_(q) {}
  Kind kind_;
  double q_;
};

struct InputAffine {
  std::size_t input_dim = 1;
};

struct DiscreteNeural {
  Activation activation = Activation::relu();
  WindowSequence window = WindowSequence::geometric(0.9);
  bool bias_atom = true;
  double offset = 0.0;
};

struct ContinuousNeural {
  Activation activation = Activation::relu();
  double window_scale = 10.0;  // +inf disables the window
  double offset = 0.0;
};

class BasisFunction {
 public:
  using Variant = std::variant<InputAffine, DiscreteNeural, ContinuousNeural>;

  BasisFunction(InputAffine b) : v_(b) {}                   // NOLINT(google-explicit-constructor)
  BasisFunction(DiscreteNeural b) : v_(std::move(b)) {}     // NOLINT(google-explicit-constructor)
  BasisFunction(ContinuousNeural b) : v_(std::move(b)) {}   // NOLINT(google-explicit-constructor)

  const Variant& variant() const noexcept { return v_; }
  bool is_input_affine() const noexcept { return std::holds_alternative<InputAffine>(v_); }
  bool is_discrete_neural() const noexcept { return std::holds_alternative<DiscreteNeural>(v_); }
  bool is_continuous_neural() const noexcept { return std::holds_alternative<ContinuousNeural>(v_); }
  /// True when theta is a discrete index (InputAffine, DiscreteNeural).
  bool discrete_parameters() const noexcept { return !is_continuous_neural(); }

  const InputAffine& input_affine() const { return std::get<InputAffine>(v_); }
  const DiscreteNeural& discrete_neural() const { return std::get<DiscreteNeural>(v_); }
  const ContinuousNeural& continuous_neural() const { return std::get<ContinuousNeural>(v_); }

  /// Lipschitz constant C of the activation (1 for InputAffine).
  double lipschitz_constant() const;

  /// Whether theta is an admissible atom location for inputs of dimension input_dim.
  bool admissible(const ParameterPoint& theta, std::size_t input_dim) const;

  std::string describe() const;

 private:
  Variant v_;
};

double evaluate_basis(const BasisFunction& rho, std::span<const double> x,
                      const ParameterPoint& theta);

/// Value of rho(x, theta) together with its sensitivity to x. For discrete
/// bases rho depends on at most one coordinate (`coord`, or none when
/// coord < 0) with derivative `slope`; for continuous bases the gradient is
/// slope * theta.
struct BasisJet {
  double value = 0.0;
  double slope = 0.0;
  std::int64_t coord = -1;
};

BasisJet evaluate_basis_jet(const BasisFunction& rho, std::span<const double> x,
                            const ParameterPoint& theta);

/// The window factor beta(theta) multiplying the activation (1 for the
/// bias atom and for InputAffine).
double window_at(const BasisFunction& rho, const ParameterPoint& theta);

struct LipschitzWitness {
  double lhs;
  double rhs;
  bool ok;
};

/// Probes |rho(x,th) - rho(x2,th)| <= C |<x - x2, g(th)>| |beta(th)| with
/// g(n) = e_{n-1} (discrete) or g(th) = th (continuous).
LipschitzWitness lipschitz_witness(const BasisFunction& rho, std::span<const double> x,
                                   std::span<const double> x2, const ParameterPoint& theta);

}  // namespace rkbs
