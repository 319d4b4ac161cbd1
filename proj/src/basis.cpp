#include "rkbs/basis.hpp"

#include <cmath>
#include <limits>

#include "rkbs/error.hpp"

namespace rkbs {

Activation Activation::relu() { return Activation{}; }

Activation Activation::leaky_relu(double slope) {
  require(std::isfinite(slope), Errc::InvalidArgument, "leaky_relu slope must be finite");
  Activation a;
  a.kind_ = Kind::LeakyRelu;
  a.slope_ = slope;
  a.lipschitz_ = std::max(1.0, std::abs(slope));
  a.name_ = "leaky_relu";
  return a;
}

Activation Activation::tanh() {
  Activation a;
  a.kind_ = Kind::Tanh;
  a.name_ = "tanh";
  return a;
}

Activation Activation::custom(std::string name, std::function<double(double)> fn,
                              std::function<double(double)> derivative,
                              double lipschitz_constant) {
  require(fn && derivative, Errc::InvalidArgument, "custom activation needs fn and derivative");
  require(lipschitz_constant > 0.0, Errc::InvalidArgument,
          "custom activation Lipschitz constant must be positive");
  Activation a;
  a.kind_ = Kind::Custom;
  a.lipschitz_ = lipschitz_constant;
  a.zero_at_zero_ = fn(0.0) == 0.0;
  a.name_ = std::move(name);
  a.fn_ = std::move(fn);
  a.derivative_ = std::move(derivative);
  return a;
}

double Activation::operator()(double a) const {
  switch (kind_) {
    case Kind::Relu: return a > 0.0 ? a : 0.0;
    case Kind::LeakyRelu: return a > 0.0 ? a : slope_ * a;
    case Kind::Tanh: return std::tanh(a);
    case Kind::Custom: return fn_(a);
  }
  return 0.0;
}

double Activation::derivative(double a) const {
  switch (kind_) {
    case Kind::Relu: return a > 0.0 ? 1.0 : 0.0;
    case Kind::LeakyRelu: return a > 0.0 ? 1.0 : slope_;
    case Kind::Tanh: {
      const double t = std::tanh(a);
      return 1.0 - t * t;
    }
    case Kind::Custom: return derivative_(a);
  }
  return 0.0;
}

WindowSequence WindowSequence::geometric(double q) {
  require(q > 0.0 && q < 1.0, Errc::InvalidArgument, "geometric window ratio must lie in (0,1)");
  return WindowSequence(Kind::Geometric, q);
}

double WindowSequence::operator()(std::uint64_t n) const {
  switch (kind_) {
    case Kind::ConstantOne: return 1.0;
    case Kind::Geometric: return std::pow(q_, static_cast<double>(n));
    case Kind::InverseSquare: {
      const double d = 1.0 + static_cast<double>(n);
      return 1.0 / (d * d);
    }
  }
  return 1.0;
}

std::string WindowSequence::name() const {
  switch (kind_) {
    case Kind::ConstantOne: return "constant_one";
    case Kind::Geometric: return "geometric";
    case Kind::InverseSquare: return "inverse_square";
  }
  return "unknown";
}

double BasisFunction::lipschitz_constant() const {
  return std::visit(
      [](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, InputAffine>) {
          return 1.0;
        } else {
          return b.activation.lipschitz_constant();
        }
      },
      v_);
}

bool BasisFunction::admissible(const ParameterPoint& theta, std::size_t input_dim) const {
  if (const auto* ia = std::get_if<InputAffine>(&v_)) {
    return theta.is_discrete() && theta.index() <= ia->input_dim && ia->input_dim == input_dim;
  }
  if (const auto* dn = std::get_if<DiscreteNeural>(&v_)) {
    if (!theta.is_discrete()) return false;
    if (theta.index() == 0) return dn->bias_atom;
    return theta.index() <= input_dim;
  }
  return theta.is_euclidean() && theta.dimension() == input_dim;
}

std::string BasisFunction::describe() const {
  return std::visit(
      [](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, InputAffine>) {
          return "input_affine(d=" + std::to_string(b.input_dim) + ")";
        } else if constexpr (std::is_same_v<T, DiscreteNeural>) {
          return "discrete_neural(" + b.activation.name() + ", " + b.window.name() + ")";
        } else {
          return "continuous_neural(" + b.activation.name() + ")";
        }
      },
      v_);
}

namespace {

double gaussian_window(double scale, const Eigen::VectorXd& theta) {
  if (std::isinf(scale)) return 1.0;
  return std::exp(-theta.squaredNorm() / (2.0 * scale * scale));
}

double inner(std::span<const double> x, const Eigen::VectorXd& theta) {
  require(static_cast<std::size_t>(theta.size()) == x.size(), Errc::DimensionMismatch,
          "continuous parameter dimension " + std::to_string(theta.size()) +
              " does not match input dimension " + std::to_string(x.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * theta[static_cast<Eigen::Index>(i)];
  return s;
}

}  // namespace

BasisJet evaluate_basis_jet(const BasisFunction& rho, std::span<const double> x,
                            const ParameterPoint& theta) {
  return std::visit(
      [&](const auto& b) -> BasisJet {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, InputAffine>) {
          require(theta.is_discrete(), Errc::KindMismatch, "input-affine basis needs an index");
          require(x.size() == b.input_dim, Errc::DimensionMismatch,
                  "input-affine basis expects dimension " + std::to_string(b.input_dim));
          const auto j = theta.index();
          require(j <= b.input_dim, Errc::DimensionMismatch,
                  "input-affine index " + std::to_string(j) + " exceeds input dimension");
          if (j == 0) return {1.0, 0.0, -1};
          return {x[j - 1], 1.0, static_cast<std::int64_t>(j - 1)};
        } else if constexpr (std::is_same_v<T, DiscreteNeural>) {
          require(theta.is_discrete(), Errc::KindMismatch, "discrete neural basis needs an index");
          const auto n = theta.index();
          if (n == 0) return {b.bias_atom ? 1.0 : 0.0, 0.0, -1};
          const double beta = b.window(n - 1);
          // Coordinates past the end of a finite vector are zeros of l2(N).
          if (n - 1 >= x.size()) return {b.activation(b.offset) * beta, 0.0, -1};
          const double pre = x[n - 1] + b.offset;
          return {b.activation(pre) * beta, b.activation.derivative(pre) * beta,
                  static_cast<std::int64_t>(n - 1)};
        } else {
          require(theta.is_euclidean(), Errc::KindMismatch,
                  "continuous neural basis needs a euclidean parameter");
          const auto& th = theta.coords();
          const double win = gaussian_window(b.window_scale, th);
          const double pre = inner(x, th) + b.offset;
          return {b.activation(pre) * win, b.activation.derivative(pre) * win, -1};
        }
      },
      rho.variant());
}

double evaluate_basis(const BasisFunction& rho, std::span<const double> x,
                      const ParameterPoint& theta) {
  return evaluate_basis_jet(rho, x, theta).value;
}

double window_at(const BasisFunction& rho, const ParameterPoint& theta) {
  if (const auto* dn = std::get_if<DiscreteNeural>(&rho.variant())) {
    const auto n = theta.index();
    return n == 0 ? 1.0 : dn->window(n - 1);
  }
  if (const auto* cn = std::get_if<ContinuousNeural>(&rho.variant()))
    return gaussian_window(cn->window_scale, theta.coords());
  return 1.0;
}

LipschitzWitness lipschitz_witness(const BasisFunction& rho, std::span<const double> x,
                                   std::span<const double> x2, const ParameterPoint& theta) {
  require(x.size() == x2.size(), Errc::DimensionMismatch, "lipschitz probe points differ in size");
  const double lhs = std::abs(evaluate_basis(rho, x, theta) - evaluate_basis(rho, x2, theta));
  double rhs = 0.0;
  if (rho.is_continuous_neural()) {
    const auto& th = theta.coords();
    rhs = rho.lipschitz_constant() * std::abs(inner(x, th) - inner(x2, th)) * window_at(rho, theta);
  } else {
    const auto n = theta.index();
    if (n >= 1 && n - 1 < x.size())
      rhs = rho.lipschitz_constant() * std::abs(x[n - 1] - x2[n - 1]) * window_at(rho, theta);
  }
  return {lhs, rhs, lhs <= rhs + 1e-12};
}

}  // namespace rkbs
