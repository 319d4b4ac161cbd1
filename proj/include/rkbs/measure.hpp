#pragma once

// Finitely-atomic vector measures  mu = sum_k w_k delta_{theta_k}  with
// weights in R^m, and the total-variation norm  |mu|_TV = sum_k |w_k|_2.

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace rkbs {

/// Euclidean locations closer than this are treated as the same atom.
inline constexpr double kLocationMergeTolerance = 1e-12;

/// A point of the parameter space: either an index into N (or {0..d}) or a
/// point of R^k.
class ParameterPoint {
 public:
  ParameterPoint() : value_(std::uint64_t{0}) {}

  static ParameterPoint discrete(std::int64_t index);
  static ParameterPoint euclidean(Eigen::VectorXd coords);

  bool is_discrete() const noexcept { return std::holds_alternative<std::uint64_t>(value_); }
  bool is_euclidean() const noexcept { return !is_discrete(); }

  std::uint64_t index() const;
  const Eigen::VectorXd& coords() const;
  std::size_t dimension() const noexcept;

  /// Merge rule: equal indices, or euclidean distance <= kLocationMergeTolerance.
  bool same_location(const ParameterPoint& other) const;

  /// Total order used for canonical atom ordering: discrete before
  /// euclidean, indices ascending, coordinates lexicographic.
  friend bool operator<(const ParameterPoint& a, const ParameterPoint& b);

 private:
  std::variant<std::uint64_t, Eigen::VectorXd> value_;
};

struct Atom {
  ParameterPoint location;
  Eigen::VectorXd weight;
};

/// Atoms are kept sorted by location, pairwise distinct, and with nonzero
/// weights; all weights have dimension target_dim().
class AtomicVectorMeasure {
 public:
  explicit AtomicVectorMeasure(std::size_t target_dim = 1);
  AtomicVectorMeasure(std::size_t target_dim, std::vector<Atom> atoms);

  /// Adds w * delta_theta, merging with an existing atom at the same location.
  void add(const ParameterPoint& theta, const Eigen::VectorXd& weight);

  std::size_t target_dim() const noexcept { return target_dim_; }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  const Atom* find(const ParameterPoint& theta) const;

 private:
  std::size_t target_dim_;
  std::vector<Atom> atoms_;
};

double tv_norm(const AtomicVectorMeasure& mu);

/// a*mu + b*nu; atoms whose combined weight is exactly zero are dropped.
AtomicVectorMeasure linear_combine(double a, const AtomicVectorMeasure& mu, double b,
                                   const AtomicVectorMeasure& nu);

/// Replaces every weight w by P*w. TV is non-increasing when |P|_op <= 1.
AtomicVectorMeasure apply_linear_to_weights(const AtomicVectorMeasure& mu,
                                            const Eigen::MatrixXd& P);

using LocationMap = std::function<ParameterPoint(const ParameterPoint&)>;
AtomicVectorMeasure pushforward(const AtomicVectorMeasure& mu, const LocationMap& map);

using ScalarField = std::function<double(const ParameterPoint&)>;
/// sum_k phi(theta_k) * w_k
Eigen::VectorXd integrate(const AtomicVectorMeasure& mu, const ScalarField& phi);

struct Extreme {};

/// mu = t*first + (1-t)*second with both parts of unit total variation.
struct Decomposition {
  double t;
  AtomicVectorMeasure first;
  AtomicVectorMeasure second;
};

using ExtremeCheck = std::variant<Extreme, Decomposition>;

inline constexpr double kUnitBallTolerance = 1e-12;

/// Extreme points of the unit TV ball are exactly the single atoms y*delta_theta
/// with |y|_2 = 1. For anything else a witness split is returned.
/// Throws Errc::NotUnitBall when |tv(mu) - 1| > kUnitBallTolerance.
ExtremeCheck extreme_point_check(const AtomicVectorMeasure& mu);

}  // namespace rkbs
