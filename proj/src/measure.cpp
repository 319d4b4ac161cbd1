#include "rkbs/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rkbs/error.hpp"
#include "rkbs/simd/kernels.hpp"

namespace rkbs {

ParameterPoint ParameterPoint::discrete(std::int64_t index) {
  require(index >= 0, Errc::NegativeIndex, "parameter index " + std::to_string(index));
  ParameterPoint p;
  p.value_ = static_cast<std::uint64_t>(index);
  return p;
}

ParameterPoint ParameterPoint::euclidean(Eigen::VectorXd coords) {
  ParameterPoint p;
  p.value_ = std::move(coords);
  return p;
}

std::uint64_t ParameterPoint::index() const {
  const auto* v = std::get_if<std::uint64_t>(&value_);
  require(v != nullptr, Errc::KindMismatch, "expected a discrete parameter point");
  return *v;
}

const Eigen::VectorXd& ParameterPoint::coords() const {
  const auto* v = std::get_if<Eigen::VectorXd>(&value_);
  require(v != nullptr, Errc::KindMismatch, "expected a euclidean parameter point");
  return *v;
}

std::size_t ParameterPoint::dimension() const noexcept {
  if (const auto* v = std::get_if<Eigen::VectorXd>(&value_)) return static_cast<std::size_t>(v->size());
  return 0;
}

bool ParameterPoint::same_location(const ParameterPoint& other) const {
  if (is_discrete() != other.is_discrete()) return false;
  if (is_discrete()) return index() == other.index();
  const auto& a = coords();
  const auto& b = other.coords();
  if (a.size() != b.size()) return false;
  return (a - b).norm() <= kLocationMergeTolerance;
}

bool operator<(const ParameterPoint& a, const ParameterPoint& b) {
  if (a.is_discrete() != b.is_discrete()) return a.is_discrete();
  if (a.is_discrete()) return a.index() < b.index();
  const auto& x = a.coords();
  const auto& y = b.coords();
  return std::lexicographical_compare(x.data(), x.data() + x.size(), y.data(), y.data() + y.size());
}

namespace {

bool is_zero(const Eigen::VectorXd& w) { return (w.array() == 0.0).all(); }

void check_locations_compatible(const std::vector<Atom>& atoms, const ParameterPoint& theta) {
  if (atoms.empty()) return;
  const auto& ref = atoms.front().location;
  require(ref.is_discrete() == theta.is_discrete(), Errc::KindMismatch,
          "cannot mix discrete and euclidean atoms in one measure");
  require(ref.dimension() == theta.dimension(), Errc::DimensionMismatch,
          "euclidean atoms of one measure must share a dimension");
}

}  // namespace

AtomicVectorMeasure::AtomicVectorMeasure(std::size_t target_dim) : target_dim_(target_dim) {
  require(target_dim > 0, Errc::DimensionMismatch, "measure target dimension must be positive");
}

AtomicVectorMeasure::AtomicVectorMeasure(std::size_t target_dim, std::vector<Atom> atoms)
    : AtomicVectorMeasure(target_dim) {
  for (auto& a : atoms) add(a.location, a.weight);
}

void AtomicVectorMeasure::add(const ParameterPoint& theta, const Eigen::VectorXd& weight) {
  require(static_cast<std::size_t>(weight.size()) == target_dim_, Errc::DimensionMismatch,
          "atom weight has dimension " + std::to_string(weight.size()) + ", measure expects " +
              std::to_string(target_dim_));
  check_locations_compatible(atoms_, theta);

  auto same = std::find_if(atoms_.begin(), atoms_.end(),
                           [&](const Atom& a) { return a.location.same_location(theta); });
  if (same != atoms_.end()) {
    same->weight += weight;
    if (is_zero(same->weight)) atoms_.erase(same);
    return;
  }
  if (is_zero(weight)) return;
  auto pos = std::upper_bound(atoms_.begin(), atoms_.end(), theta,
                              [](const ParameterPoint& t, const Atom& a) { return t < a.location; });
  atoms_.insert(pos, Atom{theta, weight});
}

const Atom* AtomicVectorMeasure::find(const ParameterPoint& theta) const {
  for (const auto& a : atoms_)
    if (a.location.same_location(theta)) return &a;
  return nullptr;
}

double tv_norm(const AtomicVectorMeasure& mu) {
  double total = 0.0;
  for (const auto& a : mu.atoms())
    total += std::sqrt(simd::sum_squares({a.weight.data(), static_cast<std::size_t>(a.weight.size())}));
  return total;
}

AtomicVectorMeasure linear_combine(double a, const AtomicVectorMeasure& mu, double b,
                                   const AtomicVectorMeasure& nu) {
  require(mu.target_dim() == nu.target_dim(), Errc::DimensionMismatch,
          "linear_combine: target dimensions differ");
  AtomicVectorMeasure out(mu.target_dim());
  for (const auto& atom : mu.atoms()) out.add(atom.location, a * atom.weight);
  for (const auto& atom : nu.atoms()) out.add(atom.location, b * atom.weight);
  return out;
}

AtomicVectorMeasure apply_linear_to_weights(const AtomicVectorMeasure& mu,
                                            const Eigen::MatrixXd& P) {
  require(static_cast<std::size_t>(P.cols()) == mu.target_dim(), Errc::DimensionMismatch,
          "linear map input dimension does not match measure target dimension");
  require(P.rows() > 0, Errc::DimensionMismatch, "linear map must have a positive output dimension");
  AtomicVectorMeasure out(static_cast<std::size_t>(P.rows()));
  for (const auto& atom : mu.atoms()) out.add(atom.location, P * atom.weight);
  return out;
}

AtomicVectorMeasure pushforward(const AtomicVectorMeasure& mu, const LocationMap& map) {
  AtomicVectorMeasure out(mu.target_dim());
  for (const auto& atom : mu.atoms()) out.add(map(atom.location), atom.weight);
  return out;
}

Eigen::VectorXd integrate(const AtomicVectorMeasure& mu, const ScalarField& phi) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mu.target_dim()));
  for (const auto& atom : mu.atoms()) acc += phi(atom.location) * atom.weight;
  return acc;
}

ExtremeCheck extreme_point_check(const AtomicVectorMeasure& mu) {
  const double tv = tv_norm(mu);
  require(std::abs(tv - 1.0) <= kUnitBallTolerance, Errc::NotUnitBall,
          "total variation " + std::to_string(tv) + " is not 1");
  if (mu.size() == 1) return Extreme{};

  // Split off the first atom; both parts are renormalized by their own
  // variation so that each has unit TV up to rounding.
  const auto atoms = mu.atoms();
  const double first_tv = atoms.front().weight.norm();
  double rest_tv = 0.0;
  for (std::size_t k = 1; k < atoms.size(); ++k) rest_tv += atoms[k].weight.norm();

  AtomicVectorMeasure first(mu.target_dim());
  first.add(atoms.front().location, atoms.front().weight / first_tv);
  AtomicVectorMeasure second(mu.target_dim());
  for (std::size_t k = 1; k < atoms.size(); ++k)
    second.add(atoms[k].location, atoms[k].weight / rest_tv);
  return Decomposition{first_tv / (first_tv + rest_tv), std::move(first), std::move(second)};
}

}  // namespace rkbs
