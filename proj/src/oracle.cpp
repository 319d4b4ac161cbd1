#include "rkbs/oracle.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "rkbs/error.hpp"
#include "rkbs/sparse_solver.hpp"

namespace rkbs::oracle {

void TinyInstance::validate() const {
  require(!grid.empty(), Errc::EmptyGrid, "oracle grid is empty");
  require(grid.size() <= kMaxGrid, Errc::CapExceeded,
          "oracle grid has " + std::to_string(grid.size()) + " points, cap is " + std::to_string(kMaxGrid));
  require(!inputs.empty() && inputs.size() <= kMaxSamples, Errc::CapExceeded,
          "oracle instances take 1.." + std::to_string(kMaxSamples) + " samples");
  require(targets.cols() >= 1 && static_cast<std::size_t>(targets.cols()) <= kMaxTargetDim,
          Errc::CapExceeded, "oracle target dimension must be 1.." + std::to_string(kMaxTargetDim));
  require(static_cast<std::size_t>(targets.rows()) == inputs.size(), Errc::DimensionMismatch,
          "oracle targets need one row per input");
  if (lambda) require(*lambda > 0.0, Errc::InvalidArgument, "oracle lambda must be positive");
}

Eigen::MatrixXd TinyInstance::features() const {
  Eigen::MatrixXd F(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i)
    for (std::size_t g = 0; g < grid.size(); ++g)
      F(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = evaluate_basis(
          basis, {inputs[i].data(), static_cast<std::size_t>(inputs[i].size())}, grid[g]);
  return F;
}

std::pair<std::size_t, double> lmo_scan(const TinyInstance& inst, const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd F = inst.features();
  std::size_t best = 0;
  double best_score = -1.0;
  for (Eigen::Index g = 0; g < F.cols(); ++g) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
      double v = 0.0;
      for (Eigen::Index i = 0; i < R.rows(); ++i) v += F(i, g) * R(i, j);
      s += v * v;
    }
    s = std::sqrt(s);
    if (s > best_score) {
      best_score = s;
      best = static_cast<std::size_t>(g);
    }
  }
  return {best, best_score};
}

RegularizedOptimum brute_force_regularized(const TinyInstance& inst, std::size_t max_iters) {
  inst.validate();
  require(inst.lambda.has_value(), Errc::InvalidArgument, "brute_force_regularized needs lambda");
  const double lambda = *inst.lambda;
  const Eigen::MatrixXd F = inst.features();
  const Eigen::MatrixXd& T = inst.targets;
  const auto m = T.cols();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(F);
  const double sig = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  const double step = sig > 0.0 ? 1.0 / (sig * sig) : 1.0;

  auto value = [&](const Eigen::MatrixXd& W) {
    double reg = 0.0;
    for (Eigen::Index g = 0; g < W.rows(); ++g) reg += W.row(g).norm();
    return 0.5 * (T - F * W).squaredNorm() + lambda * reg;
  };
  auto certificate = [&](const Eigen::MatrixXd& W, double& gap, double& score) {
    const Eigen::MatrixXd R = T - F * W;
    const Eigen::MatrixXd S = F.transpose() * R;
    score = S.rowwise().norm().maxCoeff();
    const double scale = score > lambda ? lambda / score : 1.0;
    const Eigen::MatrixXd U = scale * R;
    const double dual = (U.array() * T.array()).sum() - 0.5 * U.squaredNorm();
    gap = value(W) - dual;
  };

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(F.cols(), m);
  RegularizedOptimum out{AtomicVectorMeasure(static_cast<std::size_t>(m))};
  std::size_t it = 0;
  double gap = 0.0, score = 0.0;
  for (; it < max_iters; ++it) {
    Eigen::MatrixXd Z = W + step * (F.transpose() * (T - F * W));
    for (Eigen::Index g = 0; g < Z.rows(); ++g) {
      const double n = Z.row(g).norm();
      if (n <= step * lambda) {
        Z.row(g).setZero();
      } else {
        Z.row(g) *= 1.0 - step * lambda / n;
      }
    }
    W = std::move(Z);
    if (it % 256 == 255) {
      certificate(W, gap, score);
      if (score <= lambda * (1.0 + 1e-8) && gap <= 1e-12 * std::max(1.0, value(W))) break;
    }
  }
  certificate(W, gap, score);
  out.objective = value(W);
  out.dual_gap = gap;
  out.max_score = score;
  out.iterations = it;
  out.certified = score <= lambda * (1.0 + 1e-8) && gap <= 1e-9 * std::max(1.0, out.objective);
  for (std::size_t g = 0; g < inst.grid.size(); ++g)
    out.measure.add(inst.grid[g], W.row(static_cast<Eigen::Index>(g)).transpose());
  return out;
}

namespace {

struct SupportFit {
  bool feasible = false;
  double tv = 0.0;
  Eigen::MatrixXd W;
};

// min sum_k |W_k|  s.t.  F W = T  by iteratively reweighted least norm.
SupportFit fit_support(const Eigen::MatrixXd& F, const Eigen::MatrixXd& T) {
  const auto K = F.cols();
  SupportFit out;
  Eigen::VectorXd s = Eigen::VectorXd::Ones(K);
  double eps = 1.0;
  for (int it = 0; it < 500; ++it) {
    const Eigen::MatrixXd FD = F * s.asDiagonal();
    const Eigen::MatrixXd G = FD * F.transpose();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(G);
    const Eigen::MatrixXd W = FD.transpose() * cod.solve(T);
    out.W = W;
    for (Eigen::Index k = 0; k < K; ++k) s[k] = std::sqrt(W.row(k).squaredNorm() + eps * eps);
    eps = std::max(eps * 0.9, 1e-14);
  }
  const double res = (F * out.W - T).rowwise().norm().maxCoeff();
  out.feasible = res <= 1e-8;
  for (Eigen::Index k = 0; k < K; ++k) out.tv += out.W.row(k).norm();
  return out;
}

// Advances comb to the next k-subset of {0..n-1} in lexicographic order.
bool next_combination(std::vector<std::size_t>& comb, std::size_t n) {
  const std::size_t k = comb.size();
  for (std::size_t i = k; i-- > 0;) {
    if (comb[i] < n - k + i) {
      ++comb[i];
      for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

DeepMeasureNetwork splice_measure(const DeepMeasureNetwork& net, std::size_t l, AtomicVectorMeasure mu) {
  std::vector<LayerMeasure> layers(net.layers().begin(), net.layers().end());
  layers[l].measure = std::move(mu);
  return DeepMeasureNetwork(std::move(layers));
}

}  // namespace

InterpolationOptimum enumerate_supports(const TinyInstance& inst) {
  inst.validate();
  const auto m = static_cast<std::size_t>(inst.targets.cols());
  InterpolationOptimum best{0.0, {}, AtomicVectorMeasure(m)};
  if ((inst.targets.array() == 0.0).all()) return best;

  const Eigen::MatrixXd F = inst.features();
  const std::size_t n = inst.grid.size();
  const std::size_t k = std::min(inst.inputs.size() * m, n);
  std::vector<std::size_t> comb(k);
  for (std::size_t i = 0; i < k; ++i) comb[i] = i;

  bool found = false;
  do {
    Eigen::MatrixXd FS(F.rows(), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) FS.col(static_cast<Eigen::Index>(j)) = F.col(static_cast<Eigen::Index>(comb[j]));
    const SupportFit fit = fit_support(FS, inst.targets);
    if (!fit.feasible || (found && fit.tv >= best.tv)) continue;
    found = true;
    best.tv = fit.tv;
    best.support.clear();
    best.measure = AtomicVectorMeasure(m);
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::VectorXd w = fit.W.row(static_cast<Eigen::Index>(j)).transpose();
      if (w.norm() <= 1e-12) continue;
      best.support.push_back(inst.grid[comb[j]]);
      best.measure.add(inst.grid[comb[j]], w);
    }
  } while (next_combination(comb, n));

  require(found, Errc::Infeasible, "no support interpolates the targets within 1e-8");
  return best;
}

WeightGradients finite_difference_gradient(const DeepMeasureNetwork& net, const Dataset& data,
                                           const LossFunction& loss, double h) {
  require(h > 0.0, Errc::InvalidArgument, "finite-difference step must be positive");
  WeightGradients out;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto& layer = net.layer(l);
    std::vector<Eigen::VectorXd> grads;
    for (const auto& atom : layer.measure.atoms()) {
      Eigen::VectorXd g(atom.weight.size());
      for (Eigen::Index j = 0; j < atom.weight.size(); ++j) {
        auto shifted = [&](double delta) {
          AtomicVectorMeasure mu = layer.measure;
          Eigen::VectorXd e = Eigen::VectorXd::Zero(atom.weight.size());
          e[j] = delta;
          mu.add(atom.location, e);
          return splice_measure(net, l, std::move(mu));
        };
        const double plus = empirical_risk(shifted(h), data, loss);
        const double minus = empirical_risk(shifted(-h), data, loss);
        g[j] = (plus - minus) / (2.0 * h);
      }
      grads.push_back(std::move(g));
    }
    out.push_back(std::move(grads));
  }
  return out;
}

TinyInstance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> grid_size(2, 8), samples(1, 3), dims(1, 2);
  std::uniform_real_distribution<double> lam(0.5, 1.5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    const int G = grid_size(rng);
    const int N = samples(rng);
    const int m = dims(rng);
    const Activation act = (rng() & 1u) ? Activation::tanh() : Activation::relu();
    TinyInstance inst{{}, Eigen::MatrixXd(N, m), DiscreteNeural{act, WindowSequence::geometric(0.9), true, 0.0},
                      {}, lam(rng)};
    for (int i = 0; i < N; ++i) {
      Eigen::VectorXd x(G - 1 > 0 ? G - 1 : 1);
      for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = gauss(rng);
      inst.inputs.push_back(std::move(x));
    }
    for (Eigen::Index k = 0; k < inst.targets.size(); ++k) inst.targets.data()[k] = 2.0 * gauss(rng);
    for (int g = 0; g < G; ++g) inst.grid.push_back(ParameterPoint::discrete(g));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(inst.features());
    lu.setThreshold(1e-6);
    if (lu.rank() == N) return inst;
  }
}

BatchSummary compare_batch(std::size_t count, std::uint64_t base_seed) {
  BatchSummary out;
  std::uint64_t seed = base_seed;
  while (out.instances < count) {
    const TinyInstance inst = random_instance(seed++);
    const auto reference = brute_force_regularized(inst);
    if (!reference.certified) {
      ++out.rejected;
      continue;
    }
    ++out.instances;
    const LayerConstraintSet c{inst.inputs, inst.targets, inst.basis};
    const auto grid = CandidateGrid::discrete(0, inst.grid.size());

    SolverConfig reg;
    reg.lambda = *inst.lambda;
    reg.tolerance_gap = 1e-9;
    reg.fc_inner_iters = 5000;
    const auto sol = solve_regularized(c, grid, reg);
    const double diff = std::abs(sol.objective - reference.objective);
    out.worst_objective_diff = std::max(out.worst_objective_diff, diff);

    const auto exact = enumerate_supports(inst);
    SolverConfig interp;
    interp.tolerance_gap = 1e-6;
    const auto fit = solve_interpolation(c, grid, interp);
    const double rel = exact.tv > 0.0 ? std::abs(fit.tv - exact.tv) / exact.tv : fit.tv;
    out.worst_tv_rel_diff = std::max(out.worst_tv_rel_diff, rel);
    if (fit.measure.size() > inst.inputs.size() * static_cast<std::size_t>(inst.targets.cols()))
      ++out.support_violations;
    if (diff > 1e-6 || rel > 1e-4) ++out.failures;
  }
  return out;
}

}  // namespace rkbs::oracle
