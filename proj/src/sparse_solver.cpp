#include "rkbs/sparse_solver.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rkbs/error.hpp"
#include "rkbs/simd/kernels.hpp"

namespace rkbs {

void LayerConstraintSet::validate() const {
  require(!inputs.empty(), Errc::DimensionMismatch, "constraint set has no samples");
  require(static_cast<std::size_t>(targets.rows()) == inputs.size(), Errc::DimensionMismatch,
          "constraint targets must have one row per input");
  require(targets.cols() > 0, Errc::DimensionMismatch, "constraint targets need positive dimension");
  for (const auto& x : inputs)
    require(x.size() == inputs.front().size(), Errc::DimensionMismatch,
            "constraint inputs differ in dimension");
}

CandidateGrid CandidateGrid::discrete(std::uint64_t begin, std::uint64_t end) {
  require(end > begin, Errc::EmptyGrid, "discrete grid [" + std::to_string(begin) + ", " +
                                            std::to_string(end) + ") is empty");
  CandidateGrid g;
  g.discrete_ = true;
  g.begin_ = begin;
  g.size_ = static_cast<std::size_t>(end - begin);
  return g;
}

CandidateGrid CandidateGrid::euclidean(Eigen::VectorXd lower, Eigen::VectorXd upper,
                                       std::vector<std::size_t> counts) {
  require(lower.size() > 0 && lower.size() == upper.size() &&
              static_cast<std::size_t>(lower.size()) == counts.size(),
          Errc::DimensionMismatch, "euclidean grid bounds and counts must share a dimension");
  CandidateGrid g;
  g.discrete_ = false;
  g.size_ = 1;
  g.spacing_.resize(lower.size());
  for (Eigen::Index a = 0; a < lower.size(); ++a) {
    const auto n = counts[static_cast<std::size_t>(a)];
    require(n >= 1, Errc::EmptyGrid, "euclidean grid axis with zero points");
    require(upper[a] >= lower[a], Errc::InvalidArgument, "euclidean grid upper < lower");
    g.size_ *= n;
    g.spacing_[a] = n > 1 ? (upper[a] - lower[a]) / static_cast<double>(n - 1) : (upper[a] - lower[a]);
  }
  g.lower_ = std::move(lower);
  g.upper_ = std::move(upper);
  g.counts_ = std::move(counts);
  return g;
}

CandidateGrid& CandidateGrid::with_refinement(GridRefinement r) {
  require(r.shrink > 0.0 && r.shrink < 1.0, Errc::InvalidArgument,
          "refinement shrink factor must lie in (0,1)");
  refine_ = r;
  return *this;
}

ParameterPoint CandidateGrid::point(std::size_t i) const {
  require(i < size_, Errc::InvalidArgument, "grid index out of range");
  if (discrete_) return ParameterPoint::discrete(static_cast<std::int64_t>(begin_ + i));
  const auto dim = lower_.size();
  Eigen::VectorXd p(dim);
  // Last axis varies fastest, so enumeration order is lexicographic.
  for (Eigen::Index a = dim - 1; a >= 0; --a) {
    const auto n = counts_[static_cast<std::size_t>(a)];
    const auto k = i % n;
    i /= n;
    p[a] = n > 1 ? lower_[a] + spacing_[a] * static_cast<double>(k) : 0.5 * (lower_[a] + upper_[a]);
  }
  return ParameterPoint::euclidean(std::move(p));
}

void SolverConfig::validate() const {
  require(lambda > 0.0, Errc::InvalidArgument, "solver lambda must be positive");
  require(max_atoms > 0 && max_outer_iters > 0 && fc_inner_iters > 0, Errc::InvalidArgument,
          "solver iteration and atom limits must be positive");
  require(tolerance_residual > 0.0 && tolerance_gap > 0.0, Errc::InvalidArgument,
          "solver tolerances must be positive");
  require(homotopy.decay > 0.0 && homotopy.decay < 1.0, Errc::InvalidArgument,
          "homotopy decay must lie in (0,1)");
  require(homotopy.min_lambda > 0.0, Errc::InvalidArgument, "homotopy min_lambda must be positive");
}

namespace {

std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Eigen::VectorXd feature_column(const LayerConstraintSet& c, const ParameterPoint& theta) {
  Eigen::VectorXd col(static_cast<Eigen::Index>(c.num_samples()));
  for (std::size_t i = 0; i < c.num_samples(); ++i)
    col[static_cast<Eigen::Index>(i)] = evaluate_basis(c.basis, view(c.inputs[i]), theta);
  return col;
}

// |R^T phi|_2 and the vector R^T phi.
double score_of(const Eigen::MatrixXd& R, const Eigen::VectorXd& phi, Eigen::VectorXd* v = nullptr) {
  Eigen::VectorXd out(R.cols());
  for (Eigen::Index j = 0; j < R.cols(); ++j)
    out[j] = simd::dot(view(phi), {R.col(j).data(), static_cast<std::size_t>(R.rows())});
  const double s = std::sqrt(simd::sum_squares(view(out)));
  if (v) *v = std::move(out);
  return s;
}

// Row-major table of grid features, one row of length N per candidate.
struct GridFeatures {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> table;

  GridFeatures(const LayerConstraintSet& c, const CandidateGrid& grid)
      : table(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(c.num_samples())) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto p = grid.point(g);
      for (std::size_t i = 0; i < c.num_samples(); ++i)
        table(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(i)) =
            evaluate_basis(c.basis, view(c.inputs[i]), p);
    }
  }
};

LmoResult run_lmo(const Eigen::MatrixXd& R, const LayerConstraintSet& c, const CandidateGrid& grid,
                  const GridFeatures& features) {
  const auto G = static_cast<std::size_t>(features.table.rows());
  const auto N = static_cast<std::size_t>(features.table.cols());
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(G));
  Eigen::VectorXd proj(static_cast<Eigen::Index>(G));
  for (Eigen::Index j = 0; j < R.cols(); ++j) {
    simd::matvec_rows({features.table.data(), G * N}, G, N,
                      {R.col(j).data(), N}, {proj.data(), G});
    sq += proj.cwiseAbs2();
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < G; ++g)
    if (sq[static_cast<Eigen::Index>(g)] > sq[static_cast<Eigen::Index>(best)]) best = g;

  LmoResult out;
  out.theta = grid.point(best);
  Eigen::VectorXd phi = features.table.row(static_cast<Eigen::Index>(best)).transpose();
  Eigen::VectorXd v;
  out.score = score_of(R, phi, &v);

  const auto& refine = grid.refinement();
  if (!grid.is_discrete() && refine.enabled && refine.steps > 0) {
    Eigen::VectorXd radius = grid.spacing() * refine.shrink;
    for (std::size_t step = 0; step < refine.steps; ++step) {
      for (Eigen::Index a = 0; a < radius.size(); ++a) {
        for (double sign : {-1.0, 1.0}) {
          Eigen::VectorXd cand = out.theta.coords();
          cand[a] += sign * radius[a];
          auto p = ParameterPoint::euclidean(cand);
          Eigen::VectorXd vc;
          const double s = score_of(R, feature_column(c, p), &vc);
          if (s > out.score) {
            out.score = s;
            out.theta = std::move(p);
            v = std::move(vc);
          }
        }
      }
      radius *= refine.shrink;
    }
  }

  if (out.score > 0.0) {
    out.direction = v / out.score;
  } else {
    out.direction = Eigen::VectorXd::Zero(R.cols());
    out.direction[0] = 1.0;
  }
  return out;
}

// Active set of a conditional-gradient run: locations, their feature
// columns (N x K) and weights (K x m).
struct ActiveSet {
  std::vector<ParameterPoint> points;
  Eigen::MatrixXd features;
  Eigen::MatrixXd weights;

  std::size_t size() const { return points.size(); }

  std::optional<std::size_t> find(const ParameterPoint& p) const {
    for (std::size_t k = 0; k < points.size(); ++k)
      if (points[k].same_location(p)) return k;
    return std::nullopt;
  }

  void add(const ParameterPoint& p, const Eigen::VectorXd& phi, const Eigen::VectorXd& w) {
    points.push_back(p);
    const auto K = features.cols();
    features.conservativeResize(phi.size(), K + 1);
    features.col(K) = phi;
    weights.conservativeResize(K + 1, w.size());
    weights.row(K) = w.transpose();
  }

  void drop_zero_rows() {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < weights.rows(); ++k)
      if (!(weights.row(k).array() == 0.0).all()) keep.push_back(k);
    if (keep.size() == points.size()) return;
    std::vector<ParameterPoint> p;
    Eigen::MatrixXd f(features.rows(), static_cast<Eigen::Index>(keep.size()));
    Eigen::MatrixXd w(static_cast<Eigen::Index>(keep.size()), weights.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      p.push_back(points[static_cast<std::size_t>(keep[i])]);
      f.col(static_cast<Eigen::Index>(i)) = features.col(keep[i]);
      w.row(static_cast<Eigen::Index>(i)) = weights.row(keep[i]);
    }
    points = std::move(p);
    features = std::move(f);
    weights = std::move(w);
  }

  Eigen::MatrixXd predictions(Eigen::Index N, Eigen::Index m) const {
    if (points.empty()) return Eigen::MatrixXd::Zero(N, m);
    return features * weights;
  }

  AtomicVectorMeasure to_measure(std::size_t m) const {
    AtomicVectorMeasure mu(m);
    for (std::size_t k = 0; k < points.size(); ++k)
      mu.add(points[k], weights.row(static_cast<Eigen::Index>(k)).transpose());
    return mu;
  }
};

ActiveSet active_from(const AtomicVectorMeasure& mu, const LayerConstraintSet& c) {
  ActiveSet a;
  a.features.resize(static_cast<Eigen::Index>(c.num_samples()), 0);
  a.weights.resize(0, static_cast<Eigen::Index>(c.target_dim()));
  for (const auto& atom : mu.atoms()) a.add(atom.location, feature_column(c, atom.location), atom.weight);
  return a;
}

double group_norm_sum(const Eigen::MatrixXd& W) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < W.rows(); ++k) s += W.row(k).norm();
  return s;
}

double objective_of(const Eigen::MatrixXd& F, const Eigen::MatrixXd& W, const Eigen::MatrixXd& T,
                    double lambda) {
  const Eigen::MatrixXd R = (W.rows() == 0) ? Eigen::MatrixXd(T) : Eigen::MatrixXd(T - F * W);
  return 0.5 * R.squaredNorm() + lambda * group_norm_sum(W);
}

double spectral_norm_sq(const Eigen::MatrixXd& F) {
  // Power iteration on F^T F from a deterministic start.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(F.cols()).normalized();
  double est = 0.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd u = F.transpose() * (F * v);
    const double n = u.norm();
    if (n == 0.0) return 0.0;
    const double next = v.dot(u);
    v = u / n;
    if (std::abs(next - est) <= 1e-12 * next) {
      est = next;
      break;
    }
    est = next;
  }
  return est;
}

// KKT violation of the group-lasso subproblem on the active set.
double kkt_violation(const Eigen::MatrixXd& F, const Eigen::MatrixXd& W, const Eigen::MatrixXd& T,
                     double lambda) {
  const Eigen::MatrixXd G = F.transpose() * (F * W - T);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < W.rows(); ++k) {
    const double wn = W.row(k).norm();
    const double v = wn > 0.0 ? (G.row(k) + lambda * W.row(k) / wn).norm()
                              : std::max(0.0, G.row(k).norm() - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

void prox_rows(Eigen::MatrixXd& W, double tau) {
  for (Eigen::Index k = 0; k < W.rows(); ++k) {
    const double n = W.row(k).norm();
    if (n <= tau) {
      W.row(k).setZero();
    } else {
      W.row(k) *= (1.0 - tau / n);
    }
  }
}

// Monotone FISTA on the active weights with step 1/L, L from power iteration.
void fully_corrective(ActiveSet& active, const Eigen::MatrixXd& T, double lambda,
                      std::size_t iters, double kkt_tol) {
  if (active.size() == 0) return;
  const auto& F = active.features;
  const double lip = 1.05 * spectral_norm_sq(F) + std::numeric_limits<double>::min();
  const double step = 1.0 / lip;

  Eigen::MatrixXd W = active.weights;
  Eigen::MatrixXd Y = W;
  double fw = objective_of(F, W, T, lambda);
  double t = 1.0;
  for (std::size_t it = 0; it < iters; ++it) {
    Eigen::MatrixXd Z = Y - step * (F.transpose() * (F * Y - T));
    prox_rows(Z, step * lambda);
    const double fz = objective_of(F, Z, T, lambda);
    const Eigen::MatrixXd prev = W;
    if (fz <= fw) {
      W = Z;
      fw = fz;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    Y = W + (t / t_next) * (Z - W) + ((t - 1.0) / t_next) * (W - prev);
    t = t_next;
    if ((it + 1) % 10 == 0 && kkt_violation(F, W, T, lambda) <= kkt_tol) break;
  }
  active.weights = std::move(W);
}

struct RunState {
  ActiveSet active;
  double objective = 0.0;
  double dual_gap = 0.0;
  double max_score = 0.0;
  bool converged = false;
};

RunState run_regularized(const LayerConstraintSet& c, const CandidateGrid& grid,
                         const GridFeatures& features, const SolverConfig& cfg, ActiveSet active,
                         std::vector<SolverTraceRow>& trace, std::size_t& iter_counter) {
  const auto& T = c.targets;
  const auto N = T.rows();
  const auto m = T.cols();
  const double lambda = cfg.lambda;
  const double threshold = lambda * (1.0 + cfg.tolerance_gap);
  const double kkt_tol = 0.5 * lambda * cfg.tolerance_gap;

  auto residual_of = [&](const ActiveSet& a) -> Eigen::MatrixXd { return T - a.predictions(N, m); };
  auto max_row_norm = [](const Eigen::MatrixXd& R) { return R.rowwise().norm().maxCoeff(); };

  RunState st;
  st.active = std::move(active);
  if (st.active.size() > 0) {
    fully_corrective(st.active, T, lambda, cfg.fc_inner_iters, kkt_tol);
    st.active.drop_zero_rows();
  }
  Eigen::MatrixXd R = residual_of(st.active);
  st.objective = 0.5 * R.squaredNorm() + lambda * group_norm_sum(st.active.weights);

  for (std::size_t outer = 0; outer < cfg.max_outer_iters; ++outer) {
    const LmoResult pick = run_lmo(R, c, grid, features);
    st.max_score = pick.score;
    trace.push_back({iter_counter++, lambda, st.objective, pick.score, st.active.size(), max_row_norm(R)});
    if (pick.score <= threshold) {
      st.converged = true;
      break;
    }
    if (!st.active.find(pick.theta)) {
      if (st.active.size() >= cfg.max_atoms)
        throw Error(Errc::AtomBudgetExceeded,
                    "atom budget " + std::to_string(cfg.max_atoms) + " reached before the gap closed");
      // Optimal weight for the new atom alone: prox step along its gradient.
      const Eigen::VectorXd phi = feature_column(c, pick.theta);
      const double phi_sq = phi.squaredNorm();
      st.active.add(pick.theta, phi, pick.direction * ((pick.score - lambda) / phi_sq));
    }
    fully_corrective(st.active, T, lambda, cfg.fc_inner_iters, kkt_tol);
    st.active.drop_zero_rows();
    R = residual_of(st.active);
    const double next = 0.5 * R.squaredNorm() + lambda * group_norm_sum(st.active.weights);
    // Every step starts from the previous iterate, so this cannot increase
    // beyond rounding.
    if (next > st.objective * (1.0 + 1e-12) + 1e-300)
      throw Error(Errc::DivergenceDetected, "conditional-gradient objective increased");
    st.objective = next;
  }
  if (!st.converged) st.max_score = run_lmo(R, c, grid, features).score;

  // Dual point U = R * min(1, lambda / max score) is feasible for the dual.
  const double scale = st.max_score > lambda ? lambda / st.max_score : 1.0;
  const Eigen::MatrixXd U = scale * R;
  const double dual = (U.array() * T.array()).sum() - 0.5 * U.squaredNorm();
  st.dual_gap = std::max(0.0, st.objective - dual);
  return st;
}

}  // namespace

Eigen::MatrixXd feature_matrix(const LayerConstraintSet& c, std::span<const ParameterPoint> points) {
  Eigen::MatrixXd F(static_cast<Eigen::Index>(c.num_samples()), static_cast<Eigen::Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) F.col(static_cast<Eigen::Index>(k)) = feature_column(c, points[k]);
  return F;
}

Eigen::MatrixXd evaluate_on_constraints(const AtomicVectorMeasure& mu, const LayerConstraintSet& c) {
  require(mu.target_dim() == c.target_dim(), Errc::DimensionMismatch,
          "measure and constraint target dimensions differ");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c.num_samples()),
                                              static_cast<Eigen::Index>(c.target_dim()));
  for (const auto& atom : mu.atoms()) out += feature_column(c, atom.location) * atom.weight.transpose();
  return out;
}

double max_residual(const AtomicVectorMeasure& mu, const LayerConstraintSet& c) {
  return (evaluate_on_constraints(mu, c) - c.targets).rowwise().norm().maxCoeff();
}

LmoResult lmo(const Eigen::MatrixXd& residuals, const LayerConstraintSet& c,
              const CandidateGrid& grid) {
  c.validate();
  require(grid.size() > 0, Errc::EmptyGrid, "LMO over an empty grid");
  require(residuals.rows() == static_cast<Eigen::Index>(c.num_samples()) &&
              residuals.cols() == static_cast<Eigen::Index>(c.target_dim()),
          Errc::DimensionMismatch, "residual matrix shape does not match the constraints");
  return run_lmo(residuals, c, grid, GridFeatures(c, grid));
}

Eigen::VectorXd prox_group(const Eigen::VectorXd& w, double tau) {
  require(tau >= 0.0, Errc::InvalidArgument, "prox threshold must be non-negative");
  const double n = w.norm();
  if (n <= tau) return Eigen::VectorXd::Zero(w.size());
  return (1.0 - tau / n) * w;
}

RegularizedSolution solve_regularized(const LayerConstraintSet& c, const CandidateGrid& grid,
                                      const SolverConfig& cfg,
                                      const AtomicVectorMeasure* warm_start) {
  c.validate();
  cfg.validate();
  require(grid.size() > 0, Errc::EmptyGrid, "solver grid is empty");
  const GridFeatures features(c, grid);
  ActiveSet start = active_from(warm_start ? *warm_start : AtomicVectorMeasure(c.target_dim()), c);
  std::vector<SolverTraceRow> trace;
  std::size_t iter = 0;
  RunState st = run_regularized(c, grid, features, cfg, std::move(start), trace, iter);

  RegularizedSolution out{st.active.to_measure(c.target_dim()), 0.0, 0.0, 0.0, false, {}};
  out.objective = st.objective;
  out.dual_gap = st.dual_gap;
  out.max_score = st.max_score;
  out.converged = st.converged;
  out.trace = std::move(trace);
  return out;
}

InterpolationSolution solve_interpolation(const LayerConstraintSet& c, const CandidateGrid& grid,
                                          const SolverConfig& cfg) {
  c.validate();
  cfg.validate();
  require(grid.size() > 0, Errc::EmptyGrid, "solver grid is empty");
  const auto m = c.target_dim();
  InterpolationSolution out{AtomicVectorMeasure(m), 0.0, 0.0, 0.0, {}};
  if ((c.targets.array() == 0.0).all()) return out;

  const GridFeatures features(c, grid);
  double lambda = cfg.homotopy.lambda_start > 0.0 ? cfg.homotopy.lambda_start
                                                   : run_lmo(c.targets, c, grid, features).score;
  require(lambda > 0.0, Errc::Infeasible, "targets are orthogonal to every grid feature");

  ActiveSet active = active_from(AtomicVectorMeasure(m), c);
  std::size_t iter = 0;
  double residual = std::numeric_limits<double>::infinity();
  for (;;) {
    SolverConfig stage = cfg;
    stage.lambda = lambda;
    RunState st = run_regularized(c, grid, features, stage, std::move(active), out.trace, iter);
    active = std::move(st.active);
    const Eigen::MatrixXd R = c.targets - active.predictions(c.targets.rows(), c.targets.cols());
    residual = R.rowwise().norm().maxCoeff();
    if (residual <= cfg.tolerance_residual) break;
    lambda *= cfg.homotopy.decay;
    if (lambda < cfg.homotopy.min_lambda)
      throw Error(Errc::Infeasible, "residual " + std::to_string(residual) +
                                        " above tolerance at the minimum homotopy lambda");
  }

  const std::size_t cap = c.num_samples() * m;
  out.measure = reduce_support(active.to_measure(m), c, cap);
  require(out.measure.size() <= cap, Errc::AtomBudgetExceeded,
          "support reduction left more than N*m atoms");
  out.tv = tv_norm(out.measure);
  out.residual = max_residual(out.measure, c);
  out.final_lambda = lambda;
  return out;
}

AtomicVectorMeasure reduce_support(const AtomicVectorMeasure& mu, const LayerConstraintSet& c,
                                   std::size_t max_atoms) {
  c.validate();
  const auto m = static_cast<Eigen::Index>(c.target_dim());
  const auto N = static_cast<Eigen::Index>(c.num_samples());

  std::vector<ParameterPoint> points;
  std::vector<Eigen::VectorXd> dirs;
  std::vector<Eigen::VectorXd> phis;
  std::vector<double> coef;
  for (const auto& atom : mu.atoms()) {
    points.push_back(atom.location);
    coef.push_back(atom.weight.norm());
    dirs.push_back(atom.weight / coef.back());
    phis.push_back(feature_column(c, atom.location));
  }

  while (points.size() > max_atoms) {
    const auto K = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd U(N * m, K);
    for (Eigen::Index k = 0; k < K; ++k) {
      const Eigen::MatrixXd outer = phis[static_cast<std::size_t>(k)] * dirs[static_cast<std::size_t>(k)].transpose();
      U.col(k) = Eigen::Map<const Eigen::VectorXd>(outer.data(), N * m);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(U, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smallest = K > N * m ? 0.0 : sv[sv.size() - 1];
    if (K <= N * m && smallest > 1e-12 * sv[0]) break;  // independent: nothing to remove
    Eigen::VectorXd alpha = svd.matrixV().col(K - 1);
    if (alpha.sum() > 0.0) alpha = -alpha;

    std::size_t hit = 0;
    double step = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double a = alpha[static_cast<Eigen::Index>(k)];
      if (a < 0.0 && coef[k] / -a < step) {
        step = coef[k] / -a;
        hit = k;
      }
    }
    for (std::size_t k = 0; k < points.size(); ++k) coef[k] += step * alpha[static_cast<Eigen::Index>(k)];
    coef[hit] = 0.0;

    std::vector<ParameterPoint> p2;
    std::vector<Eigen::VectorXd> d2, f2;
    std::vector<double> c2;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (coef[k] <= 0.0) continue;
      p2.push_back(points[k]);
      d2.push_back(dirs[k]);
      f2.push_back(phis[k]);
      c2.push_back(coef[k]);
    }
    points = std::move(p2);
    dirs = std::move(d2);
    phis = std::move(f2);
    coef = std::move(c2);
  }

  AtomicVectorMeasure out(c.target_dim());
  for (std::size_t k = 0; k < points.size(); ++k) out.add(points[k], coef[k] * dirs[k]);
  return out;
}

}  // namespace rkbs
