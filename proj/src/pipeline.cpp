#include "rkbs/pipeline.hpp"

#include <algorithm>
#include <spdlog/spdlog.h>

#include "rkbs/error.hpp"

namespace rkbs {

Representations hidden_representations(const DeepMeasureNetwork& net,
                                       const std::vector<Eigen::VectorXd>& inputs) {
  Representations reps(net.num_layers() + 1);
  reps[0] = inputs;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    reps[l + 1].reserve(inputs.size());
    for (const auto& x : reps[l]) reps[l + 1].push_back(apply_layer(net.layer(l), x));
  }
  return reps;
}

Eigen::MatrixXd Projection::matrix(std::size_t source_dim) const {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(selected.size()),
                                            static_cast<Eigen::Index>(source_dim));
  for (std::size_t r = 0; r < selected.size(); ++r) {
    require(selected[r] < source_dim, Errc::DimensionMismatch, "projection selects a missing coordinate");
    P(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(selected[r])) = 1.0;
  }
  return P;
}

Eigen::VectorXd Projection::compact(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(selected.size()));
  for (std::size_t r = 0; r < selected.size(); ++r) {
    const auto s = static_cast<Eigen::Index>(selected[r]);
    out[static_cast<Eigen::Index>(r)] = s < v.size() ? v[s] : 0.0;
  }
  return out;
}

Eigen::VectorXd Projection::embed(const Eigen::VectorXd& compact_v) const {
  require(static_cast<std::size_t>(compact_v.size()) == selected.size(), Errc::DimensionMismatch,
          "embedding expects one value per selected coordinate");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ambient_dim));
  for (std::size_t r = 0; r < selected.size(); ++r)
    out[static_cast<Eigen::Index>(selected[r])] = compact_v[static_cast<Eigen::Index>(r)];
  return out;
}

Projection project_layer(const DeepMeasureNetwork& net, std::size_t l) {
  require(l < net.num_layers(), Errc::InvalidArgument, "layer index out of range");
  Projection p;
  const auto out_dim = net.layer(l).output_dim();
  if (l + 1 == net.num_layers()) {
    for (std::size_t j = 0; j < out_dim; ++j) p.selected.push_back(j);
    p.ambient_dim = out_dim;
    return p;
  }
  const auto& next = net.layer(l + 1);
  require(next.basis.is_discrete_neural(), Errc::UnsupportedBasis,
          "projection needs a discrete basis in layer " + std::to_string(l + 1));
  for (const auto& atom : next.measure.atoms()) {
    const auto n = atom.location.index();
    if (n >= 1) p.selected.push_back(static_cast<std::size_t>(n - 1));
  }
  p.ambient_dim = p.selected.empty() ? 1 : p.selected.back() + 1;
  return p;
}

AtomicVectorMeasure project_measure(const AtomicVectorMeasure& mu, const Projection& p) {
  AtomicVectorMeasure out(p.ambient_dim);
  for (const auto& atom : mu.atoms()) out.add(atom.location, p.embed(p.compact(atom.weight)));
  return out;
}

CandidateGrid default_grid(const LayerMeasure& layer) {
  if (layer.basis.is_input_affine()) return CandidateGrid::discrete(0, layer.input_dim + 1);
  require(layer.basis.is_discrete_neural(), Errc::UnsupportedBasis,
          "continuous layers need an explicit candidate grid");
  const std::uint64_t first = layer.basis.discrete_neural().bias_atom ? 0 : 1;
  return CandidateGrid::discrete(first, layer.input_dim + 1);
}

DeepMeasureNetwork splice(const DeepMeasureNetwork& net, std::size_t l, LayerMeasure layer) {
  require(l < net.num_layers(), Errc::InvalidArgument, "layer index out of range");
  std::vector<LayerMeasure> layers(net.layers().begin(), net.layers().end());
  layers[l] = std::move(layer);
  if (l + 1 < layers.size()) layers[l + 1].input_dim = layers[l].output_dim();
  return DeepMeasureNetwork(std::move(layers));
}

namespace {

AtomicVectorMeasure embed_measure(const AtomicVectorMeasure& compact, const Projection& p) {
  AtomicVectorMeasure out(p.ambient_dim);
  for (const auto& atom : compact.atoms()) out.add(atom.location, p.embed(atom.weight));
  return out;
}

}  // namespace

LayerRefit sparsify_layer(std::size_t l, const Representations& reps, const DeepMeasureNetwork& net,
                          const CandidateGrid& grid, const Dataset& data, const PipelineConfig& cfg) {
  require(reps.size() == net.num_layers() + 1, Errc::DimensionMismatch,
          "representations do not match the network depth");
  const auto& current = net.layer(l);
  const Projection proj = project_layer(net, l);
  const auto N = reps[l].size();
  const double tv_current = tv_norm(current.measure);

  LayerRefit out{{current.basis, AtomicVectorMeasure(proj.ambient_dim), current.input_dim},
                 proj.selected.size(), 0.0, 0.0, "reduced", "", {}};
  if (proj.selected.empty()) return out;  // nothing downstream reads this layer

  LayerConstraintSet c{reps[l], Eigen::MatrixXd(static_cast<Eigen::Index>(N),
                                                static_cast<Eigen::Index>(proj.selected.size())),
                       current.basis};
  for (std::size_t i = 0; i < N; ++i)
    c.targets.row(static_cast<Eigen::Index>(i)) = proj.compact(reps[l + 1][i]).transpose();

  const std::size_t cap = N * proj.selected.size();
  AtomicVectorMeasure reduced =
      reduce_support(apply_linear_to_weights(current.measure, proj.matrix(current.output_dim())), c, cap);
  out.tv_reduced = tv_norm(reduced);

  auto score = [&](const AtomicVectorMeasure& compact) {
    LayerMeasure layer{current.basis, embed_measure(compact, proj), current.input_dim};
    return objective(splice(net, l, layer), data, cfg.loss, cfg.lambda, cfg.threads);
  };

  AtomicVectorMeasure chosen = reduced;
  double best = score(reduced);
  try {
    auto sol = solve_interpolation(c, grid, cfg.solver);
    out.trace = sol.trace;
    const double obj = score(sol.measure);
    spdlog::debug("layer {}: solver tv {:.6g} ({} atoms), reduced tv {:.6g} ({} atoms)", l, sol.tv,
                  sol.measure.size(), out.tv_reduced, reduced.size());
    if (obj <= best && sol.tv <= tv_current + cfg.tv_tolerance && sol.measure.size() <= cap) {
      chosen = std::move(sol.measure);
      best = obj;
      out.source = "solver";
    }
  } catch (const Error& e) {
    if (e.code() != Errc::Infeasible && e.code() != Errc::AtomBudgetExceeded) throw;
    out.note = e.what();
    spdlog::warn("layer {}: solver unusable ({}); keeping the reduced layer", l, e.what());
  }

  out.residual = max_residual(chosen, c);
  out.layer.measure = embed_measure(chosen, proj);
  return out;
}

bool SparsifyReport::widths_ok() const {
  for (const auto& r : layers)
    if (r.support_after > r.bound) return false;
  for (std::size_t j = 1; j + 1 < output_dims.size(); ++j)
    if (output_dims[j] > num_samples * output_dims[j + 1]) return false;
  return true;
}

bool SparsifyReport::objective_ok() const { return objective_after <= objective_before + objective_tolerance; }

bool SparsifyReport::deviation_ok() const { return max_output_deviation <= certified_deviation; }

bool SparsifyReport::tv_ok(double tol) const {
  for (const auto& r : layers)
    if (r.tv_after > r.tv_before + tol) return false;
  return true;
}

bool SparsifyReport::phi_ok(double tol) const { return corollary_bound <= phi_bound + tol; }

bool SparsifyReport::all_ok() const {
  return widths_ok() && objective_ok() && deviation_ok() && tv_ok() && phi_ok();
}

RepresenterResult run_representer(const DeepMeasureNetwork& net, const Dataset& data,
                                  const PipelineConfig& cfg,
                                  const std::vector<std::optional<CandidateGrid>>& grids) {
  cfg.solver.validate();
  data.validate();
  require(grids.empty() || grids.size() == net.num_layers(), Errc::InvalidArgument,
          "grid overrides must cover every layer");

  SparsifyReport report;
  report.num_samples = data.size();
  report.lambda = cfg.lambda;
  report.tolerance_residual = cfg.solver.tolerance_residual;
  report.objective_tolerance = cfg.objective_tolerance;
  report.objective_before = objective(net, data, cfg.loss, cfg.lambda, cfg.threads);
  report.layers.resize(net.num_layers());

  DeepMeasureNetwork current = net;
  for (std::size_t l = net.num_layers(); l-- > 0;) {
    const auto reps = hidden_representations(current, data.x);
    LayerRefit refit = [&] {
      try {
        const CandidateGrid grid = (!grids.empty() && grids[l]) ? *grids[l] : default_grid(current.layer(l));
        return sparsify_layer(l, reps, current, grid, data, cfg);
      } catch (const Error& e) {
        throw Error(e.code(), "layer " + std::to_string(l) + ": " + e.what());
      }
    }();

    auto& r = report.layers[l];
    r.layer = l;
    r.width_before = net.layer(l).width();
    r.tv_before = tv_norm(net.layer(l).measure);
    r.tv_reduced = refit.tv_reduced;
    r.residual = refit.residual;
    r.bound = data.size() * refit.targets;
    r.source = refit.source;
    r.note = refit.note;
    r.solver_trace = std::move(refit.trace);
    current = splice(current, l, std::move(refit.layer));
  }

  for (std::size_t l = 0; l < current.num_layers(); ++l) {
    auto& r = report.layers[l];
    r.width_after = current.layer(l).width();
    r.support_after = current.layer(l).measure.size();
    r.tv_after = tv_norm(current.layer(l).measure);
  }

  FiniteNetwork finite = export_finite(current);
  report.output_dims.push_back(finite.input_dim());
  for (auto w : finite.hidden_widths()) report.output_dims.push_back(w);
  report.output_dims.push_back(finite.output_dim());

  report.objective_after = objective(current, data, cfg.loss, cfg.lambda, cfg.threads);
  report.phi_bound = complexity_upper_bound(current);
  report.corollary_bound = discrete_corollary_bound(finite, current);

  for (const auto& x : data.x)
    report.max_output_deviation =
        std::max(report.max_output_deviation, (forward(current, x) - forward(net, x)).norm());

  // Residual of layer l passes through the Lipschitz bounds of layers l+1..L.
  double downstream = 1.0;
  for (std::size_t l = current.num_layers(); l-- > 0;) {
    const double tol = std::max(cfg.solver.tolerance_residual, report.layers[l].residual);
    report.certified_deviation += tol * downstream;
    if (l > 0) downstream *= layer_lipschitz_bound(current.layer(l));
  }

  return {std::move(current), std::move(finite), std::move(report)};
}

}  // namespace rkbs
