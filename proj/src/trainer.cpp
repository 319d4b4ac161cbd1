#include "rkbs/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "rkbs/error.hpp"
#include "rkbs/simd/kernels.hpp"

namespace rkbs {

double LossFunction::value(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y) const {
  require(yhat.size() == y.size(), Errc::DimensionMismatch, "prediction and label sizes differ");
  if (kind_ == Kind::Squared) return 0.5 * (yhat - y).squaredNorm();
  double s = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const double z = y[j] * yhat[j];
    s += z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  }
  return s;
}

Eigen::VectorXd LossFunction::gradient(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y) const {
  require(yhat.size() == y.size(), Errc::DimensionMismatch, "prediction and label sizes differ");
  if (kind_ == Kind::Squared) return yhat - y;
  Eigen::VectorXd g(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) g[j] = -y[j] / (1.0 + std::exp(y[j] * yhat[j]));
  return g;
}

void Dataset::validate() const {
  require(!x.empty(), Errc::DimensionMismatch, "dataset is empty");
  require(x.size() == y.size(), Errc::DimensionMismatch, "dataset has unequal numbers of inputs and labels");
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i].size() == x.front().size() && x[i].size() > 0, Errc::DimensionMismatch,
            "dataset inputs differ in dimension");
    require(y[i].size() == y.front().size() && y[i].size() > 0, Errc::DimensionMismatch,
            "dataset labels differ in dimension");
  }
}

void TrainConfig::validate() const {
  for (auto w : init_widths) require(w >= 1, Errc::InvalidArgument, "init widths must be >= 1");
  require(lambda >= 0.0, Errc::InvalidArgument, "lambda must be non-negative");
  require(step_size > 0.0, Errc::InvalidArgument, "step_size must be positive");
  require(threads >= 1, Errc::InvalidArgument, "threads must be >= 1");
  require(divergence_factor > 1.0, Errc::InvalidArgument, "divergence_factor must exceed 1");
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += workers) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_shapes(const DeepMeasureNetwork& net, const Dataset& data) {
  data.validate();
  require(data.input_dim() == net.input_dim(), Errc::DimensionMismatch,
          "dataset input dimension " + std::to_string(data.input_dim()) + " differs from network " +
              std::to_string(net.input_dim()));
  require(data.output_dim() == net.output_dim(), Errc::DimensionMismatch,
          "dataset output dimension " + std::to_string(data.output_dim()) + " differs from network " +
              std::to_string(net.output_dim()));
}

// Loss and gradients of one sample, accumulated into `grads`.
double backprop_sample(const DeepMeasureNetwork& net, const Eigen::VectorXd& x0,
                       const Eigen::VectorXd& y, const LossFunction& loss, WeightGradients& grads) {
  const auto layers = net.layers();
  std::vector<Eigen::VectorXd> h{x0};
  for (const auto& layer : layers) h.push_back(apply_layer(layer, h.back()));

  Eigen::VectorXd g = loss.gradient(h.back(), y);
  const double value = loss.value(h.back(), y);
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const auto& xin = h[l];
    Eigen::VectorXd gin = Eigen::VectorXd::Zero(xin.size());
    const auto atoms = layer.measure.atoms();
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const auto jet = evaluate_basis_jet(layer.basis, view(xin), atoms[k].location);
      auto& gk = grads[l][k];
      simd::axpy(jet.value, view(g), {gk.data(), static_cast<std::size_t>(gk.size())});
      if (l == 0 || jet.slope == 0.0) continue;
      const double wg = simd::dot(view(atoms[k].weight), view(g));
      if (layer.basis.is_continuous_neural()) {
        gin += (jet.slope * wg) * atoms[k].location.coords();
      } else if (jet.coord >= 0) {
        gin[jet.coord] += jet.slope * wg;
      }
    }
    g = std::move(gin);
  }
  return value;
}

WeightGradients zero_gradients(const DeepMeasureNetwork& net) {
  WeightGradients out;
  for (const auto& layer : net.layers()) {
    std::vector<Eigen::VectorXd> g;
    for (std::size_t k = 0; k < layer.measure.size(); ++k)
      g.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layer.output_dim())));
    out.push_back(std::move(g));
  }
  return out;
}

struct RiskAndGrad {
  double risk;
  WeightGradients grads;
};

RiskAndGrad risk_and_grad(const DeepMeasureNetwork& net, const Dataset& data,
                          const LossFunction& loss, std::size_t threads) {
  const auto n = data.size();
  std::vector<WeightGradients> per(n);
  std::vector<double> values(n);
  parallel_for(n, threads, [&](std::size_t i) {
    per[i] = zero_gradients(net);
    values[i] = backprop_sample(net, data.x[i], data.y[i], loss, per[i]);
  });
  RiskAndGrad out{0.0, zero_gradients(net)};
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.risk += values[i];
    for (std::size_t l = 0; l < out.grads.size(); ++l)
      for (std::size_t k = 0; k < out.grads[l].size(); ++k) out.grads[l][k] += per[i][l][k];
  }
  out.risk *= inv;
  for (auto& layer : out.grads)
    for (auto& g : layer) g *= inv;
  return out;
}

std::size_t atoms_alive(const DeepMeasureNetwork& net) {
  std::size_t n = 0;
  for (const auto& layer : net.layers()) n += layer.measure.size();
  return n;
}

}  // namespace

double empirical_risk(const DeepMeasureNetwork& net, const Dataset& data, const LossFunction& loss,
                      std::size_t threads) {
  check_shapes(net, data);
  std::vector<double> values(data.size());
  parallel_for(data.size(), threads,
               [&](std::size_t i) { values[i] = loss.value(forward(net, data.x[i]), data.y[i]); });
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(data.size());
}

double objective(const DeepMeasureNetwork& net, const Dataset& data, const LossFunction& loss,
                 double lambda, std::size_t threads) {
  return empirical_risk(net, data, loss, threads) + lambda * complexity_upper_bound(net);
}

WeightGradients grad_weights(const DeepMeasureNetwork& net, const Dataset& data,
                             const LossFunction& loss, std::size_t threads) {
  check_shapes(net, data);
  return risk_and_grad(net, data, loss, threads).grads;
}

DeepMeasureNetwork init_network(const TrainConfig& cfg, std::size_t input_dim,
                                std::size_t output_dim) {
  cfg.validate();
  require(input_dim > 0 && output_dim > 0, Errc::DimensionMismatch,
          "network input and output dimensions must be positive");
  std::mt19937_64 rng(cfg.seed);

  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), cfg.init_widths.begin(), cfg.init_widths.end());
  dims.push_back(output_dim);

  std::vector<LayerMeasure> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto in = dims[l];
    const auto out = dims[l + 1];
    const double s = cfg.init_scale > 0.0 ? cfg.init_scale : 1.0 / std::sqrt(static_cast<double>(in + 1));
    std::uniform_real_distribution<double> unif(-s, s);
    AtomicVectorMeasure mu(out);
    for (std::uint64_t n = 0; n <= in; ++n) {
      Eigen::VectorXd w(static_cast<Eigen::Index>(out));
      for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = unif(rng);
      mu.add(ParameterPoint::discrete(static_cast<std::int64_t>(n)), w);
    }
    if (l == 0) {
      layers.push_back({InputAffine{in}, std::move(mu), in});
    } else {
      layers.push_back({DiscreteNeural{cfg.activation, cfg.window, true, cfg.offset}, std::move(mu), in});
    }
  }
  return DeepMeasureNetwork(std::move(layers));
}

TrainResult train_prox(const TrainConfig& cfg, const Dataset& data, const LossFunction& loss) {
  cfg.validate();
  data.validate();
  DeepMeasureNetwork net = init_network(cfg, data.input_dim(), data.output_dim());

  auto total = [&](const DeepMeasureNetwork& candidate, double risk) {
    return risk + cfg.lambda * complexity_upper_bound(candidate);
  };

  auto rg = risk_and_grad(net, data, loss, cfg.threads);
  double obj = total(net, rg.risk);
  const double initial = obj;
  require(std::isfinite(obj), Errc::DivergenceDetected, "initial objective is not finite");

  std::vector<TrainTraceRow> trace;
  trace.push_back({0, rg.risk, complexity_upper_bound(net), obj, atoms_alive(net)});

  double step = cfg.step_size;
  for (std::size_t it = 1; it <= cfg.steps; ++it) {
    bool accepted = false;
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      std::vector<LayerMeasure> next;
      const auto layers = net.layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        AtomicVectorMeasure mu(layers[l].output_dim());
        const auto atoms = layers[l].measure.atoms();
        for (std::size_t k = 0; k < atoms.size(); ++k) {
          Eigen::VectorXd w = atoms[k].weight - step * rg.grads[l][k];
          const bool bias = atoms[k].location.index() == 0;
          if (!(bias && cfg.exempt_bias)) {
            const double nrm = w.norm();
            const double tau = step * cfg.lambda;
            w = nrm <= tau ? Eigen::VectorXd::Zero(w.size()).eval() : ((1.0 - tau / nrm) * w).eval();
          }
          mu.add(atoms[k].location, w);
        }
        next.push_back({layers[l].basis, std::move(mu), layers[l].input_dim});
      }
      DeepMeasureNetwork candidate(std::move(next));
      auto cand_rg = risk_and_grad(candidate, data, loss, cfg.threads);
      const double cand_obj = total(candidate, cand_rg.risk);
      if (!std::isfinite(cand_obj) || cand_obj > cfg.divergence_factor * std::max(initial, 1e-300)) {
        if (!std::isfinite(cand_obj) && attempt + 1 == 60)
          throw Error(Errc::DivergenceDetected, "objective became non-finite at step " + std::to_string(it));
        step *= 0.5;
        continue;
      }
      if (cand_obj <= obj) {
        net = std::move(candidate);
        rg = std::move(cand_rg);
        obj = cand_obj;
        accepted = true;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;  // no descent left at any tested step size
    trace.push_back({it, rg.risk, complexity_upper_bound(net), obj, atoms_alive(net)});
  }
  if (obj > cfg.divergence_factor * initial)
    throw Error(Errc::DivergenceDetected, "objective exceeded the divergence threshold");
  return {std::move(net), std::move(trace)};
}

}  // namespace rkbs
