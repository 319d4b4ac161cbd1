#include "rkbs/network.hpp"

#include <cmath>
#include <string>

#include "rkbs/error.hpp"
#include "rkbs/simd/kernels.hpp"

namespace rkbs {

namespace {

std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::vector<std::uint64_t> neuron_indices(const LayerMeasure& layer) {
  std::vector<std::uint64_t> out;
  for (const auto& a : layer.measure.atoms())
    if (a.location.index() != 0) out.push_back(a.location.index());
  return out;
}

double hidden_offset(const LayerMeasure& layer) { return layer.basis.discrete_neural().offset; }

}  // namespace

std::size_t LayerMeasure::width() const {
  if (basis.is_continuous_neural()) return measure.size();
  std::size_t n = 0;
  for (const auto& a : measure.atoms())
    if (a.location.index() != 0) ++n;
  return n;
}

DeepMeasureNetwork::DeepMeasureNetwork(std::vector<LayerMeasure> layers)
    : layers_(std::move(layers)) {
  validate();
}

void DeepMeasureNetwork::validate() const {
  require(!layers_.empty(), Errc::DimensionMismatch, "a network needs at least one layer");
  require(layers_.front().basis.is_input_affine(), Errc::KindMismatch,
          "layer 0 must use the input-affine basis");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (l == 0) {
      require(layer.basis.input_affine().input_dim == layer.input_dim, Errc::DimensionMismatch,
              "input-affine basis dimension differs from layer input dimension");
    } else {
      require(!layer.basis.is_input_affine(), Errc::KindMismatch,
              "only layer 0 may use the input-affine basis");
    }
    require(layer.input_dim > 0, Errc::DimensionMismatch, "layer input dimension must be positive");
    if (l + 1 < layers_.size()) {
      require(layer.output_dim() == layers_[l + 1].input_dim, Errc::DimensionMismatch,
              "layer " + std::to_string(l) + " outputs dimension " +
                  std::to_string(layer.output_dim()) + " but layer " + std::to_string(l + 1) +
                  " expects " + std::to_string(layers_[l + 1].input_dim));
    }
    for (const auto& a : layer.measure.atoms()) {
      require(layer.basis.admissible(a.location, layer.input_dim), Errc::KindMismatch,
              "layer " + std::to_string(l) + " has an atom outside its parameter space");
    }
  }
}

std::vector<std::size_t> DeepMeasureNetwork::dims() const {
  std::vector<std::size_t> d;
  d.reserve(layers_.size() + 1);
  for (const auto& layer : layers_) d.push_back(layer.input_dim);
  d.push_back(output_dim());
  return d;
}

void DeepMeasureNetwork::set_layer(std::size_t l, LayerMeasure layer) {
  require(l < layers_.size(), Errc::InvalidArgument, "layer index out of range");
  auto backup = std::move(layers_[l]);
  layers_[l] = std::move(layer);
  try {
    validate();
  } catch (...) {
    layers_[l] = std::move(backup);
    throw;
  }
}

Eigen::VectorXd apply_layer(const LayerMeasure& layer, const Eigen::VectorXd& x) {
  require(static_cast<std::size_t>(x.size()) == layer.input_dim, Errc::DimensionMismatch,
          "layer expects input dimension " + std::to_string(layer.input_dim) + ", got " +
              std::to_string(x.size()));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layer.output_dim()));
  const auto xs = view(x);
  for (const auto& atom : layer.measure.atoms()) {
    const double phi = evaluate_basis(layer.basis, xs, atom.location);
    simd::axpy(phi, view(atom.weight), {out.data(), static_cast<std::size_t>(out.size())});
  }
  return out;
}

Eigen::VectorXd forward(const DeepMeasureNetwork& net, const Eigen::VectorXd& x) {
  Eigen::VectorXd h = x;
  for (const auto& layer : net.layers()) h = apply_layer(layer, h);
  return h;
}

double complexity_upper_bound(const DeepMeasureNetwork& net) {
  double total = 0.0;
  for (const auto& layer : net.layers()) total += tv_norm(layer.measure);
  return total;
}

double layer_lipschitz_bound(const LayerMeasure& layer) {
  const double c = layer.basis.lipschitz_constant();
  if (layer.basis.is_continuous_neural()) {
    double s = 0.0;
    for (const auto& a : layer.measure.atoms())
      s += a.weight.norm() * window_at(layer.basis, a.location) * a.location.coords().norm();
    return c * s;
  }
  double sq = 0.0;
  for (const auto& a : layer.measure.atoms()) {
    if (a.location.index() == 0) continue;
    const double t = a.weight.norm() * window_at(layer.basis, a.location);
    sq += t * t;
  }
  return c * std::sqrt(sq);
}

std::vector<std::size_t> FiniteNetwork::hidden_widths() const {
  std::vector<std::size_t> w;
  for (std::size_t l = 0; l + 1 < weights.size(); ++l)
    w.push_back(static_cast<std::size_t>(weights[l].rows()));
  return w;
}

void FiniteNetwork::validate() const {
  require(!weights.empty(), Errc::DimensionMismatch, "finite network has no layers");
  require(weights.size() == biases.size(), Errc::DimensionMismatch,
          "finite network needs one bias per weight matrix");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    require(weights[l].rows() == biases[l].size(), Errc::DimensionMismatch,
            "bias " + std::to_string(l + 1) + " does not match its weight matrix");
    if (l > 0) {
      require(weights[l].cols() == weights[l - 1].rows(), Errc::DimensionMismatch,
              "weight matrix " + std::to_string(l + 1) + " does not chain with its predecessor");
    }
  }
}

Eigen::VectorXd forward_finite(const FiniteNetwork& net, const Eigen::VectorXd& x) {
  net.validate();
  require(x.size() == net.weights.front().cols(), Errc::DimensionMismatch,
          "finite network expects input dimension " + std::to_string(net.weights.front().cols()));
  Eigen::VectorXd h = net.weights.front() * x + net.biases.front();
  for (std::size_t l = 1; l < net.weights.size(); ++l) {
    Eigen::VectorXd a = h.unaryExpr([&](double v) { return net.activation(v); });
    h = net.weights[l] * a + net.biases[l];
  }
  return h;
}

FiniteNetwork export_finite(const DeepMeasureNetwork& net) {
  const auto layers = net.layers();
  for (std::size_t l = 1; l < layers.size(); ++l) {
    require(layers[l].basis.is_discrete_neural(), Errc::UnsupportedBasis,
            "layer " + std::to_string(l) + " is not a discrete neural layer");
    require(layers[l].basis.discrete_neural().activation == layers[1].basis.discrete_neural().activation,
            Errc::UnsupportedBasis, "hidden layers use different activations");
  }

  FiniteNetwork out;
  if (layers.size() > 1) out.activation = layers[1].basis.discrete_neural().activation;

  // Coordinates of x^{(l)} read by layer l: V^{(l)} selects these rows.
  std::vector<std::vector<std::uint64_t>> read(layers.size());
  for (std::size_t l = 1; l < layers.size(); ++l) read[l] = neuron_indices(layers[l]);

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const bool last = l + 1 == layers.size();
    const auto rows = last ? layer.output_dim() : read[l + 1].size();
    const double next_offset = last ? 0.0 : hidden_offset(layers[l + 1]);

    // Columns: inputs 1..d for layer 0, hidden units of layer l otherwise.
    std::vector<std::uint64_t> columns;
    if (l == 0) {
      for (std::uint64_t j = 1; j <= layer.input_dim; ++j) columns.push_back(j);
    } else {
      columns = read[l];
    }

    auto row_of = [&](const Eigen::VectorXd& w, std::size_t r) {
      if (last) return w[static_cast<Eigen::Index>(r)];
      const auto coord = read[l + 1][r] - 1;
      return coord < static_cast<std::uint64_t>(w.size()) ? w[static_cast<Eigen::Index>(coord)] : 0.0;
    };

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                              static_cast<Eigen::Index>(columns.size()));
    Eigen::VectorXd b = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(rows), next_offset);
    std::size_t col = 0;
    for (const auto& atom : layer.measure.atoms()) {
      const auto n = atom.location.index();
      if (n == 0) {
        for (std::size_t r = 0; r < rows; ++r) b[static_cast<Eigen::Index>(r)] += row_of(atom.weight, r);
        continue;
      }
      while (columns[col] != n) ++col;
      const double beta = window_at(layer.basis, atom.location);
      for (std::size_t r = 0; r < rows; ++r)
        W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = row_of(atom.weight, r) * beta;
    }
    out.weights.push_back(std::move(W));
    out.biases.push_back(std::move(b));
  }
  return out;
}

double discrete_corollary_bound(const FiniteNetwork& finite, const DeepMeasureNetwork& source) {
  finite.validate();
  const auto layers = source.layers();
  require(finite.weights.size() == layers.size(), Errc::DimensionMismatch,
          "finite network depth differs from its source");
  double total = 0.0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& W = finite.weights[l];
    const bool last = l + 1 == layers.size();
    std::vector<double> beta(static_cast<std::size_t>(W.cols()), 1.0);
    if (l > 0) {
      const auto idx = neuron_indices(layers[l]);
      require(idx.size() == beta.size(), Errc::DimensionMismatch,
              "finite layer width differs from source atom count");
      for (std::size_t k = 0; k < idx.size(); ++k)
        beta[k] = window_at(layers[l].basis, ParameterPoint::discrete(static_cast<std::int64_t>(idx[k])));
    }
    for (Eigen::Index k = 0; k < W.cols(); ++k) total += W.col(k).norm() / beta[static_cast<std::size_t>(k)];
    const double offset = last ? 0.0 : hidden_offset(layers[l + 1]);
    total += (finite.biases[l].array() - offset).matrix().norm();
  }
  return total;
}

}  // namespace rkbs
