#pragma once

#include <Eigen/Core>
#include <cmath>
#include <initializer_list>
#include <random>
#include <vector>

#include "rkbs/basis.hpp"
#include "rkbs/measure.hpp"
#include "rkbs/network.hpp"
#include "rkbs/trainer.hpp"

namespace testutil {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Eigen::VectorXd gaussian(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng);
  return v;
}

inline rkbs::ParameterPoint idx(std::int64_t n) { return rkbs::ParameterPoint::discrete(n); }

/// Random atomic measure with `atoms` distinct discrete locations in [0, span).
inline rkbs::AtomicVectorMeasure random_measure(std::mt19937_64& rng, std::size_t m, std::size_t atoms,
                                                std::int64_t span = 50) {
  rkbs::AtomicVectorMeasure mu(m);
  std::uniform_int_distribution<std::int64_t> loc(0, span - 1);
  while (mu.size() < atoms) {
    const auto p = idx(loc(rng));
    if (mu.find(p) == nullptr) mu.add(p, gaussian(rng, m));
  }
  return mu;
}

/// Discrete network with dense atoms: dims = {d_0, d_1, ..., d_{L+1}}.
inline rkbs::DeepMeasureNetwork random_discrete_net(std::mt19937_64& rng, const std::vector<std::size_t>& dims,
                                                    rkbs::Activation act = rkbs::Activation::relu(),
                                                    rkbs::WindowSequence window = rkbs::WindowSequence::geometric(0.9),
                                                    double offset = 0.0, double density = 1.0) {
  std::bernoulli_distribution keep(density);
  std::vector<rkbs::LayerMeasure> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t in = dims[l], out = dims[l + 1];
    rkbs::AtomicVectorMeasure mu(out);
    for (std::size_t k = 0; k <= in; ++k)
      if (k == 0 || keep(rng)) mu.add(idx(static_cast<std::int64_t>(k)), gaussian(rng, out, 1.0 / std::sqrt(in + 1.0)));
    if (l == 0) {
      layers.push_back({rkbs::BasisFunction(rkbs::InputAffine{in}), mu, in});
    } else {
      layers.push_back({rkbs::BasisFunction(rkbs::DiscreteNeural{act, window, true, offset}), mu, in});
    }
  }
  return rkbs::DeepMeasureNetwork(std::move(layers));
}

inline rkbs::Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t d, std::size_t p) {
  rkbs::Dataset data;
  for (std::size_t i = 0; i < n; ++i) {
    data.x.push_back(gaussian(rng, d));
    data.y.push_back(gaussian(rng, p));
  }
  return data;
}

}  // namespace testutil
