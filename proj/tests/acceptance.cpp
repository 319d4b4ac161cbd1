// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits with the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "rkbs/io.hpp"
#include "rkbs/oracle.hpp"
#include "rkbs/pipeline.hpp"
#include "rkbs/trainer.hpp"

using namespace rkbs;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Run {
  std::size_t hidden_layers, samples;
  std::uint64_t seed;
  Dataset data;
  DeepMeasureNetwork trained;
  RepresenterResult result;
};

io::RunConfig teacher_student_config(std::size_t hidden_layers, std::size_t samples, std::uint64_t seed) {
  io::RunConfig cfg;
  cfg.generator.teacher_widths.assign(hidden_layers, 3);
  cfg.generator.samples = samples;
  cfg.generator.input_dim = 2;
  cfg.generator.output_dim = 1;
  cfg.generator.seed = seed;
  // large enough that most students keep hidden units at lambda = 1
  cfg.generator.output_scale = 30.0;
  cfg.train.init_widths.assign(hidden_layers, 32);
  cfg.train.lambda = 1.0;
  cfg.train.seed = seed;
  cfg.train.threads = 1;
  return cfg;
}

std::vector<Run> teacher_student_runs(double& elapsed) {
  const auto t0 = Clock::now();
  std::vector<Run> runs;
  const std::size_t sizes[] = {4, 6, 8};
  for (std::uint64_t r = 0; r < 20; ++r) {
    const std::size_t L = 1 + r % 2, N = sizes[r % 3];
    const auto cfg = teacher_student_config(L, N, r);
    auto data = io::generate_teacher_data(cfg.generator).data;
    auto trained = train_prox(cfg.train, data, cfg.loss_function()).net;
    auto result = run_representer(trained, data, cfg.pipeline());
    runs.push_back({L, N, r, std::move(data), std::move(trained), std::move(result)});
  }
  elapsed = seconds_since(t0);
  return runs;
}

// 1. d_l <= N d_{l+1} on every exported layer.
void width_bound(const std::vector<Run>& runs, double elapsed) {
  bool ok = elapsed < 60.0;
  std::size_t nontrivial = 0, checked = 0;
  for (const auto& run : runs) {
    const auto dims = run.result.report.output_dims;  // d_0 .. d_{L+1}
    if (dims.size() > 2 && dims[1] > 0) ++nontrivial;
    for (std::size_t l = 1; l + 1 < dims.size(); ++l) {
      ++checked;
      ok = ok && dims[l] <= run.samples * dims[l + 1];
    }
    ok = ok && run.result.report.widths_ok();
  }
  report(1, "width bound", ok,
         fmt("%.0f layer checks, %.0f/20 nets with hidden units, %.2f s", double(checked), double(nontrivial), elapsed));
}

// 2. Objective with lambda = 1 does not increase.
void objective_non_increase(const std::vector<Run>& runs) {
  double worst = -INFINITY;
  for (const auto& run : runs) {
    const auto& r = run.result.report;
    const double before = objective(run.trained, run.data, LossFunction::squared(), 1.0);
    const double after = objective(run.result.sparse, run.data, LossFunction::squared(), 1.0);
    worst = std::max({worst, after - before, r.objective_after - r.objective_before});
  }
  report(2, "objective non-increase", worst <= 1e-6, fmt("max(after - before) = %.3e (tol 1e-6)", worst));
}

// 3. Output deviation within the certified bound.
void output_preservation(const std::vector<Run>& runs) {
  bool ok = true;
  double worst_ratio = 0.0;
  for (const auto& run : runs) {
    const auto& r = run.result.report;
    ok = ok && r.tolerance_residual == 1e-6;
    double dev = 0.0;
    for (std::size_t i = 0; i < run.data.size(); ++i)
      dev = std::max(dev, (forward_finite(run.result.finite, run.data.x[i]) - forward(run.trained, run.data.x[i])).norm());
    ok = ok && dev <= r.certified_deviation;
    worst_ratio = std::max(worst_ratio, r.certified_deviation > 0 ? dev / r.certified_deviation : (dev > 0 ? INFINITY : 0.0));
  }
  report(3, "output preservation", ok, fmt("max deviation / certified bound = %.3f", worst_ratio));
}

// 4. Solver vs brute-force oracles.
void solver_correctness() {
  const auto t0 = Clock::now();
  const auto s = oracle::compare_batch(200, 0);
  const double elapsed = seconds_since(t0);
  const bool ok = s.instances == 200 && s.ok() && s.worst_objective_diff <= 1e-6 && s.worst_tv_rel_diff <= 1e-4 &&
                  elapsed < 120.0;
  report(4, "sparse solver vs oracle", ok,
         fmt("obj diff %.2e, tv rel diff %.2e, support violations %.0f, %.1f s", s.worst_objective_diff,
             s.worst_tv_rel_diff, double(s.support_violations), elapsed));
}

// 5. Extreme points of the unit TV ball.
void extreme_points() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> atoms(1, 5), dim(1, 3);
  bool ok = true;
  std::size_t singles = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = dim(rng);
    auto mu = testutil::random_measure(rng, m, atoms(rng), 20);
    mu = linear_combine(1.0 / tv_norm(mu), mu, 0.0, mu);
    const auto res = extreme_point_check(mu);
    const bool single = mu.size() == 1;
    singles += single;
    if (std::holds_alternative<Extreme>(res)) {
      ok = ok && single;
      continue;
    }
    ok = ok && !single;
    const auto& d = std::get<Decomposition>(res);
    worst = std::max({worst, std::abs(tv_norm(d.first) - 1.0), std::abs(tv_norm(d.second) - 1.0)});
    const auto back = linear_combine(d.t, d.first, 1.0 - d.t, d.second);
    ok = ok && back.size() == mu.size();
    for (std::size_t k = 0; ok && k < mu.size(); ++k) {
      ok = back.atoms()[k].location.index() == mu.atoms()[k].location.index();
      worst = std::max(worst, (back.atoms()[k].weight - mu.atoms()[k].weight).cwiseAbs().maxCoeff());
    }
  }
  ok = ok && worst <= 1e-12;
  report(5, "extreme points", ok, fmt("%.0f single-atom, worst mismatch %.2e (tol 1e-12)", double(singles), worst));
}

// 6. forward == forward_finite o export_finite.
void export_equivalence() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> depth(1, 3), width(1, 6);
  std::uniform_real_distribution<double> offset(-0.5, 0.5);
  const Activation acts[] = {Activation::relu(), Activation::leaky_relu(0.1), Activation::tanh()};
  const WindowSequence windows[] = {WindowSequence::constant_one(), WindowSequence::geometric(0.9),
                                    WindowSequence::inverse_square()};
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> dims{width(rng)};
    const std::size_t L = depth(rng);
    for (std::size_t l = 0; l <= L; ++l) dims.push_back(width(rng));
    const auto net = testutil::random_discrete_net(rng, dims, acts[trial % 3], windows[(trial / 3) % 3], offset(rng), 0.7);
    const auto f = export_finite(net);
    for (int i = 0; i < 100; ++i) {
      const auto x = testutil::gaussian(rng, dims[0], 2.0);
      worst = std::max(worst, (forward(net, x) - forward_finite(f, x)).cwiseAbs().maxCoeff());
    }
  }
  report(6, "export equivalence", worst < 1e-10, fmt("max |diff| = %.2e (tol 1e-10)", worst));
}

// 7. Backprop vs central differences, entrywise relative error.
void gradient_check() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> width(2, 5);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = width(rng), p = 1 + trial % 2;
    const auto net = testutil::random_discrete_net(rng, {d, width(rng), width(rng), p}, Activation::tanh(),
                                                   WindowSequence::geometric(0.9), 0.1);
    const auto data = testutil::random_dataset(rng, 6, d, p);
    const auto g = grad_weights(net, data, LossFunction::squared());
    const auto fd = oracle::finite_difference_gradient(net, data, LossFunction::squared(), 1e-5);
    for (std::size_t l = 0; l < g.size(); ++l)
      for (std::size_t k = 0; k < g[l].size(); ++k)
        for (Eigen::Index j = 0; j < g[l][k].size(); ++j) {
          const double a = g[l][k][j], b = fd[l][k][j];
          const double scale = std::max(std::abs(a), std::abs(b));
          if (scale > 0) worst = std::max(worst, std::abs(a - b) / scale);
        }
  }
  report(7, "gradient check", worst < 1e-5, fmt("max relative error = %.2e (tol 1e-5)", worst));
}

// 8. Lipschitz probes per shipped basis variant.
void lipschitz_probes() {
  std::mt19937_64 rng(8);
  std::vector<BasisFunction> variants{InputAffine{4}};
  for (const auto& a : {Activation::relu(), Activation::leaky_relu(0.1), Activation::tanh()}) {
    for (const auto& w : {WindowSequence::constant_one(), WindowSequence::geometric(0.9), WindowSequence::inverse_square()})
      for (bool bias : {true, false}) variants.push_back(DiscreteNeural{a, w, bias, 0.25});
    variants.push_back(ContinuousNeural{a, 10.0, 0.0});
    variants.push_back(ContinuousNeural{a, INFINITY, 0.3});
  }
  std::size_t bad = 0;
  for (const auto& b : variants) {
    for (int p = 0; p < 1000; ++p) {
      const auto x = testutil::gaussian(rng, 4, 2.0), x2 = testutil::gaussian(rng, 4, 2.0);
      const auto theta = b.is_continuous_neural()
                             ? ParameterPoint::euclidean(testutil::gaussian(rng, 4))
                             : testutil::idx(std::uniform_int_distribution<std::int64_t>(0, 4)(rng));
      if (!lipschitz_witness(b, {x.data(), 4}, {x2.data(), 4}, theta).ok) ++bad;
    }
  }
  report(8, "lipschitz probes", bad == 0,
         fmt("%.0f variants x 1000 probes, %.0f failed", double(variants.size()), double(bad)));
}

// 9. phi_bound is the TV sum and dominates the corollary expression.
void norm_bound(const std::vector<Run>& runs) {
  bool ok = true;
  double slack = INFINITY;
  for (const auto& run : runs) {
    const auto& r = run.result.report;
    double tv = 0.0;
    for (const auto& layer : run.result.sparse.layers()) {
      double layer_tv = 0.0;
      for (const auto& atom : layer.measure.atoms()) layer_tv += atom.weight.norm();
      tv += layer_tv;
    }
    ok = ok && r.phi_bound == tv && r.phi_bound == complexity_upper_bound(run.result.sparse);
    const double cor = discrete_corollary_bound(run.result.finite, run.result.sparse);
    ok = ok && r.phi_bound >= cor - 1e-9;
    slack = std::min(slack, r.phi_bound - cor);
  }
  report(9, "norm bound", ok, fmt("min(phi_bound - corollary) = %.3e", slack));
}

// 10. Two identical runs give identical bytes.
void determinism() {
  auto artifacts = [] {
    auto cfg = teacher_student_config(2, 6, 42);
    const auto data = io::generate_teacher_data(cfg.generator).data;
    const auto dataset = io::dataset_to_csv(data, 2, 1);
    const auto trained = train_prox(cfg.train, io::dataset_from_csv(dataset), cfg.loss_function());
    const auto model = io::dump(io::model_to_json(trained.net));
    const auto res = run_representer(io::model_from_json(io::parse(model)), data, cfg.pipeline());
    return std::vector<std::string>{dataset,
                                    model,
                                    io::train_trace_to_csv(trained.trace),
                                    io::dump(io::model_to_json(res.sparse)),
                                    io::dump(io::finite_to_json(res.finite)),
                                    io::dump(io::report_to_json(res.report)),
                                    io::report_to_csv(res.report)};
  };
  const auto a = artifacts(), b = artifacts();
  report(10, "determinism", a == b, fmt("%.0f artifacts compared byte for byte", double(a.size())));
}

}  // namespace

int main() {
  double elapsed = 0.0;
  const auto runs = teacher_student_runs(elapsed);
  width_bound(runs, elapsed);
  objective_non_increase(runs);
  output_preservation(runs);
  solver_correctness();
  extreme_points();
  export_equivalence();
  gradient_check();
  lipschitz_probes();
  norm_bound(runs);
  determinism();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
