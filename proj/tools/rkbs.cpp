// rkbs: generate teacher data, train, sparsify, verify and export deep
// measure networks.
//
// Exit codes: 0 success, 2 a bound or probe check failed, 3 infeasible
// interpolation, 1 anything else.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "rkbs/error.hpp"
#include "rkbs/io.hpp"
#include "rkbs/oracle.hpp"
#include "rkbs/pipeline.hpp"
#include "rkbs/simd/kernels.hpp"
#include "rkbs/trainer.hpp"

namespace {

using rkbs::Errc;
using rkbs::Error;
namespace io = rkbs::io;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitBound = 2;
constexpr int kExitInfeasible = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string report, trace, out, model, data, sparse_model;
  bool json = false;
  std::size_t count = 200;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("rkbs");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("RKBS_LOG")) {
    const std::string s(lvl);
    if (s == "error") spdlog::set_level(spdlog::level::err);
    else if (s == "warn") spdlog::set_level(spdlog::level::warn);
    else if (s == "info") spdlog::set_level(spdlog::level::info);
    else if (s == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("ignoring RKBS_LOG={} (expected error|warn|info|debug)", s);
  }
}

io::RunConfig load_config(const Common& o) {
  io::RunConfig cfg = o.config.empty() ? io::RunConfig{} : io::config_from_json(io::read_json_file(o.config));
  if (o.threads) cfg.train.threads = *o.threads;
  return cfg;
}

const std::string& pick(const std::string& flag, const std::string& fallback, const char* what) {
  const std::string& p = flag.empty() ? fallback : flag;
  if (p.empty()) throw Error(Errc::InvalidArgument, std::string("no path given for ") + what);
  return p;
}

rkbs::Dataset load_dataset(const std::string& path) {
  auto data = io::dataset_from_csv(io::read_text_file(path));
  data.validate();
  return data;
}

int cmd_gen_data(const Common& o) {
  auto cfg = load_config(o);
  if (o.seed) cfg.generator.seed = *o.seed;
  const auto& path = pick(o.out, cfg.paths.dataset, "the dataset (--out)");
  const auto teacher = io::generate_teacher_data(cfg.generator);
  io::write_text_file(path, io::dataset_to_csv(teacher.data, cfg.generator.input_dim, cfg.generator.output_dim));
  spdlog::info("wrote {} samples to {}", teacher.data.size(), path);
  return kExitOk;
}

int cmd_train(const Common& o) {
  auto cfg = load_config(o);
  if (o.seed) cfg.train.seed = *o.seed;
  const auto data = load_dataset(pick(o.data, cfg.paths.dataset, "the dataset (--data)"));
  const auto result = rkbs::train_prox(cfg.train, data, cfg.loss_function());
  io::write_text_file(pick(o.out, cfg.paths.model, "the model (--out)"), io::dump(io::model_to_json(result.net)));
  const std::string& trace = o.trace.empty() ? cfg.paths.trace : o.trace;
  if (!trace.empty()) io::write_text_file(trace, io::train_trace_to_csv(result.trace));
  const auto& last = result.trace.back();
  std::printf("steps %zu  risk %s  tv %s  objective %s  atoms %zu\n", last.step, io::format_double(last.risk).c_str(),
              io::format_double(last.tv_total).c_str(), io::format_double(last.objective).c_str(), last.atoms_alive);
  return kExitOk;
}

int cmd_sparsify(const Common& o) {
  auto cfg = load_config(o);
  const auto net = io::model_from_json(io::read_json_file(pick(o.model, cfg.paths.model, "the model (--model)")));
  const auto data = load_dataset(pick(o.data, cfg.paths.dataset, "the dataset (--data)"));
  const auto result = rkbs::run_representer(net, data, cfg.pipeline());

  io::write_text_file(pick(o.out, cfg.paths.finite, "the finite network (--out)"),
                      io::dump(io::finite_to_json(result.finite)));
  const std::string& sparse = o.sparse_model.empty() ? cfg.paths.sparse_model : o.sparse_model;
  if (!sparse.empty()) io::write_text_file(sparse, io::dump(io::model_to_json(result.sparse)));
  const std::string& report = o.report.empty() ? cfg.paths.report : o.report;
  if (!report.empty()) {
    const bool csv = report.size() >= 4 && report.compare(report.size() - 4, 4, ".csv") == 0;
    io::write_text_file(report, csv ? io::report_to_csv(result.report) : io::dump(io::report_to_json(result.report)));
  }
  if (!o.trace.empty()) {
    std::string csv = "layer,iter,lambda,objective,score,atoms,residual\n";
    for (const auto& l : result.report.layers) {
      const auto rows = io::solver_trace_to_csv(l.solver_trace);
      std::size_t pos = rows.find('\n') + 1;
      while (pos < rows.size()) {
        const auto end = rows.find('\n', pos);
        csv += std::to_string(l.layer) + ',' + rows.substr(pos, end - pos + 1);
        pos = end + 1;
      }
    }
    io::write_text_file(o.trace, csv);
  }
  if (o.json) {
    std::cout << io::dump(io::report_to_json(result.report));
  } else {
    std::cout << io::report_to_text(result.report);
  }
  return result.report.all_ok() ? kExitOk : kExitBound;
}

struct ProbeSummary {
  std::size_t probes = 0;
  std::size_t failed = 0;
  double worst_margin = 0.0;  // max(lhs - rhs)
};

ProbeSummary lipschitz_probes(const rkbs::LayerMeasure& layer, std::mt19937_64& rng, std::size_t count) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ProbeSummary s;
  s.worst_margin = -std::numeric_limits<double>::infinity();
  const auto dim = layer.input_dim;
  for (std::size_t p = 0; p < count; ++p) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim)), x2(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j) {
      x[static_cast<Eigen::Index>(j)] = gauss(rng);
      x2[static_cast<Eigen::Index>(j)] = gauss(rng);
    }
    rkbs::ParameterPoint theta;
    if (layer.basis.is_continuous_neural()) {
      Eigen::VectorXd t(static_cast<Eigen::Index>(dim));
      for (std::size_t j = 0; j < dim; ++j) t[static_cast<Eigen::Index>(j)] = gauss(rng);
      theta = rkbs::ParameterPoint::euclidean(t);
    } else {
      std::uniform_int_distribution<std::int64_t> idx(0, static_cast<std::int64_t>(dim));
      theta = rkbs::ParameterPoint::discrete(idx(rng));
    }
    const auto w = rkbs::lipschitz_witness(layer.basis, {x.data(), dim}, {x2.data(), dim}, theta);
    ++s.probes;
    if (!w.ok) ++s.failed;
    s.worst_margin = std::max(s.worst_margin, w.lhs - w.rhs);
  }
  return s;
}

int cmd_verify(const Common& o) {
  auto cfg = load_config(o);
  const auto model_json = io::read_json_file(pick(o.model, cfg.paths.model, "the model (--model)"));
  const auto data = load_dataset(pick(o.data, cfg.paths.dataset, "the dataset (--data)"));
  const auto loss = cfg.loss_function();
  io::Json out;

  if (model_json.is_object() && model_json.contains("kind") && model_json.at("kind") == "finite") {
    const auto net = io::finite_from_json(model_json);
    double risk = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) risk += loss.value(rkbs::forward_finite(net, data.x[i]), data.y[i]);
    risk /= static_cast<double>(data.size());
    io::Json widths = io::Json::array();
    for (auto w : net.hidden_widths()) widths.push_back(w);
    out = {{"kind", "finite"}, {"samples", data.size()}, {"loss", loss.name()}, {"risk", risk}, {"widths", widths}};
    if (o.json) {
      std::cout << io::dump(out);
    } else {
      std::printf("finite network, %zu samples\nrisk %s\nwidths", data.size(), io::format_double(risk).c_str());
      for (auto w : net.hidden_widths()) std::printf(" %zu", w);
      std::printf("\n");
    }
    return kExitOk;
  }

  const auto net = io::model_from_json(model_json);
  const std::size_t threads = cfg.train.threads;
  const double risk = rkbs::empirical_risk(net, data, loss, threads);
  const double obj = rkbs::objective(net, data, loss, cfg.train.lambda, threads);
  std::mt19937_64 rng(o.seed.value_or(0));
  bool probes_ok = true;
  io::Json layers = io::Json::array();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto& layer = net.layer(l);
    const auto probe = lipschitz_probes(layer, rng, 1000);
    probes_ok = probes_ok && probe.failed == 0;
    layers.push_back({{"layer", l},
                      {"basis", layer.basis.describe()},
                      {"input_dim", layer.input_dim},
                      {"output_dim", layer.output_dim()},
                      {"width", layer.width()},
                      {"atoms", layer.measure.size()},
                      {"tv", rkbs::tv_norm(layer.measure)},
                      {"lipschitz_probes", probe.probes},
                      {"lipschitz_failures", probe.failed},
                      {"lipschitz_worst_margin", probe.worst_margin}});
  }
  out = {{"kind", "deep_measure"},
         {"samples", data.size()},
         {"loss", loss.name()},
         {"lambda", cfg.train.lambda},
         {"risk", risk},
         {"objective", obj},
         {"phi_bound", rkbs::complexity_upper_bound(net)},
         {"layers", layers},
         {"probes_ok", probes_ok}};
  if (o.json) {
    std::cout << io::dump(out);
  } else {
    std::printf("deep measure network, %zu layers, %zu samples\n", net.num_layers(), data.size());
    std::printf("risk %s\nobjective %s (lambda %s)\nphi_bound %s\n", io::format_double(risk).c_str(),
                io::format_double(obj).c_str(), io::format_double(cfg.train.lambda).c_str(),
                io::format_double(rkbs::complexity_upper_bound(net)).c_str());
    for (const auto& l : layers)
      std::printf("layer %zu  %-40s width %3zu  atoms %3zu  tv %-22s probes %zu/%zu ok\n", l["layer"].get<std::size_t>(),
                  l["basis"].get<std::string>().c_str(), l["width"].get<std::size_t>(), l["atoms"].get<std::size_t>(),
                  io::format_double(l["tv"].get<double>()).c_str(),
                  l["lipschitz_probes"].get<std::size_t>() - l["lipschitz_failures"].get<std::size_t>(),
                  l["lipschitz_probes"].get<std::size_t>());
  }
  return probes_ok ? kExitOk : kExitBound;
}

int cmd_export(const Common& o) {
  auto cfg = load_config(o);
  const auto net = io::model_from_json(io::read_json_file(pick(o.model, cfg.paths.model, "the model (--model)")));
  const auto finite = rkbs::export_finite(net);
  io::write_text_file(pick(o.out, cfg.paths.finite, "the finite network (--out)"), io::dump(io::finite_to_json(finite)));
  const double phi = rkbs::complexity_upper_bound(net);
  const double cor = rkbs::discrete_corollary_bound(finite, net);
  std::printf("widths");
  for (auto w : finite.hidden_widths()) std::printf(" %zu", w);
  std::printf("\nphi_bound %s  corollary %s\n", io::format_double(phi).c_str(), io::format_double(cor).c_str());
  return cor <= phi + 1e-9 ? kExitOk : kExitBound;
}

int cmd_oracle_compare(const Common& o) {
  const auto s = rkbs::oracle::compare_batch(o.count, o.seed.value_or(0));
  if (o.json) {
    std::cout << io::dump({{"instances", s.instances},
                           {"rejected", s.rejected},
                           {"worst_objective_diff", s.worst_objective_diff},
                           {"worst_tv_rel_diff", s.worst_tv_rel_diff},
                           {"support_violations", s.support_violations},
                           {"failures", s.failures},
                           {"ok", s.ok()}});
  } else {
    std::printf("check                         value        tolerance  result\n");
    std::printf("regularized objective diff    %-11.3e  1e-06      %s\n", s.worst_objective_diff,
                s.worst_objective_diff <= 1e-6 ? "pass" : "FAIL");
    std::printf("interpolation tv rel diff     %-11.3e  1e-04      %s\n", s.worst_tv_rel_diff,
                s.worst_tv_rel_diff <= 1e-4 ? "pass" : "FAIL");
    std::printf("support size > N*m            %-11zu  0          %s\n", s.support_violations,
                s.support_violations == 0 ? "pass" : "FAIL");
    std::printf("instances %zu (rejected %zu uncertified)\n", s.instances, s.rejected);
  }
  return s.ok() ? kExitOk : kExitBound;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep measure networks: training, sparsification and export"};
  app.require_subcommand(1);
  Common o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Seed override");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* gen = app.add_subcommand("gen-data", "Sample a dataset from a random teacher network");
  add_common(gen);
  gen->add_option("--out", o.out, "Dataset CSV");

  auto* train = app.add_subcommand("train", "Proximal-gradient training");
  add_common(train);
  train->add_option("--data", o.data, "Dataset CSV");
  train->add_option("--out", o.out, "Model JSON");
  train->add_option("--trace", o.trace, "Objective trace CSV");

  auto* sparsify = app.add_subcommand("sparsify", "Layer-wise sparsification and export");
  add_common(sparsify);
  sparsify->add_option("--model", o.model, "Trained model JSON");
  sparsify->add_option("--data", o.data, "Dataset CSV");
  sparsify->add_option("--out", o.out, "Finite network JSON");
  sparsify->add_option("--sparse-model", o.sparse_model, "Sparsified model JSON");
  sparsify->add_option("--report", o.report, "Report (JSON, or CSV for a .csv path)");
  sparsify->add_option("--trace", o.trace, "Solver trace CSV");
  sparsify->add_flag("--json", o.json, "Print the report as JSON");

  auto* verify = app.add_subcommand("verify", "Risk, norms, widths and Lipschitz probes of a model");
  add_common(verify);
  verify->add_option("--model", o.model, "Model JSON (deep_measure or finite)");
  verify->add_option("--data", o.data, "Dataset CSV");
  verify->add_flag("--json", o.json, "Machine-readable output");

  auto* exp = app.add_subcommand("export", "Export a deep measure model as a finite network");
  add_common(exp);
  exp->add_option("--model", o.model, "Model JSON");
  exp->add_option("--out", o.out, "Finite network JSON");

  auto* cmp = app.add_subcommand("oracle-compare", "Solver vs brute-force oracles on seeded tiny instances");
  add_common(cmp);
  cmp->add_option("--count", o.count, "Number of instances")->check(CLI::PositiveNumber);
  cmp->add_flag("--json", o.json, "Machine-readable output");

  CLI11_PARSE(app, argc, argv);
  setup_logging();
  if (o.threads) spdlog::debug("threads {}", *o.threads);
  spdlog::debug("simd backend {}", rkbs::simd::to_string(rkbs::simd::active_backend()));

  try {
    if (*gen) return cmd_gen_data(o);
    if (*train) return cmd_train(o);
    if (*sparsify) return cmd_sparsify(o);
    if (*verify) return cmd_verify(o);
    if (*exp) return cmd_export(o);
    if (*cmp) return cmd_oracle_compare(o);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == Errc::Infeasible ? kExitInfeasible : kExitOther;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitOther;
  }
  return kExitOther;
}
