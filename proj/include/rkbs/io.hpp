#pragma once

// File formats: JSON for models, configs and reports; CSV for datasets and
// traces. Every double is written with 17 significant digits so that files
// round-trip bit for bit.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rkbs/network.hpp"
#include "rkbs/pipeline.hpp"
#include "rkbs/sparse_solver.hpp"
#include "rkbs/trainer.hpp"

namespace rkbs::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

std::string format_double(double v);
/// Deterministic JSON text with 17-digit numbers.
std::string dump(const Json& j, int indent = 2);
Json parse(const std::string& text);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

Json to_json(const Activation& a);
Activation activation_from_json(const Json& j);
Json to_json(const WindowSequence& w);
WindowSequence window_from_json(const Json& j);
Json to_json(const BasisFunction& b);
BasisFunction basis_from_json(const Json& j);
Json to_json(const ParameterPoint& p);
ParameterPoint location_from_json(const Json& j);
Json to_json(const AtomicVectorMeasure& mu);
AtomicVectorMeasure measure_from_json(const Json& j);

/// {format_version, kind: "deep_measure", layers: [{basis, input_dim, measure}]}
Json model_to_json(const DeepMeasureNetwork& net);
DeepMeasureNetwork model_from_json(const Json& j);
/// {format_version, kind: "finite", activation, layers: [{W, b}]}
Json finite_to_json(const FiniteNetwork& net);
FiniteNetwork finite_from_json(const Json& j);

Json report_to_json(const SparsifyReport& r);
std::string report_to_text(const SparsifyReport& r);
std::string report_to_csv(const SparsifyReport& r);

/// Header x_1..x_d,y_1..y_p, one row per sample.
std::string dataset_to_csv(const Dataset& data, std::size_t input_dim, std::size_t output_dim);
Dataset dataset_from_csv(const std::string& text);

std::string train_trace_to_csv(const std::vector<TrainTraceRow>& rows);
std::string solver_trace_to_csv(const std::vector<SolverTraceRow>& rows);

/// Random finite teacher network and samples y = teacher(x) + noise * N(0, 1),
/// with x ~ N(0, I_d).
struct GeneratorSpec {
  std::vector<std::size_t> teacher_widths{3};
  double noise = 0.0;
  std::size_t samples = 8;
  std::size_t input_dim = 2;
  std::size_t output_dim = 1;
  std::uint64_t seed = 0;
  double output_scale = 10.0;
  Activation activation = Activation::relu();
};

struct Teacher {
  FiniteNetwork net;
  Dataset data;
};

Teacher generate_teacher_data(const GeneratorSpec& spec);

struct RunConfig {
  GeneratorSpec generator;
  TrainConfig train;
  std::string loss = "squared";
  SolverConfig solver;
  double objective_tolerance = 1e-6;
  struct Paths {
    std::string dataset, model, sparse_model, finite, report, trace;
  } paths;

  LossFunction loss_function() const;
  PipelineConfig pipeline() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const Json& j);
Json config_to_json(const RunConfig& c);

}  // namespace rkbs::io
