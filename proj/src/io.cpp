#include "rkbs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "rkbs/error.hpp"

namespace rkbs::io {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

void emit(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case Json::value_t::number_float: out += format_double(j.get<double>()); return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool flat = true;
      for (const auto& e : j) flat = flat && is_scalar(e);
      // Rows of matrices stay on one line too.
      bool matrix = !flat;
      for (const auto& e : j) {
        if (!e.is_array()) {
          matrix = false;
          break;
        }
        for (const auto& x : e) matrix = matrix && is_scalar(x);
      }
      if (flat || indent == 0) {
        out += '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += indent == 0 ? "," : ", ";
          emit(j[i], indent, depth + 1, out);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad;
        emit(j[i], matrix ? 0 : indent, depth + 1, out);
        if (i + 1 < j.size()) out += ',';
        out += '\n';
      }
      out += close_pad + ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      if (indent == 0) {
        out += '{';
        bool first = true;
        for (const auto& [k, v] : j.items()) {
          if (!first) out += ',';
          first = false;
          out += Json(k).dump() + ':';
          emit(v, 0, depth + 1, out);
        }
        out += '}';
        return;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [k, v] : j.items()) {
        out += pad + Json(k).dump() + ": ";
        emit(v, indent, depth + 1, out);
        if (++i < j.size()) out += ',';
        out += '\n';
      }
      out += close_pad + '}';
      return;
    }
    default: out += j.dump(); return;
  }
}

Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

double num(const Json& j, const char* what) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  require(j.is_number(), Errc::FormatError, std::string(what) + " must be a number");
  return j.get<double>();
}

Eigen::VectorXd vec_from(const Json& j, const char* what) {
  require(j.is_array(), Errc::FormatError, std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = num(j[i], what);
  return v;
}

const Json& field(const Json& j, const char* key) {
  require(j.is_object() && j.contains(key), Errc::FormatError, std::string("missing field '") + key + "'");
  return j.at(key);
}

std::size_t size_field(const Json& j, const char* key) {
  const auto& v = field(j, key);
  require(v.is_number_integer() && v.get<std::int64_t>() >= 0, Errc::FormatError,
          std::string(key) + " must be a non-negative integer");
  return v.get<std::size_t>();
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require(j.is_object(), Errc::FormatError, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    require(ok.count(k) > 0, Errc::FormatError, "unknown key '" + k + "' in " + where);
}

void check_header(const Json& j, const char* kind) {
  require(j.is_object(), Errc::FormatError, "model file must be a JSON object");
  require(j.contains("format_version"), Errc::FormatError, "missing format_version");
  const auto& v = j.at("format_version");
  require(v.is_number_integer() && v.get<int>() == kFormatVersion, Errc::FormatError,
          "unsupported format_version " + v.dump() + " (expected " + std::to_string(kFormatVersion) + ")");
  require(j.contains("kind") && j.at("kind") == kind, Errc::FormatError,
          std::string("expected a file of kind '") + kind + "'");
}

template <class T>
void get_if(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string dump(const Json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  if (indent > 0) out += '\n';
  return out;
}

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::FormatError, std::string("invalid JSON: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), Errc::IoError, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), Errc::IoError, "write failed for " + path.string());
}

Json read_json_file(const std::filesystem::path& path) { return parse(read_text_file(path)); }

Json to_json(const Activation& a) {
  switch (a.kind()) {
    case Activation::Kind::Relu: return {{"kind", "relu"}};
    case Activation::Kind::LeakyRelu: return {{"kind", "leaky_relu"}, {"slope", a.slope()}};
    case Activation::Kind::Tanh: return {{"kind", "tanh"}};
    case Activation::Kind::Custom: break;
  }
  throw Error(Errc::FormatError, "custom activation '" + a.name() + "' cannot be serialized");
}

Activation activation_from_json(const Json& j) {
  const std::string kind = j.is_string() ? j.get<std::string>() : field(j, "kind").get<std::string>();
  if (kind == "relu") return Activation::relu();
  if (kind == "tanh") return Activation::tanh();
  if (kind == "leaky_relu") {
    const double slope = j.is_object() && j.contains("slope") ? num(j.at("slope"), "slope") : 0.01;
    return Activation::leaky_relu(slope);
  }
  throw Error(Errc::FormatError, "unknown activation '" + kind + "'");
}

Json to_json(const WindowSequence& w) {
  Json j{{"kind", w.name()}};
  if (w.kind() == WindowSequence::Kind::Geometric) j["q"] = w.ratio();
  return j;
}

WindowSequence window_from_json(const Json& j) {
  const std::string kind = j.is_string() ? j.get<std::string>() : field(j, "kind").get<std::string>();
  if (kind == "constant_one") return WindowSequence::constant_one();
  if (kind == "inverse_square") return WindowSequence::inverse_square();
  if (kind == "geometric") {
    const double q = j.is_object() && j.contains("q") ? num(j.at("q"), "q") : 0.9;
    return WindowSequence::geometric(q);
  }
  throw Error(Errc::FormatError, "unknown window '" + kind + "'");
}

Json to_json(const BasisFunction& b) {
  if (b.is_input_affine()) return {{"kind", "input_affine"}, {"input_dim", b.input_affine().input_dim}};
  if (b.is_discrete_neural()) {
    const auto& d = b.discrete_neural();
    return {{"kind", "discrete_neural"}, {"activation", to_json(d.activation)}, {"window", to_json(d.window)},
            {"bias_atom", d.bias_atom}, {"offset", d.offset}};
  }
  const auto& c = b.continuous_neural();
  Json scale = std::isinf(c.window_scale) ? Json("inf") : Json(c.window_scale);
  return {{"kind", "continuous_neural"}, {"activation", to_json(c.activation)}, {"window_scale", scale},
          {"offset", c.offset}};
}

BasisFunction basis_from_json(const Json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "input_affine") return InputAffine{size_field(j, "input_dim")};
  if (kind == "discrete_neural") {
    DiscreteNeural d;
    d.activation = activation_from_json(field(j, "activation"));
    if (j.contains("window")) d.window = window_from_json(j.at("window"));
    if (j.contains("bias_atom")) d.bias_atom = j.at("bias_atom").get<bool>();
    if (j.contains("offset")) d.offset = num(j.at("offset"), "offset");
    return d;
  }
  if (kind == "continuous_neural") {
    ContinuousNeural c;
    c.activation = activation_from_json(field(j, "activation"));
    if (j.contains("window_scale")) {
      const auto& s = j.at("window_scale");
      c.window_scale = s.is_string() && s.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                                     : num(s, "window_scale");
    }
    if (j.contains("offset")) c.offset = num(j.at("offset"), "offset");
    return c;
  }
  throw Error(Errc::FormatError, "unknown basis kind '" + kind + "'");
}

Json to_json(const ParameterPoint& p) {
  if (p.is_discrete()) return {{"kind", "discrete"}, {"index", p.index()}};
  return {{"kind", "euclidean"}, {"coords", vec_json(p.coords())}};
}

ParameterPoint location_from_json(const Json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "discrete") {
    const auto& idx = field(j, "index");
    require(idx.is_number_integer(), Errc::FormatError, "discrete index must be an integer");
    return ParameterPoint::discrete(idx.get<std::int64_t>());
  }
  if (kind == "euclidean") return ParameterPoint::euclidean(vec_from(field(j, "coords"), "coords"));
  throw Error(Errc::FormatError, "unknown location kind '" + kind + "'");
}

Json to_json(const AtomicVectorMeasure& mu) {
  Json atoms = Json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"location", to_json(a.location)}, {"weight", vec_json(a.weight)}});
  return {{"target_dim", mu.target_dim()}, {"atoms", atoms}};
}

AtomicVectorMeasure measure_from_json(const Json& j) {
  AtomicVectorMeasure mu(size_field(j, "target_dim"));
  for (const auto& a : field(j, "atoms"))
    mu.add(location_from_json(field(a, "location")), vec_from(field(a, "weight"), "weight"));
  return mu;
}

Json model_to_json(const DeepMeasureNetwork& net) {
  Json layers = Json::array();
  for (const auto& l : net.layers())
    layers.push_back({{"basis", to_json(l.basis)}, {"input_dim", l.input_dim}, {"measure", to_json(l.measure)}});
  return {{"format_version", kFormatVersion}, {"kind", "deep_measure"}, {"layers", layers}};
}

DeepMeasureNetwork model_from_json(const Json& j) {
  check_header(j, "deep_measure");
  check_keys(j, {"format_version", "kind", "layers"}, "model");
  std::vector<LayerMeasure> layers;
  for (const auto& l : field(j, "layers")) {
    check_keys(l, {"basis", "input_dim", "measure"}, "model layer");
    layers.push_back({basis_from_json(field(l, "basis")), measure_from_json(field(l, "measure")),
                      size_field(l, "input_dim")});
  }
  return DeepMeasureNetwork(std::move(layers));
}

Json finite_to_json(const FiniteNetwork& net) {
  Json layers = Json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Json W = Json::array();
    for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r) W.push_back(vec_json(net.weights[l].row(r).transpose()));
    layers.push_back({{"rows", net.weights[l].rows()}, {"cols", net.weights[l].cols()}, {"W", W},
                      {"b", vec_json(net.biases[l])}});
  }
  return {{"format_version", kFormatVersion}, {"kind", "finite"}, {"activation", to_json(net.activation)},
          {"layers", layers}};
}

FiniteNetwork finite_from_json(const Json& j) {
  check_header(j, "finite");
  check_keys(j, {"format_version", "kind", "activation", "layers"}, "finite network");
  FiniteNetwork net;
  net.activation = activation_from_json(field(j, "activation"));
  for (const auto& l : field(j, "layers")) {
    check_keys(l, {"rows", "cols", "W", "b"}, "finite layer");
    const auto rows = static_cast<Eigen::Index>(size_field(l, "rows"));
    const auto cols = static_cast<Eigen::Index>(size_field(l, "cols"));
    const auto& W = field(l, "W");
    require(W.is_array() && static_cast<Eigen::Index>(W.size()) == rows, Errc::FormatError,
            "weight matrix row count mismatch");
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::VectorXd row = vec_from(W[static_cast<std::size_t>(r)], "W");
      require(row.size() == cols, Errc::FormatError, "weight matrix column count mismatch");
      M.row(r) = row.transpose();
    }
    net.weights.push_back(std::move(M));
    net.biases.push_back(vec_from(field(l, "b"), "b"));
  }
  net.validate();
  return net;
}

Json report_to_json(const SparsifyReport& r) {
  Json layers = Json::array();
  for (const auto& l : r.layers)
    layers.push_back({{"layer", l.layer},           {"width_before", l.width_before},
                      {"width_after", l.width_after}, {"support_after", l.support_after},
                      {"bound", l.bound},           {"tv_before", l.tv_before},
                      {"tv_reduced", l.tv_reduced}, {"tv_after", l.tv_after},
                      {"residual", l.residual},     {"source", l.source},
                      {"note", l.note}});
  Json dims = Json::array();
  for (auto d : r.output_dims) dims.push_back(d);
  return {
      {"header",
       "layers refit from output to input; hidden representations recomputed after every splice; "
       "interpolation holds to tolerance_residual, so objective non-increase holds up to objective_tolerance"},
      {"num_samples", r.num_samples},
      {"lambda", r.lambda},
      {"tolerance_residual", r.tolerance_residual},
      {"objective_tolerance", r.objective_tolerance},
      {"layers", layers},
      {"output_dims", dims},
      {"objective_before", r.objective_before},
      {"objective_after", r.objective_after},
      {"phi_bound", r.phi_bound},
      {"corollary_bound", r.corollary_bound},
      {"max_output_deviation", r.max_output_deviation},
      {"certified_deviation", r.certified_deviation},
      {"checks",
       {{"widths", r.widths_ok()},
        {"objective", r.objective_ok()},
        {"deviation", r.deviation_ok()},
        {"tv", r.tv_ok()},
        {"phi", r.phi_ok()}}},
      {"ok", r.all_ok()}};
}

std::string report_to_text(const SparsifyReport& r) {
  std::ostringstream s;
  char buf[256];
  s << "sparsify report (N = " << r.num_samples << ", lambda = " << format_double(r.lambda)
    << ", tolerance_residual = " << format_double(r.tolerance_residual) << ")\n";
  s << "representations are recomputed after each layer is replaced\n";
  s << "layer  width  ->  after  support  bound    tv_before      tv_after       residual   source\n";
  for (const auto& l : r.layers) {
    std::snprintf(buf, sizeof buf, "%5zu  %5zu  ->  %5zu  %7zu  %5zu  %12.6g  %12.6g  %12.3e   %s\n", l.layer,
                  l.width_before, l.width_after, l.support_after, l.bound, l.tv_before, l.tv_after, l.residual,
                  l.source.c_str());
    s << buf;
  }
  s << "exported dims:";
  for (auto d : r.output_dims) s << ' ' << d;
  s << '\n';
  std::snprintf(buf, sizeof buf, "objective  %.12g -> %.12g  (tolerance %.3g)\n", r.objective_before,
                r.objective_after, r.objective_tolerance);
  s << buf;
  std::snprintf(buf, sizeof buf, "phi_bound  %.12g   corollary %.12g\n", r.phi_bound, r.corollary_bound);
  s << buf;
  std::snprintf(buf, sizeof buf, "output deviation %.3e <= certified %.3e\n", r.max_output_deviation,
                r.certified_deviation);
  s << buf;
  s << "checks: widths " << (r.widths_ok() ? "ok" : "FAIL") << ", objective " << (r.objective_ok() ? "ok" : "FAIL")
    << ", deviation " << (r.deviation_ok() ? "ok" : "FAIL") << ", tv " << (r.tv_ok() ? "ok" : "FAIL") << ", phi "
    << (r.phi_ok() ? "ok" : "FAIL") << '\n';
  return s.str();
}

std::string report_to_csv(const SparsifyReport& r) {
  std::string s = "layer,width_before,width_after,support_after,bound,tv_before,tv_reduced,tv_after,residual,source\n";
  for (const auto& l : r.layers) {
    s += std::to_string(l.layer) + ',' + std::to_string(l.width_before) + ',' + std::to_string(l.width_after) +
         ',' + std::to_string(l.support_after) + ',' + std::to_string(l.bound) + ',' + format_double(l.tv_before) +
         ',' + format_double(l.tv_reduced) + ',' + format_double(l.tv_after) + ',' + format_double(l.residual) +
         ',' + l.source + '\n';
  }
  return s;
}

std::string dataset_to_csv(const Dataset& data, std::size_t input_dim, std::size_t output_dim) {
  std::string s;
  for (std::size_t j = 1; j <= input_dim; ++j) s += (j > 1 ? ",x_" : "x_") + std::to_string(j);
  for (std::size_t j = 1; j <= output_dim; ++j) s += ",y_" + std::to_string(j);
  s += '\n';
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    require(static_cast<std::size_t>(data.x[i].size()) == input_dim &&
                static_cast<std::size_t>(data.y[i].size()) == output_dim,
            Errc::DimensionMismatch, "dataset row does not match the header");
    for (std::size_t j = 0; j < input_dim; ++j) s += (j ? "," : "") + format_double(data.x[i][static_cast<Eigen::Index>(j)]);
    for (std::size_t j = 0; j < output_dim; ++j) s += ',' + format_double(data.y[i][static_cast<Eigen::Index>(j)]);
    s += '\n';
  }
  return s;
}

Dataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::FormatError, "dataset CSV has no header");
  std::size_t d = 0, p = 0;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (!col.empty() && col.back() == '\r') col.pop_back();
      if (col.rfind("x_", 0) == 0) {
        require(p == 0, Errc::FormatError, "dataset header lists x columns after y columns");
        ++d;
      } else if (col.rfind("y_", 0) == 0) {
        ++p;
      } else {
        throw Error(Errc::FormatError, "unexpected dataset column '" + col + "'");
      }
    }
  }
  require(d > 0 && p > 0, Errc::FormatError, "dataset header needs x_ and y_ columns");
  Dataset data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      require(end != cell.c_str(), Errc::FormatError, "bad number on dataset line " + std::to_string(lineno));
      vals.push_back(v);
    }
    require(vals.size() == d + p, Errc::FormatError, "dataset line " + std::to_string(lineno) + " has " +
                                                         std::to_string(vals.size()) + " columns, expected " +
                                                         std::to_string(d + p));
    data.x.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(d)));
    data.y.push_back(Eigen::Map<Eigen::VectorXd>(vals.data() + d, static_cast<Eigen::Index>(p)));
  }
  return data;
}

std::string train_trace_to_csv(const std::vector<TrainTraceRow>& rows) {
  std::string s = "step,risk,tv_total,objective,atoms_alive\n";
  for (const auto& r : rows)
    s += std::to_string(r.step) + ',' + format_double(r.risk) + ',' + format_double(r.tv_total) + ',' +
         format_double(r.objective) + ',' + std::to_string(r.atoms_alive) + '\n';
  return s;
}

std::string solver_trace_to_csv(const std::vector<SolverTraceRow>& rows) {
  std::string s = "iter,lambda,objective,score,atoms,residual\n";
  for (const auto& r : rows)
    s += std::to_string(r.iter) + ',' + format_double(r.lambda) + ',' + format_double(r.objective) + ',' +
         format_double(r.score) + ',' + std::to_string(r.atoms) + ',' + format_double(r.residual) + '\n';
  return s;
}

Teacher generate_teacher_data(const GeneratorSpec& spec) {
  require(spec.input_dim > 0 && spec.output_dim > 0, Errc::InvalidArgument,
          "generator dimensions must be positive");
  require(spec.noise >= 0.0, Errc::InvalidArgument, "generator noise must be non-negative");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Teacher t;
  t.net.activation = spec.activation;
  std::vector<std::size_t> dims{spec.input_dim};
  dims.insert(dims.end(), spec.teacher_widths.begin(), spec.teacher_widths.end());
  dims.push_back(spec.output_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(dims[l + 1]);
    const auto cols = static_cast<Eigen::Index>(dims[l]);
    const bool last = l + 2 == dims.size();
    const double s = (last ? spec.output_scale : 1.0) / std::sqrt(static_cast<double>(cols));
    Eigen::MatrixXd W(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) W(r, c) = s * gauss(rng);
    for (Eigen::Index r = 0; r < rows; ++r) b[r] = last ? 0.0 : 0.1 * gauss(rng);
    t.net.weights.push_back(std::move(W));
    t.net.biases.push_back(std::move(b));
  }
  for (std::size_t i = 0; i < spec.samples; ++i) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(spec.input_dim));
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = gauss(rng);
    Eigen::VectorXd y = forward_finite(t.net, x);
    if (spec.noise > 0.0)
      for (Eigen::Index j = 0; j < y.size(); ++j) y[j] += spec.noise * gauss(rng);
    t.data.x.push_back(std::move(x));
    t.data.y.push_back(std::move(y));
  }
  return t;
}

LossFunction RunConfig::loss_function() const {
  if (loss == "squared") return LossFunction::squared();
  if (loss == "logistic") return LossFunction::logistic();
  throw Error(Errc::InvalidArgument, "unknown loss '" + loss + "'");
}

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.solver = solver;
  p.lambda = train.lambda;
  p.loss = loss_function();
  p.objective_tolerance = objective_tolerance;
  p.threads = train.threads;
  return p;
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  check_keys(j, {"generator", "train", "solver", "pipeline", "paths"}, "config");
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    check_keys(g, {"teacher_widths", "noise", "samples", "input_dim", "output_dim", "seed", "output_scale",
                   "activation"},
               "generator");
    get_if(g, "teacher_widths", c.generator.teacher_widths);
    get_if(g, "noise", c.generator.noise);
    get_if(g, "samples", c.generator.samples);
    get_if(g, "input_dim", c.generator.input_dim);
    get_if(g, "output_dim", c.generator.output_dim);
    get_if(g, "seed", c.generator.seed);
    get_if(g, "output_scale", c.generator.output_scale);
    if (g.contains("activation")) c.generator.activation = activation_from_json(g.at("activation"));
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    check_keys(t, {"init_widths", "lambda", "steps", "step_size", "seed", "init_scale", "activation", "window",
                   "offset", "exempt_bias", "threads", "loss", "divergence_factor"},
               "train");
    get_if(t, "init_widths", c.train.init_widths);
    get_if(t, "lambda", c.train.lambda);
    get_if(t, "steps", c.train.steps);
    get_if(t, "step_size", c.train.step_size);
    get_if(t, "seed", c.train.seed);
    get_if(t, "init_scale", c.train.init_scale);
    get_if(t, "offset", c.train.offset);
    get_if(t, "exempt_bias", c.train.exempt_bias);
    get_if(t, "threads", c.train.threads);
    get_if(t, "loss", c.loss);
    get_if(t, "divergence_factor", c.train.divergence_factor);
    if (t.contains("activation")) c.train.activation = activation_from_json(t.at("activation"));
    if (t.contains("window")) c.train.window = window_from_json(t.at("window"));
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    check_keys(s, {"lambda", "max_atoms", "max_outer_iters", "fc_inner_iters", "tolerance_residual", "tolerance_gap",
                   "homotopy"},
               "solver");
    get_if(s, "lambda", c.solver.lambda);
    get_if(s, "max_atoms", c.solver.max_atoms);
    get_if(s, "max_outer_iters", c.solver.max_outer_iters);
    get_if(s, "fc_inner_iters", c.solver.fc_inner_iters);
    get_if(s, "tolerance_residual", c.solver.tolerance_residual);
    get_if(s, "tolerance_gap", c.solver.tolerance_gap);
    if (s.contains("homotopy")) {
      const auto& h = s.at("homotopy");
      check_keys(h, {"lambda_start", "decay", "min_lambda"}, "solver.homotopy");
      get_if(h, "lambda_start", c.solver.homotopy.lambda_start);
      get_if(h, "decay", c.solver.homotopy.decay);
      get_if(h, "min_lambda", c.solver.homotopy.min_lambda);
    }
  }
  if (j.contains("pipeline")) {
    const auto& p = j.at("pipeline");
    check_keys(p, {"objective_tolerance"}, "pipeline");
    get_if(p, "objective_tolerance", c.objective_tolerance);
  }
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    check_keys(p, {"dataset", "model", "sparse_model", "finite", "report", "trace"}, "paths");
    get_if(p, "dataset", c.paths.dataset);
    get_if(p, "model", c.paths.model);
    get_if(p, "sparse_model", c.paths.sparse_model);
    get_if(p, "finite", c.paths.finite);
    get_if(p, "report", c.paths.report);
    get_if(p, "trace", c.paths.trace);
  }
  c.train.validate();
  c.solver.validate();
  c.loss_function();
  return c;
}

Json config_to_json(const RunConfig& c) {
  return {
      {"generator",
       {{"teacher_widths", c.generator.teacher_widths},
        {"noise", c.generator.noise},
        {"samples", c.generator.samples},
        {"input_dim", c.generator.input_dim},
        {"output_dim", c.generator.output_dim},
        {"seed", c.generator.seed},
        {"output_scale", c.generator.output_scale},
        {"activation", to_json(c.generator.activation)}}},
      {"train",
       {{"init_widths", c.train.init_widths},
        {"lambda", c.train.lambda},
        {"steps", c.train.steps},
        {"step_size", c.train.step_size},
        {"seed", c.train.seed},
        {"init_scale", c.train.init_scale},
        {"activation", to_json(c.train.activation)},
        {"window", to_json(c.train.window)},
        {"offset", c.train.offset},
        {"exempt_bias", c.train.exempt_bias},
        {"threads", c.train.threads},
        {"loss", c.loss},
        {"divergence_factor", c.train.divergence_factor}}},
      {"solver",
       {{"lambda", c.solver.lambda},
        {"max_atoms", c.solver.max_atoms},
        {"max_outer_iters", c.solver.max_outer_iters},
        {"fc_inner_iters", c.solver.fc_inner_iters},
        {"tolerance_residual", c.solver.tolerance_residual},
        {"tolerance_gap", c.solver.tolerance_gap},
        {"homotopy",
         {{"lambda_start", c.solver.homotopy.lambda_start},
          {"decay", c.solver.homotopy.decay},
          {"min_lambda", c.solver.homotopy.min_lambda}}}}},
      {"pipeline", {{"objective_tolerance", c.objective_tolerance}}},
      {"paths",
       {{"dataset", c.paths.dataset},
        {"model", c.paths.model},
        {"sparse_model", c.paths.sparse_model},
        {"finite", c.paths.finite},
        {"report", c.paths.report},
        {"trace", c.paths.trace}}}};
}

}  // namespace rkbs::io
