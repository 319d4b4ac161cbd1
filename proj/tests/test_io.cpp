#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "rkbs/error.hpp"
#include "rkbs/io.hpp"

using namespace rkbs;
using testutil::idx;
using testutil::vec;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = g(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "null");
}

TEST_CASE("dump and parse") {
  const io::Json j = {{"a", 1}, {"b", {1.5, 2.0}}, {"c", {{"d", "x"}}}};
  const auto text = io::dump(j);
  CHECK(io::parse(text) == j);
  CHECK(text.back() == '\n');
  CHECK(io::dump(j, 2) == text);
  CHECK(code_of([] { io::parse("{not json"); }) == Errc::FormatError);
}

TEST_CASE("model files round-trip") {
  std::mt19937_64 rng(2);
  const auto net = testutil::random_discrete_net(rng, {3, 5, 2, 2}, Activation::leaky_relu(0.25),
                                                 WindowSequence::inverse_square(), 0.125, 0.7);
  const auto text = io::dump(io::model_to_json(net));
  const auto back = io::model_from_json(io::parse(text));
  CHECK(io::dump(io::model_to_json(back)) == text);
  for (int i = 0; i < 20; ++i) {
    const auto x = testutil::gaussian(rng, 3);
    CHECK(forward(back, x) == forward(net, x));
  }

  AtomicVectorMeasure in(2), cont(1);
  in.add(idx(1), vec({1, 2}));
  cont.add(ParameterPoint::euclidean(vec({0.25, -1.0 / 3.0})), vec({0.7}));
  const DeepMeasureNetwork c({{InputAffine{1}, in, 1},
                              {ContinuousNeural{Activation::tanh(), std::numeric_limits<double>::infinity(), 0.5}, cont, 2}});
  const auto ctext = io::dump(io::model_to_json(c));
  CHECK(io::dump(io::model_to_json(io::model_from_json(io::parse(ctext)))) == ctext);
}

TEST_CASE("finite files round-trip") {
  std::mt19937_64 rng(3);
  const auto f = export_finite(testutil::random_discrete_net(rng, {2, 4, 1}));
  const auto j = io::finite_to_json(f);
  CHECK(j.at("kind") == "finite");
  CHECK(j.at("format_version") == 1);
  const auto back = io::finite_from_json(io::parse(io::dump(j)));
  REQUIRE(back.weights.size() == f.weights.size());
  for (std::size_t l = 0; l < f.weights.size(); ++l) {
    CHECK(back.weights[l] == f.weights[l]);
    CHECK(back.biases[l] == f.biases[l]);
  }
}

TEST_CASE("model headers are checked") {
  std::mt19937_64 rng(4);
  auto j = io::model_to_json(testutil::random_discrete_net(rng, {2, 2, 1}));
  auto wrong_version = j;
  wrong_version["format_version"] = 2;
  CHECK(code_of([&] { io::model_from_json(wrong_version); }) == Errc::FormatError);
  CHECK(code_of([&] { io::finite_from_json(j); }) == Errc::FormatError);
  auto extra = j;
  extra["surprise"] = true;
  CHECK(code_of([&] { io::model_from_json(extra); }) == Errc::FormatError);
}

TEST_CASE("dataset csv") {
  io::GeneratorSpec gen;
  gen.samples = 5;
  gen.output_dim = 2;
  const auto data = io::generate_teacher_data(gen).data;
  const auto text = io::dataset_to_csv(data, 2, 2);
  CHECK(text.rfind("x_1,x_2,y_1,y_2\n", 0) == 0);
  const auto back = io::dataset_from_csv(text);
  REQUIRE(back.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.x[i] == data.x[i]);
    CHECK(back.y[i] == data.y[i]);
  }

  CHECK(io::dataset_to_csv(Dataset{}, 2, 1) == "x_1,x_2,y_1\n");
  CHECK(code_of([] { io::dataset_from_csv("x_1,y_1\n1,2,3\n"); }) == Errc::FormatError);
}

TEST_CASE("teacher data") {
  io::GeneratorSpec gen;
  gen.samples = 7;
  const auto a = io::generate_teacher_data(gen), b = io::generate_teacher_data(gen);
  CHECK(io::dataset_to_csv(a.data, 2, 1) == io::dataset_to_csv(b.data, 2, 1));
  for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(forward_finite(a.net, a.data.x[i]) == a.data.y[i]);

  gen.samples = 0;
  CHECK(io::dataset_to_csv(io::generate_teacher_data(gen).data, 2, 1) == "x_1,x_2,y_1\n");

  // zero weights leave only the output bias
  auto t = io::generate_teacher_data(io::GeneratorSpec{});
  for (auto& W : t.net.weights) W.setZero();
  for (const auto& x : t.data.x) CHECK(forward_finite(t.net, x) == t.net.biases.back());
}

TEST_CASE("traces") {
  const std::vector<TrainTraceRow> tr{{0, 1.5, 2.0, 3.5, 10}, {1, 1.0, 2.0, 3.0, 9}};
  CHECK(io::train_trace_to_csv(tr) ==
        "step,risk,tv_total,objective,atoms_alive\n0,1.5,2,3.5,10\n1,1,2,3,9\n");
  const std::vector<SolverTraceRow> sr{{0, 0.5, 1.25, 2.0, 1, 0.125}};
  CHECK(io::solver_trace_to_csv(sr) == "iter,lambda,objective,score,atoms,residual\n0,0.5,1.25,2,1,0.125\n");
}

TEST_CASE("run configs") {
  io::RunConfig c;
  c.train.lambda = 0.25;
  c.train.init_widths = {4, 5};
  c.train.activation = Activation::tanh();
  c.solver.tolerance_residual = 1e-7;
  c.paths.model = "out/model.json";
  c.loss = "logistic";
  const auto text = io::dump(io::config_to_json(c));
  const auto back = io::config_from_json(io::parse(text));
  CHECK(io::dump(io::config_to_json(back)) == text);
  CHECK(back.loss_function().kind() == LossFunction::Kind::Logistic);
  CHECK(back.pipeline().lambda == 0.25);
  CHECK(back.pipeline().solver.tolerance_residual == 1e-7);

  CHECK(code_of([] { io::config_from_json(io::parse(R"({"train": {"lamda": 1}})")); }) == Errc::FormatError);
  const auto partial = io::config_from_json(io::parse(R"({"train": {"steps": 10}})"));
  CHECK(partial.train.steps == 10);
  CHECK(partial.train.lambda == 1.0);
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "rkbs_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  io::write_text_file(dir / "a.txt", "hello\n");
  CHECK(io::read_text_file(dir / "a.txt") == "hello\n");
  CHECK(code_of([&] { io::read_text_file(dir / "missing.txt"); }) == Errc::IoError);
  std::filesystem::remove_all(dir.parent_path());
}
