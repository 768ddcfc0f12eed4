#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgcn/data.hpp"

#include <fstream>
#include <sstream>

using namespace dgcn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("dgcn_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      out[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
    }
  }
  return out;
}

SynthConfig small_cfg(uint64_t seed = 1) {
  SynthConfig cfg;
  cfg.num_vertices = 12;
  cfg.steps = 4;
  cfg.feature_dim = 6;
  cfg.num_classes = 3;
  cfg.seed = seed;
  return cfg;
}

Dataset vertex_dataset(uint64_t seed = 1) {
  return Dataset{TaskKind::Vertex, synth_dynamic_communities(small_cfg(seed)),
                 std::nullopt};
}

}  // namespace

TEST_CASE("csv round trip is bit exact") {
  fs::path dir = fresh_dir("csv");
  Matrix m(2, 3);
  m << 1.0 / 3.0, -2.7182818284590452, 1e-17, 0.0, 3.14159265358979323, -0.1;
  write_csv(dir / "m.csv", m);
  Matrix back = read_csv(dir / "m.csv");
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vertex dataset save/load round trip is bit exact") {
  fs::path dir = fresh_dir("vertex_rt");
  Dataset ds = vertex_dataset();
  fs::path manifest = save_dataset(ds, dir);
  Dataset back = load_dataset(manifest);
  REQUIRE(back.task == TaskKind::Vertex);
  const auto& a = ds.vertex.value();
  const auto& b = back.vertex.value();
  CHECK(b.name == a.name);
  CHECK(b.num_classes == a.num_classes);
  CHECK(b.weighted == a.weighted);
  REQUIRE(b.graph.steps() == a.graph.steps());
  for (int t = 0; t < a.graph.steps(); ++t) {
    CHECK((a.graph.adjacency()[t] - b.graph.adjacency()[t]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.graph.features()[t] - b.graph.features()[t]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.labels[t] - b.labels[t]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.masks[t] - b.masks[t]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("saving is byte deterministic and idempotent through a reload") {
  fs::path d1 = fresh_dir("bytes1"), d2 = fresh_dir("bytes2"), d3 = fresh_dir("bytes3");
  Dataset ds = vertex_dataset();
  save_dataset(ds, d1);
  save_dataset(ds, d2);
  CHECK(dir_bytes(d1) == dir_bytes(d2));

  Dataset reloaded = load_dataset(d1 / "manifest.json");
  save_dataset(reloaded, d3);
  CHECK(dir_bytes(d1) == dir_bytes(d3));
}

TEST_CASE("graph dataset save/load round trip") {
  fs::path dir = fresh_dir("graph_rt");
  GraphDataset d;
  d.name = "toy";
  d.num_classes = 2;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 3; ++s) {
    MatrixSequence adj, feat;
    for (int t = 0; t < 2; ++t) {
      Matrix a = Matrix::Zero(4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
          if (u(rng) < 0.5) a(i, j) = a(j, i) = 1.0;
      adj.push_back(a);
      Matrix x(4, 3);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) x(i, j) = u(rng);
      feat.push_back(x);
    }
    GraphLabelData labels;
    labels.labels = Matrix::Zero(2, 2);
    labels.labels(0, s % 2) = 1.0;
    labels.labels(1, (s + 1) % 2) = 1.0;
    labels.step_mask = Vector::Ones(2);
    d.items.push_back({GraphSequence(adj, feat), labels});
  }
  Dataset ds{TaskKind::Graph, std::nullopt, d};
  fs::path manifest = save_dataset(ds, dir);
  Dataset back = load_dataset(manifest);
  REQUIRE(back.task == TaskKind::Graph);
  const auto& items = back.graph.value().items;
  REQUIRE(items.size() == 3);
  for (size_t s = 0; s < 3; ++s) {
    for (int t = 0; t < 2; ++t) {
      CHECK((items[s].graph.adjacency()[t] - d.items[s].graph.adjacency()[t])
                .cwiseAbs()
                .maxCoeff() == 0.0);
      CHECK((items[s].graph.features()[t] - d.items[s].graph.features()[t])
                .cwiseAbs()
                .maxCoeff() == 0.0);
    }
    CHECK((items[s].labels.labels - d.items[s].labels.labels).cwiseAbs().maxCoeff() ==
          0.0);
  }
  CHECK(back.graph.value().sequence_classes() == d.sequence_classes());
}

TEST_CASE("manifest errors are descriptive") {
  fs::path dir = fresh_dir("errors");
  save_dataset(vertex_dataset(), dir);

  SUBCASE("missing key") {
    std::string text = slurp(dir / "manifest.json");
    const auto pos = text.find("\"feature_dim\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 13, "\"feature_dim_x\"");
    std::ofstream(dir / "manifest.json", std::ios::binary) << text;
    CHECK_THROWS_WITH_AS(load_dataset(dir / "manifest.json"),
                         doctest::Contains("feature_dim"), std::runtime_error);
  }

  SUBCASE("dimension mismatch names the file") {
    std::string text = slurp(dir / "manifest.json");
    const auto pos = text.find("\"feature_dim\": 6");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 16, "\"feature_dim\": 7");
    std::ofstream(dir / "manifest.json", std::ios::binary) << text;
    CHECK_THROWS_WITH_AS(load_dataset(dir / "manifest.json"),
                         doctest::Contains("feat_0001.csv"), std::runtime_error);
  }

  SUBCASE("missing file") {
    fs::remove(dir / "adj_0002.csv");
    CHECK_THROWS_WITH_AS(load_dataset(dir / "manifest.json"),
                         doctest::Contains("adj_0002.csv"), std::runtime_error);
  }

  SUBCASE("unweighted dataset with fractional entries") {
    Matrix a = read_csv(dir / "adj_0001.csv");
    a(0, 1) = a(1, 0) = 0.5;
    write_csv(dir / "adj_0001.csv", a);
    CHECK_THROWS_WITH_AS(load_dataset(dir / "manifest.json"),
                         doctest::Contains("unweighted"), std::runtime_error);
  }
}

TEST_CASE("synthetic datasets validate across a 100-seed sweep") {
  for (uint64_t seed = 0; seed < 100; ++seed) {
    VertexDataset d = synth_dynamic_communities(small_cfg(seed));
    CHECK(validate_graph_sequence(d.graph.adjacency(), d.graph.features()).empty());
    VertexLabelData labels{d.labels, d.masks};
    CHECK_NOTHROW(labels.validate());
    for (const Matrix& a : d.graph.adjacency()) {
      CHECK(a.diagonal().cwiseAbs().maxCoeff() == 0.0);
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double v = a(i / a.cols(), i % a.cols());
        CHECK((v == 0.0 || v == 1.0));
      }
    }
  }
}

TEST_CASE("synthetic generator is seed deterministic") {
  VertexDataset a = synth_dynamic_communities(small_cfg(7));
  VertexDataset b = synth_dynamic_communities(small_cfg(7));
  for (int t = 0; t < a.graph.steps(); ++t) {
    CHECK((a.graph.adjacency()[t] - b.graph.adjacency()[t]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.graph.features()[t] - b.graph.features()[t]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("drift zero and zero noise freeze the features over time") {
  SynthConfig cfg = small_cfg(3);
  cfg.drift = 0.0;
  cfg.noise = 0.0;
  VertexDataset d = synth_dynamic_communities(cfg);
  for (int t = 1; t < d.graph.steps(); ++t) {
    CHECK((d.graph.features()[t] - d.graph.features()[0]).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("labeled fraction controls mask density with stratified rounding") {
  SynthConfig cfg = small_cfg(5);
  cfg.num_vertices = 100;
  cfg.num_classes = 4;
  cfg.labeled_fraction = 0.3;
  VertexDataset d = synth_dynamic_communities(cfg);
  // 25 vertices per class, lround(0.3 * 25) = 8 labeled each.
  CHECK(d.masks[0].sum() == doctest::Approx(32.0));
  // Labels outside the mask are all-zero.
  VertexLabelData labels{d.labels, d.masks};
  CHECK_NOTHROW(labels.validate());
}

TEST_CASE("synth rejects out-of-range parameters") {
  SynthConfig cfg = small_cfg();
  cfg.num_classes = 20;  // > |V|
  CHECK_THROWS_AS(synth_dynamic_communities(cfg), std::invalid_argument);
  cfg = small_cfg();
  cfg.drift = 1.5;
  CHECK_THROWS_AS(synth_dynamic_communities(cfg), std::invalid_argument);
  cfg = small_cfg();
  cfg.labeled_fraction = 0.0;
  CHECK_THROWS_AS(synth_dynamic_communities(cfg), std::invalid_argument);
}

TEST_CASE("model parameter snapshots round trip through json") {
  ModelSpec spec;
  spec.kind = ModelKind::WdGcn;
  spec.task = TaskKind::Vertex;
  spec.num_vertices = 6;
  spec.feature_dim = 4;
  spec.num_classes = 3;
  spec.gc_width = 3;
  spec.lstm_width = 3;
  Model a(spec, 17);
  fs::path dir = fresh_dir("params");
  save_params(a, dir / "p.json");

  Model b(spec, 99);  // different init, overwritten by the load
  load_params(b, dir / "p.json");
  CHECK((a.get_param_vector() - b.get_param_vector()).cwiseAbs().maxCoeff() == 0.0);

  ModelSpec other = spec;
  other.lstm_width = 4;
  Model c(other, 1);
  CHECK_THROWS_AS(load_params(c, dir / "p.json"), std::exception);
}
