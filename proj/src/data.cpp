#include "dgcn/data.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace dgcn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string step_file(const char* stem, int t /*1-based*/) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d.csv", stem, t);
  return buf;
}

void require_unweighted(const Matrix& a, const std::string& file) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0 && a(i, j) != 1.0) {
        throw std::runtime_error(file + ": unweighted dataset has entry " +
                                 std::to_string(a(i, j)) + " at (" +
                                 std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

Matrix load_matrix_checked(const fs::path& dir, const std::string& rel,
                           Eigen::Index rows, Eigen::Index cols) {
  Matrix m = read_csv(dir / rel);
  if (m.rows() != rows || m.cols() != cols) {
    throw std::runtime_error(rel + ": expected " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", got " + shape_str(m));
  }
  return m;
}

}  // namespace

void write_csv(const fs::path& path, const Matrix& m) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::fprintf(f, j == 0 ? "%.17g" : ",%.17g", m(i, j));
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

Matrix read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(path.string() + ": ragged rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": empty file");
  Matrix m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::vector<int> VertexDataset::vertex_classes() const {
  std::vector<int> cls(graph.num_vertices(), -1);
  for (size_t t = 0; t < labels.size(); ++t) {
    for (Eigen::Index v = 0; v < labels[t].rows(); ++v) {
      if (cls[v] < 0 && masks[t](v) != 0.0) {
        Eigen::Index col;
        labels[t].row(v).maxCoeff(&col);
        cls[v] = static_cast<int>(col);
      }
    }
  }
  return cls;
}

std::vector<int> GraphDataset::sequence_classes() const {
  std::vector<int> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    std::vector<int> votes(num_classes, 0);
    for (Eigen::Index t = 0; t < item.labels.labels.rows(); ++t) {
      if (item.labels.step_mask(t) == 0.0) continue;
      Eigen::Index col;
      item.labels.labels.row(t).maxCoeff(&col);
      ++votes[col];
    }
    out.push_back(static_cast<int>(
        std::max_element(votes.begin(), votes.end()) - votes.begin()));
  }
  return out;
}

std::filesystem::path save_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  json manifest;
  json files;

  if (dataset.task == TaskKind::Vertex) {
    const VertexDataset& d = dataset.vertex.value();
    manifest["name"] = d.name;
    manifest["task"] = "vertex";
    manifest["T"] = d.graph.steps();
    manifest["num_vertices"] = d.graph.num_vertices();
    manifest["feature_dim"] = d.graph.feature_dim();
    manifest["num_classes"] = d.num_classes;
    manifest["weighted"] = d.weighted;
    std::vector<std::string> adj, feat, lab, msk;
    for (int t = 0; t < d.graph.steps(); ++t) {
      adj.push_back(step_file("adj", t + 1));
      feat.push_back(step_file("feat", t + 1));
      lab.push_back(step_file("labels", t + 1));
      msk.push_back(step_file("mask", t + 1));
      write_csv(dir / adj.back(), d.graph.adjacency()[t]);
      write_csv(dir / feat.back(), d.graph.features()[t]);
      write_csv(dir / lab.back(), d.labels[t]);
      write_csv(dir / msk.back(), d.masks[t]);
    }
    files["adjacency"] = adj;
    files["features"] = feat;
    files["labels"] = lab;
    files["masks"] = msk;
  } else {
    const GraphDataset& d = dataset.graph.value();
    if (d.items.empty()) throw std::invalid_argument("graph dataset is empty");
    const int steps = d.items.front().graph.steps();
    for (const auto& item : d.items) {
      if (item.graph.steps() != steps) {
        throw std::invalid_argument(
            "graph dataset sequences must share one padded length");
      }
    }
    manifest["name"] = d.name;
    manifest["task"] = "graph";
    manifest["T"] = steps;
    manifest["num_vertices"] = d.items.front().graph.num_vertices();
    manifest["feature_dim"] = d.items.front().graph.feature_dim();
    manifest["num_classes"] = d.num_classes;
    manifest["weighted"] = d.weighted;
    json seqs = json::array();
    for (size_t s = 0; s < d.items.size(); ++s) {
      char sub[32];
      std::snprintf(sub, sizeof(sub), "seq_%04zu", s + 1);
      fs::create_directories(dir / sub);
      json entry;
      std::vector<std::string> adj, feat, lab, msk;
      const auto& item = d.items[s];
      for (int t = 0; t < steps; ++t) {
        adj.push_back(std::string(sub) + "/" + step_file("adj", t + 1));
        feat.push_back(std::string(sub) + "/" + step_file("feat", t + 1));
        lab.push_back(std::string(sub) + "/" + step_file("labels", t + 1));
        msk.push_back(std::string(sub) + "/" + step_file("mask", t + 1));
        write_csv(dir / adj.back(), item.graph.adjacency()[t]);
        write_csv(dir / feat.back(), item.graph.features()[t]);
        write_csv(dir / lab.back(), item.labels.labels.row(t));
        Matrix m(1, 1);
        m(0, 0) = item.labels.step_mask(t);
        write_csv(dir / msk.back(), m);
      }
      entry["adjacency"] = adj;
      entry["features"] = feat;
      entry["labels"] = lab;
      entry["masks"] = msk;
      seqs.push_back(entry);
    }
    files["sequences"] = seqs;
  }

  manifest["files"] = files;
  const fs::path manifest_path = dir / "manifest.json";
  std::ofstream out(manifest_path, std::ios::binary);
  out << manifest.dump(2) << "\n";
  return manifest_path;
}

Dataset load_dataset(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw std::runtime_error("cannot read manifest " + manifest_path.string());
  }
  json manifest;
  in >> manifest;
  for (const char* key : {"name", "task", "T", "num_vertices", "feature_dim",
                          "num_classes", "weighted", "files"}) {
    if (!manifest.contains(key)) {
      throw std::runtime_error("manifest missing key '" + std::string(key) + "'");
    }
  }
  const fs::path dir = manifest_path.parent_path();
  const std::string task = manifest["task"];
  const int steps = manifest["T"];
  const int num_vertices = manifest["num_vertices"];
  const int feature_dim = manifest["feature_dim"];
  const int num_classes = manifest["num_classes"];
  const bool weighted = manifest["weighted"];
  const json& files = manifest["files"];

  Dataset out;
  if (task == "vertex") {
    out.task = TaskKind::Vertex;
    MatrixSequence adj, feat, lab;
    std::vector<Vector> msk;
    for (int t = 0; t < steps; ++t) {
      const std::string adj_file = files["adjacency"].at(t);
      Matrix a = load_matrix_checked(dir, adj_file, num_vertices, num_vertices);
      if (!weighted) require_unweighted(a, adj_file);
      adj.push_back(std::move(a));
      feat.push_back(load_matrix_checked(dir, files["features"].at(t),
                                         num_vertices, feature_dim));
      lab.push_back(load_matrix_checked(dir, files["labels"].at(t), num_vertices,
                                        num_classes));
      msk.push_back(
          load_matrix_checked(dir, files["masks"].at(t), num_vertices, 1).col(0));
    }
    VertexDataset d{manifest["name"], GraphSequence(std::move(adj), std::move(feat)),
                    std::move(lab), std::move(msk), num_classes, weighted};
    VertexLabelData check{d.labels, d.masks};
    check.validate();
    out.vertex.emplace(std::move(d));
  } else if (task == "graph") {
    out.task = TaskKind::Graph;
    GraphDataset d;
    d.name = manifest["name"];
    d.num_classes = num_classes;
    d.weighted = weighted;
    for (const json& entry : files["sequences"]) {
      MatrixSequence adj, feat;
      Matrix labels(steps, num_classes);
      Vector mask(steps);
      for (int t = 0; t < steps; ++t) {
        const std::string adj_file = entry["adjacency"].at(t);
        Matrix a = load_matrix_checked(dir, adj_file, num_vertices, num_vertices);
        if (!weighted) require_unweighted(a, adj_file);
        adj.push_back(std::move(a));
        feat.push_back(load_matrix_checked(dir, entry["features"].at(t),
                                           num_vertices, feature_dim));
        labels.row(t) =
            load_matrix_checked(dir, entry["labels"].at(t), 1, num_classes).row(0);
        mask(t) = load_matrix_checked(dir, entry["masks"].at(t), 1, 1)(0, 0);
      }
      GraphTaskItem item{GraphSequence(std::move(adj), std::move(feat)),
                         GraphLabelData{std::move(labels), std::move(mask)}};
      item.labels.validate();
      d.items.push_back(std::move(item));
    }
    out.graph.emplace(std::move(d));
  } else {
    throw std::runtime_error("manifest task must be 'vertex' or 'graph', got '" +
                             task + "'");
  }
  return out;
}

VertexDataset synth_dynamic_communities(const SynthConfig& cfg) {
  if (cfg.num_classes > cfg.num_vertices) {
    throw std::invalid_argument("synth: k must be <= |V|");
  }
  if (cfg.num_vertices < 1 || cfg.steps < 1 || cfg.feature_dim < 1 ||
      cfg.num_classes < 1) {
    throw std::invalid_argument("synth: dimensions must be >= 1");
  }
  if (cfg.drift < 0.0 || cfg.drift > 1.0 || cfg.noise < 0.0 ||
      cfg.intra_edge_prob < 0.0 || cfg.intra_edge_prob > 1.0 ||
      cfg.inter_edge_prob < 0.0 || cfg.inter_edge_prob > 1.0 ||
      cfg.labeled_fraction <= 0.0 || cfg.labeled_fraction > 1.0) {
    throw std::invalid_argument("synth: parameter out of range");
  }

  Rng rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int v_count = cfg.num_vertices;
  const int k = cfg.num_classes;
  std::vector<int> cls(v_count);
  for (int v = 0; v < v_count; ++v) cls[v] = v % k;

  // Informative window per class; drift 0 keeps prototypes on at all steps.
  const int window = std::max<int>(
      1, static_cast<int>(std::lround(cfg.steps * (1.0 - cfg.drift))));
  auto active = [&](int c, int t) {
    const int start = (c * cfg.steps) / k;
    const int rel = (t - start + cfg.steps) % cfg.steps;
    return rel < window;
  };

  // Class prototype: a block of feature components per class.
  Matrix prototypes = Matrix::Zero(k, cfg.feature_dim);
  for (int c = 0; c < k; ++c) {
    const int lo = (c * cfg.feature_dim) / k;
    const int hi = ((c + 1) * cfg.feature_dim) / k;
    for (int j = lo; j < hi; ++j) prototypes(c, j) = 2.0;
  }

  MatrixSequence adj, feat;
  for (int t = 0; t < cfg.steps; ++t) {
    Matrix a = Matrix::Zero(v_count, v_count);
    for (int i = 0; i < v_count; ++i) {
      for (int j = i + 1; j < v_count; ++j) {
        const double p =
            cls[i] == cls[j] ? cfg.intra_edge_prob : cfg.inter_edge_prob;
        if (unif(rng) < p) a(i, j) = a(j, i) = 1.0;
      }
    }
    Matrix x(v_count, cfg.feature_dim);
    for (int v = 0; v < v_count; ++v) {
      for (int j = 0; j < cfg.feature_dim; ++j) {
        const double base = active(cls[v], t) ? prototypes(cls[v], j) : 0.0;
        x(v, j) = base + cfg.noise * gauss(rng);
      }
    }
    adj.push_back(std::move(a));
    feat.push_back(std::move(x));
  }

  // Stratified labeled mask.
  Vector mask = Vector::Zero(v_count);
  std::vector<std::vector<int>> members(k);
  for (int v = 0; v < v_count; ++v) members[cls[v]].push_back(v);
  for (int c = 0; c < k; ++c) {
    std::shuffle(members[c].begin(), members[c].end(), rng);
    const long take = std::lround(cfg.labeled_fraction * members[c].size());
    for (long i = 0; i < take; ++i) mask(members[c][i]) = 1.0;
  }

  Matrix y = Matrix::Zero(v_count, k);
  for (int v = 0; v < v_count; ++v) {
    if (mask(v) != 0.0) y(v, cls[v]) = 1.0;
  }

  VertexDataset out{"synth-communities",
                    GraphSequence(std::move(adj), std::move(feat)),
                    MatrixSequence(cfg.steps, y),
                    std::vector<Vector>(cfg.steps, mask),
                    k,
                    /*weighted=*/false};
  return out;
}

void save_params(Model& model, const fs::path& path) {
  json j;
  j["model"] = model_kind_name(model.spec().kind);
  json params = json::object();
  for (const NamedParam& p : model.params()) {
    json entry;
    entry["rows"] = p.value->rows();
    entry["cols"] = p.value->cols();
    std::vector<double> data(p.value->size());
    Eigen::Map<Matrix>(data.data(), p.value->rows(), p.value->cols()) = *p.value;
    entry["data"] = data;
    params[p.name] = entry;
  }
  j["params"] = params;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void load_params(Model& model, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json j;
  in >> j;
  for (NamedParam& p : model.params()) {
    const json& entry = j.at("params").at(p.name);
    if (entry.at("rows") != p.value->rows() || entry.at("cols") != p.value->cols()) {
      throw std::runtime_error("parameter " + p.name + " shape mismatch");
    }
    std::vector<double> data = entry.at("data").get<std::vector<double>>();
    *p.value = Eigen::Map<Matrix>(data.data(), p.value->rows(), p.value->cols());
  }
}

}  // namespace dgcn
