#pragma once

#include "dgcn/graph.hpp"
#include "dgcn/model.hpp"
#include "dgcn/training.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace dgcn {

struct VertexDataset {
  std::string name;
  GraphSequence graph;
  MatrixSequence labels;      // T matrices, |V| x k, one-hot where masked
  std::vector<Vector> masks;  // T vectors, 0/1 per vertex
  int num_classes = 0;
  bool weighted = false;

  // Class of each vertex, or -1 where no step labels it.
  std::vector<int> vertex_classes() const;
};

struct GraphTaskItem {
  GraphSequence graph;
  GraphLabelData labels;
};

struct GraphDataset {
  std::string name;
  std::vector<GraphTaskItem> items;  // uniform step count (pad beforehand)
  int num_classes = 0;
  bool weighted = false;

  // Majority label over unmasked steps, used for stratified splitting.
  std::vector<int> sequence_classes() const;
};

struct Dataset {
  TaskKind task;
  std::optional<VertexDataset> vertex;
  std::optional<GraphDataset> graph;
};

// Directory layout: manifest.json plus CSV files (comma-separated, '\n'
// newlines, no header, 17 significant digits). Returns the manifest path.
std::filesystem::path save_dataset(const Dataset& dataset,
                                   const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& manifest_path);

struct SynthConfig {
  int num_vertices = 100;
  int steps = 6;
  int feature_dim = 16;
  int num_classes = 4;
  // Fraction of the sequence in which a class's prototype is inactive:
  // each class's informative window spans round(T * (1 - drift)) steps,
  // so drift 0 means features constant over time.
  double drift = 2.0 / 3.0;
  double noise = 0.3;              // feature noise stddev
  double intra_edge_prob = 0.25;
  double inter_edge_prob = 0.05;
  double labeled_fraction = 1.0;
  uint64_t seed = 0;
};

// Stochastic-block-model graph sequence whose informative feature
// components are active only inside a class-specific window of steps.
VertexDataset synth_dynamic_communities(const SynthConfig& config);

// Flat CSV helpers shared with the CLI.
void write_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_csv(const std::filesystem::path& path);

// Model parameter snapshots as JSON (name -> shape + row-major values).
void save_params(Model& model, const std::filesystem::path& path);
void load_params(Model& model, const std::filesystem::path& path);

}  // namespace dgcn
