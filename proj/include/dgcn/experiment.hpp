#pragma once

#include "dgcn/data.hpp"

#include <string>
#include <vector>

namespace dgcn {

struct MccvConfig {
  int iterations = 10;
  double test_fraction = 0.3;
  double validation_fraction = 0.2;
  uint64_t seed = 0;
  TrainConfig train;
};

struct ModelScores {
  std::string model;
  std::vector<double> accuracy;  // per iteration, on the test split
  std::vector<double> f1;
};

double mean(const std::vector<double>& xs);
double stddev(const std::vector<double>& xs);

// Deterministic per-(model, iteration) seed, independent of model ordering.
uint64_t derive_seed(uint64_t base, const ModelSpec& spec, int iteration);

// Monte Carlo cross-validation with one split plan shared by all models.
// Best-validation-epoch parameters are selected independently for each
// metric before scoring the test split.
std::vector<ModelScores> run_mccv_vertex(const VertexDataset& data,
                                         const std::vector<ModelSpec>& models,
                                         const MccvConfig& config);
std::vector<ModelScores> run_mccv_graph(const GraphDataset& data,
                                        const std::vector<ModelSpec>& models,
                                        const MccvConfig& config);

// Single-split training (the `train` command): returns the result plus the
// test metrics under each selection selection.
struct SingleRunResult {
  TrainResult train;
  double test_accuracy = 0.0;  // best-accuracy-epoch parameters
  double test_f1 = 0.0;        // best-F1-epoch parameters
  Split split;
};

SingleRunResult run_single_vertex(Model& model, const VertexDataset& data,
                                  double test_fraction, double validation_fraction,
                                  const TrainConfig& config);
SingleRunResult run_single_graph(Model& model, const GraphDataset& data,
                                 double test_fraction, double validation_fraction,
                                 const TrainConfig& config);

}  // namespace dgcn
