#pragma once

#include "dgcn/evaluation.hpp"
#include "dgcn/model.hpp"

#include <map>
#include <optional>

namespace dgcn {

constexpr double kLogClamp = 1e-12;

// One-hot label rows per step plus the diagonal-projector mask selecting
// labeled vertices; rows outside the mask must be all-zero.
struct VertexLabelData {
  MatrixSequence labels;       // T matrices, |V| x k
  std::vector<Vector> masks;   // T vectors of 0/1, length |V|

  void validate() const;
};

// Builds label data for a vertex subset: mask = indicator of `vertices`,
// labels = full one-hot rows zeroed outside the subset, constant across steps.
VertexLabelData make_vertex_labels(const std::vector<int>& vertex_class,
                                   const std::vector<int>& vertices, int steps,
                                   int num_vertices, int num_classes);

// Per-step one-hot label vectors with a step mask excluding padding.
struct GraphLabelData {
  Matrix labels;     // T x k one-hot rows
  Vector step_mask;  // T entries of 0/1

  void validate() const;
};

// Masked cross-entropy; fills *grad (same shapes as probs) when non-null.
double vertex_masked_cross_entropy(const MatrixSequence& probs,
                                   const VertexLabelData& labels,
                                   MatrixSequence* grad = nullptr);
double graph_cross_entropy(const MatrixSequence& probs,
                           const GraphLabelData& labels,
                           MatrixSequence* grad = nullptr);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction, moments keyed by parameter name.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::vector<NamedParam>& params);
  long t() const { return t_; }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::map<std::string, std::pair<Matrix, Matrix>> moments_;
};

enum class SelectionMetric { Accuracy, UnweightedF1 };

struct TrainConfig {
  AdamConfig adam;
  int max_epochs = 100;
  uint64_t seed = 0;
};

struct EpochRecord {
  int epoch;
  double train_loss;
  double val_accuracy;
  double val_f1;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch_accuracy = 0;
  int best_epoch_f1 = 0;
  Vector best_params_accuracy;  // flat snapshots, model.params() order
  Vector best_params_f1;
};

// Full-batch training on one graph sequence; validation metrics computed
// in eval mode each epoch, best-epoch parameters snapshotted independently
// per metric. The model is left holding the last-epoch parameters.
TrainResult train_vertex(Model& model, const GraphSequence& data,
                         const VertexLabelData& train_labels,
                         const VertexLabelData& val_labels,
                         const TrainConfig& config);

// Graph task: several sequences, full-batch over the training subset.
TrainResult train_graph(Model& model, const std::vector<GraphSequence>& data,
                        const std::vector<GraphLabelData>& labels,
                        const std::vector<int>& train_idx,
                        const std::vector<int>& val_idx,
                        const TrainConfig& config);

}  // namespace dgcn
