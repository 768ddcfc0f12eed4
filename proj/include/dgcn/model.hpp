#pragma once

#include "dgcn/graph.hpp"
#include "dgcn/layers.hpp"

#include <memory>
#include <optional>
#include <string>

namespace dgcn {

enum class TaskKind { Vertex, Graph };

// Recognized compositions: the two dynamic architectures for either task
// plus the baseline networks they are compared against.
enum class ModelKind {
  WdGcn,          // wd-GC + v-LSTM + head
  CdGcn,          // cd-GC + v-LSTM + head
  FcFc,           // FC(relu) + FC(softmax), flattened time       [vertex]
  GcGc,           // GC(relu) + GC(softmax), flattened time       [vertex]
  LstmFc,         // LSTM + FC(softmax)                           [vertex]
  FcLstmFc,       // FC(relu) + LSTM + FC(softmax)                [vertex]
  VsFcGsFc,       // vs-FC(relu) + gs-FC                          [graph]
  GcGsFc,         // GC(relu) + gs-FC                             [graph]
  VLstmGsFc,      // v-LSTM + gs-FC                               [graph]
  VsFcVLstmGsFc,  // vs-FC(relu) + v-LSTM + gs-FC                 [graph]
};

const char* model_kind_name(ModelKind kind);
std::optional<ModelKind> parse_model_kind(const std::string& name);

struct ModelSpec {
  ModelKind kind = ModelKind::WdGcn;
  TaskKind task = TaskKind::Vertex;
  int num_vertices = 0;
  int feature_dim = 0;
  int num_classes = 0;
  int gc_width = 0;    // M
  int lstm_width = 0;  // N
  int fc_width = 0;    // first-FC nodes in FC baselines
  double dropout = 0.0;
  bool candidate_tanh = false;
};

void validate_spec(const ModelSpec& spec);

struct LayerCount {
  std::string layer;
  long count;
};

long count_params(const ModelSpec& spec);
std::vector<LayerCount> count_params_breakdown(const ModelSpec& spec);

// A built model: parameter store plus executable forward/backward pipeline.
// Vertex task outputs T row-stochastic |V| x k matrices; graph task outputs
// T probability 1 x k row vectors.
class Model {
 public:
  Model(const ModelSpec& spec, uint64_t seed);

  const ModelSpec& spec() const { return spec_; }

  MatrixSequence forward(const GraphSequence& g, bool train, Rng& rng);
  // Gradient wrt the input feature sequence; parameter gradients accumulate.
  MatrixSequence backward(const MatrixSequence& grad_out);

  std::vector<NamedParam> params();
  void zero_grad();
  long param_count() const;

  // Flat parameter vector helpers (gradient checks, snapshots).
  Vector get_param_vector();
  void set_param_vector(const Vector& v);
  Vector get_grad_vector();

 private:
  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<GraphConvLayer*> gc_layers_;
};

}  // namespace dgcn
