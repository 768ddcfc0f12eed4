#include "dgcn/model.hpp"

#include <numeric>

namespace dgcn {

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::WdGcn: return "wd-gcn";
    case ModelKind::CdGcn: return "cd-gcn";
    case ModelKind::FcFc: return "fc-fc";
    case ModelKind::GcGc: return "gc-gc";
    case ModelKind::LstmFc: return "lstm-fc";
    case ModelKind::FcLstmFc: return "fc-lstm-fc";
    case ModelKind::VsFcGsFc: return "vsfc-gsfc";
    case ModelKind::GcGsFc: return "gc-gsfc";
    case ModelKind::VLstmGsFc: return "vlstm-gsfc";
    case ModelKind::VsFcVLstmGsFc: return "vsfc-vlstm-gsfc";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(const std::string& name) {
  for (ModelKind k :
       {ModelKind::WdGcn, ModelKind::CdGcn, ModelKind::FcFc, ModelKind::GcGc,
        ModelKind::LstmFc, ModelKind::FcLstmFc, ModelKind::VsFcGsFc,
        ModelKind::GcGsFc, ModelKind::VLstmGsFc, ModelKind::VsFcVLstmGsFc}) {
    if (name == model_kind_name(k)) return k;
  }
  return std::nullopt;
}

namespace {

struct LayerPlan {
  enum class Kind { GcRelu, GcConcat, GcSoftmax, Lstm, DenseRelu, DenseSoftmax, GsFc };
  Kind kind;
  int in = 0, out = 0;
};

std::vector<LayerPlan> plan_layers(const ModelSpec& s) {
  using K = LayerPlan::Kind;
  const int d = s.feature_dim, k = s.num_classes;
  const int m = s.gc_width, n = s.lstm_width, f = s.fc_width;
  const bool graph_task = s.task == TaskKind::Graph;
  auto head = [&](int in) {
    return graph_task ? LayerPlan{K::GsFc, in, k} : LayerPlan{K::DenseSoftmax, in, k};
  };
  switch (s.kind) {
    case ModelKind::WdGcn:
      return {{K::GcRelu, d, m}, {K::Lstm, m, n}, head(n)};
    case ModelKind::CdGcn:
      return {{K::GcConcat, d, m}, {K::Lstm, d + m, n}, head(n)};
    case ModelKind::FcFc:
      return {{K::DenseRelu, d, f}, {K::DenseSoftmax, f, k}};
    case ModelKind::GcGc:
      return {{K::GcRelu, d, m}, {K::GcSoftmax, m, k}};
    case ModelKind::LstmFc:
      return {{K::Lstm, d, n}, {K::DenseSoftmax, n, k}};
    case ModelKind::FcLstmFc:
      return {{K::DenseRelu, d, f}, {K::Lstm, f, n}, {K::DenseSoftmax, n, k}};
    case ModelKind::VsFcGsFc:
      return {{K::DenseRelu, d, f}, {K::GsFc, f, k}};
    case ModelKind::GcGsFc:
      return {{K::GcRelu, d, m}, {K::GsFc, m, k}};
    case ModelKind::VLstmGsFc:
      return {{K::Lstm, d, n}, {K::GsFc, n, k}};
    case ModelKind::VsFcVLstmGsFc:
      return {{K::DenseRelu, d, f}, {K::Lstm, f, n}, {K::GsFc, n, k}};
  }
  throw std::logic_error("unknown model kind");
}

bool is_softmax_head(LayerPlan::Kind k) {
  return k == LayerPlan::Kind::DenseSoftmax || k == LayerPlan::Kind::GcSoftmax ||
         k == LayerPlan::Kind::GsFc;
}

}  // namespace

void validate_spec(const ModelSpec& s) {
  if (s.num_vertices < 1 || s.feature_dim < 1 || s.num_classes < 1) {
    throw std::invalid_argument("model spec: |V|, d and k must be >= 1");
  }
  if (s.dropout < 0.0 || s.dropout >= 1.0) {
    throw std::invalid_argument("model spec: dropout must be in [0, 1)");
  }
  const bool graph_task = s.task == TaskKind::Graph;
  auto require_graph = [&](bool want) {
    if (graph_task != want) {
      throw std::invalid_argument(std::string("model ") + model_kind_name(s.kind) +
                                  " supports only the " +
                                  (want ? "graph" : "vertex") + " task");
    }
  };
  switch (s.kind) {
    case ModelKind::WdGcn:
    case ModelKind::CdGcn:
      break;  // both tasks
    case ModelKind::FcFc:
    case ModelKind::LstmFc:
    case ModelKind::FcLstmFc:
    case ModelKind::GcGc:
      require_graph(false);
      break;
    default:
      require_graph(true);
      break;
  }
  for (const LayerPlan& p : plan_layers(s)) {
    if (p.in < 1 || p.out < 1) {
      throw std::invalid_argument(std::string("model ") + model_kind_name(s.kind) +
                                  ": unset layer width (in=" +
                                  std::to_string(p.in) + ", out=" +
                                  std::to_string(p.out) + ")");
    }
  }
}

std::vector<LayerCount> count_params_breakdown(const ModelSpec& s) {
  validate_spec(s);
  std::vector<LayerCount> out;
  using K = LayerPlan::Kind;
  for (const LayerPlan& p : plan_layers(s)) {
    switch (p.kind) {
      case K::GcRelu:
      case K::GcConcat:
      case K::GcSoftmax:
        out.push_back({"GC(" + std::to_string(p.out) + ")",
                       static_cast<long>(p.in) * p.out});
        break;
      case K::Lstm: {
        const long n = p.out;
        out.push_back({"LSTM(" + std::to_string(p.out) + ")",
                       4 * (static_cast<long>(p.in) * n + n * n + 2 * n)});
        break;
      }
      case K::DenseRelu:
      case K::DenseSoftmax:
        out.push_back({"FC(" + std::to_string(p.out) + ")",
                       static_cast<long>(p.in) * p.out + p.out});
        break;
      case K::GsFc:
        out.push_back({"gs-FC(" + std::to_string(p.out) + ")",
                       static_cast<long>(p.in) * p.out + p.out +
                           s.num_vertices + p.out});
        break;
    }
  }
  return out;
}

long count_params(const ModelSpec& spec) {
  const auto breakdown = count_params_breakdown(spec);
  return std::accumulate(breakdown.begin(), breakdown.end(), 0L,
                         [](long acc, const LayerCount& c) { return acc + c.count; });
}

Model::Model(const ModelSpec& spec, uint64_t seed) : spec_(spec) {
  validate_spec(spec);
  Rng rng(seed);
  using K = LayerPlan::Kind;
  int idx = 0;
  for (const LayerPlan& p : plan_layers(spec)) {
    const std::string name = "L" + std::to_string(idx++);
    if (spec.dropout > 0.0 && !is_softmax_head(p.kind)) {
      layers_.push_back(std::make_unique<DropoutLayer>(spec.dropout));
    }
    switch (p.kind) {
      case K::GcRelu:
      case K::GcConcat:
      case K::GcSoftmax: {
        const GraphConvMode mode = p.kind == K::GcRelu ? GraphConvMode::Waterfall
                                   : p.kind == K::GcConcat
                                       ? GraphConvMode::Concat
                                       : GraphConvMode::SoftmaxHead;
        auto layer = std::make_unique<GraphConvLayer>(name, mode, p.in, p.out, rng);
        gc_layers_.push_back(layer.get());
        layers_.push_back(std::move(layer));
        break;
      }
      case K::Lstm:
        layers_.push_back(std::make_unique<VertexLstmLayer>(
            name, p.in, p.out, spec.candidate_tanh, rng));
        break;
      case K::DenseRelu:
        layers_.push_back(std::make_unique<DenseSeqLayer>(
            name, p.in, p.out, DenseActivation::Relu, rng));
        break;
      case K::DenseSoftmax:
        layers_.push_back(std::make_unique<DenseSeqLayer>(
            name, p.in, p.out, DenseActivation::SoftmaxRows, rng));
        break;
      case K::GsFc:
        layers_.push_back(std::make_unique<GraphPoolLayer>(
            name, p.in, spec.num_vertices, spec.num_classes, rng));
        break;
    }
  }
}

MatrixSequence Model::forward(const GraphSequence& g, bool train, Rng& rng) {
  if (g.num_vertices() != spec_.num_vertices || g.feature_dim() != spec_.feature_dim) {
    throw ShapeError("model expects |V|=" + std::to_string(spec_.num_vertices) +
                     ", d=" + std::to_string(spec_.feature_dim) + "; dataset has |V|=" +
                     std::to_string(g.num_vertices()) + ", d=" +
                     std::to_string(g.feature_dim()));
  }
  for (GraphConvLayer* gc : gc_layers_) gc->bind_renormalized(&g.renormalized());
  MatrixSequence z = g.features();
  for (auto& layer : layers_) z = layer->forward(z, train, rng);
  return z;
}

MatrixSequence Model::backward(const MatrixSequence& grad_out) {
  MatrixSequence g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(g);
  }
  return g;
}

std::vector<NamedParam> Model::params() {
  std::vector<NamedParam> out;
  for (auto& layer : layers_) layer->collect_params(out);
  return out;
}

void Model::zero_grad() {
  for (auto& layer : layers_) layer->zero_grad();
}

long Model::param_count() const { return count_params(spec_); }

Vector Model::get_param_vector() {
  auto ps = params();
  long total = 0;
  for (auto& p : ps) total += p.value->size();
  Vector v(total);
  long off = 0;
  for (auto& p : ps) {
    v.segment(off, p.value->size()) =
        Eigen::Map<const Vector>(p.value->data(), p.value->size());
    off += p.value->size();
  }
  return v;
}

void Model::set_param_vector(const Vector& v) {
  auto ps = params();
  long off = 0;
  for (auto& p : ps) {
    Eigen::Map<Vector>(p.value->data(), p.value->size()) =
        v.segment(off, p.value->size());
    off += p.value->size();
  }
  if (off != v.size()) {
    throw std::invalid_argument("set_param_vector: size mismatch");
  }
}

Vector Model::get_grad_vector() {
  auto ps = params();
  long total = 0;
  for (auto& p : ps) total += p.grad->size();
  Vector v(total);
  long off = 0;
  for (auto& p : ps) {
    v.segment(off, p.grad->size()) =
        Eigen::Map<const Vector>(p.grad->data(), p.grad->size());
    off += p.grad->size();
  }
  return v;
}

}  // namespace dgcn
