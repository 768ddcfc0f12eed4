#include "dgcn/experiment.hpp"

#include <cmath>
#include <numeric>

namespace dgcn {

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

double stddev(const std::vector<double>& xs) {
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / xs.size());
}

uint64_t derive_seed(uint64_t base, const ModelSpec& spec, int iteration) {
  const std::string tag = std::string(model_kind_name(spec.kind)) + ":" +
                          std::to_string(spec.gc_width) + ":" +
                          std::to_string(spec.lstm_width) + ":" +
                          std::to_string(spec.fc_width);
  uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  h ^= base + 0x9e3779b97f4a7c15ULL * (iteration + 1);
  return h;
}

namespace {

std::vector<int> remap(const std::vector<int>& pool, const std::vector<int>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(pool[i]);
  return out;
}

struct VertexPool {
  std::vector<int> pool;          // vertex ids eligible for splitting
  std::vector<int> pool_classes;  // aligned with pool
};

VertexPool vertex_pool(const VertexDataset& data) {
  VertexPool p;
  const auto classes = data.vertex_classes();
  for (size_t v = 0; v < classes.size(); ++v) {
    if (classes[v] >= 0) {
      p.pool.push_back(static_cast<int>(v));
      p.pool_classes.push_back(classes[v]);
    }
  }
  return p;
}

}  // namespace

std::vector<ModelScores> run_mccv_vertex(const VertexDataset& data,
                                         const std::vector<ModelSpec>& models,
                                         const MccvConfig& config) {
  const VertexPool pool = vertex_pool(data);
  const auto plan =
      monte_carlo_splits(pool.pool_classes, config.iterations,
                         config.test_fraction, config.validation_fraction,
                         config.seed);
  const auto classes = data.vertex_classes();
  const int steps = data.graph.steps();
  const int v_count = data.graph.num_vertices();

  std::vector<ModelScores> out;
  for (const ModelSpec& spec : models) {
    ModelScores scores;
    scores.model = model_kind_name(spec.kind);
    for (int it = 0; it < config.iterations; ++it) {
      const Split& split = plan[it];
      const auto train_labels = make_vertex_labels(
          classes, remap(pool.pool, split.train), steps, v_count, data.num_classes);
      const auto val_labels = make_vertex_labels(
          classes, remap(pool.pool, split.val), steps, v_count, data.num_classes);
      const auto test_labels = make_vertex_labels(
          classes, remap(pool.pool, split.test), steps, v_count, data.num_classes);

      TrainConfig tc = config.train;
      tc.seed = derive_seed(config.seed, spec, it);
      Model model(spec, tc.seed);
      TrainResult result =
          train_vertex(model, data.graph, train_labels, val_labels, tc);

      Rng eval_rng(0);
      model.set_param_vector(result.best_params_accuracy);
      MatrixSequence probs = model.forward(data.graph, false, eval_rng);
      scores.accuracy.push_back(
          accuracy(probs, test_labels.labels, test_labels.masks));

      model.set_param_vector(result.best_params_f1);
      probs = model.forward(data.graph, false, eval_rng);
      scores.f1.push_back(unweighted_f1(probs, test_labels.labels,
                                        test_labels.masks, data.num_classes));
    }
    out.push_back(std::move(scores));
  }
  return out;
}

namespace {

std::pair<double, double> score_graph_subset(Model& model,
                                             const GraphDataset& data,
                                             const std::vector<int>& idx,
                                             bool want_f1) {
  Rng rng(0);
  std::vector<int> pred, truth;
  for (int i : idx) {
    MatrixSequence probs = model.forward(data.items[i].graph, false, rng);
    for (size_t t = 0; t < probs.size(); ++t) {
      if (data.items[i].labels.step_mask(t) == 0.0) continue;
      pred.push_back(argmax_class(probs[t].row(0)));
      Eigen::Index col;
      data.items[i].labels.labels.row(t).maxCoeff(&col);
      truth.push_back(static_cast<int>(col));
    }
  }
  if (want_f1) {
    return {0.0, unweighted_f1_from_classes(pred, truth, data.num_classes)};
  }
  return {accuracy_from_classes(pred, truth), 0.0};
}

}  // namespace

std::vector<ModelScores> run_mccv_graph(const GraphDataset& data,
                                        const std::vector<ModelSpec>& models,
                                        const MccvConfig& config) {
  const auto seq_classes = data.sequence_classes();
  const auto plan =
      monte_carlo_splits(seq_classes, config.iterations, config.test_fraction,
                         config.validation_fraction, config.seed);

  std::vector<GraphSequence> graphs;
  std::vector<GraphLabelData> labels;
  for (const auto& item : data.items) {
    graphs.push_back(item.graph);
    labels.push_back(item.labels);
  }

  std::vector<ModelScores> out;
  for (const ModelSpec& spec : models) {
    ModelScores scores;
    scores.model = model_kind_name(spec.kind);
    for (int it = 0; it < config.iterations; ++it) {
      const Split& split = plan[it];
      TrainConfig tc = config.train;
      tc.seed = derive_seed(config.seed, spec, it);
      Model model(spec, tc.seed);
      TrainResult result =
          train_graph(model, graphs, labels, split.train, split.val, tc);

      model.set_param_vector(result.best_params_accuracy);
      scores.accuracy.push_back(
          score_graph_subset(model, data, split.test, false).first);
      model.set_param_vector(result.best_params_f1);
      scores.f1.push_back(
          score_graph_subset(model, data, split.test, true).second);
    }
    out.push_back(std::move(scores));
  }
  return out;
}

SingleRunResult run_single_vertex(Model& model, const VertexDataset& data,
                                  double test_fraction, double validation_fraction,
                                  const TrainConfig& config) {
  const VertexPool pool = vertex_pool(data);
  const auto plan = monte_carlo_splits(pool.pool_classes, 1, test_fraction,
                                       validation_fraction, config.seed);
  const auto classes = data.vertex_classes();
  const int steps = data.graph.steps();
  const int v_count = data.graph.num_vertices();
  const Split& split = plan.front();

  const auto train_labels = make_vertex_labels(
      classes, remap(pool.pool, split.train), steps, v_count, data.num_classes);
  const auto val_labels = make_vertex_labels(
      classes, remap(pool.pool, split.val), steps, v_count, data.num_classes);
  const auto test_labels = make_vertex_labels(
      classes, remap(pool.pool, split.test), steps, v_count, data.num_classes);

  SingleRunResult out;
  out.split = split;
  out.train = train_vertex(model, data.graph, train_labels, val_labels, config);

  Rng rng(0);
  model.set_param_vector(out.train.best_params_accuracy);
  MatrixSequence probs = model.forward(data.graph, false, rng);
  out.test_accuracy = accuracy(probs, test_labels.labels, test_labels.masks);
  model.set_param_vector(out.train.best_params_f1);
  probs = model.forward(data.graph, false, rng);
  out.test_f1 = unweighted_f1(probs, test_labels.labels, test_labels.masks,
                              data.num_classes);
  return out;
}

SingleRunResult run_single_graph(Model& model, const GraphDataset& data,
                                 double test_fraction, double validation_fraction,
                                 const TrainConfig& config) {
  const auto seq_classes = data.sequence_classes();
  const auto plan = monte_carlo_splits(seq_classes, 1, test_fraction,
                                       validation_fraction, config.seed);
  const Split& split = plan.front();

  std::vector<GraphSequence> graphs;
  std::vector<GraphLabelData> labels;
  for (const auto& item : data.items) {
    graphs.push_back(item.graph);
    labels.push_back(item.labels);
  }

  SingleRunResult out;
  out.split = split;
  out.train = train_graph(model, graphs, labels, split.train, split.val, config);
  model.set_param_vector(out.train.best_params_accuracy);
  out.test_accuracy = score_graph_subset(model, data, split.test, false).first;
  model.set_param_vector(out.train.best_params_f1);
  out.test_f1 = score_graph_subset(model, data, split.test, true).second;
  return out;
}

}  // namespace dgcn
