#include "dgcn/training.hpp"

#include <cmath>
#include <functional>

namespace dgcn {

void VertexLabelData::validate() const {
  if (labels.size() != masks.size()) {
    throw std::invalid_argument("vertex labels: steps mismatch between labels and masks");
  }
  for (size_t t = 0; t < labels.size(); ++t) {
    const Matrix& y = labels[t];
    if (y.rows() != masks[t].size()) {
      throw std::invalid_argument("vertex labels: mask length mismatch at step " +
                                  std::to_string(t));
    }
    for (Eigen::Index v = 0; v < y.rows(); ++v) {
      const double row_sum = y.row(v).sum();
      if (masks[t](v) != 0.0) {
        if (std::abs(row_sum - 1.0) > 1e-12 || y.row(v).maxCoeff() != 1.0) {
          throw std::invalid_argument("vertex labels: labeled row " +
                                      std::to_string(v) + " at step " +
                                      std::to_string(t) + " is not one-hot");
        }
      } else if (row_sum != 0.0) {
        throw std::invalid_argument("vertex labels: unlabeled row " +
                                    std::to_string(v) + " at step " +
                                    std::to_string(t) + " is not all-zero");
      }
    }
  }
}

VertexLabelData make_vertex_labels(const std::vector<int>& vertex_class,
                                   const std::vector<int>& vertices, int steps,
                                   int num_vertices, int num_classes) {
  Matrix y = Matrix::Zero(num_vertices, num_classes);
  Vector mask = Vector::Zero(num_vertices);
  for (int v : vertices) {
    y(v, vertex_class.at(v)) = 1.0;
    mask(v) = 1.0;
  }
  VertexLabelData out;
  out.labels.assign(steps, y);
  out.masks.assign(steps, mask);
  return out;
}

void GraphLabelData::validate() const {
  if (labels.rows() != step_mask.size()) {
    throw std::invalid_argument("graph labels: steps mismatch");
  }
  for (Eigen::Index t = 0; t < labels.rows(); ++t) {
    if (step_mask(t) != 0.0 &&
        (std::abs(labels.row(t).sum() - 1.0) > 1e-12 ||
         labels.row(t).maxCoeff() != 1.0)) {
      throw std::invalid_argument("graph labels: step " + std::to_string(t) +
                                  " is not one-hot");
    }
  }
}

double vertex_masked_cross_entropy(const MatrixSequence& probs,
                                   const VertexLabelData& labels,
                                   MatrixSequence* grad) {
  if (probs.size() != labels.labels.size()) {
    throw std::invalid_argument("vertex loss: step count mismatch");
  }
  if (grad) {
    grad->clear();
    for (const Matrix& z : probs) grad->push_back(Matrix::Zero(z.rows(), z.cols()));
  }
  double loss = 0.0;
  for (size_t t = 0; t < probs.size(); ++t) {
    require_same_shape(probs[t], labels.labels[t], "vertex loss");
    for (Eigen::Index v = 0; v < probs[t].rows(); ++v) {
      if (labels.masks[t](v) == 0.0) continue;
      for (Eigen::Index c = 0; c < probs[t].cols(); ++c) {
        const double y = labels.labels[t](v, c);
        if (y == 0.0) continue;  // 0 log 0 = 0
        const double z = std::max(probs[t](v, c), kLogClamp);
        loss -= y * std::log(z);
        if (grad) (*grad)[t](v, c) -= y / z;
      }
    }
  }
  return loss;
}

double graph_cross_entropy(const MatrixSequence& probs,
                           const GraphLabelData& labels, MatrixSequence* grad) {
  if (static_cast<Eigen::Index>(probs.size()) != labels.labels.rows()) {
    throw std::invalid_argument("graph loss: step count mismatch");
  }
  if (grad) {
    grad->clear();
    for (const Matrix& z : probs) grad->push_back(Matrix::Zero(z.rows(), z.cols()));
  }
  double loss = 0.0;
  for (size_t t = 0; t < probs.size(); ++t) {
    if (labels.step_mask(t) == 0.0) continue;
    for (Eigen::Index c = 0; c < probs[t].cols(); ++c) {
      const double y = labels.labels(t, c);
      if (y == 0.0) continue;
      const double z = std::max(probs[t](0, c), kLogClamp);
      loss -= y * std::log(z);
      if (grad) (*grad)[t](0, c) -= y / z;
    }
  }
  return loss;
}

void Adam::step(std::vector<NamedParam>& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, t_);
  const double bc2 = 1.0 - std::pow(config_.beta2, t_);
  for (auto& p : params) {
    auto it = moments_.find(p.name);
    if (it == moments_.end()) {
      it = moments_
               .emplace(p.name,
                        std::make_pair(Matrix::Zero(p.value->rows(), p.value->cols()),
                                       Matrix::Zero(p.value->rows(), p.value->cols())))
               .first;
    }
    Matrix& m = it->second.first;
    Matrix& v = it->second.second;
    m = config_.beta1 * m + (1.0 - config_.beta1) * (*p.grad);
    v = config_.beta2 * v + (1.0 - config_.beta2) * p.grad->cwiseProduct(*p.grad);
    const Matrix m_hat = m / bc1;
    const Matrix v_hat = v / bc2;
    p.value->array() -=
        config_.lr * m_hat.array() / (v_hat.array().sqrt() + config_.eps);
  }
}

namespace {

TrainResult run_epochs(Model& model, const TrainConfig& config,
                       const std::function<double(Rng&)>& train_step,
                       const std::function<std::pair<double, double>(Rng&)>& validate) {
  if (config.max_epochs < 1) {
    throw std::invalid_argument("max_epochs must be >= 1");
  }
  Adam adam(config.adam);
  Rng rng(config.seed);
  TrainResult result;
  double best_acc = -1.0, best_f1 = -1.0;
  auto params = model.params();
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    model.zero_grad();
    const double loss = train_step(rng);
    adam.step(params);

    const auto [val_acc, val_f1] = validate(rng);
    result.history.push_back({epoch, loss, val_acc, val_f1});
    if (val_acc > best_acc) {
      best_acc = val_acc;
      result.best_epoch_accuracy = epoch;
      result.best_params_accuracy = model.get_param_vector();
    }
    if (val_f1 > best_f1) {
      best_f1 = val_f1;
      result.best_epoch_f1 = epoch;
      result.best_params_f1 = model.get_param_vector();
    }
  }
  return result;
}

}  // namespace

TrainResult train_vertex(Model& model, const GraphSequence& data,
                         const VertexLabelData& train_labels,
                         const VertexLabelData& val_labels,
                         const TrainConfig& config) {
  train_labels.validate();
  val_labels.validate();
  double labeled = 0.0;
  for (const Vector& m : train_labels.masks) labeled += m.sum();
  if (labeled == 0.0) {
    throw std::invalid_argument("train_vertex: empty labeled training set");
  }
  const int k = model.spec().num_classes;

  auto train_step = [&](Rng& rng) {
    MatrixSequence probs = model.forward(data, /*train=*/true, rng);
    MatrixSequence grad;
    const double loss = vertex_masked_cross_entropy(probs, train_labels, &grad);
    model.backward(grad);
    return loss;
  };
  auto validate = [&](Rng& rng) {
    MatrixSequence probs = model.forward(data, /*train=*/false, rng);
    return std::make_pair(accuracy(probs, val_labels.labels, val_labels.masks),
                          unweighted_f1(probs, val_labels.labels,
                                        val_labels.masks, k));
  };
  return run_epochs(model, config, train_step, validate);
}

TrainResult train_graph(Model& model, const std::vector<GraphSequence>& data,
                        const std::vector<GraphLabelData>& labels,
                        const std::vector<int>& train_idx,
                        const std::vector<int>& val_idx,
                        const TrainConfig& config) {
  if (data.size() != labels.size()) {
    throw std::invalid_argument("train_graph: data/label count mismatch");
  }
  if (train_idx.empty()) {
    throw std::invalid_argument("train_graph: empty training set");
  }
  for (const auto& l : labels) l.validate();
  const int k = model.spec().num_classes;

  auto train_step = [&](Rng& rng) {
    double loss = 0.0;
    for (int i : train_idx) {
      MatrixSequence probs = model.forward(data[i], /*train=*/true, rng);
      MatrixSequence grad;
      loss += graph_cross_entropy(probs, labels[i], &grad);
      model.backward(grad);
    }
    return loss;
  };
  auto validate = [&](Rng& rng) {
    std::vector<int> pred, truth;
    for (int i : val_idx) {
      MatrixSequence probs = model.forward(data[i], /*train=*/false, rng);
      for (size_t t = 0; t < probs.size(); ++t) {
        if (labels[i].step_mask(t) == 0.0) continue;
        pred.push_back(argmax_class(probs[t].row(0)));
        truth.push_back(argmax_class(labels[i].labels.row(t)));
      }
    }
    return std::make_pair(accuracy_from_classes(pred, truth),
                          unweighted_f1_from_classes(pred, truth, k));
  };
  return run_epochs(model, config, train_step, validate);
}

}  // namespace dgcn
