#include "dgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace dgcn {

namespace {

void check_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("adjacency must be square, got " + shape_str(a));
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) < 0.0) {
        throw std::invalid_argument("adjacency has negative entry at (" +
                                    std::to_string(i) + "," + std::to_string(j) +
                                    ")");
      }
      if (std::abs(a(i, j) - a(j, i)) > kSymmetryTol) {
        throw std::invalid_argument("adjacency asymmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) +
                                    ")");
      }
    }
  }
}

}  // namespace

Matrix renormalize_adjacency(const Matrix& a) {
  check_adjacency(a);
  // Symmetrize residual round-off before adding self loops.
  Matrix tilde = 0.5 * (a + a.transpose());
  tilde += Matrix::Identity(a.rows(), a.cols());
  Vector dinv_sqrt = tilde.rowwise().sum().array().rsqrt().matrix();
  return dinv_sqrt.asDiagonal() * tilde * dinv_sqrt.asDiagonal();
}

std::vector<ValidationIssue> validate_graph_sequence(
    const MatrixSequence& adjacency, const MatrixSequence& features) {
  std::vector<ValidationIssue> issues;
  if (adjacency.empty()) issues.push_back({-1, "adjacency sequence is empty"});
  if (features.empty()) issues.push_back({-1, "feature sequence is empty"});
  if (adjacency.size() != features.size()) {
    issues.push_back({-1, "length mismatch: " +
                              std::to_string(adjacency.size()) +
                              " adjacency steps vs " +
                              std::to_string(features.size()) + " feature steps"});
  }
  const int steps = static_cast<int>(std::min(adjacency.size(), features.size()));
  for (int t = 0; t < steps; ++t) {
    const Matrix& a = adjacency[t];
    const Matrix& x = features[t];
    if (a.rows() != a.cols()) {
      issues.push_back({t, "adjacency not square: " + shape_str(a)});
      continue;
    }
    if (!adjacency.empty() && a.rows() != adjacency.front().rows()) {
      issues.push_back({t, "vertex count changed: " + shape_str(a)});
    }
    if (x.rows() != a.rows()) {
      issues.push_back({t, "feature rows " + std::to_string(x.rows()) +
                               " != vertex count " + std::to_string(a.rows())});
    }
    if (!features.empty() && x.cols() != features.front().cols()) {
      issues.push_back({t, "feature dim changed: " + shape_str(x)});
    }
    if (!a.allFinite()) issues.push_back({t, "adjacency has non-finite entries"});
    if (!x.allFinite()) issues.push_back({t, "features have non-finite entries"});
    bool asym = false, neg = false;
    for (Eigen::Index i = 0; i < a.rows() && !(asym && neg); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (!asym && std::abs(a(i, j) - a(j, i)) > kSymmetryTol) {
          issues.push_back({t, "asymmetric at (" + std::to_string(i) + "," +
                                   std::to_string(j) + ")"});
          asym = true;
        }
        if (!neg && a(i, j) < 0.0) {
          issues.push_back({t, "negative entry at (" + std::to_string(i) + "," +
                                   std::to_string(j) + ")"});
          neg = true;
        }
      }
    }
  }
  return issues;
}

GraphSequence::GraphSequence(MatrixSequence adjacency, MatrixSequence features)
    : adjacency_(std::move(adjacency)), features_(std::move(features)) {
  auto issues = validate_graph_sequence(adjacency_, features_);
  if (!issues.empty()) {
    std::string msg = "invalid graph sequence:";
    for (const auto& issue : issues) {
      msg += "\n  step " + std::to_string(issue.step) + ": " + issue.message;
    }
    throw std::invalid_argument(msg);
  }
  renormalized_.reserve(adjacency_.size());
  for (const Matrix& a : adjacency_) {
    renormalized_.push_back(renormalize_adjacency(a));
  }
}

namespace {

enum class PairCategory { JointJoint, ObjectObject, ObjectJoint };

PairCategory category_of(EntityTrack::Kind a, EntityTrack::Kind b) {
  if (a == EntityTrack::Kind::Joint && b == EntityTrack::Kind::Joint)
    return PairCategory::JointJoint;
  if (a == EntityTrack::Kind::Object && b == EntityTrack::Kind::Object)
    return PairCategory::ObjectObject;
  return PairCategory::ObjectJoint;
}

double raw_distance(const EntityTrack::Entity& a, const EntityTrack::Entity& b,
                    int t) {
  switch (category_of(a.kind, b.kind)) {
    case PairCategory::JointJoint:
      return (a.pos3[t] - b.pos3[t]).norm();
    case PairCategory::ObjectObject:
    case PairCategory::ObjectJoint:
      return (a.pos2[t] - b.pos2[t]).norm();
  }
  return 0.0;
}

}  // namespace

MatrixSequence build_distance_graph(const EntityTrack& track,
                                    DistanceScaling scaling) {
  const int n = static_cast<int>(track.entities.size());
  const int steps = track.steps;
  if (n == 0 || steps == 0) {
    throw std::invalid_argument("build_distance_graph: empty track");
  }

  auto bounds_for = [&](PairCategory cat) -> std::optional<DistanceBounds>& {
    switch (cat) {
      case PairCategory::JointJoint: return scaling.joint_joint;
      case PairCategory::ObjectObject: return scaling.object_object;
      default: return scaling.object_joint;
    }
  };

  // Fill in missing bounds from the data, per category across all steps.
  for (PairCategory cat : {PairCategory::JointJoint, PairCategory::ObjectObject,
                           PairCategory::ObjectJoint}) {
    auto& b = bounds_for(cat);
    if (b.has_value()) {
      if (!(b->min < b->max)) {
        std::cerr << "warning: degenerate distance bounds (min >= max); "
                     "category weights forced to 0\n";
      }
      continue;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < steps; ++t) {
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const auto& ei = track.entities[i];
          const auto& ej = track.entities[j];
          if (category_of(ei.kind, ej.kind) != cat) continue;
          if (!ei.present[t] || !ej.present[t]) continue;
          const double d = raw_distance(ei, ej, t);
          lo = std::min(lo, d);
          hi = std::max(hi, d);
        }
      }
    }
    if (std::isfinite(lo) && std::isfinite(hi)) b = DistanceBounds{lo, hi};
  }

  MatrixSequence out;
  out.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const auto& ei = track.entities[i];
        const auto& ej = track.entities[j];
        if (!ei.present[t] || !ej.present[t]) continue;
        const auto& b = bounds_for(category_of(ei.kind, ej.kind));
        if (!b.has_value() || !(b->min < b->max)) continue;
        const double d = raw_distance(ei, ej, t);
        double w = (d - b->min) / (b->max - b->min);
        w = std::clamp(w, 0.0, 1.0);
        if (scaling.similarity) w = 1.0 - w;
        a(i, j) = a(j, i) = w;
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<PaddedSequence> pad_sequences(
    const std::vector<GraphSequence>& seqs, int target_steps) {
  std::vector<PaddedSequence> out;
  out.reserve(seqs.size());
  for (const GraphSequence& g : seqs) {
    if (g.steps() > target_steps) {
      throw std::invalid_argument(
          "pad_sequences: target length " + std::to_string(target_steps) +
          " shorter than sequence of length " + std::to_string(g.steps()));
    }
    PaddedSequence p;
    p.adjacency = g.adjacency();
    p.features = g.features();
    p.step_mask.assign(g.steps(), true);
    const int v = g.num_vertices();
    const int d = g.feature_dim();
    for (int t = g.steps(); t < target_steps; ++t) {
      p.adjacency.push_back(Matrix::Zero(v, v));
      p.features.push_back(Matrix::Zero(v, d));
      p.step_mask.push_back(false);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<int> top_k_by_connection(const MatrixSequence& adj_seq, int k) {
  require_uniform_sequence(adj_seq, "top_k_by_connection");
  const int n = static_cast<int>(adj_seq.front().cols());
  if (k > n) {
    throw std::invalid_argument("top_k_by_connection: k = " + std::to_string(k) +
                                " exceeds vertex count " + std::to_string(n));
  }
  Vector score = Vector::Zero(n);
  for (const Matrix& a : adj_seq) score += a.colwise().sum().transpose();

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int i, int j) { return score(i) > score(j); });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace dgcn
