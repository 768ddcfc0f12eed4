#pragma once

#include "dgcn/matrix.hpp"

#include <optional>
#include <vector>

namespace dgcn {

// Â = D̃^{-1/2}(A + I)D̃^{-1/2}. Input must be square, symmetric and
// entrywise non-negative; the self loop keeps every degree >= 1.
Matrix renormalize_adjacency(const Matrix& a);

constexpr double kSymmetryTol = 1e-9;

struct ValidationIssue {
  int step;  // -1 for sequence-level issues
  std::string message;
};

std::vector<ValidationIssue> validate_graph_sequence(
    const MatrixSequence& adjacency, const MatrixSequence& features);

// T adjacency matrices plus T feature matrices over a fixed vertex set.
// Renormalized adjacencies are computed once at construction; instances
// are immutable afterwards.
class GraphSequence {
 public:
  GraphSequence(MatrixSequence adjacency, MatrixSequence features);

  int steps() const { return static_cast<int>(adjacency_.size()); }
  int num_vertices() const { return static_cast<int>(adjacency_.front().rows()); }
  int feature_dim() const { return static_cast<int>(features_.front().cols()); }

  const MatrixSequence& adjacency() const { return adjacency_; }
  const MatrixSequence& features() const { return features_; }
  const MatrixSequence& renormalized() const { return renormalized_; }

 private:
  MatrixSequence adjacency_;
  MatrixSequence features_;
  MatrixSequence renormalized_;
};

// Tracked entities for the distance-graph construction: skeleton joints
// carry 3-D positions plus their 2-D image projections, objects carry 2-D
// bounding-box centroids.
struct EntityTrack {
  enum class Kind { Joint, Object };

  struct Entity {
    Kind kind;
    std::vector<Eigen::Vector3d> pos3;   // joints only, one per step
    std::vector<Eigen::Vector2d> pos2;   // centroid (objects) or projection (joints)
    std::vector<bool> present;
  };

  std::vector<Entity> entities;
  int steps = 0;
};

struct DistanceBounds {
  double min = 0.0;
  double max = 0.0;
};

struct DistanceScaling {
  std::optional<DistanceBounds> joint_joint;
  std::optional<DistanceBounds> object_object;
  std::optional<DistanceBounds> object_joint;
  // When set, edge weight = 1 - scaled distance instead of the scaled
  // distance itself. Off by default.
  bool similarity = false;
};

// One symmetric, zero-diagonal weighted adjacency per step, weights in
// [0,1]. Bounds missing from `scaling` are computed from the track.
// Absent entities get zero rows and columns.
MatrixSequence build_distance_graph(const EntityTrack& track,
                                    DistanceScaling scaling = {});

struct PaddedSequence {
  MatrixSequence adjacency;
  MatrixSequence features;
  std::vector<bool> step_mask;  // true for real steps, false for padding
};

std::vector<PaddedSequence> pad_sequences(
    const std::vector<GraphSequence>& seqs, int target_steps);

// Indices of the k vertices with the largest summed-over-time column sums,
// ties broken toward the lower index; result sorted ascending.
std::vector<int> top_k_by_connection(const MatrixSequence& adj_seq, int k);

}  // namespace dgcn
