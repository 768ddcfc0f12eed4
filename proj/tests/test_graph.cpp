#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgcn/graph.hpp"

#include <random>

using namespace dgcn;

TEST_CASE("renormalization of the empty graph is the identity") {
  Matrix a = Matrix::Zero(2, 2);
  CHECK((renormalize_adjacency(a) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-15);
}

TEST_CASE("renormalization hand value for a single unweighted edge") {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  Matrix r = renormalize_adjacency(a);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(r(i, j) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("renormalization hand value for a weighted edge") {
  Matrix a(2, 2);
  a << 0, 3, 3, 0;
  Matrix r = renormalize_adjacency(a);
  CHECK(r(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r(0, 1) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(r(1, 0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(r(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("renormalization rejects bad input naming the index") {
  Matrix asym(2, 2);
  asym << 0, 1, 0, 0;
  CHECK_THROWS_WITH_AS(renormalize_adjacency(asym),
                       doctest::Contains("asymmetric"), std::invalid_argument);
  Matrix neg(2, 2);
  neg << 0, -1, -1, 0;
  CHECK_THROWS_WITH_AS(renormalize_adjacency(neg),
                       doctest::Contains("negative"), std::invalid_argument);
  CHECK_THROWS_AS(renormalize_adjacency(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("isolated vertex renormalizes to a unit self loop") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  Matrix r = renormalize_adjacency(a);
  CHECK(r(2, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r(2, 0) == 0.0);
  CHECK(r(2, 1) == 0.0);
  CHECK(r(0, 2) == 0.0);
}

TEST_CASE("renormalization commutes with vertex permutation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 6;
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (u(rng) < 0.5) a(i, j) = a(j, i) = u(rng);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix p = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) p(i, perm[i]) = 1.0;

  Matrix lhs = renormalize_adjacency(p * a * p.transpose());
  Matrix rhs = p * renormalize_adjacency(a) * p.transpose();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sequence validation reports every violation without aborting") {
  MatrixSequence adj, feat;
  adj.push_back(Matrix::Zero(2, 2));
  Matrix bad(2, 2);
  bad << 0, 1, 0, 0;
  adj.push_back(bad);
  adj.push_back(Matrix::Zero(2, 2));
  feat.push_back(Matrix::Zero(2, 3));
  feat.push_back(Matrix::Zero(2, 3));
  auto issues = validate_graph_sequence(adj, feat);
  bool found_len = false, found_asym = false;
  for (const auto& issue : issues) {
    if (issue.message.find("length mismatch") != std::string::npos) found_len = true;
    if (issue.step == 1 && issue.message.find("asymmetric") != std::string::npos)
      found_asym = true;
  }
  CHECK(found_len);
  CHECK(found_asym);

  MatrixSequence ok_adj{Matrix::Zero(2, 2)};
  MatrixSequence ok_feat{Matrix::Zero(2, 3)};
  CHECK(validate_graph_sequence(ok_adj, ok_feat).empty());
}

TEST_CASE("graph sequence caches renormalized adjacency at construction") {
  MatrixSequence adj{Matrix::Zero(2, 2)};
  MatrixSequence feat{Matrix::Ones(2, 3)};
  GraphSequence g(std::move(adj), std::move(feat));
  CHECK(g.steps() == 1);
  CHECK(g.num_vertices() == 2);
  CHECK(g.feature_dim() == 3);
  CHECK((g.renormalized()[0] - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-15);
}

namespace {

EntityTrack::Entity make_joint(std::vector<Eigen::Vector3d> pos3,
                               std::vector<bool> present) {
  EntityTrack::Entity e;
  e.kind = EntityTrack::Kind::Joint;
  e.pos3 = std::move(pos3);
  for (const auto& p : e.pos3) e.pos2.push_back(p.head<2>());
  e.present = std::move(present);
  return e;
}

EntityTrack::Entity make_object(std::vector<Eigen::Vector2d> pos2,
                                std::vector<bool> present) {
  EntityTrack::Entity e;
  e.kind = EntityTrack::Kind::Object;
  e.pos2 = std::move(pos2);
  e.present = std::move(present);
  return e;
}

}  // namespace

TEST_CASE("distance graph scales to one at the category max") {
  EntityTrack track;
  track.steps = 1;
  track.entities.push_back(make_joint({{0, 0, 0}}, {true}));
  track.entities.push_back(make_joint({{4, 0, 0}}, {true}));
  DistanceScaling scaling;
  scaling.joint_joint = DistanceBounds{0.0, 4.0};
  auto seq = build_distance_graph(track, scaling);
  CHECK(seq[0](0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(seq[0](1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(seq[0](0, 0) == 0.0);
}

TEST_CASE("distance graph midway between bounds scales to one half") {
  EntityTrack track;
  track.steps = 1;
  track.entities.push_back(make_joint({{0, 0, 0}}, {true}));
  track.entities.push_back(make_joint({{3, 0, 0}}, {true}));
  DistanceScaling scaling;
  scaling.joint_joint = DistanceBounds{2.0, 4.0};
  auto seq = build_distance_graph(track, scaling);
  CHECK(seq[0](0, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("absent object yields zero row and column") {
  EntityTrack track;
  track.steps = 2;
  track.entities.push_back(make_joint({{0, 0, 0}, {0, 0, 0}}, {true, true}));
  track.entities.push_back(make_joint({{1, 0, 0}, {1, 0, 0}}, {true, true}));
  track.entities.push_back(
      make_object({{5, 5}, {5, 5}}, {true, false}));
  auto seq = build_distance_graph(track);
  // Step 0: object participates; step 1: its row/column are zero.
  CHECK(seq[1].row(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(seq[1].col(2).cwiseAbs().maxCoeff() == 0.0);
  for (const Matrix& a : seq) {
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.minCoeff() >= 0.0);
    CHECK(a.maxCoeff() <= 1.0);
  }
}

TEST_CASE("degenerate bounds zero the whole category") {
  EntityTrack track;
  track.steps = 1;
  track.entities.push_back(make_joint({{0, 0, 0}}, {true}));
  track.entities.push_back(make_joint({{1, 0, 0}}, {true}));
  DistanceScaling scaling;
  scaling.joint_joint = DistanceBounds{1.0, 1.0};
  auto seq = build_distance_graph(track, scaling);
  CHECK(seq[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("padding appends zero steps with a false mask") {
  MatrixSequence adj{Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  MatrixSequence feat{Matrix::Ones(2, 3), Matrix::Ones(2, 3)};
  std::vector<GraphSequence> seqs;
  seqs.emplace_back(adj, feat);

  auto same = pad_sequences(seqs, 2);
  CHECK(same[0].adjacency.size() == 2);
  CHECK(same[0].step_mask == std::vector<bool>{true, true});

  auto padded = pad_sequences(seqs, 4);
  CHECK(padded[0].adjacency.size() == 4);
  CHECK(padded[0].step_mask == std::vector<bool>{true, true, false, false});
  CHECK(padded[0].adjacency[3].cwiseAbs().maxCoeff() == 0.0);
  CHECK(padded[0].features[3].cwiseAbs().maxCoeff() == 0.0);
  // A padded zero-adjacency step renormalizes to the identity.
  CHECK((renormalize_adjacency(padded[0].adjacency[3]) - Matrix::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);

  CHECK_THROWS_AS(pad_sequences(seqs, 1), std::invalid_argument);
}

TEST_CASE("top-k vertex selection by summed connection") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;  // vertex 2 isolated
  CHECK(top_k_by_connection({a}, 2) == std::vector<int>{0, 1});

  Matrix all_equal = Matrix::Zero(3, 3);
  CHECK(top_k_by_connection({all_equal}, 2) == std::vector<int>{0, 1});

  // Aggregated over two steps, vertex 2 dominates vertex 1 despite losing in
  // step 0; brute-force column sums: v0 = 3, v1 = 1, v2 = 2.
  Matrix s0 = Matrix::Zero(4, 4), s1 = Matrix::Zero(4, 4);
  s0(0, 1) = s0(1, 0) = 1.0;
  s1(0, 2) = s1(2, 0) = 1.0;
  s1(2, 3) = s1(3, 2) = 1.0;
  s1(0, 3) = s1(3, 0) = 1.0;
  CHECK(top_k_by_connection({s0, s1}, 2) == std::vector<int>{0, 2});

  CHECK_THROWS_AS(top_k_by_connection({a}, 4), std::invalid_argument);
}
