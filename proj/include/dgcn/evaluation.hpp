#pragma once

#include "dgcn/matrix.hpp"

#include <cstdint>
#include <vector>

namespace dgcn {

// Argmax with ties broken toward the lowest class index.
int argmax_class(const Eigen::Ref<const Eigen::RowVectorXd>& probs);

double accuracy_from_classes(const std::vector<int>& pred,
                             const std::vector<int>& truth);
double unweighted_f1_from_classes(const std::vector<int>& pred,
                                  const std::vector<int>& truth, int k);

// Pooled over all (step, masked row) pairs. `masks` has one entry per
// step with one 0/1 value per row of the prediction matrices.
struct ClassifiedSamples {
  std::vector<int> pred;
  std::vector<int> truth;
};
ClassifiedSamples collect_masked_samples(const MatrixSequence& probs,
                                         const MatrixSequence& onehot_truth,
                                         const std::vector<Vector>& masks);
double accuracy(const MatrixSequence& probs, const MatrixSequence& onehot_truth,
                const std::vector<Vector>& masks);
double unweighted_f1(const MatrixSequence& probs,
                     const MatrixSequence& onehot_truth,
                     const std::vector<Vector>& masks, int k);

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Stratified Monte Carlo cross-validation: `iterations` independent
// random splits, class proportions preserved within rounding. The test
// fraction is taken from the whole pool, the validation fraction from the
// remaining training samples.
std::vector<Split> monte_carlo_splits(const std::vector<int>& class_of_sample,
                                      int iterations, double test_fraction,
                                      double validation_fraction, uint64_t seed);

// One-sided exact signed-rank p-value for "a tends to exceed b".
// Zero differences dropped, tied ranks averaged, null distribution
// enumerated over all 2^n sign patterns (n <= 20).
double wilcoxon_signed_rank(const std::vector<double>& scores_a,
                            const std::vector<double>& scores_b);

}  // namespace dgcn
