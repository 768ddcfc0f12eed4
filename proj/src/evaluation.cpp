#include "dgcn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace dgcn {

int argmax_class(const Eigen::Ref<const Eigen::RowVectorXd>& probs) {
  int best = 0;
  for (int j = 1; j < probs.size(); ++j) {
    if (probs(j) > probs(best)) best = j;
  }
  return best;
}

double accuracy_from_classes(const std::vector<int>& pred,
                             const std::vector<int>& truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("accuracy: size mismatch");
  }
  if (pred.empty()) throw std::invalid_argument("accuracy: no samples");
  int correct = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double unweighted_f1_from_classes(const std::vector<int>& pred,
                                  const std::vector<int>& truth, int k) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("unweighted_f1: size mismatch");
  }
  if (pred.empty()) throw std::invalid_argument("unweighted_f1: no samples");
  std::vector<long> tp(k, 0), fp(k, 0), fn(k, 0);
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) {
      ++tp[truth[i]];
    } else {
      ++fp[pred[i]];
      ++fn[truth[i]];
    }
  }
  double sum = 0.0;
  for (int c = 0; c < k; ++c) {
    const long denom = 2 * tp[c] + fp[c] + fn[c];
    // Class F1 = 2pr/(p+r) = 2tp/(2tp+fp+fn); 0 when p + r is undefined/zero.
    if (denom > 0) sum += 2.0 * tp[c] / static_cast<double>(denom);
  }
  return sum / k;
}

ClassifiedSamples collect_masked_samples(const MatrixSequence& probs,
                                         const MatrixSequence& onehot_truth,
                                         const std::vector<Vector>& masks) {
  if (probs.size() != onehot_truth.size() || probs.size() != masks.size()) {
    throw std::invalid_argument("collect_masked_samples: sequence length mismatch");
  }
  ClassifiedSamples out;
  for (size_t t = 0; t < probs.size(); ++t) {
    for (Eigen::Index v = 0; v < probs[t].rows(); ++v) {
      if (masks[t](v) == 0.0) continue;
      out.pred.push_back(argmax_class(probs[t].row(v)));
      out.truth.push_back(argmax_class(onehot_truth[t].row(v)));
    }
  }
  return out;
}

double accuracy(const MatrixSequence& probs, const MatrixSequence& onehot_truth,
                const std::vector<Vector>& masks) {
  auto s = collect_masked_samples(probs, onehot_truth, masks);
  return accuracy_from_classes(s.pred, s.truth);
}

double unweighted_f1(const MatrixSequence& probs,
                     const MatrixSequence& onehot_truth,
                     const std::vector<Vector>& masks, int k) {
  auto s = collect_masked_samples(probs, onehot_truth, masks);
  return unweighted_f1_from_classes(s.pred, s.truth, k);
}

std::vector<Split> monte_carlo_splits(const std::vector<int>& class_of_sample,
                                      int iterations, double test_fraction,
                                      double validation_fraction, uint64_t seed) {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (test_fraction <= 0.0 || test_fraction >= 1.0 ||
      validation_fraction <= 0.0 || validation_fraction >= 1.0) {
    throw std::invalid_argument("split fractions must be in (0, 1)");
  }

  std::map<int, std::vector<int>> by_class;
  for (size_t i = 0; i < class_of_sample.size(); ++i) {
    by_class[class_of_sample[i]].push_back(static_cast<int>(i));
  }
  for (const auto& [cls, members] : by_class) {
    const auto n = static_cast<double>(members.size());
    const long n_test = std::lround(test_fraction * n);
    const long n_val = std::lround(validation_fraction * (n - n_test));
    if (n_test < 1 || n_val < 1 || n_test + n_val >= static_cast<long>(n)) {
      throw std::invalid_argument("class " + std::to_string(cls) + " with " +
                                  std::to_string(members.size()) +
                                  " samples is too small to stratify");
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<Split> plan;
  plan.reserve(iterations);
  for (int it = 0; it < iterations; ++it) {
    Split s;
    for (auto& [cls, members] : by_class) {
      std::vector<int> shuffled = members;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto n = static_cast<double>(shuffled.size());
      const long n_test = std::lround(test_fraction * n);
      const long n_val = std::lround(validation_fraction * (n - n_test));
      s.test.insert(s.test.end(), shuffled.begin(), shuffled.begin() + n_test);
      s.val.insert(s.val.end(), shuffled.begin() + n_test,
                   shuffled.begin() + n_test + n_val);
      s.train.insert(s.train.end(), shuffled.begin() + n_test + n_val,
                     shuffled.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    plan.push_back(std::move(s));
  }
  return plan;
}

double wilcoxon_signed_rank(const std::vector<double>& scores_a,
                            const std::vector<double>& scores_b) {
  if (scores_a.size() != scores_b.size()) {
    throw std::invalid_argument("wilcoxon: length mismatch");
  }
  std::vector<double> diffs;
  for (size_t i = 0; i < scores_a.size(); ++i) {
    const double d = scores_a[i] - scores_b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) {
    throw std::invalid_argument("wilcoxon: no information (all differences zero)");
  }
  const int n = static_cast<int>(diffs.size());
  if (n > 20) throw std::invalid_argument("wilcoxon: exact enumeration limited to n <= 20");

  // Rank |d| with average ranks for ties.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::abs(diffs[i]) < std::abs(diffs[j]);
  });
  std::vector<double> rank(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n &&
           std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) {
      ++j;
    }
    const double avg = (i + j) / 2.0 + 1.0;
    for (int t = i; t <= j; ++t) rank[order[t]] = avg;
    i = j + 1;
  }

  double w_plus = 0.0;
  for (int t = 0; t < n; ++t) {
    if (diffs[t] > 0.0) w_plus += rank[t];
  }

  // Null distribution: every sign pattern equally likely.
  const uint64_t patterns = 1ULL << n;
  uint64_t at_least = 0;
  const double eps = 1e-9;
  for (uint64_t mask = 0; mask < patterns; ++mask) {
    double w = 0.0;
    for (int t = 0; t < n; ++t) {
      if (mask & (1ULL << t)) w += rank[t];
    }
    if (w >= w_plus - eps) ++at_least;
  }
  return static_cast<double>(at_least) / static_cast<double>(patterns);
}

}  // namespace dgcn
