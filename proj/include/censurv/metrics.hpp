#pragma once

#include <optional>

#include "censurv/core_types.hpp"

namespace censurv {

// Evaluation bundle; a metric is empty exactly when its denominator set is.
struct MetricBundle {
  std::optional<double> c_index;
  std::optional<double> mae;
  std::optional<double> rae;
  long n_comparable_pairs = 0;
  int n_uncensored = 0;
};

// Harrell's concordance index. Scores are oriented so that a HIGHER score
// means LONGER predicted survival (negate risk scores before calling).
// Comparable pairs: anchor i uncensored and comparator j with observed time
// strictly greater than t_i, or censored at exactly t_i. Ties in score count
// one half. Returns nullopt when no pair is comparable.
std::optional<double> c_index(const Vec& score, const std::vector<SampleLabel>& labels,
                              long* n_pairs_out = nullptr);

// Mean |t_hat - t| over uncensored samples, in months.
std::optional<double> mae(const Vec& pred_time, const std::vector<SampleLabel>& labels);

// Mean |t_hat - t| / t over uncensored samples.
std::optional<double> rae(const Vec& pred_time, const std::vector<SampleLabel>& labels);

MetricBundle compute_metrics(const Vec& score, const Vec& pred_time,
                             const std::vector<SampleLabel>& labels);

}  // namespace censurv
