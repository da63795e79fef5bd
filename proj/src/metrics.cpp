#include "censurv/metrics.hpp"

#include <cmath>

namespace censurv {

namespace {

// Anchor must be uncensored; the comparator survives strictly past the
// anchor's event time (a censoring tie counts as surviving past it).
bool comparable(const SampleLabel& anchor, const SampleLabel& other) {
  if (anchor.status != CensoringStatus::Uncensored) return false;
  if (other.time > anchor.time) return true;
  return other.time == anchor.time && other.status != CensoringStatus::Uncensored;
}

}  // namespace

std::optional<double> c_index(const Vec& score, const std::vector<SampleLabel>& labels,
                              long* n_pairs_out) {
  if (score.size() != labels.size()) throw ConfigError("c_index: score/label size mismatch");
  const std::size_t n = labels.size();
  long pairs = 0;
  double concordant = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !comparable(labels[i], labels[j])) continue;
      ++pairs;
      if (score[j] > score[i])
        concordant += 1.0;
      else if (score[j] == score[i])
        concordant += 0.5;
    }
  }
  if (n_pairs_out) *n_pairs_out = pairs;
  if (pairs == 0) return std::nullopt;
  return concordant / static_cast<double>(pairs);
}

std::optional<double> mae(const Vec& pred_time, const std::vector<SampleLabel>& labels) {
  if (pred_time.size() != labels.size()) throw ConfigError("mae: prediction/label size mismatch");
  double acc = 0.0;
  int n_unc = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].status != CensoringStatus::Uncensored) continue;
    acc += std::abs(pred_time[i] - static_cast<double>(labels[i].time));
    ++n_unc;
  }
  if (n_unc == 0) return std::nullopt;
  return acc / static_cast<double>(n_unc);
}

std::optional<double> rae(const Vec& pred_time, const std::vector<SampleLabel>& labels) {
  if (pred_time.size() != labels.size()) throw ConfigError("rae: prediction/label size mismatch");
  double acc = 0.0;
  int n_unc = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].status != CensoringStatus::Uncensored) continue;
    const double t = static_cast<double>(labels[i].time);
    acc += std::abs(pred_time[i] - t) / t;
    ++n_unc;
  }
  if (n_unc == 0) return std::nullopt;
  return acc / static_cast<double>(n_unc);
}

MetricBundle compute_metrics(const Vec& score, const Vec& pred_time,
                             const std::vector<SampleLabel>& labels) {
  MetricBundle out;
  out.c_index = c_index(score, labels, &out.n_comparable_pairs);
  out.mae = mae(pred_time, labels);
  out.rae = rae(pred_time, labels);
  for (const SampleLabel& lab : labels)
    if (lab.status == CensoringStatus::Uncensored) ++out.n_uncensored;
  return out;
}

}  // namespace censurv
