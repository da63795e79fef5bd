#pragma once

#include "censurv/core_types.hpp"
#include "censurv/rng.hpp"

namespace censurv {

// Parameters of the discretized Gaussian over the month grid. mu is
// unconstrained (the grid renormalization absorbs it); sigma > 0.
struct DiscGaussParams {
  double mu;
  double sigma;
};

// Normalized probability vector over {1, ..., t_max}, kept in both linear
// and log space. Log entries stay finite for any mu; linear entries may
// underflow to zero for extreme parameters.
class EventPmf {
 public:
  // From linear probabilities: entries must be >= 0 and sum to 1 within 1e-12.
  static EventPmf from_probs(Vec probs);
  // From unnormalized log weights (e.g. logits): log-sum-exp normalized.
  static EventPmf from_log_unnormalized(const Vec& log_weights);

  int t_max() const { return static_cast<int>(probs_.size()); }
  double prob(int t) const { return probs_[static_cast<std::size_t>(t - 1)]; }
  double log_prob(int t) const { return log_probs_[static_cast<std::size_t>(t - 1)]; }
  const Vec& probs() const { return probs_; }
  const Vec& log_probs() const { return log_probs_; }

 private:
  EventPmf(Vec probs, Vec log_probs) : probs_(std::move(probs)), log_probs_(std::move(log_probs)) {}
  Vec probs_;
  Vec log_probs_;
};

// log p(t) = -(t-mu)^2/(2 sigma^2) - log Z over the grid, normalized with
// the log-sum-exp trick so Z is finite for any mu.
EventPmf disc_gauss_log_pmf(const DiscGaussParams& params, const TimeGrid& grid);

// d log p(t) / d mu = (t - mu)/sigma^2 - E_p[(T - mu)/sigma^2], entrywise.
Vec disc_gauss_dlogpmf_dmu(const DiscGaussParams& params, const TimeGrid& grid);

// F(t) = sum_{s<=t} p(s); nondecreasing, F(t_max) = 1 within 1e-12.
Vec pmf_to_cdf(const EventPmf& pmf);

// Expected event month, in [1, t_max].
double pmf_mean(const EventPmf& pmf);

// Most probable month; smallest index wins ties.
int pmf_mode(const EventPmf& pmf);

// Inverse-CDF sampling with a single uniform draw. Exact, O(t_max).
int sample_event(const EventPmf& pmf, Rng& rng);

// Numerically careful log(sum(exp(v))). Returns -inf for an all -inf input.
double log_sum_exp(const Vec& v);

}  // namespace censurv
