#pragma once

#include <span>

#include "censurv/core_types.hpp"
#include "censurv/distributions.hpp"

namespace censurv {

// Window masses below this floor are clamped before the log and the sample
// is flagged; the gradient of a floored term is zero.
inline constexpr double kMassFloor = 1e-300;

// Batch objective value (mean over samples) plus per-sample gradients at the
// model head (one entry per sample; length 1 for mu/risk heads, t_max for
// logit heads).
struct LossReport {
  double value = 0.0;
  std::vector<Vec> grad;
  int flagged = 0;  // samples whose window mass hit the floor
};

// One per-sample log-likelihood term. d_mu is populated only when a
// d log pmf / d mu table is supplied.
struct LlTerm {
  double value = 0.0;
  double d_mu = 0.0;
  bool floored = false;
};

// Event-conditional censoring: log sum_{t=c+1}^{t_max} pmf(t)/(t-1).
LlTerm centime_right_censored_ll(const EventPmf& pmf, int c,
                                 std::span<const double> dlog_dmu = {});

// Left censoring: log sum_{t=1}^{c-1} pmf(t)/(t_max - t).
LlTerm centime_left_censored_ll(const EventPmf& pmf, int c,
                                std::span<const double> dlog_dmu = {});

// Interval censoring: log sum_{t=c1+1}^{c2-1} pmf(t)/(t (t_max - t)).
LlTerm centime_interval_censored_ll(const EventPmf& pmf, int c1, int c2,
                                    std::span<const double> dlog_dmu = {});

// Independent censoring, survival-function form: log sum_{t=c+1}^{t_max} pmf(t).
LlTerm classical_right_censored_ll(const EventPmf& pmf, int c,
                                   std::span<const double> dlog_dmu = {});

// log pmf(t), plus log((t_max - t + 1)/t_max) when full_form is set (the
// joint including the admissible-censoring-slot factor).
LlTerm classical_uncensored_ll(const EventPmf& pmf, int t, bool full_form = false,
                               std::span<const double> dlog_dmu = {});

// Mean log-likelihood under the event-conditional censoring model; handles
// all four censoring statuses. Per-sample d/d mu gradients are produced when
// dlog_dmu tables are given (one table per sample).
LossReport centime_objective(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                             const std::vector<EventPmf>& pmfs,
                             const std::vector<Vec>* dlog_dmu = nullptr);

// Mean log-likelihood under independent censoring (constants omitted).
// Right censoring only; left/interval observations are rejected.
LossReport classical_objective(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                               const std::vector<EventPmf>& pmfs,
                               const std::vector<Vec>* dlog_dmu = nullptr);

// Classical likelihood with pmfs from a softmax head; gradients are taken
// with respect to the logits through the softmax Jacobian.
LossReport deephit_likelihood(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                              const std::vector<EventPmf>& pmfs);

// Ranking penalty eta(F_i(t_i), F_j(t_i)) = exp(-(F_i - F_j)/s), averaged
// over admissible pairs: anchor i uncensored, comparator j with observed
// time strictly greater than t_i. Gradients (wrt logits) flow to both pair
// members. Zero admissible pairs yields loss 0 with zero gradient.
LossReport deephit_rank_loss(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                             const std::vector<EventPmf>& pmfs, const std::vector<Vec>& cdfs,
                             double s, long* n_pairs_out = nullptr);

// Combined DeepHit loss to minimize: -likelihood + rank term.
LossReport deephit_total_loss(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                              const std::vector<EventPmf>& pmfs, const std::vector<Vec>& cdfs,
                              double s, long* n_pairs_out = nullptr);

}  // namespace censurv
