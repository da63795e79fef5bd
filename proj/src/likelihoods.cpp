#include "censurv/likelihoods.hpp"

#include <cmath>
#include <limits>

namespace censurv {

namespace {

const double kLogFloor = std::log(kMassFloor);
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log sum_{t=lo}^{hi} pmf(t) * w(t) with log-weights supplied per month, plus
// the chain-rule d/dmu through the posterior over the window.
LlTerm windowed_ll(const EventPmf& pmf, int lo, int hi, const Vec& log_w,
                   std::span<const double> dlog_dmu) {
  Vec terms;
  terms.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (int t = lo; t <= hi; ++t)
    terms.push_back(pmf.log_prob(t) + log_w[static_cast<std::size_t>(t - lo)]);
  const double lse = log_sum_exp(terms);

  LlTerm out;
  if (lse < kLogFloor) {  // covers -inf (zero window mass)
    out.value = kLogFloor;
    out.floored = true;
    return out;
  }
  out.value = lse;
  if (!dlog_dmu.empty()) {
    double g = 0.0;
    for (int t = lo; t <= hi; ++t) {
      const double post = std::exp(terms[static_cast<std::size_t>(t - lo)] - lse);
      g += post * dlog_dmu[static_cast<std::size_t>(t - 1)];
    }
    out.d_mu = g;
  }
  return out;
}

void check_range(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

LlTerm centime_right_censored_ll(const EventPmf& pmf, int c, std::span<const double> dlog_dmu) {
  const int T = pmf.t_max();
  check_range(c >= 1 && c <= T - 1,
              "centime right-censored: c=" + std::to_string(c) + " outside {1,...,t_max-1}");
  Vec log_w(static_cast<std::size_t>(T - c));
  for (int t = c + 1; t <= T; ++t)
    log_w[static_cast<std::size_t>(t - c - 1)] = -std::log(static_cast<double>(t - 1));
  return windowed_ll(pmf, c + 1, T, log_w, dlog_dmu);
}

LlTerm centime_left_censored_ll(const EventPmf& pmf, int c, std::span<const double> dlog_dmu) {
  const int T = pmf.t_max();
  check_range(c >= 2 && c <= T,
              "centime left-censored: c=" + std::to_string(c) + " outside {2,...,t_max}");
  Vec log_w(static_cast<std::size_t>(c - 1));
  for (int t = 1; t <= c - 1; ++t)
    log_w[static_cast<std::size_t>(t - 1)] = -std::log(static_cast<double>(T - t));
  return windowed_ll(pmf, 1, c - 1, log_w, dlog_dmu);
}

LlTerm centime_interval_censored_ll(const EventPmf& pmf, int c1, int c2,
                                    std::span<const double> dlog_dmu) {
  const int T = pmf.t_max();
  check_range(c1 >= 1 && c1 + 2 <= c2 && c2 <= T,
              "centime interval-censored: bounds (" + std::to_string(c1) + "," +
                  std::to_string(c2) + ") leave no admissible event time");
  Vec log_w(static_cast<std::size_t>(c2 - 1 - c1));
  for (int t = c1 + 1; t <= c2 - 1; ++t)
    log_w[static_cast<std::size_t>(t - c1 - 1)] =
        -std::log(static_cast<double>(t) * static_cast<double>(T - t));
  return windowed_ll(pmf, c1 + 1, c2 - 1, log_w, dlog_dmu);
}

LlTerm classical_right_censored_ll(const EventPmf& pmf, int c, std::span<const double> dlog_dmu) {
  const int T = pmf.t_max();
  check_range(c >= 1 && c <= T - 1,
              "classical right-censored: c=" + std::to_string(c) + " outside {1,...,t_max-1}");
  const Vec log_w(static_cast<std::size_t>(T - c), 0.0);
  return windowed_ll(pmf, c + 1, T, log_w, dlog_dmu);
}

LlTerm classical_uncensored_ll(const EventPmf& pmf, int t, bool full_form,
                               std::span<const double> dlog_dmu) {
  const int T = pmf.t_max();
  check_range(t >= 1 && t <= T,
              "classical uncensored: t=" + std::to_string(t) + " outside grid");
  LlTerm out;
  double lp = pmf.log_prob(t);
  if (lp < kLogFloor) {
    lp = kLogFloor;
    out.floored = true;
  } else if (!dlog_dmu.empty()) {
    out.d_mu = dlog_dmu[static_cast<std::size_t>(t - 1)];
  }
  out.value = lp;
  if (full_form)
    out.value += std::log(static_cast<double>(T - t + 1)) - std::log(static_cast<double>(T));
  return out;
}

namespace {

// Shared driver for the two mu-head objectives. `classical` selects the
// independent-censoring censored term and rejects left/interval statuses.
LossReport mu_objective(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                        const std::vector<EventPmf>& pmfs, const std::vector<Vec>* dlog_dmu,
                        bool classical) {
  if (labels.size() != pmfs.size())
    throw ConfigError("objective: need exactly one pmf per observation");
  if (dlog_dmu && dlog_dmu->size() != labels.size())
    throw ConfigError("objective: need one gradient table per observation");

  const std::size_t n = labels.size();
  LossReport rep;
  rep.grad.assign(n, Vec{0.0});
  if (n == 0) return rep;

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const SampleLabel& lab = labels[i];
    const EventPmf& pmf = pmfs[i];
    if (pmf.t_max() != grid.t_max) throw ConfigError("objective: pmf grid mismatch");
    std::span<const double> dmu =
        dlog_dmu ? std::span<const double>((*dlog_dmu)[i]) : std::span<const double>{};
    LlTerm term;
    switch (lab.status) {
      case CensoringStatus::Uncensored:
        term = classical_uncensored_ll(pmf, lab.time, /*full_form=*/false, dmu);
        break;
      case CensoringStatus::RightCensored:
        term = classical ? classical_right_censored_ll(pmf, lab.time, dmu)
                         : centime_right_censored_ll(pmf, lab.time, dmu);
        break;
      case CensoringStatus::LeftCensored:
        if (classical)
          throw ConfigError("classical objective: left-censored observations are not supported");
        term = centime_left_censored_ll(pmf, lab.time, dmu);
        break;
      case CensoringStatus::IntervalCensored:
        if (classical)
          throw ConfigError(
              "classical objective: interval-censored observations are not supported");
        term = centime_interval_censored_ll(pmf, lab.time, lab.time2, dmu);
        break;
    }
    acc += term.value;
    rep.grad[i][0] = term.d_mu / static_cast<double>(n);
    if (term.floored) ++rep.flagged;
  }
  rep.value = acc / static_cast<double>(n);
  return rep;
}

}  // namespace

LossReport centime_objective(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                             const std::vector<EventPmf>& pmfs,
                             const std::vector<Vec>* dlog_dmu) {
  return mu_objective(labels, grid, pmfs, dlog_dmu, /*classical=*/false);
}

LossReport classical_objective(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                               const std::vector<EventPmf>& pmfs,
                               const std::vector<Vec>* dlog_dmu) {
  return mu_objective(labels, grid, pmfs, dlog_dmu, /*classical=*/true);
}

LossReport deephit_likelihood(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                              const std::vector<EventPmf>& pmfs) {
  if (labels.size() != pmfs.size())
    throw ConfigError("deephit: need exactly one pmf per observation");
  const std::size_t n = labels.size();
  const int T = grid.t_max;
  LossReport rep;
  rep.grad.assign(n, Vec(static_cast<std::size_t>(T), 0.0));
  if (n == 0) return rep;

  double acc = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SampleLabel& lab = labels[i];
    const EventPmf& pmf = pmfs[i];
    if (pmf.t_max() != T) throw ConfigError("deephit: pmf grid mismatch");
    Vec& g = rep.grad[i];
    if (lab.status == CensoringStatus::Uncensored) {
      const int t = lab.time;
      double lp = pmf.log_prob(t);
      if (lp < kLogFloor) {
        lp = kLogFloor;
        ++rep.flagged;
      } else {
        // d log p_t / d z_k = 1{k=t} - p_k
        for (int k = 1; k <= T; ++k) g[static_cast<std::size_t>(k - 1)] = -pmf.prob(k) * inv_n;
        g[static_cast<std::size_t>(t - 1)] += inv_n;
      }
      acc += lp;
    } else if (lab.status == CensoringStatus::RightCensored) {
      const int c = lab.time;
      check_range(c >= 1 && c <= T - 1, "deephit: right-censoring time outside {1,...,t_max-1}");
      Vec tail;
      tail.reserve(static_cast<std::size_t>(T - c));
      for (int t = c + 1; t <= T; ++t) tail.push_back(pmf.log_prob(t));
      const double lse = log_sum_exp(tail);
      if (lse < kLogFloor) {
        acc += kLogFloor;
        ++rep.flagged;
      } else {
        acc += lse;
        // d log S_c / d z_k = posterior_k 1{k>c} - p_k
        for (int k = 1; k <= T; ++k) {
          double gk = -pmf.prob(k);
          if (k > c) gk += std::exp(pmf.log_prob(k) - lse);
          g[static_cast<std::size_t>(k - 1)] = gk * inv_n;
        }
      }
    } else {
      throw ConfigError("deephit: only uncensored/right-censored observations are supported");
    }
  }
  rep.value = acc * inv_n;
  return rep;
}

LossReport deephit_rank_loss(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                             const std::vector<EventPmf>& pmfs, const std::vector<Vec>& cdfs,
                             double s, long* n_pairs_out) {
  if (!(s > 0.0)) throw ConfigError("deephit rank: s must be > 0");
  if (labels.size() != pmfs.size() || labels.size() != cdfs.size())
    throw ConfigError("deephit rank: need one pmf and one cdf per observation");
  const std::size_t n = labels.size();
  const int T = grid.t_max;
  LossReport rep;
  rep.grad.assign(n, Vec(static_cast<std::size_t>(T), 0.0));

  for (const SampleLabel& lab : labels)
    if (lab.status != CensoringStatus::Uncensored && lab.status != CensoringStatus::RightCensored)
      throw ConfigError("deephit rank: only uncensored/right-censored observations are supported");

  // Pass 1: count admissible pairs so each contribution is pre-scaled.
  long pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i].status != CensoringStatus::Uncensored) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && labels[j].time > labels[i].time) ++pairs;
  }
  if (n_pairs_out) *n_pairs_out = pairs;
  if (pairs == 0) return rep;

  const double inv_p = 1.0 / static_cast<double>(pairs);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i].status != CensoringStatus::Uncensored) continue;
    const int tau = labels[i].time;
    const double fi = cdfs[i][static_cast<std::size_t>(tau - 1)];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || labels[j].time <= tau) continue;
      const double fj = cdfs[j][static_cast<std::size_t>(tau - 1)];
      const double eta = std::exp(-(fi - fj) / s);
      acc += eta;
      // dF(tau)/dz_k = p_k (1{k<=tau} - F(tau))
      const double ci = -eta / s * inv_p;
      const double cj = eta / s * inv_p;
      for (int k = 1; k <= T; ++k) {
        const double ind = k <= tau ? 1.0 : 0.0;
        rep.grad[i][static_cast<std::size_t>(k - 1)] += ci * pmfs[i].prob(k) * (ind - fi);
        rep.grad[j][static_cast<std::size_t>(k - 1)] += cj * pmfs[j].prob(k) * (ind - fj);
      }
    }
  }
  rep.value = acc * inv_p;
  return rep;
}

LossReport deephit_total_loss(const std::vector<SampleLabel>& labels, const TimeGrid& grid,
                              const std::vector<EventPmf>& pmfs, const std::vector<Vec>& cdfs,
                              double s, long* n_pairs_out) {
  LossReport lik = deephit_likelihood(labels, grid, pmfs);
  const LossReport rank = deephit_rank_loss(labels, grid, pmfs, cdfs, s, n_pairs_out);
  LossReport rep;
  rep.value = -lik.value + rank.value;
  rep.flagged = lik.flagged;
  rep.grad = std::move(lik.grad);
  for (std::size_t i = 0; i < rep.grad.size(); ++i)
    for (std::size_t k = 0; k < rep.grad[i].size(); ++k)
      rep.grad[i][k] = -rep.grad[i][k] + rank.grad[i][k];
  return rep;
}

}  // namespace censurv
