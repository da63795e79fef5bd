#include "censurv/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace censurv {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Kahan-compensated sum; keeps the 1e-12 normalization contract on long grids.
double stable_sum(const Vec& v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}
}  // namespace

double log_sum_exp(const Vec& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double e = std::exp(x - m);
    const double y = e - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return m + std::log(sum);
}

EventPmf EventPmf::from_probs(Vec probs) {
  if (probs.size() < 2) throw ConfigError("EventPmf: need at least 2 grid points");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ConfigError("EventPmf: negative or NaN probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("EventPmf: probabilities sum to " + std::to_string(sum) + ", not 1");
  Vec logp(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    logp[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
  return EventPmf(std::move(probs), std::move(logp));
}

EventPmf EventPmf::from_log_unnormalized(const Vec& log_weights) {
  if (log_weights.size() < 2) throw ConfigError("EventPmf: need at least 2 grid points");
  const double lz = log_sum_exp(log_weights);
  if (!std::isfinite(lz)) throw ConfigError("EventPmf: log normalizer is not finite");
  Vec logp(log_weights.size());
  Vec p(log_weights.size());
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    logp[i] = log_weights[i] - lz;
    p[i] = std::exp(logp[i]);
  }
  return EventPmf(std::move(p), std::move(logp));
}

EventPmf disc_gauss_log_pmf(const DiscGaussParams& params, const TimeGrid& grid) {
  if (!(params.sigma > 0.0)) throw ConfigError("disc_gauss: sigma must be > 0");
  const double inv2s2 = 1.0 / (2.0 * params.sigma * params.sigma);
  Vec lw(static_cast<std::size_t>(grid.t_max));
  for (int t = 1; t <= grid.t_max; ++t) {
    const double d = static_cast<double>(t) - params.mu;
    lw[static_cast<std::size_t>(t - 1)] = -d * d * inv2s2;
  }
  return EventPmf::from_log_unnormalized(lw);
}

Vec disc_gauss_dlogpmf_dmu(const DiscGaussParams& params, const TimeGrid& grid) {
  if (!(params.sigma > 0.0)) throw ConfigError("disc_gauss: sigma must be > 0");
  const EventPmf pmf = disc_gauss_log_pmf(params, grid);
  const double inv_s2 = 1.0 / (params.sigma * params.sigma);
  // E_p[(T - mu)] / sigma^2
  double mean_term = 0.0;
  for (int t = 1; t <= grid.t_max; ++t)
    mean_term += pmf.prob(t) * (static_cast<double>(t) - params.mu) * inv_s2;
  Vec grad(static_cast<std::size_t>(grid.t_max));
  for (int t = 1; t <= grid.t_max; ++t)
    grad[static_cast<std::size_t>(t - 1)] =
        (static_cast<double>(t) - params.mu) * inv_s2 - mean_term;
  return grad;
}

Vec pmf_to_cdf(const EventPmf& pmf) {
  Vec cdf(pmf.probs().size());
  double acc = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    const double y = pmf.probs()[i] - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
    cdf[i] = acc;
  }
  return cdf;
}

double pmf_mean(const EventPmf& pmf) {
  Vec terms(pmf.probs().size());
  for (int t = 1; t <= pmf.t_max(); ++t)
    terms[static_cast<std::size_t>(t - 1)] = static_cast<double>(t) * pmf.prob(t);
  return stable_sum(terms);
}

int pmf_mode(const EventPmf& pmf) {
  int best = 1;
  for (int t = 2; t <= pmf.t_max(); ++t)
    if (pmf.prob(t) > pmf.prob(best)) best = t;
  return best;
}

int sample_event(const EventPmf& pmf, Rng& rng) {
  const double u = rng.u01();
  double acc = 0.0;
  for (int t = 1; t <= pmf.t_max(); ++t) {
    acc += pmf.prob(t);
    if (u < acc) return t;
  }
  return pmf.t_max();  // guards rounding in the final partial sum
}

}  // namespace censurv
