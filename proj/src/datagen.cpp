#include "censurv/datagen.hpp"

#include <algorithm>
#include <cmath>

namespace censurv {

GroundTruth::GroundTruth(Vec b, double bias_months, double sigma_months, TimeGrid g,
                         CovariateLaw law)
    : beta(std::move(b)), bias(bias_months), sigma_true(sigma_months), grid(g),
      covariate_law(law) {
  if (!(sigma_true > 0.0)) throw ConfigError("ground truth: sigma_true must be > 0");
  if (1.0 + sigma_true > static_cast<double>(grid.t_max) - sigma_true)
    throw ConfigError("ground truth: sigma_true too large for the grid (clamp range is empty)");
}

double GroundTruth::mu_true(std::span<const double> x) const {
  double mu = bias;
  for (std::size_t k = 0; k < beta.size(); ++k) mu += beta[k] * x[k];
  return std::clamp(mu, 1.0 + sigma_true, static_cast<double>(grid.t_max) - sigma_true);
}

Vec GroundTruth::draw_covariates(Rng& rng) const {
  Vec x(beta.size());
  for (double& xi : x)
    xi = covariate_law == CovariateLaw::StandardNormal ? rng.normal() : 2.0 * rng.u01() - 1.0;
  return x;
}

int GroundTruth::draw_event(std::span<const double> x, Rng& rng) const {
  const EventPmf pmf = disc_gauss_log_pmf({mu_true(x), sigma_true}, grid);
  return sample_event(pmf, rng);
}

GroundTruth default_ground_truth() {
  return GroundTruth(Vec{20.0, -15.0}, 70.0, 12.0, TimeGrid(156), CovariateLaw::StandardNormal);
}

Dataset generate_centime(const GroundTruth& gt, int n_uncens, int n_cens, Rng& rng) {
  if (n_uncens < 0 || n_cens < 0) throw ConfigError("generate: counts must be >= 0");
  std::vector<Observation> rows;
  rows.reserve(static_cast<std::size_t>(n_uncens + n_cens));
  for (int i = 0; i < n_uncens; ++i) {
    Observation o;
    o.covariates = gt.draw_covariates(rng);
    o.status = CensoringStatus::Uncensored;
    o.time = gt.draw_event(o.covariates, rng);
    rows.push_back(std::move(o));
  }
  for (int i = 0; i < n_cens; ++i) {
    Observation o;
    o.covariates = gt.draw_covariates(rng);
    int t = gt.draw_event(o.covariates, rng);
    while (t == 1) t = gt.draw_event(o.covariates, rng);  // empty censoring support
    o.status = CensoringStatus::RightCensored;
    o.time = rng.uniform_int(1, t - 1);
    rows.push_back(std::move(o));
  }
  shuffle(rows, rng);
  return Dataset(std::move(rows), gt.d(), gt.grid);
}

Dataset generate_classical(const GroundTruth& gt, int n, Rng& rng) {
  if (n < 0) throw ConfigError("generate: counts must be >= 0");
  std::vector<Observation> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Observation o;
    o.covariates = gt.draw_covariates(rng);
    const int t = gt.draw_event(o.covariates, rng);
    const int c = rng.uniform_int(1, gt.grid.t_max);
    if (c < t) {
      o.status = CensoringStatus::RightCensored;
      o.time = c;
    } else {
      o.status = CensoringStatus::Uncensored;
      o.time = t;
    }
    rows.push_back(std::move(o));
  }
  return Dataset(std::move(rows), gt.d(), gt.grid);
}

Dataset generate_left_interval(const GroundTruth& gt, int n_left, int n_interval, Rng& rng) {
  if (n_left < 0 || n_interval < 0) throw ConfigError("generate: counts must be >= 0");
  const int t_max = gt.grid.t_max;
  std::vector<Observation> rows;
  rows.reserve(static_cast<std::size_t>(n_left + n_interval));
  for (int i = 0; i < n_left; ++i) {
    Observation o;
    o.covariates = gt.draw_covariates(rng);
    int t = gt.draw_event(o.covariates, rng);
    while (t == t_max) t = gt.draw_event(o.covariates, rng);
    o.status = CensoringStatus::LeftCensored;
    o.time = rng.uniform_int(t + 1, t_max);
    rows.push_back(std::move(o));
  }
  for (int i = 0; i < n_interval; ++i) {
    Observation o;
    o.covariates = gt.draw_covariates(rng);
    int t = gt.draw_event(o.covariates, rng);
    while (t == 1 || t == t_max) t = gt.draw_event(o.covariates, rng);
    o.status = CensoringStatus::IntervalCensored;
    o.time = rng.uniform_int(1, t - 1);
    o.time2 = rng.uniform_int(t + 1, t_max);
    rows.push_back(std::move(o));
  }
  shuffle(rows, rng);
  return Dataset(std::move(rows), gt.d(), gt.grid);
}

}  // namespace censurv
