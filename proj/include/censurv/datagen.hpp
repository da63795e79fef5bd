#pragma once

#include <span>

#include "censurv/core_types.hpp"
#include "censurv/distributions.hpp"
#include "censurv/rng.hpp"

namespace censurv {

enum class CovariateLaw { StandardNormal, UniformCube };

// Known ground-truth event model for synthetic experiments:
//   mu_true(x) = clamp(bias + beta . x, 1 + sigma_true, t_max - sigma_true)
// keeps most event mass interior to the grid.
struct GroundTruth {
  Vec beta;
  double bias;
  double sigma_true;
  TimeGrid grid;
  CovariateLaw covariate_law = CovariateLaw::StandardNormal;

  GroundTruth(Vec b, double bias_months, double sigma_months, TimeGrid g,
              CovariateLaw law = CovariateLaw::StandardNormal);

  int d() const { return static_cast<int>(beta.size()); }
  double mu_true(std::span<const double> x) const;
  Vec draw_covariates(Rng& rng) const;
  // One event-time draw from the discretized Gaussian at mu_true(x).
  int draw_event(std::span<const double> x, Rng& rng) const;
};

// Default ground truth for experiments: d=2, beta=(20,-15), bias=70,
// sigma_true=12, t_max=156, standard-normal covariates.
GroundTruth default_ground_truth();

// Event-conditional mechanism: draw t, then c uniform on {1,...,t-1}.
// Latent draws with an empty censoring support (t=1) are resampled so the
// requested censored:uncensored counts are exact. Returns a shuffled dataset.
Dataset generate_centime(const GroundTruth& gt, int n_uncens, int n_cens, Rng& rng);

// Independent mechanism: t and c ~ uniform{1,...,t_max} drawn separately;
// c < t emits RightCensored(c), otherwise Uncensored(t). The censored
// fraction is an outcome, not a parameter.
Dataset generate_classical(const GroundTruth& gt, int n, Rng& rng);

// Left: c uniform on {t+1,...,t_max} (t resampled while t = t_max).
// Interval: c1 uniform on {1,...,t-1} and c2 uniform on {t+1,...,t_max}
// (t resampled while either support is empty).
Dataset generate_left_interval(const GroundTruth& gt, int n_left, int n_interval, Rng& rng);

}  // namespace censurv
