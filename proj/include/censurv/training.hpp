#pragma once

#include <optional>
#include <string>

#include "censurv/core_types.hpp"
#include "censurv/metrics.hpp"
#include "censurv/models.hpp"

namespace censurv {

enum class Objective { CenTime, Classical, DeepHit, DeepHitLikOnly, Cox, CoxMB };

std::string objective_name(Objective o);
Objective objective_from_name(const std::string& name);
HeadKind head_for_objective(Objective o);

enum class PointPrediction { Mean, Mode };

struct TrainConfig {
  Objective objective = Objective::CenTime;
  double lr = 0.0;  // 0 selects the per-objective default
  int epochs = 300;
  int batch_size = 32;
  int patience = 50;
  double clip_norm = 1.0;
  double k_fraction = 1.0;  // CoxMB memory-bank fraction K
  double sigma = 12.0;      // fixed event-distribution width, months
  double s = 0.1;           // DeepHit ranking temperature
  std::uint64_t seed = 0;

  // 1e-4 for the mu-head censoring models, 5e-4 for DeepHit/Cox/CoxMB.
  double resolved_lr() const;
  void validate() const;
};

struct EpochLog {
  int epoch;         // 1-based
  double train_obj;  // mean minibatch loss over the epoch (skips excluded)
  double val_obj;    // full-batch loss on the validation set (NaN if undefined)
  double lr;         // learning rate at the epoch's first step
  int skipped;       // minibatches skipped for lack of uncensored samples
};

struct TrainResult {
  ParameterVector params;  // parameters with the best validation objective
  std::vector<EpochLog> log;
  int best_epoch = 0;  // 0 if no epoch ever improved validation
  double best_val = 0.0;
};

// Seeded-shuffle minibatch training: forward -> objective -> backward ->
// global-norm clip -> AdamW update with decoupled weight decay -> cosine
// annealed lr over the full epoch budget. Early stopping on the validation
// objective with the configured patience. Deterministic per (cfg, datasets).
TrainResult train(const TrainConfig& cfg, const Dataset& train_ds, const Dataset& val_ds,
                  const PredictorConfig& pcfg);

class MemoryBank;  // cox.hpp

// Loss (minimized form) for one batch of dataset rows; when grad_out is
// given, accumulates the full parameter gradient. This is the quantity one
// optimizer step descends. Returns nullopt on the Cox-family skip signal.
// `bank` engages the CoxMB pool; CoxMB without a bank falls back to the
// plain partial likelihood.
std::optional<double> batch_loss_and_grad(const TrainConfig& cfg, const PredictorConfig& pcfg,
                                          const ParameterVector& params, const Dataset& ds,
                                          const std::vector<int>& rows,
                                          ParameterVector* grad_out = nullptr,
                                          MemoryBank* bank = nullptr, long iteration = 0);

// Scales g to max_norm when it is longer; returns the pre-clip norm.
double clip_global_norm(Vec& g, double max_norm);

struct EvalResult {
  std::optional<double> objective;  // full-batch loss on ds (minimized form)
  MetricBundle metrics;
  int flagged = 0;
};

// Objective value plus C-Index/MAE/RAE with the objective-appropriate
// predictions: expected (or modal) event time for distributional heads;
// negated risk for ordering and the Breslow expected lifetime for point
// prediction with Cox heads. `baseline` supplies the dataset for the
// baseline-hazard estimate (defaults to ds itself).
EvalResult evaluate(const ParameterVector& params, const PredictorConfig& pcfg, const Dataset& ds,
                    const TrainConfig& cfg, const Dataset* baseline = nullptr,
                    PointPrediction point = PointPrediction::Mean);

// Training log CSV: header epoch,train_objective,val_objective,lr,skipped_batches.
void write_training_log(const std::string& path, const std::vector<EpochLog>& log);

}  // namespace censurv
