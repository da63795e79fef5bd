#include "censurv/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "censurv/cox.hpp"
#include "censurv/distributions.hpp"
#include "censurv/likelihoods.hpp"
#include "censurv/rng.hpp"

namespace censurv {

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kWeightDecay = 1e-4;  // decoupled
const double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

std::string objective_name(Objective o) {
  switch (o) {
    case Objective::CenTime: return "centime";
    case Objective::Classical: return "classical";
    case Objective::DeepHit: return "deephit";
    case Objective::DeepHitLikOnly: return "deephit_lik_only";
    case Objective::Cox: return "cox";
    case Objective::CoxMB: return "coxmb";
  }
  return "";
}

Objective objective_from_name(const std::string& name) {
  if (name == "centime") return Objective::CenTime;
  if (name == "classical") return Objective::Classical;
  if (name == "deephit") return Objective::DeepHit;
  if (name == "deephit_lik_only") return Objective::DeepHitLikOnly;
  if (name == "cox") return Objective::Cox;
  if (name == "coxmb") return Objective::CoxMB;
  throw ConfigError("unknown objective: " + name);
}

HeadKind head_for_objective(Objective o) {
  switch (o) {
    case Objective::CenTime:
    case Objective::Classical: return HeadKind::Mu;
    case Objective::DeepHit:
    case Objective::DeepHitLikOnly: return HeadKind::Logits;
    case Objective::Cox:
    case Objective::CoxMB: return HeadKind::Risk;
  }
  return HeadKind::Mu;
}

double TrainConfig::resolved_lr() const {
  if (lr > 0.0) return lr;
  return (objective == Objective::CenTime || objective == Objective::Classical) ? 1e-4 : 5e-4;
}

void TrainConfig::validate() const {
  if (lr < 0.0) throw ConfigError("train: lr must be positive");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (patience < 1) throw ConfigError("train: patience must be >= 1");
  if (!(clip_norm > 0.0)) throw ConfigError("train: clip_norm must be > 0");
  if (k_fraction < 0.0 || k_fraction > 1.0) throw ConfigError("train: K must lie in [0,1]");
  if (!(sigma > 0.0)) throw ConfigError("train: sigma must be > 0");
  if (!(s > 0.0)) throw ConfigError("train: s must be > 0");
}

namespace {

bool is_cox_family(Objective o) { return o == Objective::Cox || o == Objective::CoxMB; }

void check_compatibility(const TrainConfig& cfg, const Dataset& ds, const PredictorConfig& pcfg,
                         const char* which) {
  if (pcfg.head != head_for_objective(cfg.objective))
    throw ConfigError(std::string("train: objective ") + objective_name(cfg.objective) +
                      " requires the " + head_name(head_for_objective(cfg.objective)) + " head");
  if (pcfg.d != ds.d) throw ConfigError(std::string(which) + ": covariate dimension mismatch");
  if (pcfg.head != HeadKind::Risk && pcfg.t_max != ds.grid.t_max)
    throw ConfigError(std::string(which) + ": predictor t_max does not match the grid");
  if (cfg.objective != Objective::CenTime) {
    for (const Observation& o : ds.observations)
      if (o.status == CensoringStatus::LeftCensored ||
          o.status == CensoringStatus::IntervalCensored)
        throw UntrainableError(std::string("objective ") + objective_name(cfg.objective) +
                               " does not support left/interval-censored observations (" + which +
                               ")");
  }
}

struct StepEval {
  double loss = 0.0;
  std::vector<Vec> upstream;  // per-sample dloss/dhead, filled iff want_grads
  int flagged = 0;
};

// Loss for one batch of rows with per-sample head gradients. Returns nullopt
// for the Cox-family skip signal (no uncensored sample anywhere in the pool).
// `bank` engages the CoxMB pool; when null, CoxMB falls back to the plain
// partial likelihood (the validation convention: the bank is a training
// device).
std::optional<StepEval> eval_batch(const TrainConfig& cfg, const PredictorConfig& pcfg,
                                   const ParameterVector& params, const Dataset& ds,
                                   const std::vector<int>& rows, MemoryBank* bank, long iteration,
                                   bool want_grads) {
  const std::size_t b = rows.size();
  const std::vector<SampleLabel> labels = ds.labels(rows);
  std::vector<Vec> outs(b);
  for (std::size_t k = 0; k < b; ++k)
    outs[k] = forward(pcfg, params, ds.observations[static_cast<std::size_t>(rows[k])].covariates);

  StepEval out;
  const auto negate_into = [&](const LossReport& rep) {
    out.loss = -rep.value;
    out.flagged = rep.flagged;
    if (want_grads) {
      out.upstream = rep.grad;
      for (Vec& u : out.upstream)
        for (double& v : u) v = -v;
    }
  };

  switch (cfg.objective) {
    case Objective::CenTime:
    case Objective::Classical: {
      std::vector<EventPmf> pmfs;
      pmfs.reserve(b);
      std::vector<Vec> dmu;
      for (std::size_t k = 0; k < b; ++k) {
        const DiscGaussParams p{outs[k][0], cfg.sigma};
        pmfs.push_back(disc_gauss_log_pmf(p, ds.grid));
        if (want_grads) dmu.push_back(disc_gauss_dlogpmf_dmu(p, ds.grid));
      }
      const LossReport rep =
          cfg.objective == Objective::CenTime
              ? centime_objective(labels, ds.grid, pmfs, want_grads ? &dmu : nullptr)
              : classical_objective(labels, ds.grid, pmfs, want_grads ? &dmu : nullptr);
      negate_into(rep);
      return out;
    }
    case Objective::DeepHit:
    case Objective::DeepHitLikOnly: {
      std::vector<EventPmf> pmfs;
      pmfs.reserve(b);
      for (std::size_t k = 0; k < b; ++k) pmfs.push_back(EventPmf::from_log_unnormalized(outs[k]));
      if (cfg.objective == Objective::DeepHitLikOnly) {
        negate_into(deephit_likelihood(labels, ds.grid, pmfs));
        return out;
      }
      std::vector<Vec> cdfs;
      cdfs.reserve(b);
      for (const EventPmf& p : pmfs) cdfs.push_back(pmf_to_cdf(p));
      const LossReport rep = deephit_total_loss(labels, ds.grid, pmfs, cdfs, cfg.s);
      out.loss = rep.value;
      out.flagged = rep.flagged;
      if (want_grads) out.upstream = rep.grad;
      return out;
    }
    case Objective::Cox:
    case Objective::CoxMB: {
      Vec g(b);
      for (std::size_t k = 0; k < b; ++k) g[k] = outs[k][0];
      std::optional<LossReport> rep;
      if (cfg.objective == Objective::CoxMB && bank)
        rep = coxmb_objective(*bank, iteration, g, labels);
      else
        rep = cox_partial_ll(g, labels);
      if (!rep) return std::nullopt;
      negate_into(*rep);
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace

double clip_global_norm(Vec& g, double max_norm) {
  double acc = 0.0;
  for (double x : g) acc += x * x;
  const double norm = std::sqrt(acc);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& x : g) x *= scale;
  }
  return norm;
}

std::optional<double> batch_loss_and_grad(const TrainConfig& cfg, const PredictorConfig& pcfg,
                                          const ParameterVector& params, const Dataset& ds,
                                          const std::vector<int>& rows, ParameterVector* grad_out,
                                          MemoryBank* bank, long iteration) {
  const std::optional<StepEval> ev =
      eval_batch(cfg, pcfg, params, ds, rows, bank, iteration, grad_out != nullptr);
  if (!ev) return std::nullopt;
  if (grad_out) {
    grad_out->assign(params.size(), 0.0);
    for (std::size_t k = 0; k < rows.size(); ++k)
      backward(pcfg, params, ds.observations[static_cast<std::size_t>(rows[k])].covariates,
               ev->upstream[k], *grad_out);
  }
  return ev->loss;
}

TrainResult train(const TrainConfig& cfg, const Dataset& train_ds, const Dataset& val_ds,
                  const PredictorConfig& pcfg) {
  cfg.validate();
  pcfg.validate();
  check_compatibility(cfg, train_ds, pcfg, "train set");
  check_compatibility(cfg, val_ds, pcfg, "validation set");
  if (train_ds.size() == 0) throw ConfigError("train: empty training set");

  if (is_cox_family(cfg.objective) && partition_indices(train_ds).uncensored.empty())
    throw UntrainableError(std::string("objective ") + objective_name(cfg.objective) +
                           " is only trainable when uncensored examples are available");

  const int n = train_ds.size();
  const int steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const long total_steps = static_cast<long>(cfg.epochs) * steps_per_epoch;
  const double base_lr = cfg.resolved_lr();
  const auto lr_at = [&](long step) {
    return base_lr * 0.5 *
           (1.0 + std::cos(3.141592653589793 * static_cast<double>(step) /
                           static_cast<double>(total_steps)));
  };

  ParameterVector params = init_params(pcfg);
  Vec m(params.size(), 0.0), v(params.size(), 0.0);
  long adam_t = 0;

  MemoryBank bank(MemoryBank::capacity_for(cfg.k_fraction, n));
  MemoryBank* bank_ptr = cfg.objective == Objective::CoxMB ? &bank : nullptr;

  const Rng master(cfg.seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  TrainResult result;
  result.best_val = std::numeric_limits<double>::infinity();
  ParameterVector best_params = params;

  long step = 0;
  ParameterVector grad(params.size(), 0.0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng epoch_rng = master.child(static_cast<std::uint64_t>(epoch));
    shuffle(order, epoch_rng);

    double loss_sum = 0.0;
    int n_updates = 0, skipped = 0;
    const double lr_first = lr_at(step);

    for (int start = 0; start < n; start += cfg.batch_size) {
      const int stop = std::min(start + cfg.batch_size, n);
      const std::vector<int> rows(order.begin() + start, order.begin() + stop);
      const double lr_t = lr_at(step);
      ++step;  // skipped steps consume their schedule slot

      const std::optional<double> loss =
          batch_loss_and_grad(cfg, pcfg, params, train_ds, rows, &grad, bank_ptr, step);
      if (!loss) {
        ++skipped;
        continue;
      }
      loss_sum += *loss;
      ++n_updates;

      clip_global_norm(grad, cfg.clip_norm);

      ++adam_t;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_t));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_t));
      for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        params[i] -= lr_t * (m_hat / (std::sqrt(v_hat) + kAdamEps) + kWeightDecay * params[i]);
      }
    }

    // Full-batch validation loss; the CoxMB validation convention is the
    // plain partial likelihood (no bank).
    std::vector<int> val_rows(static_cast<std::size_t>(val_ds.size()));
    for (int i = 0; i < val_ds.size(); ++i) val_rows[static_cast<std::size_t>(i)] = i;
    const std::optional<StepEval> val_ev =
        eval_batch(cfg, pcfg, params, val_ds, val_rows, nullptr, 0, /*want_grads=*/false);
    const double val_loss = val_ev ? val_ev->loss : kNaN;

    result.log.push_back(EpochLog{epoch, n_updates > 0 ? loss_sum / n_updates : kNaN, val_loss,
                                  lr_first, skipped});

    if (std::isfinite(val_loss) && val_loss < result.best_val) {
      result.best_val = val_loss;
      result.best_epoch = epoch;
      best_params = params;
    }
    if (epoch - result.best_epoch >= cfg.patience && result.best_epoch > 0) break;
    if (result.best_epoch == 0 && epoch >= cfg.patience) break;  // validation never defined
  }

  result.params = std::move(best_params);
  return result;
}

EvalResult evaluate(const ParameterVector& params, const PredictorConfig& pcfg, const Dataset& ds,
                    const TrainConfig& cfg, const Dataset* baseline, PointPrediction point) {
  pcfg.validate();
  const Dataset& base = baseline ? *baseline : ds;
  const std::vector<SampleLabel> labels = ds.labels();
  const std::size_t n = labels.size();

  Vec score(n, 0.0);
  Vec pred(n, 0.0);
  bool have_pred = true;

  if (pcfg.head == HeadKind::Risk) {
    Vec g(n);
    for (std::size_t i = 0; i < n; ++i)
      g[i] = forward(pcfg, params, ds.observations[i].covariates)[0];
    for (std::size_t i = 0; i < n; ++i) score[i] = -g[i];
    // Baseline hazard from the reference dataset (the training split when
    // the caller passes one).
    if (partition_indices(base).uncensored.empty()) {
      have_pred = false;
    } else {
      Vec g_base(static_cast<std::size_t>(base.size()));
      for (int i = 0; i < base.size(); ++i)
        g_base[static_cast<std::size_t>(i)] =
            forward(pcfg, params, base.observations[static_cast<std::size_t>(i)].covariates)[0];
      const Vec h0 = breslow_baseline(g_base, base.labels(), base.grid);
      for (std::size_t i = 0; i < n; ++i) pred[i] = cox_predict_time(g[i], h0, base.grid);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const Vec out = forward(pcfg, params, ds.observations[i].covariates);
      const EventPmf pmf = pcfg.head == HeadKind::Mu
                               ? disc_gauss_log_pmf({out[0], cfg.sigma}, ds.grid)
                               : EventPmf::from_log_unnormalized(out);
      pred[i] = point == PointPrediction::Mean ? pmf_mean(pmf)
                                               : static_cast<double>(pmf_mode(pmf));
      score[i] = pred[i];
    }
  }

  EvalResult out;
  out.metrics.c_index = c_index(score, labels, &out.metrics.n_comparable_pairs);
  if (have_pred) {
    out.metrics.mae = mae(pred, labels);
    out.metrics.rae = rae(pred, labels);
  }
  for (const SampleLabel& lab : labels)
    if (lab.status == CensoringStatus::Uncensored) ++out.metrics.n_uncensored;

  std::vector<int> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(i);
  const std::optional<StepEval> ev =
      eval_batch(cfg, pcfg, params, ds, rows, nullptr, 0, /*want_grads=*/false);
  if (ev) {
    out.objective = ev->loss;
    out.flagged = ev->flagged;
  }
  return out;
}

void write_training_log(const std::string& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write training log: " + path);
  out << "epoch,train_objective,val_objective,lr,skipped_batches\n";
  for (const EpochLog& e : log)
    out << e.epoch << ',' << format_double(e.train_obj) << ',' << format_double(e.val_obj) << ','
        << format_double(e.lr) << ',' << e.skipped << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace censurv
