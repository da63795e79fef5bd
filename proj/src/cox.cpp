#include "censurv/cox.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace censurv {

namespace {

void check_cox_statuses(const std::vector<SampleLabel>& labels) {
  for (const SampleLabel& lab : labels)
    if (lab.status != CensoringStatus::Uncensored && lab.status != CensoringStatus::RightCensored)
      throw ConfigError("cox: only uncensored/right-censored observations are supported");
}

// Core Breslow partial likelihood over a pool. grad_mask[i] selects which
// entries receive gradient (nullptr = all).
std::optional<LossReport> cox_core(const Vec& g, const std::vector<SampleLabel>& labels,
                                   const std::vector<char>* grad_mask) {
  if (g.size() != labels.size()) throw ConfigError("cox: prediction/label size mismatch");
  check_cox_statuses(labels);
  const std::size_t n = labels.size();

  std::vector<int> events;
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i].status == CensoringStatus::Uncensored) events.push_back(static_cast<int>(i));
  if (events.empty()) return std::nullopt;

  LossReport rep;
  rep.grad.assign(n, Vec{0.0});
  const double inv_u = 1.0 / static_cast<double>(events.size());

  double acc = 0.0;
  Vec member_logits;
  std::vector<int> members;
  for (int ev : events) {
    const int t_n = labels[static_cast<std::size_t>(ev)].time;
    members.clear();
    member_logits.clear();
    for (std::size_t m = 0; m < n; ++m) {
      if (labels[m].time >= t_n) {
        members.push_back(static_cast<int>(m));
        member_logits.push_back(g[m]);
      }
    }
    const double lse = log_sum_exp(member_logits);
    acc += g[static_cast<std::size_t>(ev)] - lse;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const std::size_t m = static_cast<std::size_t>(members[k]);
      rep.grad[m][0] -= inv_u * std::exp(member_logits[k] - lse);
    }
    rep.grad[static_cast<std::size_t>(ev)][0] += inv_u;
  }
  rep.value = acc * inv_u;

  if (grad_mask)
    for (std::size_t i = 0; i < n; ++i)
      if (!(*grad_mask)[i]) rep.grad[i][0] = 0.0;
  return rep;
}

}  // namespace

std::vector<int> risk_set(const std::vector<SampleLabel>& labels, int n) {
  check_cox_statuses(labels);
  if (labels[static_cast<std::size_t>(n)].status != CensoringStatus::Uncensored)
    throw ConfigError("risk_set: sample " + std::to_string(n) + " is censored");
  const int t_n = labels[static_cast<std::size_t>(n)].time;
  std::vector<int> out;
  for (std::size_t m = 0; m < labels.size(); ++m)
    if (labels[m].time >= t_n) out.push_back(static_cast<int>(m));
  return out;
}

std::optional<LossReport> cox_partial_ll(const Vec& g, const std::vector<SampleLabel>& labels) {
  return cox_core(g, labels, nullptr);
}

MemoryBank::MemoryBank(int capacity) : capacity_(capacity) {
  if (capacity < 0) throw ConfigError("MemoryBank: negative capacity");
}

int MemoryBank::capacity_for(double k_fraction, int n_train) {
  if (k_fraction < 0.0 || k_fraction > 1.0) throw ConfigError("MemoryBank: K must lie in [0,1]");
  return static_cast<int>(std::floor(k_fraction * static_cast<double>(n_train)));
}

void MemoryBank::push(double g, const SampleLabel& label, long origin_iteration, int slot) {
  if (capacity_ == 0) return;
  if (static_cast<int>(entries_.size()) == capacity_) entries_.pop_front();
  entries_.push_back(Entry{g, label, origin_iteration, slot});
}

std::optional<LossReport> coxmb_objective(MemoryBank& bank, long iteration, const Vec& g_batch,
                                          const std::vector<SampleLabel>& batch_labels) {
  if (g_batch.size() != batch_labels.size())
    throw ConfigError("coxmb: prediction/label size mismatch");
  check_cox_statuses(batch_labels);

  for (std::size_t i = 0; i < g_batch.size(); ++i)
    bank.push(g_batch[i], batch_labels[i], iteration, static_cast<int>(i));

  Vec pool_g;
  std::vector<SampleLabel> pool_labels;
  std::vector<char> live;
  std::vector<int> live_slot;
  if (bank.capacity() == 0) {
    // Empty bank: the objective is the standard minibatch Cox loss.
    pool_g = g_batch;
    pool_labels = batch_labels;
    live.assign(g_batch.size(), 1);
    for (std::size_t i = 0; i < g_batch.size(); ++i) live_slot.push_back(static_cast<int>(i));
  } else {
    for (const MemoryBank::Entry& e : bank.entries()) {
      pool_g.push_back(e.g);
      pool_labels.push_back(e.label);
      const bool is_live = e.origin_iteration == iteration;
      live.push_back(is_live ? 1 : 0);
      live_slot.push_back(is_live ? e.slot : -1);
    }
  }

  std::optional<LossReport> pooled = cox_core(pool_g, pool_labels, &live);
  if (!pooled) return std::nullopt;

  // Route live-entry gradients back to their minibatch slots. Slots whose
  // entry was evicted at push time (capacity < batch size) stay zero.
  LossReport rep;
  rep.value = pooled->value;
  rep.flagged = pooled->flagged;
  rep.grad.assign(batch_labels.size(), Vec{0.0});
  for (std::size_t i = 0; i < pool_g.size(); ++i)
    if (live[i]) rep.grad[static_cast<std::size_t>(live_slot[i])][0] = pooled->grad[i][0];
  return rep;
}

Vec breslow_baseline(const Vec& g, const std::vector<SampleLabel>& labels, const TimeGrid& grid) {
  if (g.size() != labels.size()) throw ConfigError("breslow: prediction/label size mismatch");
  check_cox_statuses(labels);

  // Tied events aggregated: one increment d_t / denom(t) per distinct event time.
  std::map<int, int> event_counts;
  for (const SampleLabel& lab : labels)
    if (lab.status == CensoringStatus::Uncensored) ++event_counts[lab.time];
  if (event_counts.empty()) throw ConfigError("breslow: no uncensored samples");

  Vec increments(static_cast<std::size_t>(grid.t_max) + 1, 0.0);
  for (const auto& [t_event, d] : event_counts) {
    Vec at_risk;
    for (std::size_t m = 0; m < labels.size(); ++m)
      if (labels[m].time >= t_event) at_risk.push_back(g[m]);
    const double lse = log_sum_exp(at_risk);
    increments[static_cast<std::size_t>(t_event)] = static_cast<double>(d) * std::exp(-lse);
  }

  Vec h0(static_cast<std::size_t>(grid.t_max));
  double acc = 0.0;
  for (int t = 1; t <= grid.t_max; ++t) {
    acc += increments[static_cast<std::size_t>(t)];
    h0[static_cast<std::size_t>(t - 1)] = acc;
  }
  return h0;
}

double cox_predict_time(double g, const Vec& h0, const TimeGrid& grid) {
  if (static_cast<int>(h0.size()) != grid.t_max) throw ConfigError("cox_predict_time: bad H0 size");
  const double risk = std::exp(g);
  double pred = 1.0;
  for (int t = 1; t <= grid.t_max - 1; ++t)
    pred += std::exp(-h0[static_cast<std::size_t>(t - 1)] * risk);
  return std::clamp(pred, 1.0, static_cast<double>(grid.t_max));
}

}  // namespace censurv
