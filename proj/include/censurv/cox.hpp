#pragma once

#include <deque>
#include <optional>

#include "censurv/core_types.hpp"
#include "censurv/likelihoods.hpp"

namespace censurv {

// Risk set R_n for an uncensored sample n: indices of samples whose observed
// time (event or censoring) is >= t_n. n itself is always included.
std::vector<int> risk_set(const std::vector<SampleLabel>& labels, int n);

// Breslow partial log-likelihood, averaged over uncensored samples:
//   (1/|U|) sum_{n in U} [ g_n - log sum_{m in R_n} exp(g_m) ]
// with per-sample gradients d/dg. Returns nullopt (a skip signal) when the
// pool has no uncensored sample. Only uncensored/right-censored statuses are
// accepted.
std::optional<LossReport> cox_partial_ll(const Vec& g, const std::vector<SampleLabel>& labels);

// FIFO queue of (prediction, status, time) tuples from earlier iterations.
// Capacity floor(K * N); eviction is strictly oldest-first. Single-owner:
// exactly one training loop mutates it.
class MemoryBank {
 public:
  struct Entry {
    double g;
    SampleLabel label;
    long origin_iteration;
    int slot;  // position within its minibatch, for gradient routing
  };

  explicit MemoryBank(int capacity);
  static int capacity_for(double k_fraction, int n_train);

  void push(double g, const SampleLabel& label, long origin_iteration, int slot);
  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const std::deque<Entry>& entries() const { return entries_; }

 private:
  int capacity_;
  std::deque<Entry> entries_;
};

// One CoxMB step: pushes the current minibatch into the bank, then evaluates
// the Cox partial likelihood over the bank contents. Gradients flow only
// through entries originating from this iteration (mapped back to minibatch
// slots); older entries contribute constant predictions. With capacity 0 the
// bank stores nothing and the loss reduces to the standard minibatch Cox
// objective on the current batch, through the same code path. Returns the
// skip signal when the pool holds no uncensored entry.
std::optional<LossReport> coxmb_objective(MemoryBank& bank, long iteration, const Vec& g_batch,
                                          const std::vector<SampleLabel>& batch_labels);

// Cumulative baseline hazard H0(t) on the grid: events aggregated by time,
// each contributing d / sum_{m at risk} exp(g_m).
Vec breslow_baseline(const Vec& g, const std::vector<SampleLabel>& labels, const TimeGrid& grid);

// Discrete expected lifetime under S(t|x) = exp(-H0(t) e^g):
//   1 + sum_{t=1}^{t_max-1} S(t|x), which lies in [1, t_max].
double cox_predict_time(double g, const Vec& h0, const TimeGrid& grid);

}  // namespace censurv
