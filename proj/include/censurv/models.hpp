#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "censurv/core_types.hpp"

namespace censurv {

enum class Architecture { Linear, Mlp };
enum class HeadKind { Mu, Logits, Risk };

// Predictor family: a linear map or a one-hidden-layer leaky-ReLU MLP
// feeding one of three heads. The Mu head rescales its raw affine output
// onto (1, t_max) via a sigmoid so the discretized Gaussian stays centered
// on the grid; Risk and Logits heads emit raw affine outputs.
struct PredictorConfig {
  Architecture arch = Architecture::Linear;
  int hidden = 0;  // > 0 iff arch == Mlp
  HeadKind head = HeadKind::Mu;
  int d = 1;
  int t_max = 2;  // Logits dimension and Mu rescaling range
  std::uint64_t seed = 0;

  int head_dim() const { return head == HeadKind::Logits ? t_max : 1; }
  int param_count() const;
  void validate() const;
};

using ParameterVector = Vec;

// Head output: scalar mu in (1, t_max), scalar risk, or a logit vector.
Vec forward(const PredictorConfig& cfg, const ParameterVector& params, std::span<const double> x);

// Accumulates the exact chain-rule parameter gradient for one sample into
// grad_accum (same length as params). upstream is the loss gradient at the
// head output.
void backward(const PredictorConfig& cfg, const ParameterVector& params, std::span<const double> x,
              std::span<const double> upstream, ParameterVector& grad_accum);

// Weights ~ U(-sqrt(3/fan_in), sqrt(3/fan_in)) from the seeded stream;
// biases zero. Deterministic per cfg.seed.
ParameterVector init_params(const PredictorConfig& cfg);

// Checkpoint file: one JSON header line describing the config, then the
// parameters as raw 64-bit little-endian reals.
void save_checkpoint(const std::string& path, const PredictorConfig& cfg,
                     const ParameterVector& params);
std::pair<PredictorConfig, ParameterVector> load_checkpoint(const std::string& path);

std::string architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);
std::string head_name(HeadKind h);
HeadKind head_from_name(const std::string& name);

}  // namespace censurv
