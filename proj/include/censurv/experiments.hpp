#pragma once

#include <optional>
#include <string>

#include "censurv/config.hpp"

namespace censurv {

// Command-line overrides applied on top of the config file.
struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

// `censurv generate`: writes train/val/test dataset CSVs plus a JSON sidecar
// echoing the generator settings. Deterministic per seed.
void run_generate(const Config& cfg, const CliOverrides& ov);

// `censurv train`: trains one model; writes checkpoint.bin, training_log.csv
// and a resolved-config sidecar.
void run_train(const Config& cfg, const CliOverrides& ov);

// `censurv evaluate`: scores a checkpoint on a dataset; writes evaluation.csv.
void run_evaluate(const Config& cfg, const CliOverrides& ov);

// `censurv sweep`: the limited-uncensored-data experiment. For each
// method x fraction x repeat, subsamples the uncensored training pool,
// adds all censored samples, trains, and evaluates on the repeat's test
// split. Emits sweep.csv raw rows and sweep_summary.csv (mean +- sd).
// Cells run in parallel up to the CENSURV_THREADS cap; outputs are merged
// deterministically by key.
void run_sweep(const Config& cfg, const CliOverrides& ov);

}  // namespace censurv
