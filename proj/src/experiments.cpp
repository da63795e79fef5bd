#include "censurv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "censurv/cox.hpp"
#include "censurv/datagen.hpp"
#include "censurv/training.hpp"
#include "json.hpp"

namespace censurv {

namespace {

namespace fs = std::filesystem;

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

std::string na_or(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::string out_dir(const Config& cfg, const CliOverrides& ov) {
  const std::string out = ov.out ? *ov.out : cfg.get_string_or("out", "");
  if (out.empty()) throw ConfigError("no output directory: set 'out' in the config or pass --out");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
  return out;
}

std::uint64_t seed_of(const Config& cfg, const CliOverrides& ov) {
  if (ov.seed) return *ov.seed;
  return static_cast<std::uint64_t>(cfg.get_int_or("seed", 0));
}

CovariateLaw law_from_name(const std::string& name) {
  if (name == "standard_normal") return CovariateLaw::StandardNormal;
  if (name == "uniform_cube") return CovariateLaw::UniformCube;
  throw ConfigError("unknown covariate_law: " + name);
}

std::string law_name(CovariateLaw law) {
  return law == CovariateLaw::StandardNormal ? "standard_normal" : "uniform_cube";
}

GroundTruth ground_truth_from(const Config& cfg) {
  const GroundTruth dflt = default_ground_truth();
  const int t_max = static_cast<int>(cfg.get_int_or("t_max", dflt.grid.t_max));
  Vec beta = cfg.get_double_list_or("beta", dflt.beta);
  const double bias = cfg.get_double_or("bias", dflt.bias);
  const double sigma_true = cfg.get_double_or("sigma_true", dflt.sigma_true);
  const CovariateLaw law =
      law_from_name(cfg.get_string_or("covariate_law", law_name(dflt.covariate_law)));
  return GroundTruth(std::move(beta), bias, sigma_true, TimeGrid(t_max), law);
}

std::vector<double> split_from(const Config& cfg) {
  const std::vector<double> split = cfg.get_double_list_or("split", {0.70, 0.15, 0.15});
  if (split.size() != 3) throw ConfigError("split must have three fractions (train, val, test)");
  double sum = 0.0;
  for (double f : split) {
    if (f < 0.0) throw ConfigError("split fractions must be >= 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  return split;
}

struct SplitSizes {
  int train, val, test;
};

SplitSizes split_sizes(int n, const std::vector<double>& split) {
  SplitSizes s{};
  s.train = round_half_up(split[0] * n);
  s.val = round_half_up(split[1] * n);
  s.test = n - s.train - s.val;
  if (s.test < 0) throw ConfigError("split rounding produced a negative test count");
  return s;
}

Dataset slice(const Dataset& ds, int begin, int count) {
  std::vector<Observation> rows(ds.observations.begin() + begin,
                                ds.observations.begin() + begin + count);
  return Dataset(std::move(rows), ds.d, ds.grid);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

nlohmann::json gt_json(const GroundTruth& gt) {
  return nlohmann::json{{"t_max", gt.grid.t_max},
                        {"beta", gt.beta},
                        {"bias", gt.bias},
                        {"sigma_true", gt.sigma_true},
                        {"covariate_law", law_name(gt.covariate_law)}};
}

// Stream tags for deriving independent generator streams from one seed.
constexpr std::uint64_t kGenTag = 11;
constexpr std::uint64_t kSubsampleTag = 23;

struct GeneratedSplits {
  Dataset train, val, test;
};

GeneratedSplits generate_splits(const Config& cfg, const GroundTruth& gt, std::uint64_t seed,
                                nlohmann::json* sidecar) {
  const std::string mechanism = cfg.get_string_or("mechanism", "centime");
  Rng rng(Rng::mix(seed, kGenTag));
  std::optional<Dataset> pool;
  nlohmann::json counts;

  if (mechanism == "centime") {
    const int n = static_cast<int>(cfg.get_int("n"));
    const double cf = cfg.get_double_or("censored_fraction", 0.65);
    if (cf < 0.0 || cf > 1.0) throw ConfigError("censored_fraction must lie in [0,1]");
    const int n_cens = round_half_up(cf * n);
    const int n_uncens = n - n_cens;
    pool = generate_centime(gt, n_uncens, n_cens, rng);
    counts = {{"n", n}, {"n_censored", n_cens}, {"n_uncensored", n_uncens}};
  } else if (mechanism == "classical") {
    const int n = static_cast<int>(cfg.get_int("n"));
    pool = generate_classical(gt, n, rng);
    counts = {{"n", n}};
  } else if (mechanism == "left_interval") {
    const int n_left = static_cast<int>(cfg.get_int("n_left"));
    const int n_interval = static_cast<int>(cfg.get_int("n_interval"));
    pool = generate_left_interval(gt, n_left, n_interval, rng);
    counts = {{"n_left", n_left}, {"n_interval", n_interval}};
  } else {
    throw ConfigError("unknown mechanism: " + mechanism);
  }

  const std::vector<double> split = split_from(cfg);
  const SplitSizes sizes = split_sizes(pool->size(), split);
  if (sidecar) {
    (*sidecar)["mechanism"] = mechanism;
    (*sidecar)["counts"] = counts;
    (*sidecar)["split"] = split;
    (*sidecar)["rows"] = {{"train", sizes.train}, {"val", sizes.val}, {"test", sizes.test}};
    (*sidecar)["ground_truth"] = gt_json(gt);
    (*sidecar)["seed"] = seed;
  }
  return GeneratedSplits{slice(*pool, 0, sizes.train), slice(*pool, sizes.train, sizes.val),
                         slice(*pool, sizes.train + sizes.val, sizes.test)};
}

const std::vector<std::string> kTrainKeys = {
    "objective", "train",      "val",      "out",       "seed", "architecture",
    "hidden",    "t_max",      "lr",       "epochs",    "batch_size",
    "patience",  "clip_norm",  "K",        "sigma",     "s"};

TrainConfig train_config_from(const Config& cfg, std::uint64_t seed) {
  TrainConfig tc;
  tc.objective = objective_from_name(cfg.get_string("objective"));
  tc.lr = cfg.get_double_or("lr", 0.0);
  tc.epochs = static_cast<int>(cfg.get_int_or("epochs", 300));
  tc.batch_size = static_cast<int>(cfg.get_int_or("batch_size", 32));
  tc.patience = static_cast<int>(cfg.get_int_or("patience", 50));
  tc.clip_norm = cfg.get_double_or("clip_norm", 1.0);
  tc.k_fraction = cfg.get_double_or("K", 1.0);
  tc.sigma = cfg.get_double_or("sigma", 12.0);
  tc.s = cfg.get_double_or("s", 0.1);
  tc.seed = seed;
  tc.validate();
  return tc;
}

PredictorConfig predictor_config_from(const Config& cfg, Objective objective, int d, int t_max,
                                      std::uint64_t seed) {
  PredictorConfig pc;
  pc.arch = architecture_from_name(cfg.get_string_or("architecture", "linear"));
  pc.hidden = static_cast<int>(cfg.get_int_or("hidden", pc.arch == Architecture::Mlp ? 16 : 0));
  if (pc.arch == Architecture::Linear) pc.hidden = 0;
  pc.head = head_for_objective(objective);
  pc.d = d;
  pc.t_max = t_max;
  pc.seed = seed;
  pc.validate();
  return pc;
}

nlohmann::json train_config_json(const TrainConfig& tc, const PredictorConfig& pc) {
  return nlohmann::json{{"objective", objective_name(tc.objective)},
                        {"lr", tc.resolved_lr()},
                        {"epochs", tc.epochs},
                        {"batch_size", tc.batch_size},
                        {"patience", tc.patience},
                        {"clip_norm", tc.clip_norm},
                        {"K", tc.k_fraction},
                        {"sigma", tc.sigma},
                        {"s", tc.s},
                        {"seed", tc.seed},
                        {"architecture", architecture_name(pc.arch)},
                        {"hidden", pc.hidden},
                        {"head", head_name(pc.head)},
                        {"d", pc.d},
                        {"t_max", pc.t_max}};
}

int thread_cap(int n_cells) {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("CENSURV_THREADS")) {
    const int requested = std::atoi(env);
    if (requested >= 1) cap = requested;
  }
  return std::min(cap, n_cells);
}

}  // namespace

void run_generate(const Config& cfg, const CliOverrides& ov) {
  cfg.restrict_keys({"mechanism", "n", "censored_fraction", "n_left", "n_interval", "split",
                     "t_max", "beta", "bias", "sigma_true", "covariate_law", "out", "seed"});
  const std::string out = out_dir(cfg, ov);
  const std::uint64_t seed = seed_of(cfg, ov);
  const GroundTruth gt = ground_truth_from(cfg);

  nlohmann::json sidecar;
  sidecar["command"] = "generate";
  const GeneratedSplits splits = generate_splits(cfg, gt, seed, &sidecar);
  write_dataset(out + "/train.csv", splits.train);
  write_dataset(out + "/val.csv", splits.val);
  write_dataset(out + "/test.csv", splits.test);
  write_json(out + "/generate.json", sidecar);
  std::cout << "wrote " << splits.train.size() << "/" << splits.val.size() << "/"
            << splits.test.size() << " rows to " << out << "\n";
}

void run_train(const Config& cfg, const CliOverrides& ov) {
  cfg.restrict_keys(kTrainKeys);
  const std::string out = out_dir(cfg, ov);
  const std::uint64_t seed = seed_of(cfg, ov);
  const TrainConfig tc = train_config_from(cfg, seed);

  const int t_max = static_cast<int>(cfg.get_int_or("t_max", 156));
  const TimeGrid grid(t_max);
  const Dataset train_ds = read_dataset(cfg.get_string("train"), grid);
  const Dataset val_ds = read_dataset(cfg.get_string("val"), grid);
  const PredictorConfig pc = predictor_config_from(cfg, tc.objective, train_ds.d, t_max, seed);

  const TrainResult res = train(tc, train_ds, val_ds, pc);
  save_checkpoint(out + "/checkpoint.bin", pc, res.params);
  write_training_log(out + "/training_log.csv", res.log);
  nlohmann::json sidecar = train_config_json(tc, pc);
  sidecar["command"] = "train";
  sidecar["best_epoch"] = res.best_epoch;
  sidecar["best_val_objective"] = res.best_val;
  sidecar["epochs_run"] = res.log.size();
  write_json(out + "/train_config.json", sidecar);
  std::cout << "best epoch " << res.best_epoch << ", best validation objective "
            << format_double(res.best_val) << "\n";
}

void run_evaluate(const Config& cfg, const CliOverrides& ov) {
  cfg.restrict_keys(
      {"checkpoint", "data", "train", "out", "seed", "objective", "sigma", "s", "point", "t_max"});
  const std::string out = out_dir(cfg, ov);
  auto [pc, params] = load_checkpoint(cfg.get_string("checkpoint"));

  TrainConfig tc;
  tc.objective = objective_from_name(cfg.get_string("objective"));
  tc.sigma = cfg.get_double_or("sigma", 12.0);
  tc.s = cfg.get_double_or("s", 0.1);
  if (head_for_objective(tc.objective) != pc.head)
    throw ConfigError("objective " + objective_name(tc.objective) +
                      " does not match the checkpoint head " + head_name(pc.head));

  const int t_max = static_cast<int>(cfg.get_int_or("t_max", pc.t_max));
  const TimeGrid grid(t_max);
  const Dataset ds = read_dataset(cfg.get_string("data"), grid);

  std::optional<Dataset> baseline;
  if (cfg.has("train")) baseline = read_dataset(cfg.get_string("train"), grid);

  const std::string point_name = cfg.get_string_or("point", "mean");
  PointPrediction point;
  if (point_name == "mean")
    point = PointPrediction::Mean;
  else if (point_name == "mode")
    point = PointPrediction::Mode;
  else
    throw ConfigError("point must be 'mean' or 'mode'");

  const EvalResult res =
      evaluate(params, pc, ds, tc, baseline ? &*baseline : nullptr, point);

  const std::string line = na_or(res.objective) + "," + na_or(res.metrics.c_index) + "," +
                           na_or(res.metrics.mae) + "," + na_or(res.metrics.rae) + "," +
                           std::to_string(res.metrics.n_comparable_pairs) + "," +
                           std::to_string(res.metrics.n_uncensored);
  std::ofstream csv(out + "/evaluation.csv", std::ios::binary);
  if (!csv) throw IoError("cannot write evaluation.csv");
  csv << "objective,c_index,mae,rae,n_comparable_pairs,n_uncensored\n" << line << "\n";
  std::cout << "objective,c_index,mae,rae,n_comparable_pairs,n_uncensored\n" << line << "\n";
}

namespace {

struct SweepRow {
  std::string method;
  double fraction;
  int repeat;
  std::optional<double> c_index, mae, rae;
};

struct SummaryStats {
  int n = 0;
  double mean = 0.0, sd = 0.0;
};

std::optional<SummaryStats> summarize(const std::vector<std::optional<double>>& xs) {
  Vec vals;
  for (const auto& x : xs)
    if (x) vals.push_back(*x);
  if (vals.empty()) return std::nullopt;
  SummaryStats s;
  s.n = static_cast<int>(vals.size());
  for (double v : vals) s.mean += v;
  s.mean /= vals.size();
  if (vals.size() >= 2) {
    for (double v : vals) s.sd += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(s.sd / (vals.size() - 1));
  }
  return s;
}

}  // namespace

void run_sweep(const Config& cfg, const CliOverrides& ov) {
  cfg.restrict_keys({"methods", "uncensored_fractions", "n_repeats", "seeds", "split", "n",
                     "censored_fraction", "t_max", "beta", "bias", "sigma_true", "covariate_law",
                     "mechanism", "out", "seed", "architecture", "hidden", "lr", "epochs",
                     "batch_size", "patience", "clip_norm", "K", "sigma", "s", "point"});
  const std::string out = out_dir(cfg, ov);
  const std::uint64_t seed = seed_of(cfg, ov);
  const GroundTruth gt = ground_truth_from(cfg);

  if (cfg.get_string_or("mechanism", "centime") != "centime")
    throw ConfigError("sweep: only the centime mechanism supports exact censored counts");

  const std::vector<std::string> methods =
      cfg.get_string_list_or("methods", {"centime", "classical"});
  std::vector<Objective> objectives;
  for (const std::string& m : methods) objectives.push_back(objective_from_name(m));

  std::vector<double> fractions =
      cfg.get_double_list_or("uncensored_fractions", {0.0, 0.2, 0.4, 0.6, 0.8, 1.0});
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (fractions[i] < 0.0 || fractions[i] > 1.0)
      throw ConfigError("uncensored_fractions must lie in [0,1]");
    if (i > 0 && fractions[i] <= fractions[i - 1])
      throw ConfigError("uncensored_fractions must be sorted ascending");
  }

  const int n_repeats = static_cast<int>(cfg.get_int_or("n_repeats", 5));
  if (n_repeats < 1) throw ConfigError("n_repeats must be >= 1");
  std::vector<double> seeds_raw = cfg.get_double_list_or("seeds", {});
  std::vector<std::uint64_t> seeds;
  if (seeds_raw.empty()) {
    for (int r = 0; r < n_repeats; ++r) seeds.push_back(seed + static_cast<std::uint64_t>(r));
  } else {
    if (static_cast<int>(seeds_raw.size()) != n_repeats)
      throw ConfigError("seeds must list one seed per repeat");
    for (double s : seeds_raw) seeds.push_back(static_cast<std::uint64_t>(s));
  }

  // Per-repeat pools, generated and persisted up front.
  std::vector<GeneratedSplits> repeats;
  for (int r = 0; r < n_repeats; ++r) {
    nlohmann::json side;
    repeats.push_back(generate_splits(cfg, gt, seeds[static_cast<std::size_t>(r)], &side));
    const std::string rdir = out + "/repeat_" + std::to_string(r);
    std::error_code ec;
    fs::create_directories(rdir, ec);
    if (ec) throw IoError("cannot create " + rdir + ": " + ec.message());
    write_dataset(rdir + "/train.csv", repeats.back().train);
    write_dataset(rdir + "/val.csv", repeats.back().val);
    write_dataset(rdir + "/test.csv", repeats.back().test);
  }

  // The uncensored subsample for a (fraction, repeat) cell is shared across
  // methods so the comparison sees identical data.
  const auto subsample_train = [&](int r, std::size_t f_idx) {
    const Dataset& pool = repeats[static_cast<std::size_t>(r)].train;
    const IndexPartition part = partition_indices(pool);
    std::vector<int> unc = part.uncensored;
    Rng sub_rng(Rng::mix(seeds[static_cast<std::size_t>(r)], Rng::mix(kSubsampleTag, f_idx)));
    shuffle(unc, sub_rng);
    const int keep = round_half_up(fractions[f_idx] * static_cast<double>(unc.size()));
    unc.resize(static_cast<std::size_t>(keep));
    std::vector<char> selected(static_cast<std::size_t>(pool.size()), 0);
    for (int i : unc) selected[static_cast<std::size_t>(i)] = 1;
    std::vector<Observation> rows;
    for (int i = 0; i < pool.size(); ++i) {
      const Observation& o = pool.observations[static_cast<std::size_t>(i)];
      if (o.status != CensoringStatus::Uncensored || selected[static_cast<std::size_t>(i)])
        rows.push_back(o);
    }
    return Dataset(std::move(rows), pool.d, pool.grid);
  };

  const int n_cells =
      static_cast<int>(methods.size() * fractions.size()) * n_repeats;
  std::vector<SweepRow> rows(static_cast<std::size_t>(n_cells));

  const auto run_cell = [&](int cell) {
    const int per_method = static_cast<int>(fractions.size()) * n_repeats;
    const std::size_t m_idx = static_cast<std::size_t>(cell / per_method);
    const std::size_t f_idx = static_cast<std::size_t>((cell % per_method) / n_repeats);
    const int r = cell % n_repeats;

    SweepRow& row = rows[static_cast<std::size_t>(cell)];
    row.method = methods[m_idx];
    row.fraction = fractions[f_idx];
    row.repeat = r;

    Config cell_cfg = cfg;
    cell_cfg.set("objective", methods[m_idx]);
    const TrainConfig tc = train_config_from(cell_cfg, seeds[static_cast<std::size_t>(r)]);

    const Dataset train_ds = subsample_train(r, f_idx);
    const Dataset& val_ds = repeats[static_cast<std::size_t>(r)].val;
    const Dataset& test_ds = repeats[static_cast<std::size_t>(r)].test;
    const PredictorConfig pc = predictor_config_from(cell_cfg, tc.objective, train_ds.d,
                                                     gt.grid.t_max, seeds[static_cast<std::size_t>(r)]);
    try {
      const TrainResult res = train(tc, train_ds, val_ds, pc);
      const EvalResult ev = evaluate(res.params, pc, test_ds, tc, &train_ds);
      row.c_index = ev.metrics.c_index;
      row.mae = ev.metrics.mae;
      row.rae = ev.metrics.rae;
    } catch (const UntrainableError&) {
      // Undefined markers; the row itself records the untrainable cell.
    }
  };

  const int n_threads = thread_cap(n_cells);
  std::atomic<int> next_cell{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> workers;
  for (int w = 0; w < n_threads; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const int cell = next_cell.fetch_add(1);
        if (cell >= n_cells) return;
        try {
          run_cell(cell);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::ofstream raw(out + "/sweep.csv", std::ios::binary);
  if (!raw) throw IoError("cannot write sweep.csv");
  raw << "method,fraction,repeat,c_index,mae,rae\n";
  for (const SweepRow& row : rows)
    raw << row.method << ',' << format_double(row.fraction) << ',' << row.repeat << ','
        << na_or(row.c_index) << ',' << na_or(row.mae) << ',' << na_or(row.rae) << "\n";

  std::ofstream summary(out + "/sweep_summary.csv", std::ios::binary);
  if (!summary) throw IoError("cannot write sweep_summary.csv");
  summary << "method,fraction,n_defined,c_index_mean,c_index_sd,mae_mean,mae_sd,rae_mean,rae_sd\n";
  for (std::size_t m_idx = 0; m_idx < methods.size(); ++m_idx) {
    for (std::size_t f_idx = 0; f_idx < fractions.size(); ++f_idx) {
      std::vector<std::optional<double>> cs, ms, rs;
      for (int r = 0; r < n_repeats; ++r) {
        const std::size_t cell = (m_idx * fractions.size() + f_idx) *
                                     static_cast<std::size_t>(n_repeats) +
                                 static_cast<std::size_t>(r);
        cs.push_back(rows[cell].c_index);
        ms.push_back(rows[cell].mae);
        rs.push_back(rows[cell].rae);
      }
      const auto c = summarize(cs), ma = summarize(ms), ra = summarize(rs);
      const auto cell_str = [](const std::optional<SummaryStats>& s, bool want_sd) {
        if (!s) return std::string("NA");
        if (want_sd && s->n < 2) return std::string("NA");
        return format_double(want_sd ? s->sd : s->mean);
      };
      summary << methods[m_idx] << ',' << format_double(fractions[f_idx]) << ','
              << (ma ? ma->n : (c ? c->n : 0)) << ',' << cell_str(c, false) << ','
              << cell_str(c, true) << ',' << cell_str(ma, false) << ',' << cell_str(ma, true)
              << ',' << cell_str(ra, false) << ',' << cell_str(ra, true) << "\n";
    }
  }

  nlohmann::json sidecar;
  sidecar["command"] = "sweep";
  sidecar["methods"] = methods;
  sidecar["uncensored_fractions"] = fractions;
  sidecar["n_repeats"] = n_repeats;
  sidecar["seeds"] = seeds;
  sidecar["ground_truth"] = gt_json(gt);
  sidecar["split"] = split_from(cfg);
  {
    Config probe = cfg;
    probe.set("objective", methods.empty() ? std::string("centime") : methods.front());
    const TrainConfig tc = train_config_from(probe, seed);
    sidecar["train"] = {{"epochs", tc.epochs},     {"batch_size", tc.batch_size},
                        {"patience", tc.patience}, {"clip_norm", tc.clip_norm},
                        {"K", tc.k_fraction},      {"sigma", tc.sigma},
                        {"s", tc.s}};
  }
  write_json(out + "/sweep.json", sidecar);
  std::cout << "wrote " << n_cells << " sweep rows to " << out << "/sweep.csv\n";
}

}  // namespace censurv
