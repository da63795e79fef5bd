#include "censurv/models.hpp"

#include <cmath>
#include <fstream>

#include "censurv/errors.hpp"
#include "censurv/rng.hpp"
#include "json.hpp"

namespace censurv {

namespace {
constexpr double kLeakySlope = 0.01;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Keeps mu strictly inside (1, t_max) even when the sigmoid saturates to
// exactly 0 or 1 in floating point.
double clamped_sigmoid(double z) {
  return std::min(std::max(sigmoid(z), 1e-12), 1.0 - 1e-12);
}
}  // namespace

void PredictorConfig::validate() const {
  if (d < 1) throw ConfigError("predictor: input dimension must be >= 1");
  if (t_max < 2) throw ConfigError("predictor: t_max must be >= 2");
  if (arch == Architecture::Mlp && hidden < 1)
    throw ConfigError("predictor: MLP needs a positive hidden width");
  if (arch == Architecture::Linear && hidden != 0)
    throw ConfigError("predictor: linear architecture takes no hidden width");
}

int PredictorConfig::param_count() const {
  const int out = head_dim();
  if (arch == Architecture::Linear) return out * d + out;
  return hidden * d + hidden + out * hidden + out;
}

// Parameter layout: [W1 (hidden x d, row-major), b1, W2 (out x hidden), b2]
// for the MLP; [W (out x d), b] for the linear map.

Vec forward(const PredictorConfig& cfg, const ParameterVector& params, std::span<const double> x) {
  cfg.validate();
  if (static_cast<int>(x.size()) != cfg.d) throw ConfigError("forward: covariate dimension mismatch");
  if (static_cast<int>(params.size()) != cfg.param_count())
    throw ConfigError("forward: parameter vector length mismatch");

  const int out_dim = cfg.head_dim();
  Vec raw(static_cast<std::size_t>(out_dim), 0.0);

  if (cfg.arch == Architecture::Linear) {
    const double* w = params.data();
    const double* b = params.data() + static_cast<std::size_t>(out_dim) * cfg.d;
    for (int j = 0; j < out_dim; ++j) {
      double acc = b[j];
      for (int k = 0; k < cfg.d; ++k) acc += w[j * cfg.d + k] * x[static_cast<std::size_t>(k)];
      raw[static_cast<std::size_t>(j)] = acc;
    }
  } else {
    const int h = cfg.hidden;
    const double* w1 = params.data();
    const double* b1 = w1 + static_cast<std::size_t>(h) * cfg.d;
    const double* w2 = b1 + h;
    const double* b2 = w2 + static_cast<std::size_t>(out_dim) * h;
    Vec hid(static_cast<std::size_t>(h));
    for (int i = 0; i < h; ++i) {
      double acc = b1[i];
      for (int k = 0; k < cfg.d; ++k) acc += w1[i * cfg.d + k] * x[static_cast<std::size_t>(k)];
      hid[static_cast<std::size_t>(i)] = acc > 0.0 ? acc : kLeakySlope * acc;
    }
    for (int j = 0; j < out_dim; ++j) {
      double acc = b2[j];
      for (int i = 0; i < h; ++i) acc += w2[j * h + i] * hid[static_cast<std::size_t>(i)];
      raw[static_cast<std::size_t>(j)] = acc;
    }
  }

  if (cfg.head == HeadKind::Mu)
    raw[0] = 1.0 + (static_cast<double>(cfg.t_max) - 1.0) * clamped_sigmoid(raw[0]);
  return raw;
}

void backward(const PredictorConfig& cfg, const ParameterVector& params, std::span<const double> x,
              std::span<const double> upstream, ParameterVector& grad_accum) {
  cfg.validate();
  const int out_dim = cfg.head_dim();
  if (static_cast<int>(upstream.size()) != out_dim)
    throw ConfigError("backward: upstream gradient dimension mismatch");
  if (grad_accum.size() != params.size())
    throw ConfigError("backward: gradient accumulator length mismatch");

  // Recompute the pre-head affine output (forward is cheap at this scale).
  const int h = cfg.arch == Architecture::Mlp ? cfg.hidden : 0;
  Vec hid_pre, hid;
  Vec raw(static_cast<std::size_t>(out_dim), 0.0);
  if (cfg.arch == Architecture::Linear) {
    const double* w = params.data();
    const double* b = params.data() + static_cast<std::size_t>(out_dim) * cfg.d;
    for (int j = 0; j < out_dim; ++j) {
      double acc = b[j];
      for (int k = 0; k < cfg.d; ++k) acc += w[j * cfg.d + k] * x[static_cast<std::size_t>(k)];
      raw[static_cast<std::size_t>(j)] = acc;
    }
  } else {
    const double* w1 = params.data();
    const double* b1 = w1 + static_cast<std::size_t>(h) * cfg.d;
    const double* w2 = b1 + h;
    const double* b2 = w2 + static_cast<std::size_t>(out_dim) * h;
    hid_pre.resize(static_cast<std::size_t>(h));
    hid.resize(static_cast<std::size_t>(h));
    for (int i = 0; i < h; ++i) {
      double acc = b1[i];
      for (int k = 0; k < cfg.d; ++k) acc += w1[i * cfg.d + k] * x[static_cast<std::size_t>(k)];
      hid_pre[static_cast<std::size_t>(i)] = acc;
      hid[static_cast<std::size_t>(i)] = acc > 0.0 ? acc : kLeakySlope * acc;
    }
    for (int j = 0; j < out_dim; ++j) {
      double acc = b2[j];
      for (int i = 0; i < h; ++i) acc += w2[j * h + i] * hid[static_cast<std::size_t>(i)];
      raw[static_cast<std::size_t>(j)] = acc;
    }
  }

  // Head chain: for Mu, d mu / d raw = (t_max - 1) sig (1 - sig).
  Vec u(upstream.begin(), upstream.end());
  if (cfg.head == HeadKind::Mu) {
    const double sg = sigmoid(raw[0]);
    u[0] *= (static_cast<double>(cfg.t_max) - 1.0) * sg * (1.0 - sg);
  }

  if (cfg.arch == Architecture::Linear) {
    double* gw = grad_accum.data();
    double* gb = grad_accum.data() + static_cast<std::size_t>(out_dim) * cfg.d;
    for (int j = 0; j < out_dim; ++j) {
      for (int k = 0; k < cfg.d; ++k)
        gw[j * cfg.d + k] += u[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(k)];
      gb[j] += u[static_cast<std::size_t>(j)];
    }
  } else {
    const double* w2 = params.data() + static_cast<std::size_t>(h) * cfg.d + h;
    double* gw1 = grad_accum.data();
    double* gb1 = gw1 + static_cast<std::size_t>(h) * cfg.d;
    double* gw2 = gb1 + h;
    double* gb2 = gw2 + static_cast<std::size_t>(out_dim) * h;
    Vec uh(static_cast<std::size_t>(h), 0.0);
    for (int j = 0; j < out_dim; ++j) {
      for (int i = 0; i < h; ++i) {
        gw2[j * h + i] += u[static_cast<std::size_t>(j)] * hid[static_cast<std::size_t>(i)];
        uh[static_cast<std::size_t>(i)] += w2[j * h + i] * u[static_cast<std::size_t>(j)];
      }
      gb2[j] += u[static_cast<std::size_t>(j)];
    }
    for (int i = 0; i < h; ++i) {
      const double du = uh[static_cast<std::size_t>(i)] *
                        (hid_pre[static_cast<std::size_t>(i)] > 0.0 ? 1.0 : kLeakySlope);
      for (int k = 0; k < cfg.d; ++k) gw1[i * cfg.d + k] += du * x[static_cast<std::size_t>(k)];
      gb1[i] += du;
    }
  }
}

ParameterVector init_params(const PredictorConfig& cfg) {
  cfg.validate();
  ParameterVector params(static_cast<std::size_t>(cfg.param_count()), 0.0);
  Rng rng(cfg.seed);
  auto fill_uniform = [&](double* w, int count, int fan_in) {
    const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
    for (int i = 0; i < count; ++i) w[i] = (2.0 * rng.u01() - 1.0) * bound;
  };
  const int out_dim = cfg.head_dim();
  if (cfg.arch == Architecture::Linear) {
    fill_uniform(params.data(), out_dim * cfg.d, cfg.d);
  } else {
    const int h = cfg.hidden;
    fill_uniform(params.data(), h * cfg.d, cfg.d);
    fill_uniform(params.data() + static_cast<std::size_t>(h) * cfg.d + h, out_dim * h, h);
  }
  return params;
}

std::string architecture_name(Architecture a) {
  return a == Architecture::Linear ? "linear" : "mlp";
}

Architecture architecture_from_name(const std::string& name) {
  if (name == "linear") return Architecture::Linear;
  if (name == "mlp") return Architecture::Mlp;
  throw ConfigError("unknown architecture: " + name);
}

std::string head_name(HeadKind h) {
  switch (h) {
    case HeadKind::Mu: return "mu";
    case HeadKind::Logits: return "logits";
    case HeadKind::Risk: return "risk";
  }
  return "";
}

HeadKind head_from_name(const std::string& name) {
  if (name == "mu") return HeadKind::Mu;
  if (name == "logits") return HeadKind::Logits;
  if (name == "risk") return HeadKind::Risk;
  throw ConfigError("unknown head: " + name);
}

void save_checkpoint(const std::string& path, const PredictorConfig& cfg,
                     const ParameterVector& params) {
  if (static_cast<int>(params.size()) != cfg.param_count())
    throw ConfigError("checkpoint: parameter vector length mismatch");
  nlohmann::json header;
  header["architecture"] = architecture_name(cfg.arch);
  header["hidden"] = cfg.hidden;
  header["head"] = head_name(cfg.head);
  header["d"] = cfg.d;
  header["t_max"] = cfg.t_max;
  header["seed"] = cfg.seed;
  header["n_params"] = params.size();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << header.dump() << "\n";
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) throw IoError("checkpoint write failed: " + path);
}

std::pair<PredictorConfig, ParameterVector> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw IoError(path + ": missing checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": bad checkpoint header: " + e.what());
  }
  PredictorConfig cfg;
  try {
    cfg.arch = architecture_from_name(header.at("architecture").get<std::string>());
    cfg.hidden = header.at("hidden").get<int>();
    cfg.head = head_from_name(header.at("head").get<std::string>());
    cfg.d = header.at("d").get<int>();
    cfg.t_max = header.at("t_max").get<int>();
    cfg.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": bad checkpoint header: " + e.what());
  }
  cfg.validate();
  const std::size_t n = header.at("n_params").get<std::size_t>();
  if (static_cast<int>(n) != cfg.param_count())
    throw IoError(path + ": parameter count does not match config");
  ParameterVector params(n);
  in.read(reinterpret_cast<char*>(params.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double)))
    throw IoError(path + ": truncated checkpoint");
  return {cfg, std::move(params)};
}

}  // namespace censurv
