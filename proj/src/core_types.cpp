#include "censurv/core_types.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace censurv {

int status_to_code(CensoringStatus s) {
  switch (s) {
    case CensoringStatus::Uncensored: return 1;
    case CensoringStatus::RightCensored: return 0;
    case CensoringStatus::LeftCensored: return 2;
    case CensoringStatus::IntervalCensored: return 3;
  }
  return -1;
}

CensoringStatus status_from_code(int code) {
  switch (code) {
    case 1: return CensoringStatus::Uncensored;
    case 0: return CensoringStatus::RightCensored;
    case 2: return CensoringStatus::LeftCensored;
    case 3: return CensoringStatus::IntervalCensored;
  }
  throw ConfigError("unknown status code " + std::to_string(code));
}

void validate_observation_times(const Observation& obs, const TimeGrid& grid,
                                const std::string& context) {
  const int t = obs.time;
  auto fail = [&](const std::string& msg) { throw ConfigError(context + ": " + msg); };
  switch (obs.status) {
    case CensoringStatus::Uncensored:
      if (t < 1 || t > grid.t_max) fail("event time " + std::to_string(t) + " outside grid");
      if (obs.time2) fail("time2 set on a non-interval observation");
      break;
    case CensoringStatus::RightCensored:
      // An event time strictly after c must exist on the grid.
      if (t < 1 || t > grid.t_max - 1)
        fail("right-censoring time " + std::to_string(t) + " outside {1,...,t_max-1}");
      if (obs.time2) fail("time2 set on a non-interval observation");
      break;
    case CensoringStatus::LeftCensored:
      // An event time strictly before c must exist on the grid.
      if (t < 2 || t > grid.t_max)
        fail("left-censoring time " + std::to_string(t) + " outside {2,...,t_max}");
      if (obs.time2) fail("time2 set on a non-interval observation");
      break;
    case CensoringStatus::IntervalCensored: {
      if (!obs.time2) fail("interval observation missing time2");
      const int t2 = *obs.time2;
      if (t < 1) fail("interval lower bound " + std::to_string(t) + " below grid");
      if (t2 > grid.t_max) fail("interval upper bound " + std::to_string(t2) + " above grid");
      if (t2 - t < 2)
        fail("interval (" + std::to_string(t) + "," + std::to_string(t2) +
             ") admits no event time strictly between its bounds");
      break;
    }
  }
}

Dataset::Dataset(std::vector<Observation> obs, int dim, TimeGrid g)
    : observations(std::move(obs)), d(dim), grid(g) {
  if (d < 0) throw ConfigError("Dataset: negative covariate dimension");
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const Observation& o = observations[i];
    const std::string ctx = "observation " + std::to_string(i);
    if (static_cast<int>(o.covariates.size()) != d)
      throw ConfigError(ctx + ": covariate dimension " + std::to_string(o.covariates.size()) +
                        " != " + std::to_string(d));
    for (double x : o.covariates)
      if (!std::isfinite(x)) throw ConfigError(ctx + ": non-finite covariate");
    validate_observation_times(o, grid, ctx);
  }
}

std::vector<SampleLabel> Dataset::labels() const {
  std::vector<SampleLabel> out;
  out.reserve(observations.size());
  for (int i = 0; i < size(); ++i) out.push_back(label(i));
  return out;
}

std::vector<SampleLabel> Dataset::labels(const std::vector<int>& indices) const {
  std::vector<SampleLabel> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(label(i));
  return out;
}

IndexPartition partition_indices(const Dataset& ds) {
  IndexPartition p;
  for (int i = 0; i < ds.size(); ++i) {
    switch (ds.observations[static_cast<std::size_t>(i)].status) {
      case CensoringStatus::Uncensored: p.uncensored.push_back(i); break;
      case CensoringStatus::RightCensored: p.right.push_back(i); break;
      case CensoringStatus::LeftCensored: p.left.push_back(i); break;
      case CensoringStatus::IntervalCensored: p.interval.push_back(i); break;
    }
  }
  return p;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

int parse_int(const std::string& s, const std::string& ctx) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw IoError(ctx + ": not an integer: '" + s + "'");
  return v;
}

double parse_double(const std::string& s, const std::string& ctx) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw IoError(ctx + ": not a number: '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

Dataset read_dataset(const std::string& path, const TimeGrid& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "status" || header[1] != "time" || header[2] != "time2")
    throw IoError(path + ": header must start with status,time,time2");
  const int d = static_cast<int>(header.size()) - 3;
  for (int j = 0; j < d; ++j)
    if (header[static_cast<std::size_t>(3 + j)] != "x" + std::to_string(j + 1))
      throw IoError(path + ": covariate column " + std::to_string(j + 1) + " must be named x" +
                    std::to_string(j + 1));

  std::vector<Observation> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx = path + " line " + std::to_string(lineno);
    const std::vector<std::string> f = split_csv_line(line);
    if (static_cast<int>(f.size()) != 3 + d)
      throw IoError(ctx + ": expected " + std::to_string(3 + d) + " fields, got " +
                    std::to_string(f.size()));

    Observation obs;
    try {
      obs.status = status_from_code(parse_int(f[0], ctx));
    } catch (const ConfigError& e) {
      throw IoError(ctx + ": " + e.what());
    }
    obs.time = parse_int(f[1], ctx);
    if (obs.status == CensoringStatus::IntervalCensored) {
      if (f[2].empty()) throw IoError(ctx + ": interval row missing time2");
      obs.time2 = parse_int(f[2], ctx);
    } else if (!f[2].empty()) {
      throw IoError(ctx + ": time2 must be empty unless status=3");
    }
    obs.covariates.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const double x = parse_double(f[static_cast<std::size_t>(3 + j)], ctx);
      if (!std::isfinite(x)) throw IoError(ctx + ": non-finite covariate");
      obs.covariates.push_back(x);
    }
    try {
      validate_observation_times(obs, grid, ctx);
    } catch (const ConfigError& e) {
      throw IoError(e.what());
    }
    rows.push_back(std::move(obs));
  }
  return Dataset(std::move(rows), d, grid);
}

void write_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset file: " + path);
  out << "status,time,time2";
  for (int j = 1; j <= ds.d; ++j) out << ",x" << j;
  out << "\n";
  for (const Observation& o : ds.observations) {
    out << status_to_code(o.status) << ',' << o.time << ',';
    if (o.time2) out << *o.time2;
    for (double x : o.covariates) out << ',' << format_double(x);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace censurv
