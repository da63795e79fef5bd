#pragma once

#include <optional>
#include <string>
#include <vector>

#include "censurv/errors.hpp"

namespace censurv {

using Vec = std::vector<double>;

// Discrete month grid {1, ..., t_max} shared by every distribution and loss.
// t_max >= 2: a conditional censoring distribution needs a nonempty support.
struct TimeGrid {
  int t_max;

  explicit TimeGrid(int t_max_months) : t_max(t_max_months) {
    if (t_max < 2) throw ConfigError("TimeGrid: t_max must be >= 2, got " + std::to_string(t_max));
  }
  bool contains(int t) const { return t >= 1 && t <= t_max; }
};

enum class CensoringStatus { Uncensored, RightCensored, LeftCensored, IntervalCensored };

// CSV status column encoding: 1/0/2/3 = Uncensored/Right/Left/Interval.
int status_to_code(CensoringStatus s);
CensoringStatus status_from_code(int code);

// One sample: covariates plus censoring status and observed time(s).
// time is t (uncensored), c (right/left) or c1 (interval); time2 is c2.
struct Observation {
  Vec covariates;
  CensoringStatus status = CensoringStatus::Uncensored;
  int time = 1;
  std::optional<int> time2;
};

// Label part of an observation; what losses and metrics consume.
struct SampleLabel {
  CensoringStatus status;
  int time;
  int time2;  // meaningful only for IntervalCensored
};

// Validates the per-status time bounds. Throws ConfigError with `context`
// prepended on violation.
void validate_observation_times(const Observation& obs, const TimeGrid& grid,
                                const std::string& context);

// Immutable after construction; safe for any number of concurrent readers.
struct Dataset {
  std::vector<Observation> observations;
  int d = 0;
  TimeGrid grid;

  Dataset(std::vector<Observation> obs, int dim, TimeGrid g);

  int size() const { return static_cast<int>(observations.size()); }
  SampleLabel label(int i) const {
    const Observation& o = observations[static_cast<std::size_t>(i)];
    return SampleLabel{o.status, o.time, o.time2.value_or(0)};
  }
  std::vector<SampleLabel> labels() const;
  // Labels for a subset of rows, in the order given.
  std::vector<SampleLabel> labels(const std::vector<int>& indices) const;
};

struct IndexPartition {
  std::vector<int> uncensored;
  std::vector<int> right;
  std::vector<int> left;
  std::vector<int> interval;
};

// Four disjoint index sets whose union is {0, ..., N-1}, in row order.
IndexPartition partition_indices(const Dataset& ds);

// Dataset CSV: header `status,time,time2,x1,...,xd`; time2 empty unless
// status=3; UTF-8, LF line endings, '.' decimal separator. Floats use the
// shortest round-trip representation, so write(read(p)) is byte-identical
// for canonical files.
Dataset read_dataset(const std::string& path, const TimeGrid& grid);
void write_dataset(const std::string& path, const Dataset& ds);

// Shortest round-trip decimal formatting shared by every CSV writer.
std::string format_double(double v);

}  // namespace censurv
