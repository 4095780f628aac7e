#pragma once
// Cross-segment aggregation: chain per-segment growth estimates into one
// record-long timeline, count total cycles, assign calendar years, and
// propagate replicate uncertainty into an age interval.
//
// Each segment's trajectory starts at zero accumulated growth, so its
// interior samples i = 1..n_j contribute to the global timeline while the
// i = 0 anchor is dropped (it duplicates the previous segment's endpoint in
// the chained coordinate).  Global accumulated growth is the running sum of
// segment endpoints plus the within-segment value.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cyclewarp/bootstrap.hpp"
#include "cyclewarp/model.hpp"
#include "cyclewarp/saem.hpp"

namespace cyclewarp {

/// One fitted segment, in record order (oldest first).
struct SegmentFit {
  std::int64_t id = 0;  ///< segment label carried through to the timeline
  Signal signal;
  FitResult fit;
};

struct TimelineRow {
  std::int64_t segment = 0;
  std::size_t index = 0;  ///< within-segment sample index, 1..n_j
  double x = 0.0;         ///< within-segment coordinate
  double y = 0.0;         ///< observation (preprocessed scale)
  double g = 0.0;         ///< global accumulated growth
  double year = 0.0;      ///< calendar year once dated
};

struct AggregateResult {
  double total_growth = 0.0;  ///< accumulated growth over the whole record
  double total_cycles = 0.0;  ///< total_growth / (2 pi)
  std::vector<double> segment_cycles;
  std::vector<TimelineRow> rows;
  bool dated = false;
  double death_year = 0.0;
};

/// Chain segments into a global timeline (years not yet assigned).
AggregateResult aggregate(const std::vector<SegmentFit>& segments);

/// Assign calendar years: the record ends at death_year, and each sample
/// sits (total cycles laid down after it) years earlier.
void date_observations(AggregateResult& agg, double death_year);

struct AgeCi {
  double age = 0.0;  ///< point estimate (sum of per-segment cycle estimates)
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.0;
  std::size_t n_combinations = 0;  ///< combinations actually evaluated
};

/// Percentile interval for the total age from per-segment replicate cycle
/// pools: sums over one draw per segment, enumerated exhaustively when the
/// number of combinations is at most max_combinations and sampled uniformly
/// otherwise.
AgeCi age_ci(double point_age, const std::vector<std::vector<double>>& samples,
             double level, std::size_t max_combinations, std::uint64_t key);

}  // namespace cyclewarp
