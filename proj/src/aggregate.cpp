#include "cyclewarp/aggregate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cyclewarp/rng.hpp"

namespace cyclewarp {

AggregateResult aggregate(const std::vector<SegmentFit>& segments) {
  if (segments.empty())
    throw std::invalid_argument("aggregate: no segments");

  AggregateResult out;
  std::size_t total_rows = 0;
  for (const auto& seg : segments) total_rows += seg.signal.n_steps();
  out.rows.reserve(total_rows);
  out.segment_cycles.reserve(segments.size());

  double offset = 0.0;
  for (const auto& seg : segments) {
    const std::size_t n = seg.signal.n_steps();
    if (n == 0)
      throw std::invalid_argument("aggregate: segment " + std::to_string(seg.id) +
                                  " has no steps");
    if (seg.fit.path.g.size() != n + 1)
      throw std::invalid_argument("aggregate: segment " + std::to_string(seg.id) +
                                  " trajectory length mismatch");
    for (std::size_t i = 1; i <= n; ++i) {
      TimelineRow row;
      row.segment = seg.id;
      row.index = i;
      row.x = seg.signal.x[i];
      row.y = seg.signal.y[i];
      row.g = offset + seg.fit.path.g[i];
      out.rows.push_back(row);
    }
    offset += seg.fit.path.g[n];
    out.segment_cycles.push_back(seg.fit.path.g[n] / two_pi);
  }
  out.total_growth = offset;
  out.total_cycles = offset / two_pi;
  return out;
}

void date_observations(AggregateResult& agg, double death_year) {
  for (auto& row : agg.rows)
    row.year = death_year - (agg.total_growth - row.g) / two_pi;
  agg.dated = true;
  agg.death_year = death_year;
}

AgeCi age_ci(double point_age, const std::vector<std::vector<double>>& samples,
             double level, std::size_t max_combinations, std::uint64_t key) {
  if (samples.empty())
    throw std::invalid_argument("age_ci: no replicate pools");
  for (std::size_t j = 0; j < samples.size(); ++j)
    if (samples[j].empty())
      throw std::invalid_argument("age_ci: replicate pool " + std::to_string(j) +
                                  " is empty");
  if (max_combinations == 0)
    throw std::invalid_argument("age_ci: need at least one combination");

  const std::size_t nseg = samples.size();
  // product * size > max  <=>  product > floor(max / size); no overflow.
  std::size_t product = 1;
  bool exhaustive = true;
  for (const auto& pool : samples) {
    if (product > max_combinations / pool.size()) {
      exhaustive = false;
      break;
    }
    product *= pool.size();
  }

  std::vector<double> sums;
  if (exhaustive) {
    sums.reserve(product);
    std::vector<std::size_t> idx(nseg, 0);
    for (;;) {
      double s = 0.0;
      for (std::size_t j = 0; j < nseg; ++j) s += samples[j][idx[j]];
      sums.push_back(s);
      std::size_t j = 0;
      while (j < nseg && ++idx[j] == samples[j].size()) {
        idx[j] = 0;
        ++j;
      }
      if (j == nseg) break;
    }
  } else {
    sums.reserve(max_combinations);
    Rng rng(key, stream::combo, 0, 0);
    for (std::size_t k = 0; k < max_combinations; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < nseg; ++j) {
        std::size_t pick = static_cast<std::size_t>(
            rng.uniform() * static_cast<double>(samples[j].size()));
        if (pick >= samples[j].size()) pick = samples[j].size() - 1;
        s += samples[j][pick];
      }
      sums.push_back(s);
    }
  }

  const ConfidenceInterval ci = percentile_ci(std::move(sums), level);
  AgeCi out;
  out.age = point_age;
  out.lo = ci.lo;
  out.hi = ci.hi;
  out.level = level;
  out.n_combinations = exhaustive ? product : max_combinations;
  return out;
}

}  // namespace cyclewarp
