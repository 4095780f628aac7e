#pragma once
// Residual bootstrap for the fitted model, percentile confidence intervals,
// and residual diagnostics.
//
// Each replicate resamples the fit residuals with replacement, adds them
// back onto the fitted curve, and refits the synthetic record from scratch
// (or from the base estimate when warm starts are requested).  Replicates
// that finish carry their own convergence flag; only hard failures are
// excluded from the estimate table, and more than half of them failing
// aborts the whole run.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cyclewarp/init.hpp"
#include "cyclewarp/model.hpp"
#include "cyclewarp/saem.hpp"

namespace cyclewarp {

/// Quantile of a sorted sample by linear interpolation of order statistics
/// (the convention with h = (N - 1) p).  `sorted` must be nonempty and
/// ascending; p in [0, 1].
double quantile_type7(const std::vector<double>& sorted, double p);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.0;
};

/// Equal-tailed percentile interval of `values` at the given level.
/// Throws std::invalid_argument unless 0 < level < 1 and values is
/// nonempty.  The input is copied and sorted internally.
ConfidenceInterval percentile_ci(std::vector<double> values, double level);

/// Standard normal quantile function, accurate to full double precision
/// (rational initial guess plus one Halley refinement).  Throws
/// std::invalid_argument unless 0 < p < 1.
double normal_quantile(double p);

struct BootstrapConfig {
  std::size_t replicates = 200;
  bool warm_start = false;  ///< start each replicate from the base estimate
  double ci_level = 0.95;
  InitConfig init;          ///< used when warm_start is false
  SAEMConfig saem;

  void validate() const;
};

struct ReplicateEstimate {
  std::size_t replicate = 0;
  std::uint64_t key = 0;  ///< generator key the replicate ran under
  bool converged = false;
  ModelParams theta;
  double cycles = 0.0;
};

struct ReplicateFailure {
  std::size_t replicate = 0;
  std::uint64_t key = 0;
  std::string error;
};

struct BootstrapResult {
  std::vector<ReplicateEstimate> estimates;
  std::vector<ReplicateFailure> failures;
};

/// Run the residual bootstrap around a completed fit of `s`.  Throws
/// std::runtime_error when more than half the replicates fail outright.
BootstrapResult residual_bootstrap(const Signal& s, const FitResult& base,
                                   const BootstrapConfig& cfg, std::uint64_t key);

/// Pull one scalar per replicate estimate (parameter or cycle count).
std::vector<double> collect_cycles(const BootstrapResult& r);

/// One residual-diagnostics row.  `residual` is in observation order;
/// the QQ columns pair the k-th standardized order statistic with the
/// normal quantile at (k + 1/2) / N, so they are in sorted order.
struct DiagnosticsRow {
  std::size_t index = 0;
  double x = 0.0;
  double residual = 0.0;
  double qq_theoretical = 0.0;
  double qq_empirical = 0.0;
};

std::vector<DiagnosticsRow> diagnostics(const Signal& s, const FitResult& fit);

/// Per-replicate relative deviations from the base estimate; the phase
/// column is the arc distance divided by pi, all others use rel_diff.
struct RelDiffRow {
  std::size_t replicate = 0;
  double A = 0.0, B = 0.0, b = 0.0, a = 0.0, beta = 0.0, rho = 0.0;
  double omega2 = 0.0, sigma2 = 0.0, cycles = 0.0;
};

std::vector<RelDiffRow> replicate_rel_diffs(const BootstrapResult& r,
                                            const ModelParams& base_theta,
                                            double base_cycles);

}  // namespace cyclewarp
