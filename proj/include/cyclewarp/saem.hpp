#pragma once
// Stochastic approximation EM for the time-warped signal model.
//
// Each iteration alternates:
//   E step   — draw one latent growth trajectory by the grid-refined phase
//              search (the winning phase candidate also becomes the next b),
//   S step   — evaluate martingale-style sufficient statistics on the drawn
//              trajectory and blend them into the running averages with a
//              decreasing step size,
//   M step   — map the running averages to new parameter values, with
//              guard rails (screens and clamps) that keep every update
//              inside the model's admissible region.
//
// The schedule is flat (step size 1, full-width phase window) for the first
// m0 burn-in iterations and then decays polynomially, which is what turns
// the simulated-statistics recursion into a convergent approximation.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyclewarp/model.hpp"
#include "cyclewarp/smc.hpp"

namespace cyclewarp {

/// Relative difference used by stopping rules and replicate diagnostics:
/// 0 when the values are identical (including inf == inf), otherwise
/// |x - y| / max(|x|, 1e-300).
double rel_diff(double x, double y) noexcept;

struct SAEMConfig {
  std::size_t m0 = 50;            ///< burn-in iterations with step size 1
  std::size_t max_iter = 400;
  double stop_threshold = 1e-4;   ///< non-finite value => stop after one iteration
  std::size_t stop_consecutive = 3;
  std::size_t n_particles = 1500;
  std::size_t grid_size = 20;     ///< phase candidates per iteration
  double a_clamp_lo = 0.5;        ///< accept a-updates only inside
  double a_clamp_hi = 2.0;        ///<   (a_clamp_lo * a0, a_clamp_hi * a0)
  std::size_t max_failures = 3;   ///< consecutive failed iterations tolerated
  Quadrature rule = Quadrature::trapezoid;
  int threads = 1;

  void validate() const;
};

/// Sufficient statistics of one drawn trajectory, with per-component
/// validity flags (a component can be unusable on a given draw, e.g. the
/// diffusion statistic when the autocorrelation estimate leaves (0, 1)).
struct MartingaleStats {
  double s1 = 0.0;  ///< lag-one autocorrelation estimate -> rho
  double s2 = 0.0;  ///< stationary mean estimate         -> a
  double s3 = 0.0;  ///< diffusion coefficient estimate   -> omega2
  double s4 = 0.0;  ///< mean squared residual            -> sigma2
  bool s1_valid = false;
  bool s2_valid = false;
  bool s3_valid = false;
  bool s4_valid = false;
};

/// Evaluate the statistics on one trajectory.  Pairs whose starting rate is
/// nonpositive are dropped (the estimators divide by it) and the pair count
/// adjusts accordingly.  Throws DegeneratePath when no usable pair remains
/// or the design is numerically singular (constant trajectory).
MartingaleStats statistics(const Signal& s, const GrowthPath& path, double A,
                           double B, double b);

/// Step size at iteration m (1-based): 1 during burn-in, then
/// (m - m0)^{-0.8}.
double sa_alpha(std::size_t m, std::size_t m0);

/// Blend one draw's statistics into the running averages:
/// s <- s + alpha (S - s) componentwise, skipping invalid components.  A
/// component's first valid draw is assigned directly regardless of alpha.
void sa_update(MartingaleStats& smoothed, const MartingaleStats& raw, double alpha);

/// Least-squares update of the first-harmonic amplitude on the drawn
/// trajectory, clamped to [0.5, 1] (so B = 1 - A stays in [0, 0.5]).
/// Throws DegeneratePath when the regression design is degenerate.
double update_A(const Signal& s, const GrowthPath& path, double b);

/// Map the running statistic averages to parameters, in place.  Each
/// component keeps its previous value when its statistic is missing or
/// falls outside the admissible screen: rho (hence beta) needs s1 in (0,1),
/// a needs s2 strictly inside the clamp interval around a0, omega2 needs a
/// positive s3, sigma2 a positive s4.
void update_theta(ModelParams& theta, const MartingaleStats& smoothed, double a0,
                  double delta, const SAEMConfig& cfg);

/// One row of the iteration trace.
struct TraceRow {
  std::size_t iter = 0;
  double A = 0.0, B = 0.0, b = 0.0, a = 0.0, beta = 0.0, rho = 0.0;
  double omega2 = 0.0, sigma2 = 0.0;
  double loglik = 0.0;   ///< joint log likelihood of the drawn trajectory
  double ess_min = 0.0;  ///< worst effective sample size in the winning filter
  double alpha = 0.0;    ///< step size used
  double w = 0.0;        ///< phase window half-width used
  double rel_change = 0.0;
  std::size_t converged_streak = 0;
};

/// Thrown when the fit cannot continue (too many consecutive failed
/// iterations, or no iteration ever succeeded).  Carries the trace
/// accumulated so far.
class FitFailure : public std::runtime_error {
 public:
  FitFailure(const std::string& what, std::vector<TraceRow> trace_in)
      : std::runtime_error(what), trace(std::move(trace_in)) {}
  std::vector<TraceRow> trace;
};

struct FitResult {
  ModelParams theta;          ///< final parameter estimates
  GrowthPath path;            ///< last successfully drawn trajectory
  std::vector<double> fitted; ///< model mean at each sample under theta/path
  std::vector<TraceRow> trace;
  double cycles = 0.0;        ///< g_n / (2 pi) of the final trajectory
  bool converged = false;
  std::size_t iterations = 0; ///< iterations actually executed
  double a0 = 0.0;            ///< clamp anchor used for the a-updates
};

/// Run the fit from a starting point.  `a0` anchors the admissible interval
/// for the stationary-mean updates (normally theta0.a).  Stops early once
/// the largest relative parameter change stays below stop_threshold for
/// stop_consecutive consecutive iterations.  Throws FitFailure after
/// max_failures consecutive failed iterations.
FitResult fit(const Signal& s, const ModelParams& theta0, double a0,
              const SAEMConfig& cfg, std::uint64_t key);

}  // namespace cyclewarp
