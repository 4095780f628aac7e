#pragma once
// The latent growth-rate diffusion and its exact transition law.
//
// d(xi_x) = -beta (xi_x - a) dx + omega sqrt(xi_x) dW_x,   xi >= 0.
//
// Over a step of length delta the exact transition is a scaled noncentral
// chi-square:
//     xi_{x+delta} | xi_x  ~  Z / (2c),    Z ~ chi'^2_nu(lambda),
//     nu = 4 a beta / omega2,   c = 2 beta / ((1 - rho) omega2),
//     lambda = 2 c rho xi_x,    rho = exp(-beta delta).
// The stationary law is Gamma(shape 2 a beta / omega2, scale omega2 / (2 beta)),
// which has mean a and variance a * omega2 / (2 beta); it exists as a proper
// positive-density law only under 2 a beta >= omega2.

#include <cstddef>
#include <cstdint>

#include "cyclewarp/model.hpp"
#include "cyclewarp/rng.hpp"

namespace cyclewarp {

struct TransitionLaw {
  double nu = 0.0;   ///< degrees of freedom, 4 a beta / omega2
  double c = 0.0;    ///< scale factor, 2 beta / ((1 - rho) omega2)
  double rho = 0.0;  ///< exp(-beta delta), in (0, 1)
  double delta = 0.0;
  double a = 0.0, beta = 0.0, omega2 = 0.0;

  /// Build from process parameters; throws std::invalid_argument unless
  /// a, beta, omega2, delta > 0 (nu < 2 is allowed: the transition law is
  /// proper even when the stationary-regime condition fails).
  TransitionLaw(const ModelParams& p, double delta_in);
  TransitionLaw(double a_in, double beta_in, double omega2_in, double delta_in);

  double noncentrality(double xi_prev) const noexcept { return 2.0 * c * rho * xi_prev; }
  /// Conditional mean rho * xi_prev + a * (1 - rho).
  double mean(double xi_prev) const noexcept;
  /// Conditional variance (2 nu + 4 lambda) / (4 c^2).
  double variance(double xi_prev) const noexcept;
};

/// Exact draw from the transition law: K ~ Poisson(lambda / 2), then a
/// central chi-square with nu + 2K degrees of freedom, scaled by 1 / (2c).
double transition_sample(const TransitionLaw& law, double xi_prev, Rng& rng) noexcept;

/// Log transition density p(xi_next | xi_prev).  Evaluated through the
/// Poisson-weighted chi-square series around its dominant term, truncated
/// 40 natural-log units below the running maximum; for noncentrality above
/// 1e4 a Gaussian approximation with the exact mean and variance is used.
/// Returns -infinity for xi_next <= 0.
double transition_log_density(const TransitionLaw& law, double xi_prev,
                              double xi_next) noexcept;

struct StationaryMoments {
  double mean = 0.0;
  double variance = 0.0;
  double shape = 0.0;
  double scale = 0.0;
};

/// Moments and Gamma parameters of the stationary law.  Throws
/// std::invalid_argument when parameters are invalid or the
/// stationary-regime condition 2 a beta >= omega2 fails.
StationaryMoments stationary_moments(const ModelParams& p);

/// Simulate the diffusion by Euler-Maruyama on a grid of `substeps` points
/// per observation step (default spacing delta / 100), accumulating growth
/// by the right-endpoint rectangle rule on the fine grid.  Negative
/// excursions are truncated to zero immediately (full truncation), so
/// parameter sets violating the stationary-regime condition remain
/// simulable.  Returns the trajectory subsampled to the observation grid.
GrowthPath simulate_path(const ModelParams& p, std::size_t n, double delta,
                         std::size_t substeps, double xi0, std::uint64_t key);

/// Simulated record: latent truth plus the noisy observations.
struct SimulatedSignal {
  Signal signal;
  GrowthPath path;
  ModelParams params;
};

/// Draw observations y_i = f(x_i) + sigma * Z_i over a simulated trajectory.
SimulatedSignal simulate_signal(const ModelParams& p, std::size_t n, double delta,
                                std::size_t substeps, double xi0, std::uint64_t key);

/// Parameter boxes for the simulation protocol.  The growth level box is
/// expressed through cycle-count bounds: a in (2 pi c_min / (n delta),
/// 2 pi c_max / (n delta)) with c_max = max(6, 0.05 n) by default; note the
/// diffusion coefficient is drawn on the omega scale (not omega^2).
struct SimBoxes {
  double c_min = 2.0;
  double c_max = 0.0;  ///< 0 means "use max(6, 0.05 * n)"
  double beta_lo = 0.01, beta_hi = 3.0;
  double omega_lo = 0.01, omega_hi = 0.3;
  double sigma_lo = 0.2, sigma_hi = 0.6;
  double A_lo = 0.5, A_hi = 1.0;
  std::size_t max_rejects = 100000;
};

/// Draw a parameter set from the boxes, rejecting until 2 a beta > omega^2.
/// Throws std::runtime_error after max_rejects consecutive rejections.
ModelParams draw_sim_params(const SimBoxes& boxes, std::size_t n, double delta,
                            Rng& rng);

}  // namespace cyclewarp
