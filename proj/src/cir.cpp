#include "cyclewarp/cir.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cyclewarp {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();
// Series terms more than 40 natural-log units below the running maximum are
// dropped; e^-40 ~ 4e-18 is below double rounding at the peak.
constexpr double series_log_cutoff = 40.0;
// Above this noncentrality the Poisson-mixture series is replaced by a
// Gaussian with the exact conditional mean and variance.
constexpr double gaussian_switch_lambda = 1e4;

/// log pdf of a central chi-square with m > 0 degrees of freedom at z > 0.
inline double chi2_log_pdf(double z, double m) noexcept {
  const double h = 0.5 * m;
  return (h - 1.0) * std::log(z) - 0.5 * z - h * std::log(2.0) - std::lgamma(h);
}

}  // namespace

TransitionLaw::TransitionLaw(double a_in, double beta_in, double omega2_in,
                             double delta_in)
    : delta(delta_in), a(a_in), beta(beta_in), omega2(omega2_in) {
  if (!(a > 0.0) || !(beta > 0.0) || !(omega2 > 0.0) || !(delta > 0.0))
    throw std::invalid_argument(
        "TransitionLaw: a, beta, omega2 and delta must be positive");
  rho = std::exp(-beta * delta);
  nu = 4.0 * a * beta / omega2;
  c = 2.0 * beta / ((1.0 - rho) * omega2);
  if (!(nu > 0.0) || !(c > 0.0) || !(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("TransitionLaw: degenerate law (check parameters)");
}

TransitionLaw::TransitionLaw(const ModelParams& p, double delta_in)
    : TransitionLaw(p.a, p.beta, p.omega2, delta_in) {}

double TransitionLaw::mean(double xi_prev) const noexcept {
  return rho * xi_prev + a * (1.0 - rho);
}

double TransitionLaw::variance(double xi_prev) const noexcept {
  const double lambda = noncentrality(xi_prev);
  return (2.0 * nu + 4.0 * lambda) / (4.0 * c * c);
}

double transition_sample(const TransitionLaw& law, double xi_prev, Rng& rng) noexcept {
  // chi'^2_nu(lambda) is a Poisson(lambda/2) mixture of central chi-squares
  // with nu + 2K degrees of freedom, and chi^2_m = Gamma(m/2, scale 2), so
  // Z/(2c) = Gamma(nu/2 + K, scale 1) / c.  Exact for every nu > 0,
  // including nu < 2 where a Bessel-based sampler would be delicate.
  double shape = 0.5 * law.nu;
  if (xi_prev > 0.0) {
    const double half_lambda = law.c * law.rho * xi_prev;
    shape += static_cast<double>(rng.poisson(half_lambda));
  }
  return rng.gamma(shape) / law.c;
}

double transition_log_density(const TransitionLaw& law, double xi_prev,
                              double xi_next) noexcept {
  if (!(xi_next > 0.0)) return neg_inf;
  const double z = 2.0 * law.c * xi_next;
  const double log_jacobian = std::log(2.0 * law.c);
  const double lambda = xi_prev > 0.0 ? law.noncentrality(xi_prev) : 0.0;

  if (lambda == 0.0) return log_jacobian + chi2_log_pdf(z, law.nu);

  if (lambda > gaussian_switch_lambda) {
    // Gaussian limit with matched mean and variance, on the xi scale.
    const double m = law.mean(xi_prev);
    const double v = law.variance(xi_prev);
    const double r = xi_next - m;
    return -0.5 * r * r / v - 0.5 * std::log(two_pi * v);
  }

  // Poisson-weighted series sum_k e^{-l/2} (l/2)^k / k! * f_{nu+2k}(z),
  // expanded around its dominant index k*.  Successive terms obey
  //   t_{k+1} / t_k = (lambda/2) / (k+1) * z / (nu + 2k),
  // so the sum is accumulated in linear space relative to the peak term.
  const double hl = 0.5 * lambda;
  const double kstar_real =
      0.5 * (-0.5 * law.nu + std::sqrt(0.25 * law.nu * law.nu + hl * z));
  const double kstar = std::max(0.0, std::floor(kstar_real));
  const double log_peak = -hl + kstar * std::log(hl) - std::lgamma(kstar + 1.0) +
                          chi2_log_pdf(z, law.nu + 2.0 * kstar);
  const double rel_cutoff = std::exp(-series_log_cutoff);

  double sum = 1.0;
  double term = 1.0;
  for (double k = kstar; term > rel_cutoff;) {
    term *= hl / (k + 1.0) * (z / (law.nu + 2.0 * k));
    sum += term;
    k += 1.0;
  }
  term = 1.0;
  for (double k = kstar; k >= 1.0 && term > rel_cutoff;) {
    term *= k / hl * ((law.nu + 2.0 * (k - 1.0)) / z);
    sum += term;
    k -= 1.0;
  }
  return log_jacobian + log_peak + std::log(sum);
}

StationaryMoments stationary_moments(const ModelParams& p) {
  if (!(p.a > 0.0) || !(p.beta > 0.0) || !(p.omega2 > 0.0))
    throw std::invalid_argument(
        "stationary_moments: a, beta and omega2 must be positive");
  if (!p.feller_ok())
    throw std::invalid_argument(
        "stationary_moments: 2*a*beta >= omega2 fails; no stationary regime "
        "(simulation with truncation is still possible)");
  StationaryMoments m;
  m.shape = 2.0 * p.beta * p.a / p.omega2;
  m.scale = p.omega2 / (2.0 * p.beta);
  m.mean = p.a;
  m.variance = p.a * p.omega2 / (2.0 * p.beta);
  return m;
}

GrowthPath simulate_path(const ModelParams& p, std::size_t n, double delta,
                         std::size_t substeps, double xi0, std::uint64_t key) {
  if (!(p.a > 0.0) || !(p.beta > 0.0) || !(p.omega2 > 0.0))
    throw std::invalid_argument("simulate_path: a, beta and omega2 must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("simulate_path: delta must be positive");
  if (n == 0) throw std::invalid_argument("simulate_path: need at least one step");
  if (substeps == 0) throw std::invalid_argument("simulate_path: substeps must be >= 1");
  if (xi0 < 0.0) throw std::invalid_argument("simulate_path: xi0 must be nonnegative");

  const double h = delta / static_cast<double>(substeps);
  const double omega = std::sqrt(p.omega2);

  GrowthPath path;
  path.delta = delta;
  path.xi.resize(n + 1);
  path.g.resize(n + 1);
  path.xi[0] = xi0;
  path.g[0] = 0.0;

  Rng rng(key, stream::noise, 0, 0);
  double xi = xi0;
  double g = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 0; j < substeps; ++j) {
      xi += p.beta * (p.a - xi) * h + omega * std::sqrt(xi * h) * rng.normal();
      if (xi < 0.0) xi = 0.0;  // full truncation at the boundary
      g += xi * h;             // right-endpoint rectangle rule on the fine grid
    }
    path.xi[i] = xi;
    path.g[i] = g;
  }
  return path;
}

SimulatedSignal simulate_signal(const ModelParams& p, std::size_t n, double delta,
                                std::size_t substeps, double xi0, std::uint64_t key) {
  SimulatedSignal out;
  out.params = p;
  out.params.refresh_derived(delta);
  out.path = simulate_path(out.params, n, delta, substeps, xi0,
                           derive_key(key, {1}));
  const double sigma = std::sqrt(p.sigma2);
  std::vector<double> y(n + 1);
  Rng rng(derive_key(key, {2}), stream::noise, 0, 1);
  for (std::size_t i = 0; i <= n; ++i)
    y[i] = signal_mean(out.path.g[i], out.params) + sigma * rng.normal();
  out.signal = Signal(std::move(y), delta);
  return out;
}

ModelParams draw_sim_params(const SimBoxes& boxes, std::size_t n, double delta,
                            Rng& rng) {
  if (n == 0 || !(delta > 0.0))
    throw std::invalid_argument("draw_sim_params: need n >= 1 and delta > 0");
  const double c_max =
      boxes.c_max > 0.0 ? boxes.c_max : std::max(6.0, 0.05 * static_cast<double>(n));
  if (!(boxes.c_min > 0.0) || !(c_max > boxes.c_min))
    throw std::invalid_argument("draw_sim_params: invalid cycle-count bounds");
  const double span = static_cast<double>(n) * delta;
  const double a_lo = two_pi * boxes.c_min / span;
  const double a_hi = two_pi * c_max / span;

  for (std::size_t attempt = 0; attempt < boxes.max_rejects; ++attempt) {
    const double a = rng.uniform(a_lo, a_hi);
    const double beta = rng.uniform(boxes.beta_lo, boxes.beta_hi);
    const double omega = rng.uniform(boxes.omega_lo, boxes.omega_hi);
    if (!(2.0 * a * beta > omega * omega)) continue;  // keep the boundary regime out
    ModelParams p;
    p.a = a;
    p.beta = beta;
    p.omega2 = omega * omega;
    const double sigma = rng.uniform(boxes.sigma_lo, boxes.sigma_hi);
    p.sigma2 = sigma * sigma;
    p.b = rng.uniform(0.0, two_pi);
    p.A = rng.uniform(boxes.A_lo, boxes.A_hi);
    p.B = 1.0 - p.A;
    p.refresh_derived(delta);
    return p;
  }
  throw std::runtime_error(
      "draw_sim_params: could not satisfy 2*a*beta > omega^2 within the box");
}

}  // namespace cyclewarp
