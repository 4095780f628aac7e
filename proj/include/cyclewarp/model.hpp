#pragma once
// Core model types and signal-level operations.
//
// The observation model is
//     y_i = f(x_i) + eps_i,          eps_i ~ N(0, sigma2) i.i.d.,
//     f(x) = A sin(g(x) + b) - B cos(2 g(x) + 2 b),
// where g is a nondecreasing stochastic growth process with g(0) = 0 driven
// by a square-root mean-reverting diffusion (cir.hpp).  One full period of f
// corresponds to an increase of 2*pi in g, so g(x_n) / (2*pi) counts the
// cycles laid down over the record.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cyclewarp {

inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double pi = 3.1415926535897932384626433832795;

/// Wrap a phase into [0, 2*pi).
double wrap_phase(double b) noexcept;

/// Shortest arc distance between two phases, in [0, pi].
double phase_distance(double b1, double b2) noexcept;

struct ModelParams {
  // Signal shape.
  double A = 0.0;  ///< first-harmonic amplitude; A > B for identifiability
  double B = 0.0;  ///< second-harmonic amplitude; B = 1 - A after normalization
  double b = 0.0;  ///< phase offset in [0, 2*pi)
  // Growth-rate diffusion d(xi) = -beta (xi - a) dx + omega sqrt(xi) dW.
  double a = 0.0;      ///< stationary mean growth rate
  double beta = 0.0;   ///< mean-reversion rate
  double omega2 = 0.0; ///< squared diffusion coefficient
  // Observation noise.
  double sigma2 = 0.0;
  // Derived quantities, kept in sync by refresh_derived().
  double rho = 0.0;    ///< lag-one autocorrelation exp(-delta * beta)
  double gamma2 = 0.0; ///< stationary variance a * omega2 / (2 beta)

  /// Recompute rho and gamma2 from (a, beta, omega2) at sample spacing delta.
  void refresh_derived(double delta);

  /// Throws std::invalid_argument on structural violations: non-positive
  /// A, a, beta, omega2 or sigma2, negative B, A < B, phase outside
  /// [0, 2*pi), or rho inconsistent with exp(-delta*beta).
  /// The stationary-regime condition 2*a*beta >= omega2 is deliberately not
  /// enforced here; see feller_ok().
  void validate(double delta) const;

  /// True when 2*a*beta >= omega2, i.e. the diffusion cannot reach zero and
  /// a stationary law with finite positive density exists.
  bool feller_ok() const noexcept;
};

/// Record of the amplitude-normalization transform applied to a signal.
struct PreprocRecord {
  double ybar = 0.0;            ///< subtracted mean
  std::vector<double> scale;    ///< per-sample envelope divisor
  std::size_t window = 0;       ///< rolling-mean window used on the envelope
  bool normalized = false;
};

/// An equispaced signal y_0..y_n observed at x_i = i * delta.
struct Signal {
  std::vector<double> x;
  std::vector<double> y;
  double delta = 0.0;
  PreprocRecord preproc;

  Signal() = default;
  /// Build from samples at x_i = i * delta.
  Signal(std::vector<double> y_in, double delta_in);
  /// Build from explicit abscissae; validates equal spacing.
  Signal(std::vector<double> x_in, std::vector<double> y_in);

  std::size_t size() const noexcept { return y.size(); }
  /// Number of steps n when the samples are y_0..y_n.
  std::size_t n_steps() const noexcept { return y.empty() ? 0 : y.size() - 1; }
};

/// A latent growth trajectory: rates xi_i >= 0 and accumulated growth g_i at
/// the observation grid, with g_0 = 0.
struct GrowthPath {
  std::vector<double> xi;
  std::vector<double> g;
  double delta = 0.0;
};

enum class Quadrature {
  trapezoid,  ///< g_i = g_{i-1} + delta * (xi_{i-1} + xi_i) / 2
  rectangle,  ///< g_i = g_{i-1} + delta * xi_i (right endpoint)
};

/// Noise-free signal value at accumulated growth g:
/// A sin(g + b) - B cos(2 g + 2 b).
double signal_mean(double g, const ModelParams& p) noexcept;

/// Integrate rates into accumulated growth at observation resolution.
std::vector<double> accumulate_growth(const std::vector<double>& xi, double delta,
                                      Quadrature rule = Quadrature::trapezoid);

/// Number of cycles recorded by a trajectory: g_n / (2*pi).
double cycle_count(const GrowthPath& path);

/// Thrown when a latent trajectory cannot support the likelihood or the
/// martingale statistics (zero transition density, constant path, ...).
class DegeneratePath : public std::runtime_error {
 public:
  explicit DegeneratePath(const std::string& what) : std::runtime_error(what) {}
};

/// Joint log density of (y_0..y_n, xi_1..xi_n | xi_0) under the model:
/// Gaussian observation terms plus the growth-rate transition terms.  The
/// initial rate xi_0 is treated as fixed, contributing no term.
/// Throws DegeneratePath if any transition density is zero.
double complete_log_likelihood(const Signal& s, const GrowthPath& path,
                               const ModelParams& p);

}  // namespace cyclewarp
