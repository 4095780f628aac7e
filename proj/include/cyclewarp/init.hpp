#pragma once
// Starting-point construction for the stochastic EM fit.
//
// The signal shape is seeded from a heavily smoothed copy of the
// observations: the smoothed extrema pin down a small set of candidate
// amplitude pairs (A, B) in closed form, one of which is drawn uniformly.
// The observation noise is seeded by the residual variance around the
// smoothed curve, the phase starts at pi (center of its range), and the
// growth-process triple (a, beta, omega2) is selected by a single particle
// filter in which every particle carries its own triple drawn from broad
// boxes; the triple riding the lineage chosen by the final multinomial
// becomes the starting value.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cyclewarp/model.hpp"

namespace cyclewarp {

struct InitConfig {
  // Cycle-count bounds: the stationary-mean box for a is
  // (2 pi c_min / (n delta), 2 pi c_max / (n delta)).
  // c_max = 0 means "auto": resolved per signal to max(6, 0.05 * n),
  // so the default prior widens with the record length.
  double c_min = 2.0;
  double c_max = 0.0;
  // Fraction of the record length used as the smoothing span.
  double span = 0.02;
  // Particle filter over candidate triples.
  std::size_t n_particles = 1500;
  double beta_lo = 0.01, beta_hi = 0.5;
  double omega2_lo = 0.01, omega2_hi = 0.3;
  std::size_t max_rejects = 100000;
  Quadrature rule = Quadrature::trapezoid;
  int threads = 1;

  /// Throws std::invalid_argument unless 2 <= c_min < c_max, span > 0,
  /// the parameter boxes are ordered with positive lower bounds, and
  /// n_particles >= 1.  A c_max of exactly zero is the auto sentinel and
  /// passes; resolved() substitutes the concrete bound.
  void validate() const;

  /// Copy with the auto c_max sentinel replaced by max(6, 0.05 * n_steps).
  /// The copy is validated before being returned.
  InitConfig resolved(std::size_t n_steps) const;
};

/// Candidate amplitude pairs derived from the smoothed extrema, in the
/// order: larger-B root, smaller-B root (both when the discriminant is
/// nonnegative), then the pure first-harmonic pair (ymax, 0).  Pairs
/// violating A > B >= 0 are screened out.
struct AmplitudeCandidates {
  std::vector<double> A;
  std::vector<double> B;
  std::size_t size() const noexcept { return A.size(); }
};

/// Solve for the candidate pairs given the smoothed maximum and minimum.
/// Throws std::invalid_argument when no candidate survives screening
/// (possible only for ymax <= 0, i.e. a degenerate record).
AmplitudeCandidates init_amplitudes(double ymax, double ymin);

/// Residual variance of the observations around the smoothed curve,
/// (1/n) * sum_{i=1..n} (y_i - smoothed_i)^2.
double init_sigma2(const Signal& s, const std::vector<double>& smoothed);

/// One growth-process parameter triple.
struct ProcessTriple {
  double a = 0.0;
  double beta = 0.0;
  double omega2 = 0.0;
};

/// Select a starting triple by particle filtering: each particle draws its
/// own (a, beta, omega2) from the configured boxes (rejection-sampled to the
/// non-degenerate region 2 a beta > omega2), starts at xi_0 = a, and the
/// triple of the lineage drawn from the final multinomial is returned.
ProcessTriple init_process_params(const Signal& s, double A, double B, double b,
                                  double sigma2, const InitConfig& cfg,
                                  std::uint64_t key);

struct InitResult {
  ModelParams theta0;
  double a0 = 0.0;  ///< starting stationary mean, kept as the anchor for later clamping
  std::vector<double> smoothed;
};

/// Full starting-point construction for a preprocessed signal.
InitResult initialize(const Signal& s, const InitConfig& cfg, std::uint64_t key);

}  // namespace cyclewarp
