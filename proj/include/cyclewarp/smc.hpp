#pragma once
// Sequential Monte Carlo over the latent growth process, and the
// grid-refined phase search built on top of it.
//
// The filter tracks n_particles trajectories of the growth rate xi and its
// accumulated integral g.  Each step propagates every particle through the
// exact diffusion transition, weights it by the Gaussian observation density
// at the new accumulated growth, normalizes in log space, and resamples the
// full trajectories multinomially.  The terminal step keeps its importance
// weights instead of resampling, so consumers can sample a trajectory from
// the final multinomial directly (distributionally the same thing).
//
// Streams are assigned per (step, particle), so any parallel schedule gives
// results bitwise identical to the serial run.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyclewarp/cir.hpp"
#include "cyclewarp/model.hpp"
#include "cyclewarp/rng.hpp"

namespace cyclewarp {

struct SmcOptions {
  std::size_t n_particles = 1500;
  Quadrature rule = Quadrature::trapezoid;
  int threads = 1;  ///< workers for particle loops; results do not depend on it
};

/// Thrown when every particle weight vanishes (max log weight = -inf).
class WeightCollapse : public std::runtime_error {
 public:
  WeightCollapse(std::size_t step_in, const std::string& what)
      : std::runtime_error(what), step(step_in) {}
  std::size_t step;
};

/// Full particle system after filtering: row r holds one surviving
/// trajectory over columns i = 0..n; `weights` are the final-step normalized
/// importance weights for those rows.
struct ParticleEnsemble {
  std::size_t n_particles = 0;
  std::size_t n_cols = 0;  ///< n + 1 columns
  std::vector<double> xi;  ///< row-major, n_particles x n_cols
  std::vector<double> g;
  std::vector<double> weights;
  std::vector<std::uint32_t> ancestry;  ///< resampling parents, steps 1..n-1
  std::vector<double> ess;              ///< pre-resampling ESS per step 1..n

  double xi_at(std::size_t r, std::size_t i) const { return xi[r * n_cols + i]; }
  double g_at(std::size_t r, std::size_t i) const { return g[r * n_cols + i]; }
};

/// One pass of the filter under fixed parameters.  All particles start at
/// xi_0 = a with uniform weights.  Throws WeightCollapse (with the step) if
/// the weights vanish.
ParticleEnsemble smc_filter(const Signal& s, const ModelParams& theta,
                            const SmcOptions& opt, std::uint64_t key);

/// Half-width of the phase search window at iteration m: pi during the
/// burn-in (m <= m0), then pi * (m - m0)^{-0.8}.
double phase_window(std::size_t m, std::size_t m0);

/// Candidate phases b_j = (b - w + j * 2w/(G-1)) wrapped to [0, 2*pi),
/// j = 0..G-1.
std::vector<double> phase_grid(double b, double w, std::size_t grid_size);

/// Thrown by the grid search when every candidate fails.
class GridCollapse : public std::runtime_error {
 public:
  explicit GridCollapse(const std::string& what) : std::runtime_error(what) {}
};

struct GridResult {
  double b_star = 0.0;        ///< winning candidate phase
  std::size_t index = 0;      ///< its grid index (ties -> lowest index)
  GrowthPath path;            ///< trajectory sampled from the winning filter
  std::vector<double> b_grid;
  std::vector<double> loglik;        ///< joint log likelihood per candidate
  std::vector<std::uint8_t> failed;  ///< per-candidate failure flags
  std::vector<std::string> errors;   ///< failure messages, empty when ok
  double ess_min = 0.0;              ///< min ESS across steps, winning filter
  double w = 0.0;                    ///< window half-width used
};

/// Grid-refined phase search: run one filter per candidate phase, sample a
/// trajectory from each final multinomial, score it by the joint log
/// likelihood, and keep the argmax.  Candidates run in parallel; failures
/// are recorded per candidate and only a full wipeout throws GridCollapse.
GridResult smc_plus(const Signal& s, const ModelParams& theta, std::size_t m,
                    std::size_t m0, std::size_t grid_size, const SmcOptions& opt,
                    std::uint64_t key);

namespace detail {

/// Low-level filter input: per-particle transition laws and initial rates
/// are expressed with strides so the same core serves both the fixed-law
/// filter (stride 0) and the initialization filter, where every particle
/// carries its own parameter triple (stride 1).
struct FilterInput {
  const Signal* signal = nullptr;
  double A = 0.0, B = 0.0, b = 0.0, sigma2 = 0.0;
  const TransitionLaw* laws = nullptr;
  std::size_t law_stride = 0;
  const double* xi0 = nullptr;
  std::size_t xi0_stride = 0;
  std::size_t n_particles = 0;
  Quadrature rule = Quadrature::trapezoid;
  int threads = 1;
};

struct FilterState {
  std::size_t np = 0, n = 0;
  const FilterInput* input = nullptr;
  std::vector<double> xi_hist;       ///< (n+1) x np, step-major
  std::vector<std::uint32_t> anc;    ///< (n-1) x np parents for steps 1..n-1
  std::vector<std::uint32_t> lineage;  ///< birth index riding each slot
  std::vector<double> weights;       ///< final normalized weights
  std::vector<double> ess;

  /// Multinomial draw of one trajectory from the final weights; returns the
  /// growth path and the birth index of its lineage.
  GrowthPath sample_path(Rng& rng, std::uint32_t* birth = nullptr) const;
  /// Reconstruct the full trajectory matrix as a ParticleEnsemble.
  ParticleEnsemble materialize() const;
};

/// Run the filter; throws WeightCollapse on a vanished weight set.
FilterState run_filter(const FilterInput& in, std::uint64_t key);

}  // namespace detail

}  // namespace cyclewarp
