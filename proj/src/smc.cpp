#include "cyclewarp/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cyclewarp/threads.hpp"

namespace cyclewarp {

namespace detail {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// Multinomial resampling: n_draws i.i.d. indices from the categorical
/// distribution given by normalized weights (via their cumulative sums).
inline std::uint32_t draw_index(const std::vector<double>& cumw, double u) {
  const auto it = std::upper_bound(cumw.begin(), cumw.end(), u);
  std::size_t idx = static_cast<std::size_t>(it - cumw.begin());
  if (idx >= cumw.size()) idx = cumw.size() - 1;  // guard rounding at the top
  return static_cast<std::uint32_t>(idx);
}
}  // namespace

FilterState run_filter(const FilterInput& in, std::uint64_t key) {
  const Signal& sig = *in.signal;
  const std::size_t np = in.n_particles;
  const std::size_t n = sig.n_steps();
  if (np == 0) throw std::invalid_argument("run_filter: need at least one particle");
  if (!(in.sigma2 > 0.0))
    throw std::invalid_argument("run_filter: sigma2 must be positive");

  FilterState st;
  st.np = np;
  st.n = n;
  st.input = &in;
  st.xi_hist.resize((n + 1) * np);
  st.anc.resize(n > 1 ? (n - 1) * np : 0);
  st.lineage.resize(np);
  st.ess.reserve(n);

  std::vector<double> cur_xi(np), cur_g(np, 0.0);
  for (std::size_t j = 0; j < np; ++j) {
    cur_xi[j] = in.xi0[j * in.xi0_stride];
    st.xi_hist[j] = cur_xi[j];
    st.lineage[j] = static_cast<std::uint32_t>(j);
  }

  // Weights start uniform: every particle carries the same initial rate (or
  // its own, at initialization) and g_0 = 0, so the first observation cannot
  // separate trajectories that have not yet diverged.
  st.weights.assign(np, 1.0 / static_cast<double>(np));
  if (n == 0) return st;

  const double half_delta = 0.5 * sig.delta;
  const double inv_2sigma2 = 0.5 / in.sigma2;
  std::vector<double> log_w(np), lin_w(np), cumw(np);
  std::vector<double> new_xi(np), new_g(np);
  std::vector<std::uint32_t> new_lin(np);

  for (std::size_t i = 1; i <= n; ++i) {
    const double y_i = sig.y[i];
    const std::uint32_t step = static_cast<std::uint32_t>(i);
    double* hist_row = st.xi_hist.data() + i * np;

    parallel_for(np, in.threads, [&](std::size_t j) {
      Rng rng(key, stream::propagate, step, static_cast<std::uint32_t>(j));
      const TransitionLaw& law = in.laws[st.lineage[j] * in.law_stride];
      const double xi_prev = cur_xi[j];
      const double xi = transition_sample(law, xi_prev, rng);
      const double g =
          in.rule == Quadrature::trapezoid
              ? cur_g[j] + half_delta * (xi_prev + xi)
              : cur_g[j] + sig.delta * xi;
      cur_xi[j] = xi;
      cur_g[j] = g;
      hist_row[j] = xi;
      const double u = g + in.b;
      const double sn = std::sin(u);
      const double f = in.A * sn - in.B * (1.0 - 2.0 * sn * sn);
      const double r = y_i - f;
      log_w[j] = -r * r * inv_2sigma2;
    });

    // Normalize in log space; a NaN weight counts as vanished.
    double max_lw = neg_inf;
    for (std::size_t j = 0; j < np; ++j) {
      if (std::isnan(log_w[j])) log_w[j] = neg_inf;
      max_lw = std::max(max_lw, log_w[j]);
    }
    if (max_lw == neg_inf)
      throw WeightCollapse(i, "smc: all particle weights vanished at step " +
                                  std::to_string(i));
    double sum = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
      lin_w[j] = std::exp(log_w[j] - max_lw);
      sum += lin_w[j];
    }
    double sum_sq = 0.0;
    const double inv_sum = 1.0 / sum;
    for (std::size_t j = 0; j < np; ++j) {
      lin_w[j] *= inv_sum;
      sum_sq += lin_w[j] * lin_w[j];
    }
    st.ess.push_back(1.0 / sum_sq);

    if (i == n) {
      st.weights = lin_w;
      break;  // keep the terminal importance weights for consumers
    }

    // Multinomial resampling of full trajectories.
    double acc = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
      acc += lin_w[j];
      cumw[j] = acc;
    }
    Rng rng(key, stream::resample, step, 0);
    std::uint32_t* anc_row = st.anc.data() + (i - 1) * np;
    for (std::size_t j = 0; j < np; ++j) {
      const std::uint32_t parent = draw_index(cumw, rng.uniform());
      anc_row[j] = parent;
      new_xi[j] = cur_xi[parent];
      new_g[j] = cur_g[parent];
      new_lin[j] = st.lineage[parent];
    }
    cur_xi.swap(new_xi);
    cur_g.swap(new_g);
    st.lineage.swap(new_lin);
  }
  return st;
}

GrowthPath FilterState::sample_path(Rng& rng, std::uint32_t* birth) const {
  std::vector<double> cumw(np);
  double acc = 0.0;
  for (std::size_t j = 0; j < np; ++j) {
    acc += weights[j];
    cumw[j] = acc;
  }
  std::size_t slot = draw_index(cumw, rng.uniform());

  GrowthPath path;
  path.delta = input->signal->delta;
  path.xi.resize(n + 1);
  // Walk the ancestry back from the terminal slot.
  std::size_t p = slot;
  for (std::size_t i = n; i >= 1; --i) {
    path.xi[i] = xi_hist[i * np + p];
    if (i >= 2) p = anc[(i - 2) * np + p];
  }
  path.xi[0] = input->xi0[(n >= 1 ? p : slot) * input->xi0_stride];
  path.g = accumulate_growth(path.xi, input->signal->delta, input->rule);
  if (birth) *birth = (n >= 1) ? static_cast<std::uint32_t>(p) : lineage[slot];
  return path;
}

ParticleEnsemble FilterState::materialize() const {
  ParticleEnsemble e;
  e.n_particles = np;
  e.n_cols = n + 1;
  e.xi.resize(np * e.n_cols);
  e.g.resize(np * e.n_cols);
  e.weights = weights;
  e.ancestry = anc;
  e.ess = ess;
  std::vector<double> traj(n + 1);
  for (std::size_t r = 0; r < np; ++r) {
    std::size_t p = r;
    for (std::size_t i = n; i >= 1; --i) {
      traj[i] = xi_hist[i * np + p];
      if (i >= 2) p = anc[(i - 2) * np + p];
    }
    traj[0] = input->xi0[(n >= 1 ? p : r) * input->xi0_stride];
    const std::vector<double> g =
        accumulate_growth(traj, input->signal->delta, input->rule);
    for (std::size_t i = 0; i <= n; ++i) {
      e.xi[r * e.n_cols + i] = traj[i];
      e.g[r * e.n_cols + i] = g[i];
    }
  }
  return e;
}

}  // namespace detail

ParticleEnsemble smc_filter(const Signal& s, const ModelParams& theta,
                            const SmcOptions& opt, std::uint64_t key) {
  theta.validate(s.delta);
  const TransitionLaw law(theta, s.delta);
  const double xi0 = theta.a;  // the filter anchors trajectories at the mean rate
  detail::FilterInput in;
  in.signal = &s;
  in.A = theta.A;
  in.B = theta.B;
  in.b = theta.b;
  in.sigma2 = theta.sigma2;
  in.laws = &law;
  in.law_stride = 0;
  in.xi0 = &xi0;
  in.xi0_stride = 0;
  in.n_particles = opt.n_particles;
  in.rule = opt.rule;
  in.threads = opt.threads;
  return detail::run_filter(in, key).materialize();
}

double phase_window(std::size_t m, std::size_t m0) {
  if (m == 0) throw std::invalid_argument("phase_window: iterations count from 1");
  if (m <= m0) return pi;
  return pi * std::pow(static_cast<double>(m - m0), -0.8);
}

std::vector<double> phase_grid(double b, double w, std::size_t grid_size) {
  if (grid_size < 2) throw std::invalid_argument("phase_grid: need at least 2 candidates");
  if (!(w > 0.0)) throw std::invalid_argument("phase_grid: window must be positive");
  std::vector<double> grid(grid_size);
  const double step = 2.0 * w / static_cast<double>(grid_size - 1);
  for (std::size_t j = 0; j < grid_size; ++j)
    grid[j] = wrap_phase(b - w + static_cast<double>(j) * step);
  return grid;
}

GridResult smc_plus(const Signal& s, const ModelParams& theta, std::size_t m,
                    std::size_t m0, std::size_t grid_size, const SmcOptions& opt,
                    std::uint64_t key) {
  theta.validate(s.delta);
  GridResult res;
  res.w = phase_window(m, m0);
  res.b_grid = phase_grid(theta.b, res.w, grid_size);
  res.loglik.assign(grid_size, -std::numeric_limits<double>::infinity());
  res.failed.assign(grid_size, 0);
  res.errors.assign(grid_size, std::string());

  struct Candidate {
    GrowthPath path;
    double ess_min = 0.0;
  };
  std::vector<Candidate> cands(grid_size);

  parallel_for(grid_size, opt.threads, [&](std::size_t j) {
    const std::uint64_t cand_key = derive_key(key, {j});
    ModelParams theta_j = theta;
    theta_j.b = res.b_grid[j];
    detail::FilterInput in;
    const TransitionLaw law(theta_j, s.delta);
    const double xi0 = theta_j.a;
    in.signal = &s;
    in.A = theta_j.A;
    in.B = theta_j.B;
    in.b = theta_j.b;
    in.sigma2 = theta_j.sigma2;
    in.laws = &law;
    in.law_stride = 0;
    in.xi0 = &xi0;
    in.xi0_stride = 0;
    in.n_particles = opt.n_particles;
    in.rule = opt.rule;
    in.threads = 1;  // candidate-level parallelism only
    try {
      const detail::FilterState st = detail::run_filter(in, cand_key);
      Rng pick(cand_key, stream::pathdraw, 0, 0);
      cands[j].path = st.sample_path(pick);
      cands[j].ess_min =
          st.ess.empty() ? static_cast<double>(opt.n_particles)
                         : *std::min_element(st.ess.begin(), st.ess.end());
      res.loglik[j] = complete_log_likelihood(s, cands[j].path, theta_j);
    } catch (const std::exception& e) {
      res.failed[j] = 1;
      res.errors[j] = e.what();
    }
  });

  std::size_t best = grid_size;
  for (std::size_t j = 0; j < grid_size; ++j) {
    if (res.failed[j]) continue;
    if (best == grid_size || res.loglik[j] > res.loglik[best]) best = j;
  }
  if (best == grid_size) {
    std::string detail_msg;
    for (std::size_t j = 0; j < grid_size && j < 3; ++j)
      detail_msg += (j ? "; " : "") + res.errors[j];
    throw GridCollapse("smc_plus: every phase candidate failed (" + detail_msg + ")");
  }
  res.index = best;
  res.b_star = res.b_grid[best];
  res.path = std::move(cands[best].path);
  res.ess_min = cands[best].ess_min;
  return res;
}

}  // namespace cyclewarp
