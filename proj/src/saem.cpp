#include "cyclewarp/saem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cyclewarp/rng.hpp"

namespace cyclewarp {

namespace {
constexpr double qnan = std::numeric_limits<double>::quiet_NaN();
}

double rel_diff(double x, double y) noexcept {
  if (x == y) return 0.0;
  return std::fabs(x - y) / std::max(std::fabs(x), 1e-300);
}

void SAEMConfig::validate() const {
  if (max_iter == 0) throw std::invalid_argument("saem: max_iter must be positive");
  if (stop_consecutive == 0)
    throw std::invalid_argument("saem: stop_consecutive must be positive");
  if (n_particles == 0)
    throw std::invalid_argument("saem: need at least one particle");
  if (grid_size < 2)
    throw std::invalid_argument("saem: grid_size must be at least 2");
  if (!(a_clamp_lo > 0.0) || !(a_clamp_lo < 1.0) || !(a_clamp_hi > 1.0))
    throw std::invalid_argument("saem: clamp factors must bracket 1");
  if (max_failures == 0)
    throw std::invalid_argument("saem: max_failures must be positive");
}

MartingaleStats statistics(const Signal& s, const GrowthPath& path, double A,
                           double B, double b) {
  const std::size_t n = s.n_steps();
  if (path.xi.size() != n + 1 || path.g.size() != n + 1)
    throw std::invalid_argument("statistics: trajectory length mismatch");
  if (n == 0) throw DegeneratePath("statistics: signal has no steps");

  // Pair sums over steps whose starting rate is positive.
  double sum_cur = 0.0, sum_prev = 0.0, sum_inv = 0.0, sum_ratio = 0.0;
  std::size_t q = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double prev = path.xi[i - 1];
    if (!(prev > 0.0)) continue;
    const double cur = path.xi[i];
    sum_cur += cur;
    sum_prev += prev;
    sum_inv += 1.0 / prev;
    sum_ratio += cur / prev;
    ++q;
  }
  if (q == 0) throw DegeneratePath("statistics: no growth pair has a positive starting rate");
  const double qd = static_cast<double>(q);
  const double m_cur = sum_cur / qd;
  const double m_prev = sum_prev / qd;
  const double m_inv = sum_inv / qd;
  const double m_ratio = sum_ratio / qd;

  const double den1 = 1.0 - m_prev * m_inv;
  if (!(std::fabs(den1) >= 1e-12))
    throw DegeneratePath("statistics: constant trajectory, autocorrelation design singular");

  MartingaleStats st;
  st.s1 = (m_ratio - m_cur * m_inv) / den1;
  st.s1_valid = std::isfinite(st.s1);

  st.s2 = m_cur + st.s1 / (qd * (1.0 - st.s1)) * (path.xi[n] - path.xi[0]);
  st.s2_valid = std::isfinite(st.s2);

  // Weighted residual ratio for the diffusion coefficient; the weights are
  // the inverse starting rates, matching the conditional-variance shape
  // (a/2 - xi) rho^2 - (a - xi) rho + a/2 up to the omega2/beta factor.
  double num3 = 0.0, den3 = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double prev = path.xi[i - 1];
    if (!(prev > 0.0)) continue;
    const double cur = path.xi[i];
    const double r = cur - prev * st.s1 - st.s2 * (1.0 - st.s1);
    num3 += (r * r) / prev;
    den3 += ((0.5 * st.s2 - prev) * st.s1 * st.s1 -
             (st.s2 - prev) * st.s1 + 0.5 * st.s2) / prev;
  }
  const double beta_hat = -std::log(st.s1) / s.delta;
  st.s3 = beta_hat * num3 / den3;
  st.s3_valid = std::isfinite(st.s3) && st.s3 > 0.0;

  double sq = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = path.g[i] + b;
    const double sn = std::sin(u);
    const double f = A * sn - B * (1.0 - 2.0 * sn * sn);
    const double r = s.y[i] - f;
    sq += r * r;
  }
  st.s4 = sq / static_cast<double>(n);
  st.s4_valid = std::isfinite(st.s4) && st.s4 > 0.0;
  return st;
}

double sa_alpha(std::size_t m, std::size_t m0) {
  if (m == 0) throw std::invalid_argument("sa_alpha: iterations count from 1");
  if (m <= m0) return 1.0;
  return std::pow(static_cast<double>(m - m0), -0.8);
}

void sa_update(MartingaleStats& smoothed, const MartingaleStats& raw, double alpha) {
  const auto blend = [alpha](double& s, bool& s_valid, double r, bool r_valid) {
    if (!r_valid) return;
    if (!s_valid) {
      s = r;
      s_valid = true;
    } else {
      s += alpha * (r - s);
    }
  };
  blend(smoothed.s1, smoothed.s1_valid, raw.s1, raw.s1_valid);
  blend(smoothed.s2, smoothed.s2_valid, raw.s2, raw.s2_valid);
  blend(smoothed.s3, smoothed.s3_valid, raw.s3, raw.s3_valid);
  blend(smoothed.s4, smoothed.s4_valid, raw.s4, raw.s4_valid);
}

double update_A(const Signal& s, const GrowthPath& path, double b) {
  const std::size_t n = s.n_steps();
  if (path.g.size() != n + 1)
    throw std::invalid_argument("update_A: trajectory length mismatch");
  // With B = 1 - A the mean is A (sin u + cos 2u) - cos 2u, a line in A.
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = path.g[i] + b;
    const double sn = std::sin(u);
    const double c2 = 1.0 - 2.0 * sn * sn;
    const double w = sn + c2;
    num += w * (s.y[i] + c2);
    den += w * w;
  }
  if (!(den > 0.0))
    throw DegeneratePath("update_A: amplitude regression design is degenerate");
  return std::min(1.0, std::max(0.5, num / den));
}

void update_theta(ModelParams& theta, const MartingaleStats& sm, double a0,
                  double delta, const SAEMConfig& cfg) {
  if (sm.s1_valid && sm.s1 > 0.0 && sm.s1 < 1.0) {
    theta.rho = sm.s1;
    theta.beta = -std::log(sm.s1) / delta;
  }
  if (sm.s2_valid && sm.s2 > cfg.a_clamp_lo * a0 && sm.s2 < cfg.a_clamp_hi * a0)
    theta.a = sm.s2;
  if (sm.s3_valid && sm.s3 > 0.0) theta.omega2 = sm.s3;
  if (sm.s4_valid && sm.s4 > 0.0) theta.sigma2 = sm.s4;
  theta.refresh_derived(delta);
}

FitResult fit(const Signal& s, const ModelParams& theta0, double a0,
              const SAEMConfig& cfg, std::uint64_t key) {
  cfg.validate();
  theta0.validate(s.delta);
  if (!(a0 > 0.0)) throw std::invalid_argument("fit: a0 must be positive");
  if (s.n_steps() == 0) throw std::invalid_argument("fit: signal has no steps");

  FitResult res;
  res.a0 = a0;
  res.theta = theta0;
  res.trace.reserve(cfg.max_iter);

  MartingaleStats smoothed;
  SmcOptions opt;
  opt.n_particles = cfg.n_particles;
  opt.rule = cfg.rule;
  opt.threads = cfg.threads;

  std::size_t streak = 0;        // consecutive small-change iterations
  std::size_t failure_streak = 0;
  bool any_success = false;
  const bool finite_stop = std::isfinite(cfg.stop_threshold);

  for (std::size_t m = 1; m <= cfg.max_iter; ++m) {
    res.iterations = m;
    const std::uint64_t iter_key = derive_key(key, {m});
    const double alpha = sa_alpha(m, cfg.m0);
    TraceRow row;
    row.iter = m;
    row.alpha = alpha;
    row.w = phase_window(m, cfg.m0);

    try {
      const GridResult gr = smc_plus(s, res.theta, m, cfg.m0, cfg.grid_size,
                                     opt, iter_key);
      const MartingaleStats raw =
          statistics(s, gr.path, res.theta.A, res.theta.B, gr.b_star);
      sa_update(smoothed, raw, alpha);

      const ModelParams prev = res.theta;
      res.theta.b = gr.b_star;
      const double A_new = update_A(s, gr.path, gr.b_star);
      res.theta.A = A_new;
      res.theta.B = 1.0 - A_new;
      update_theta(res.theta, smoothed, a0, s.delta, cfg);

      double rel = rel_diff(res.theta.A, prev.A);
      rel = std::max(rel, rel_diff(res.theta.B, prev.B));
      rel = std::max(rel, phase_distance(res.theta.b, prev.b) / pi);
      rel = std::max(rel, rel_diff(res.theta.a, prev.a));
      rel = std::max(rel, rel_diff(res.theta.sigma2, prev.sigma2));
      rel = std::max(rel, rel_diff(res.theta.rho, prev.rho));
      rel = std::max(rel, rel_diff(res.theta.omega2, prev.omega2));

      if (rel < cfg.stop_threshold) ++streak; else streak = 0;
      failure_streak = 0;
      any_success = true;
      res.path = gr.path;

      row.A = res.theta.A;
      row.B = res.theta.B;
      row.b = res.theta.b;
      row.a = res.theta.a;
      row.beta = res.theta.beta;
      row.rho = res.theta.rho;
      row.omega2 = res.theta.omega2;
      row.sigma2 = res.theta.sigma2;
      row.loglik = gr.loglik[gr.index];
      row.ess_min = gr.ess_min;
      row.rel_change = rel;
      row.converged_streak = streak;
      res.trace.push_back(row);

      const bool stop = finite_stop ? (streak >= cfg.stop_consecutive)
                                    : (streak >= 1);
      if (stop) {
        res.converged = true;
        break;
      }
    } catch (const GridCollapse& e) {
      ++failure_streak;
      row.A = res.theta.A;
      row.B = res.theta.B;
      row.b = res.theta.b;
      row.a = res.theta.a;
      row.beta = res.theta.beta;
      row.rho = res.theta.rho;
      row.omega2 = res.theta.omega2;
      row.sigma2 = res.theta.sigma2;
      row.loglik = qnan;
      row.ess_min = qnan;
      row.rel_change = qnan;
      row.converged_streak = streak;
      res.trace.push_back(row);
      if (failure_streak >= cfg.max_failures)
        throw FitFailure("fit: " + std::to_string(failure_streak) +
                             " consecutive failed iterations, last: " + e.what(),
                         res.trace);
    } catch (const DegeneratePath& e) {
      ++failure_streak;
      row.A = res.theta.A;
      row.B = res.theta.B;
      row.b = res.theta.b;
      row.a = res.theta.a;
      row.beta = res.theta.beta;
      row.rho = res.theta.rho;
      row.omega2 = res.theta.omega2;
      row.sigma2 = res.theta.sigma2;
      row.loglik = qnan;
      row.ess_min = qnan;
      row.rel_change = qnan;
      row.converged_streak = streak;
      res.trace.push_back(row);
      if (failure_streak >= cfg.max_failures)
        throw FitFailure("fit: " + std::to_string(failure_streak) +
                             " consecutive failed iterations, last: " + e.what(),
                         res.trace);
    }
  }

  if (!any_success)
    throw FitFailure("fit: no iteration produced a usable trajectory", res.trace);

  res.cycles = cycle_count(res.path);
  res.fitted.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    res.fitted[i] = signal_mean(res.path.g[i], res.theta);
  return res;
}

}  // namespace cyclewarp
