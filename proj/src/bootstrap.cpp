#include "cyclewarp/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cyclewarp/rng.hpp"

namespace cyclewarp {

double quantile_type7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0) || !(p <= 1.0))
    throw std::invalid_argument("quantile: probability outside [0, 1]");
  const std::size_t n = sorted.size();
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

ConfidenceInterval percentile_ci(std::vector<double> values, double level) {
  if (!(level > 0.0) || !(level < 1.0))
    throw std::invalid_argument("percentile_ci: level must lie strictly in (0, 1)");
  if (values.empty())
    throw std::invalid_argument("percentile_ci: no values");
  std::sort(values.begin(), values.end());
  ConfidenceInterval ci;
  ci.level = level;
  ci.lo = quantile_type7(values, 0.5 * (1.0 - level));
  ci.hi = quantile_type7(values, 0.5 * (1.0 + level));
  return ci;
}

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("normal_quantile: probability must lie in (0, 1)");
  // Rational approximations on three regions, then one Halley step against
  // the exact tail probability brings the result to machine precision.
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double sqrt_half = 0.70710678118654752440;
  const double sqrt_two_pi = 2.5066282746310005024;
  const double e = 0.5 * std::erfc(-x * sqrt_half) - p;
  const double u = e * sqrt_two_pi * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

void BootstrapConfig::validate() const {
  if (replicates == 0)
    throw std::invalid_argument("bootstrap: need at least one replicate");
  if (!(ci_level > 0.0) || !(ci_level < 1.0))
    throw std::invalid_argument("bootstrap: ci_level must lie strictly in (0, 1)");
  init.validate();
  saem.validate();
}

BootstrapResult residual_bootstrap(const Signal& s, const FitResult& base,
                                   const BootstrapConfig& cfg, std::uint64_t key) {
  cfg.validate();
  const std::size_t nobs = s.size();
  if (base.fitted.size() != nobs)
    throw std::invalid_argument("bootstrap: fitted curve length mismatch");
  if (nobs < 2) throw std::invalid_argument("bootstrap: signal has no steps");

  std::vector<double> resid(nobs);
  for (std::size_t i = 0; i < nobs; ++i) resid[i] = s.y[i] - base.fitted[i];

  BootstrapResult out;
  out.estimates.reserve(cfg.replicates);

  std::vector<double> ystar(nobs);
  for (std::size_t k = 0; k < cfg.replicates; ++k) {
    const std::uint64_t rep_key = derive_key(key, {k});
    Rng rng(rep_key, stream::residuals, 0, 0);
    for (std::size_t i = 0; i < nobs; ++i) {
      std::size_t pick = static_cast<std::size_t>(
          rng.uniform() * static_cast<double>(nobs));
      if (pick >= nobs) pick = nobs - 1;
      ystar[i] = base.fitted[i] + resid[pick];
    }
    Signal sstar(ystar, s.delta);

    try {
      ModelParams theta0;
      double a0;
      if (cfg.warm_start) {
        theta0 = base.theta;
        a0 = base.a0;
      } else {
        const InitResult ir = initialize(sstar, cfg.init, derive_key(rep_key, {1}));
        theta0 = ir.theta0;
        a0 = ir.a0;
      }
      const FitResult fr = fit(sstar, theta0, a0, cfg.saem, derive_key(rep_key, {2}));
      ReplicateEstimate est;
      est.replicate = k;
      est.key = rep_key;
      est.converged = fr.converged;
      est.theta = fr.theta;
      est.cycles = fr.cycles;
      out.estimates.push_back(est);
    } catch (const std::exception& e) {
      out.failures.push_back({k, rep_key, e.what()});
    }
  }

  if (2 * out.failures.size() > cfg.replicates)
    throw std::runtime_error(
        "bootstrap: " + std::to_string(out.failures.size()) + " of " +
        std::to_string(cfg.replicates) + " replicates failed outright");
  return out;
}

std::vector<double> collect_cycles(const BootstrapResult& r) {
  std::vector<double> v;
  v.reserve(r.estimates.size());
  for (const auto& e : r.estimates) v.push_back(e.cycles);
  return v;
}

std::vector<DiagnosticsRow> diagnostics(const Signal& s, const FitResult& fit) {
  const std::size_t nobs = s.size();
  if (fit.fitted.size() != nobs)
    throw std::invalid_argument("diagnostics: fitted curve length mismatch");
  if (nobs == 0) throw std::invalid_argument("diagnostics: empty signal");
  const double sigma = std::sqrt(fit.theta.sigma2);
  if (!(sigma > 0.0))
    throw std::invalid_argument("diagnostics: noise estimate must be positive");

  std::vector<double> resid(nobs), sorted(nobs);
  for (std::size_t i = 0; i < nobs; ++i) resid[i] = s.y[i] - fit.fitted[i];
  sorted = resid;
  std::sort(sorted.begin(), sorted.end());

  std::vector<DiagnosticsRow> rows(nobs);
  for (std::size_t i = 0; i < nobs; ++i) {
    rows[i].index = i;
    rows[i].x = s.x[i];
    rows[i].residual = resid[i];
    rows[i].qq_theoretical = normal_quantile(
        (static_cast<double>(i) + 0.5) / static_cast<double>(nobs));
    rows[i].qq_empirical = sorted[i] / sigma;
  }
  return rows;
}

std::vector<RelDiffRow> replicate_rel_diffs(const BootstrapResult& r,
                                            const ModelParams& base_theta,
                                            double base_cycles) {
  std::vector<RelDiffRow> rows;
  rows.reserve(r.estimates.size());
  for (const auto& e : r.estimates) {
    RelDiffRow row;
    row.replicate = e.replicate;
    row.A = rel_diff(e.theta.A, base_theta.A);
    row.B = rel_diff(e.theta.B, base_theta.B);
    row.b = phase_distance(e.theta.b, base_theta.b) / pi;
    row.a = rel_diff(e.theta.a, base_theta.a);
    row.beta = rel_diff(e.theta.beta, base_theta.beta);
    row.rho = rel_diff(e.theta.rho, base_theta.rho);
    row.omega2 = rel_diff(e.theta.omega2, base_theta.omega2);
    row.sigma2 = rel_diff(e.theta.sigma2, base_theta.sigma2);
    row.cycles = rel_diff(e.cycles, base_cycles);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cyclewarp
