#include "cyclewarp/init.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cyclewarp/cir.hpp"
#include "cyclewarp/preprocess.hpp"
#include "cyclewarp/rng.hpp"
#include "cyclewarp/smc.hpp"
#include "cyclewarp/threads.hpp"

namespace cyclewarp {

void InitConfig::validate() const {
  if (!(c_min >= 2.0) || (c_max != 0.0 && !(c_min < c_max)))
    throw std::invalid_argument(
        "init: cycle bounds must satisfy 2 <= c_min < c_max (c_max = 0 selects "
        "the automatic bound)");
  if (!(span > 0.0) || !(span <= 1.0))
    throw std::invalid_argument("init: smoothing span must lie in (0, 1]");
  if (n_particles == 0)
    throw std::invalid_argument("init: need at least one particle");
  if (!(beta_lo > 0.0) || !(beta_lo < beta_hi))
    throw std::invalid_argument("init: mean-reversion box must satisfy 0 < lo < hi");
  if (!(omega2_lo > 0.0) || !(omega2_lo < omega2_hi))
    throw std::invalid_argument("init: diffusion box must satisfy 0 < lo < hi");
  if (max_rejects == 0)
    throw std::invalid_argument("init: max_rejects must be positive");
}

InitConfig InitConfig::resolved(std::size_t n_steps) const {
  InitConfig out = *this;
  if (out.c_max == 0.0)
    out.c_max = std::max(6.0, 0.05 * static_cast<double>(n_steps));
  out.validate();
  return out;
}

AmplitudeCandidates init_amplitudes(double ymax, double ymin) {
  AmplitudeCandidates out;
  const auto keep = [&out](double A, double B) {
    if (A > B && B >= 0.0) {
      out.A.push_back(A);
      out.B.push_back(B);
    }
  };
  // The smoothed maximum estimates A + B; the smoothed minimum estimates the
  // trough -B - A^2 / (8B) of the two-harmonic shape.  Eliminating A gives a
  // quadratic in B:  9 B^2 - 2 (ymax - 4 ymin) B + ymax^2 = 0.
  const double m = ymax - 4.0 * ymin;
  const double disc = m * m - 9.0 * ymax * ymax;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    const double b_plus = (m + root) / 9.0;
    const double b_minus = (m - root) / 9.0;
    keep(ymax - b_plus, b_plus);
    keep(ymax - b_minus, b_minus);
  }
  // The boundary solution with no second harmonic is always a candidate.
  keep(ymax, 0.0);
  if (out.A.empty())
    throw std::invalid_argument(
        "init: smoothed record admits no valid amplitude pair (max "
        + std::to_string(ymax) + ", min " + std::to_string(ymin) + ")");
  return out;
}

double init_sigma2(const Signal& s, const std::vector<double>& smoothed) {
  const std::size_t n = s.n_steps();
  if (n == 0) throw std::invalid_argument("init: signal has no steps");
  if (smoothed.size() != s.size())
    throw std::invalid_argument("init: smoothed curve length mismatch");
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double r = s.y[i] - smoothed[i];
    sum += r * r;
  }
  return sum / static_cast<double>(n);
}

ProcessTriple init_process_params(const Signal& s, double A, double B, double b,
                                  double sigma2, const InitConfig& raw_cfg,
                                  std::uint64_t key) {
  const std::size_t n = s.n_steps();
  if (n == 0) throw std::invalid_argument("init: signal has no steps");
  const InitConfig cfg = raw_cfg.resolved(n);
  const double a_lo = two_pi * cfg.c_min / (static_cast<double>(n) * s.delta);
  const double a_hi = two_pi * cfg.c_max / (static_cast<double>(n) * s.delta);

  const std::size_t np = cfg.n_particles;
  std::vector<ProcessTriple> triples(np);
  std::vector<double> xi0(np);
  // TransitionLaw has no default constructor; build via placement after draw.
  std::vector<TransitionLaw> laws;
  laws.reserve(np);
  for (std::size_t j = 0; j < np; ++j)
    laws.emplace_back(1.0, 1.0, 1.0, s.delta);  // overwritten below

  parallel_for(np, cfg.threads, [&](std::size_t j) {
    Rng rng(key, stream::triple, 0, static_cast<std::uint32_t>(j));
    double a = 0.0, beta = 0.0, omega2 = 0.0;
    bool ok = false;
    for (std::size_t attempt = 0; attempt < cfg.max_rejects; ++attempt) {
      a = rng.uniform(a_lo, a_hi);
      beta = rng.uniform(cfg.beta_lo, cfg.beta_hi);
      omega2 = rng.uniform(cfg.omega2_lo, cfg.omega2_hi);
      if (2.0 * a * beta > omega2) {
        ok = true;
        break;
      }
    }
    if (!ok)
      throw std::runtime_error(
          "init: could not draw a non-degenerate parameter triple within "
          + std::to_string(cfg.max_rejects) + " attempts");
    triples[j] = {a, beta, omega2};
    laws[j] = TransitionLaw(a, beta, omega2, s.delta);
    xi0[j] = a;
  });

  detail::FilterInput in;
  in.signal = &s;
  in.A = A;
  in.B = B;
  in.b = b;
  in.sigma2 = sigma2;
  in.laws = laws.data();
  in.law_stride = 1;
  in.xi0 = xi0.data();
  in.xi0_stride = 1;
  in.n_particles = np;
  in.rule = cfg.rule;
  in.threads = cfg.threads;

  const detail::FilterState st = detail::run_filter(in, key);
  Rng pick(key, stream::pathdraw, 0, 0);
  std::uint32_t birth = 0;
  (void)st.sample_path(pick, &birth);
  return triples[birth];
}

InitResult initialize(const Signal& s, const InitConfig& raw_cfg,
                      std::uint64_t key) {
  const InitConfig cfg = raw_cfg.resolved(s.n_steps());
  InitResult res;
  res.smoothed = loess_smooth(s.x, s.y, cfg.span);

  const auto [min_it, max_it] =
      std::minmax_element(res.smoothed.begin(), res.smoothed.end());
  const AmplitudeCandidates cands = init_amplitudes(*max_it, *min_it);

  Rng amp_rng(key, stream::amplitude, 0, 0);
  std::size_t pick = static_cast<std::size_t>(
      amp_rng.uniform() * static_cast<double>(cands.size()));
  if (pick >= cands.size()) pick = cands.size() - 1;

  ModelParams theta;
  theta.A = cands.A[pick];
  theta.B = cands.B[pick];
  theta.b = pi;
  theta.sigma2 = init_sigma2(s, res.smoothed);
  const ProcessTriple triple =
      init_process_params(s, theta.A, theta.B, theta.b, theta.sigma2, cfg, key);
  theta.a = triple.a;
  theta.beta = triple.beta;
  theta.omega2 = triple.omega2;
  theta.refresh_derived(s.delta);
  theta.validate(s.delta);

  res.theta0 = theta;
  res.a0 = theta.a;
  return res;
}

}  // namespace cyclewarp
