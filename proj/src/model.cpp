#include "cyclewarp/model.hpp"

#include <cmath>
#include <limits>

#include "cyclewarp/cir.hpp"

namespace cyclewarp {

double wrap_phase(double b) noexcept {
  double r = std::fmod(b, two_pi);
  if (r < 0.0) r += two_pi;
  // Adding two_pi to a tiny negative remainder rounds to two_pi itself;
  // fold that boundary case back so the result stays inside [0, 2*pi).
  if (r >= two_pi) r = 0.0;
  return r;
}

double phase_distance(double b1, double b2) noexcept {
  const double d = std::fabs(wrap_phase(b1) - wrap_phase(b2));
  return d > pi ? two_pi - d : d;
}

void ModelParams::refresh_derived(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("ModelParams: delta must be positive");
  rho = std::exp(-delta * beta);
  gamma2 = a * omega2 / (2.0 * beta);
}

void ModelParams::validate(double delta) const {
  if (!(delta > 0.0)) throw std::invalid_argument("ModelParams: delta must be positive");
  if (!(A > 0.0)) throw std::invalid_argument("ModelParams: A must be positive");
  if (B < 0.0) throw std::invalid_argument("ModelParams: B must be nonnegative");
  if (A < B) throw std::invalid_argument("ModelParams: need A >= B (identifiability)");
  if (!(b >= 0.0 && b < two_pi))
    throw std::invalid_argument("ModelParams: phase b must lie in [0, 2*pi)");
  if (!(a > 0.0)) throw std::invalid_argument("ModelParams: a must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("ModelParams: beta must be positive");
  if (!(omega2 > 0.0)) throw std::invalid_argument("ModelParams: omega2 must be positive");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("ModelParams: sigma2 must be positive");
  const double rho_expect = std::exp(-delta * beta);
  if (std::fabs(rho - rho_expect) > 1e-9 * rho_expect)
    throw std::invalid_argument("ModelParams: rho is not exp(-delta*beta)");
}

bool ModelParams::feller_ok() const noexcept { return 2.0 * a * beta >= omega2; }

Signal::Signal(std::vector<double> y_in, double delta_in)
    : y(std::move(y_in)), delta(delta_in) {
  if (!(delta > 0.0)) throw std::invalid_argument("Signal: delta must be positive");
  if (y.size() < 2) throw std::invalid_argument("Signal: need at least two samples");
  x.resize(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) * delta;
}

Signal::Signal(std::vector<double> x_in, std::vector<double> y_in)
    : x(std::move(x_in)), y(std::move(y_in)) {
  if (x.size() != y.size()) throw std::invalid_argument("Signal: x and y lengths differ");
  if (y.size() < 2) throw std::invalid_argument("Signal: need at least two samples");
  delta = x[1] - x[0];
  if (!(delta > 0.0)) throw std::invalid_argument("Signal: abscissae must increase");
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double step = x[i] - x[i - 1];
    if (std::fabs(step - delta) > 1e-9 * std::max(1.0, std::fabs(delta)))
      throw std::invalid_argument("Signal: samples are not equispaced at index " +
                                  std::to_string(i));
  }
}

double signal_mean(double g, const ModelParams& p) noexcept {
  const double u = g + p.b;
  const double s = std::sin(u);
  // cos(2u) = 1 - 2 sin^2(u); one trig call on the hot path.
  return p.A * s - p.B * (1.0 - 2.0 * s * s);
}

std::vector<double> accumulate_growth(const std::vector<double>& xi, double delta,
                                      Quadrature rule) {
  if (!(delta > 0.0))
    throw std::invalid_argument("accumulate_growth: delta must be positive");
  if (xi.empty()) throw std::invalid_argument("accumulate_growth: empty rate vector");
  std::vector<double> g(xi.size());
  g[0] = 0.0;
  if (rule == Quadrature::trapezoid) {
    for (std::size_t i = 1; i < xi.size(); ++i)
      g[i] = g[i - 1] + 0.5 * delta * (xi[i - 1] + xi[i]);
  } else {
    for (std::size_t i = 1; i < xi.size(); ++i) g[i] = g[i - 1] + delta * xi[i];
  }
  return g;
}

double cycle_count(const GrowthPath& path) {
  if (path.g.empty()) throw std::invalid_argument("cycle_count: empty path");
  return path.g.back() / two_pi;
}

double complete_log_likelihood(const Signal& s, const GrowthPath& path,
                               const ModelParams& p) {
  const std::size_t n_obs = s.size();
  if (path.xi.size() != n_obs || path.g.size() != n_obs)
    throw std::invalid_argument("complete_log_likelihood: path/signal length mismatch");
  if (!(p.sigma2 > 0.0))
    throw std::invalid_argument("complete_log_likelihood: sigma2 must be positive");

  double sq = 0.0;
  for (std::size_t i = 0; i < n_obs; ++i) {
    const double r = s.y[i] - signal_mean(path.g[i], p);
    sq += r * r;
  }
  double ll = -0.5 * sq / p.sigma2 -
              0.5 * static_cast<double>(n_obs) * std::log(p.sigma2);

  const TransitionLaw law(p, s.delta);
  for (std::size_t i = 1; i < n_obs; ++i) {
    const double term = transition_log_density(law, path.xi[i - 1], path.xi[i]);
    if (!std::isfinite(term))
      throw DegeneratePath("complete_log_likelihood: zero transition density at step " +
                           std::to_string(i));
    ll += term;
  }
  return ll;
}

}  // namespace cyclewarp
