#include "cyclewarp/preprocess.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cyclewarp {

namespace detail {

void fft_pow2(std::vector<double>& re, std::vector<double>& im, bool inverse) {
  const std::size_t n = re.size();
  if (n != im.size() || n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_pow2: size must be a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? two_pi : -two_pi) / static_cast<double>(len);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (std::size_t i = 0; i < n; i += len) {
      double cr = 1.0, ci = 0.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::size_t u = i + k, v = i + k + len / 2;
        const double tr = re[v] * cr - im[v] * ci;
        const double ti = re[v] * ci + im[v] * cr;
        re[v] = re[u] - tr;
        im[v] = im[u] - ti;
        re[u] += tr;
        im[u] += ti;
        const double ncr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = ncr;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] *= inv;
      im[i] *= inv;
    }
  }
}

}  // namespace detail

std::vector<double> center(const std::vector<double>& y, double* ybar) {
  if (y.empty()) throw std::invalid_argument("center: empty signal");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  if (ybar) *ybar = mean;
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] - mean;
  return out;
}

std::vector<double> hilbert_envelope(const std::vector<double>& y) {
  const std::size_t n = y.size();
  if (n < 2) throw std::invalid_argument("hilbert_envelope: need at least two samples");
  const std::size_t padded = std::bit_ceil(n);
  const std::size_t left = (padded - n) / 2;
  const std::size_t right = padded - n - left;
  // Mirror padding (reflection without repeating the edge sample); the
  // padding never exceeds n - 1 samples per side because padded < 2n.
  std::vector<double> re(padded, 0.0), im(padded, 0.0);
  for (std::size_t k = 0; k < left; ++k) re[left - 1 - k] = y[std::min(k + 1, n - 1)];
  for (std::size_t i = 0; i < n; ++i) re[left + i] = y[i];
  for (std::size_t k = 0; k < right; ++k)
    re[left + n + k] = y[n - 1 - std::min(k + 1, n - 1)];

  detail::fft_pow2(re, im, false);
  // Analytic signal: keep DC and Nyquist, double positive frequencies,
  // zero the negative ones.
  for (std::size_t k = 1; k < padded / 2; ++k) {
    re[k] *= 2.0;
    im[k] *= 2.0;
  }
  for (std::size_t k = padded / 2 + 1; k < padded; ++k) {
    re[k] = 0.0;
    im[k] = 0.0;
  }
  detail::fft_pow2(re, im, true);

  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i)
    env[i] = std::hypot(re[left + i], im[left + i]);
  return env;
}

std::vector<double> rolling_mean(const std::vector<double>& v, std::size_t window) {
  if (v.empty()) throw std::invalid_argument("rolling_mean: empty input");
  if (window == 0) throw std::invalid_argument("rolling_mean: window must be >= 1");
  const std::size_t n = v.size();
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  // Prefix sums make each shrunken window O(1).
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = std::min({half, i, n - 1 - i});
    out[i] = (prefix[i + h + 1] - prefix[i - h]) / static_cast<double>(2 * h + 1);
  }
  return out;
}

Signal normalize_amplitude(const Signal& raw, double window_fraction) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw std::invalid_argument("normalize_amplitude: window_fraction in (0, 1]");
  double ybar = 0.0;
  std::vector<double> centered = center(raw.y, &ybar);
  const std::size_t window = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::lround(window_fraction * static_cast<double>(raw.size()))));
  std::vector<double> scale = rolling_mean(hilbert_envelope(centered), window);
  for (std::size_t i = 0; i < scale.size(); ++i) {
    if (!(scale[i] > 1e-12))
      throw std::runtime_error(
          "normalize_amplitude: envelope vanishes near sample " + std::to_string(i) +
          "; cannot divide it out");
  }
  Signal out;
  out.x = raw.x;
  out.delta = raw.delta;
  out.y.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out.y[i] = centered[i] / scale[i];
  out.preproc.ybar = ybar;
  out.preproc.scale = std::move(scale);
  out.preproc.window = window;
  out.preproc.normalized = true;
  return out;
}

std::vector<double> loess_smooth(const std::vector<double>& x,
                                 const std::vector<double>& y, double span) {
  const std::size_t n = x.size();
  if (n != y.size() || n == 0)
    throw std::invalid_argument("loess_smooth: mismatched or empty inputs");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1]))
      throw std::invalid_argument("loess_smooth: x must be strictly increasing");
  if (!(span > 0.0 && span <= 1.0))
    throw std::invalid_argument("loess_smooth: span must lie in (0, 1]");
  // Clamp the window to at least 4 points so short records still smooth
  // sensibly at small spans; only signals too short for any local line fail.
  if (n < 4)
    throw std::invalid_argument("loess_smooth: need at least 4 points");
  const std::size_t k = std::max<std::size_t>(
      4, static_cast<std::size_t>(std::lround(span * static_cast<double>(n))));

  std::vector<double> out(n);
  std::size_t lo = 0;  // left edge of the k-nearest window, advances with i
  for (std::size_t i = 0; i < n; ++i) {
    // Slide the window so it holds the k nearest abscissae to x[i].
    while (lo + k < n &&
           x[lo + k] - x[i] < x[i] - x[lo]) {
      ++lo;
    }
    if (lo + k > n) lo = n - k;
    const std::size_t hi = lo + k - 1;
    const double dmax =
        std::max(std::fabs(x[i] - x[lo]), std::fabs(x[hi] - x[i]));
    // Weighted least squares for a local line a0 + a1 * (x - x_i).
    double sw = 0.0, swx = 0.0, swxx = 0.0, swy = 0.0, swxy = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double d = dmax > 0.0 ? std::fabs(x[j] - x[i]) / dmax : 0.0;
      const double t = 1.0 - d * d * d;
      const double w = t * t * t;
      const double dx = x[j] - x[i];
      sw += w;
      swx += w * dx;
      swxx += w * dx * dx;
      swy += w * y[j];
      swxy += w * dx * y[j];
    }
    const double det = sw * swxx - swx * swx;
    if (std::fabs(det) > 1e-300) {
      out[i] = (swxx * swy - swx * swxy) / det;  // intercept at x_i
    } else {
      out[i] = swy / sw;  // degenerate design: fall back to the local mean
    }
  }
  return out;
}

}  // namespace cyclewarp
