#pragma once
// Signal preprocessing: centering, amplitude flattening, local smoothing.
//
// Real records drift in amplitude along the record.  The pipeline removes
// the mean, estimates the instantaneous amplitude as the magnitude of the
// analytic signal (computed by FFT), steadies that envelope with a rolling
// mean, and divides it out, so that the noise-free oscillation has peak
// height ~1 and the two-harmonic amplitudes satisfy A + B = 1.

#include <cstddef>
#include <vector>

#include "cyclewarp/model.hpp"

namespace cyclewarp {

/// Subtract the mean; optionally reports it.
std::vector<double> center(const std::vector<double>& y, double* ybar = nullptr);

/// Magnitude of the analytic signal.  The input is mirror-padded to the next
/// power of two to limit edge ringing, transformed, negative frequencies
/// zeroed (positive ones doubled), and transformed back.
std::vector<double> hilbert_envelope(const std::vector<double>& y);

/// Centered rolling mean with window `window` (full width, >= 1); near the
/// edges the window shrinks symmetrically so it stays centered.
std::vector<double> rolling_mean(const std::vector<double>& v, std::size_t window);

/// Full normalization: center, estimate the smoothed envelope with a rolling
/// window of round(window_fraction * length) samples, and divide it out.
/// The transform is recorded in the result's preproc field.  Throws
/// std::runtime_error if the envelope vanishes anywhere (naming the index).
Signal normalize_amplitude(const Signal& raw, double window_fraction = 0.10);

/// Local degree-1 regression smoother with tricube weights over the
/// span * size nearest neighbours, never fewer than 4.  Requires at least
/// 4 points and strictly increasing x.
std::vector<double> loess_smooth(const std::vector<double>& x,
                                 const std::vector<double>& y, double span);

namespace detail {
/// In-place iterative radix-2 FFT; size must be a power of two.
void fft_pow2(std::vector<double>& re, std::vector<double>& im, bool inverse);
}  // namespace detail

}  // namespace cyclewarp
