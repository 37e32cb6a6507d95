#pragma once
#include <string>
#include <vector>

#include "spinsim/engine.hpp"

namespace spinsim {

struct SpectrumEstimate {
    std::vector<double> omega;        // angular 1/s, non-negative, increasing
    std::vector<double> omega_over_omega0;
    std::vector<double> magnitude;
    double omega0 = 0.0;
    double window_power_scale = 1.0;  // Hann compensation used by Parseval checks
};

enum class DecayModel { Exponential, Stretched };

struct DecayFit {
    DecayModel model = DecayModel::Exponential;
    double T = 0.0;        // seconds
    double p = 1.0;        // stretch exponent
    double residual = 0.0; // rms of fit residuals
};

// Magnitude spectrum of (sx_mean - mean), Hann window, zero padding x4.
// Requires a uniform grid and >= 64 samples.
SpectrumEstimate fourier_spectrum(const TraceResult& trace, double omega0);

struct Peak {
    double omega = 0.0;      // parabolically interpolated
    double magnitude = 0.0;
};

// Interior local maxima above `threshold` * global max, largest first.
// Parabolic interpolation over the 3 bins around each maximum.
std::vector<Peak> find_peaks(const SpectrumEstimate& spectrum,
                             double threshold = 0.1,
                             double min_omega = 0.0);

// Dominant-peak frequency / 4 with +-25% uncertainty. The dominant peak is
// the largest interior local maximum at omega >= min_omega; it must exceed
// 3x the median magnitude (noise floor), reach half the maximum magnitude in
// that range (window-leakage ripples of a monotone decay pedestal pass the
// median floor but stay far below the pedestal itself), and rise from a
// valley: some bin between min_omega and the peak must sit below half the
// peak height. A decay pedestal peaks right at the low edge of the range
// with no valley to its left, so it is rejected as NO_PEAK rather than
// mistaken for a spectral line.
struct StrengthEstimate {
    double omega0 = 0.0;
    double uncertainty = 0.0;   // omega0/4 by the 4w0 +- w0 rule
};
StrengthEstimate extract_typical_strength(const SpectrumEstimate& spectrum,
                                          double min_omega = 0.0);

// Sum of magnitudes over [center - halfwidth, center + halfwidth].
double band_area(const SpectrumEstimate& spectrum, double center, double halfwidth);

// Least squares of sx_mean against exp(-(t/T)^p); p fixed to 1 for the
// exponential model. Trace must decay below 1/e within the window.
DecayFit fit_decay(const TraceResult& trace, DecayModel model);

// First time the trace drops below 1/e, linearly interpolated; NO_DECAY if
// it never does.
double one_over_e_time(const TraceResult& trace);

} // namespace spinsim
