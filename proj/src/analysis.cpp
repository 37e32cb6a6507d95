#include "spinsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

namespace spinsim {

namespace {

// FFTW plan creation is not thread-safe; execution of a finished plan is.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

void check_uniform(const TraceResult& trace) {
    const auto& t = trace.times;
    if (t.size() != trace.sx_mean.size())
        throw Error(errc::BAD_ARGUMENT, "times and sx_mean lengths differ");
    if (t.size() < 2) throw Error(errc::BAD_ARGUMENT, "trace too short");
    const double dt = t[1] - t[0];
    if (dt <= 0) throw Error(errc::NONUNIFORM_GRID, "time grid must increase");
    const double span = t.back() - t.front();
    const double tol = 1e-6 * span + 1e-15;
    for (size_t k = 0; k < t.size(); ++k)
        if (std::abs(t[k] - (t.front() + k * dt)) > tol)
            throw Error(errc::NONUNIFORM_GRID,
                        "sample " + std::to_string(k) + " is off the uniform grid");
}

struct Candidate {
    size_t bin = 0;
    double omega = 0.0;
    double magnitude = 0.0;
};

// parabolic refinement over the 3 bins around an interior maximum
Candidate refine(const SpectrumEstimate& sp, size_t j) {
    const double m0 = sp.magnitude[j - 1], m1 = sp.magnitude[j], m2 = sp.magnitude[j + 1];
    const double denom = m0 - 2.0 * m1 + m2;
    double delta = 0.0;
    if (denom < 0.0) delta = 0.5 * (m0 - m2) / denom;
    delta = std::clamp(delta, -0.5, 0.5);
    const double res = sp.omega[1] - sp.omega[0];
    Candidate c;
    c.bin = j;
    c.omega = sp.omega[j] + delta * res;
    c.magnitude = m1 - 0.25 * (m0 - m2) * delta;
    return c;
}

std::vector<Candidate> interior_maxima(const SpectrumEstimate& sp, double min_omega) {
    std::vector<Candidate> out;
    for (size_t j = 1; j + 1 < sp.magnitude.size(); ++j) {
        if (sp.omega[j] < min_omega) continue;
        if (sp.magnitude[j] >= sp.magnitude[j - 1] && sp.magnitude[j] > sp.magnitude[j + 1])
            out.push_back(refine(sp, j));
    }
    return out;
}

} // namespace

SpectrumEstimate fourier_spectrum(const TraceResult& trace, double omega0) {
    if (omega0 <= 0) throw Error(errc::BAD_ARGUMENT, "omega0 must be > 0");
    check_uniform(trace);
    const size_t n = trace.sx_mean.size();
    if (n < 64) throw Error(errc::BAD_ARGUMENT, "need at least 64 samples for a spectrum");
    const double dt = trace.times[1] - trace.times[0];

    double mean = 0.0;
    for (double v : trace.sx_mean) mean += v;
    mean /= n;

    double var = 0.0, windowed_power = 0.0;
    const size_t m = 4 * n; // zero padding x4
    std::vector<double> in(m, 0.0);
    for (size_t k = 0; k < n; ++k) {
        const double x = trace.sx_mean[k] - mean;
        const double h = 0.5 * (1.0 - std::cos(2.0 * M_PI * k / (n - 1)));
        in[k] = x * h;
        var += x * x;
        windowed_power += in[k] * in[k];
    }
    var /= n;

    std::vector<std::complex<double>> out(m / 2 + 1);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(),
                                              reinterpret_cast<fftw_complex*>(out.data()),
                                              FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    // normalize so that sum(magnitude^2) over the one-sided bins equals the
    // time-domain variance (discrete Parseval with the window compensated)
    const double denom = m * windowed_power;
    const double c = denom > 0 ? var / denom : 0.0;

    SpectrumEstimate sp;
    sp.omega0 = omega0;
    const size_t bins = m / 2 + 1;
    sp.omega.resize(bins);
    sp.omega_over_omega0.resize(bins);
    sp.magnitude.resize(bins);
    for (size_t j = 0; j < bins; ++j) {
        sp.omega[j] = 2.0 * M_PI * j / (m * dt);
        sp.omega_over_omega0[j] = sp.omega[j] / omega0;
        const double fold = (j == 0 || j == bins - 1) ? 1.0 : 2.0;
        sp.magnitude[j] = std::sqrt(c * fold) * std::abs(out[j]);
    }
    sp.window_power_scale = windowed_power > 0 ? var * n / windowed_power : 8.0 / 3.0;
    return sp;
}

std::vector<Peak> find_peaks(const SpectrumEstimate& spectrum, double threshold,
                             double min_omega) {
    if (spectrum.magnitude.size() < 3)
        throw Error(errc::BAD_ARGUMENT, "spectrum too short for peak finding");
    const double global_max =
        *std::max_element(spectrum.magnitude.begin(), spectrum.magnitude.end());
    std::vector<Peak> peaks;
    for (const auto& c : interior_maxima(spectrum, min_omega)) {
        if (spectrum.magnitude[c.bin] < threshold * global_max) continue;
        peaks.push_back(Peak{c.omega, c.magnitude});
    }
    std::sort(peaks.begin(), peaks.end(),
              [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
    return peaks;
}

StrengthEstimate extract_typical_strength(const SpectrumEstimate& spectrum,
                                          double min_omega) {
    if (spectrum.magnitude.size() < 3)
        throw Error(errc::BAD_ARGUMENT, "spectrum too short");
    std::vector<double> sorted = spectrum.magnitude;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];

    double range_max = 0.0;
    for (size_t j = 0; j < spectrum.magnitude.size(); ++j)
        if (spectrum.omega[j] >= min_omega)
            range_max = std::max(range_max, spectrum.magnitude[j]);

    const auto cands = interior_maxima(spectrum, min_omega);
    const Candidate* best = nullptr;
    for (const auto& c : cands)
        if (!best || c.magnitude > best->magnitude) best = &c;

    if (!best || best->magnitude <= 3.0 * median || best->magnitude < 0.5 * range_max)
        throw Error(errc::NO_PEAK, "no dominant spectral line above the noise floor");

    // a real line rises out of a valley; a decay pedestal sits at the low
    // edge of the range at full height and never dips below half the peak
    bool has_left_valley = false;
    for (size_t j = 0; j < spectrum.magnitude.size(); ++j)
        if (spectrum.omega[j] >= min_omega && spectrum.omega[j] < best->omega &&
            spectrum.magnitude[j] <= 0.5 * best->magnitude) {
            has_left_valley = true;
            break;
        }
    if (!has_left_valley)
        throw Error(errc::NO_PEAK, "dominant maximum is a low-frequency pedestal, not a line");

    StrengthEstimate est;
    est.omega0 = best->omega / 4.0;
    est.uncertainty = est.omega0 / 4.0;
    return est;
}

double band_area(const SpectrumEstimate& spectrum, double center, double halfwidth) {
    if (halfwidth < 0) throw Error(errc::BAD_ARGUMENT, "halfwidth must be >= 0");
    double acc = 0.0;
    for (size_t j = 0; j < spectrum.omega.size(); ++j)
        if (std::abs(spectrum.omega[j] - center) <= halfwidth) acc += spectrum.magnitude[j];
    return acc;
}

DecayFit fit_decay(const TraceResult& trace, DecayModel model) {
    const auto& t = trace.times;
    const auto& x = trace.sx_mean;
    if (t.size() != x.size() || t.size() < 3)
        throw Error(errc::BAD_ARGUMENT, "trace too short for a decay fit");
    const double floor_1e = std::exp(-1.0);
    if (*std::min_element(x.begin(), x.end()) > floor_1e)
        throw Error(errc::NO_DECAY, "trace never decays below 1/e in the window");

    DecayFit fit;
    fit.model = model;
    if (model == DecayModel::Exponential) {
        // ln x = -t/T, least squares for the slope. Weight by x^2: for a
        // constant absolute noise level on x the variance of ln x grows as
        // 1/x^2, and unweighted log-space fits let the noisy tail near the
        // floor dominate the slope.
        double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
        for (size_t k = 0; k < t.size(); ++k) {
            if (x[k] < 0.05) continue;
            const double y = std::log(x[k]);
            const double w = x[k] * x[k];
            sw += w;
            st += w * t[k];
            sy += w * y;
            stt += w * t[k] * t[k];
            sty += w * t[k] * y;
        }
        long used_pts = 0;
        for (size_t k = 0; k < t.size(); ++k)
            if (x[k] >= 0.05) ++used_pts;
        if (used_pts < 3)
            throw Error(errc::NO_DECAY, "too few usable samples above the fit floor");
        const double denom = sw * stt - st * st;
        if (denom <= 0) throw Error(errc::NO_DECAY, "degenerate time grid");
        const double slope = (sw * sty - st * sy) / denom;
        if (slope >= 0) throw Error(errc::NO_DECAY, "no decaying trend");
        fit.T = -1.0 / slope;
        fit.p = 1.0;
    } else {
        // ln(-ln x) = p ln t - p ln T. Weight by (x ln x)^2, the inverse
        // variance of ln(-ln x) under constant absolute noise on x.
        double sw = 0, su = 0, sz = 0, suu = 0, suz = 0;
        long used_pts = 0;
        for (size_t k = 0; k < t.size(); ++k) {
            if (t[k] <= 0 || x[k] < 0.05 || x[k] >= 1.0 - 1e-12) continue;
            const double u = std::log(t[k]);
            const double lx = std::log(x[k]);
            const double z = std::log(-lx);
            const double w = x[k] * lx * x[k] * lx;
            ++used_pts;
            sw += w;
            su += w * u;
            sz += w * z;
            suu += w * u * u;
            suz += w * u * z;
        }
        if (used_pts < 3)
            throw Error(errc::NO_DECAY, "too few usable samples above the fit floor");
        const double denom = sw * suu - su * su;
        if (denom <= 0) throw Error(errc::NO_DECAY, "degenerate time grid");
        const double p = (sw * suz - su * sz) / denom;
        if (p <= 0) throw Error(errc::NO_DECAY, "no decaying trend");
        const double intercept = (sz - p * su) / sw;
        fit.p = p;
        fit.T = std::exp(-intercept / p);
    }

    double rss = 0.0;
    long used = 0;
    for (size_t k = 0; k < t.size(); ++k) {
        if (x[k] < 0.05) continue;
        const double modelled = std::exp(-std::pow(t[k] / fit.T, fit.p));
        rss += (x[k] - modelled) * (x[k] - modelled);
        ++used;
    }
    fit.residual = used ? std::sqrt(rss / used) : 0.0;
    return fit;
}

double one_over_e_time(const TraceResult& trace) {
    const auto& t = trace.times;
    const auto& x = trace.sx_mean;
    if (t.size() != x.size() || t.size() < 2)
        throw Error(errc::BAD_ARGUMENT, "trace too short");
    const double level = std::exp(-1.0);
    for (size_t k = 1; k < x.size(); ++k) {
        if (x[k] < level) {
            const double frac = (x[k - 1] - level) / (x[k - 1] - x[k]);
            return t[k - 1] + frac * (t[k] - t[k - 1]);
        }
    }
    throw Error(errc::NO_DECAY, "trace never drops below 1/e");
}

} // namespace spinsim
