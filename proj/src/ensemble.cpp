#include "spinsim/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "spinsim/rng.hpp"

namespace spinsim {

EnsembleSpec EnsembleSpec::from_density(double density_cm2, double area_um2, double J0) {
    if (density_cm2 <= 0 || area_um2 <= 0)
        throw Error(errc::BAD_ARGUMENT, "density and area must be positive");
    EnsembleSpec spec;
    spec.density_cm2 = density_cm2;
    spec.area_um2 = area_um2;
    spec.J0 = J0;
    spec.n_spins = static_cast<int>(std::lround(density_cm2 * area_um2 * 1e-8));
    if (spec.n_spins < 2)
        throw Error(errc::BAD_ARGUMENT, "density * area gives fewer than 2 spins");
    return spec;
}

double EnsembleSpec::disc_radius_nm() const {
    return std::sqrt(area_um2 * 1e6 / M_PI);
}

void CouplingDistribution::check() const {
    if (probabilities.empty() || bin_edges.size() != probabilities.size() + 1)
        throw Error(errc::EMPTY_DISTRIBUTION, "histogram has no bins");
    for (size_t i = 1; i < bin_edges.size(); ++i)
        if (bin_edges[i] <= bin_edges[i - 1])
            throw Error(errc::BAD_ARGUMENT, "bin edges not increasing");
    double total = 0.0;
    for (double p : probabilities) {
        if (p < 0) throw Error(errc::BAD_ARGUMENT, "negative bin probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw Error(errc::BAD_ARGUMENT, "bin probabilities sum to " + std::to_string(total));
}

std::vector<Position> sample_positions(const EnsembleSpec& spec, std::uint64_t seed) {
    const double R = spec.disc_radius_nm();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Position> pts(spec.n_spins);
    for (auto& p : pts) {
        double r = R * std::sqrt(unit(rng));
        double theta = 2.0 * M_PI * unit(rng);
        p.x_nm = r * std::cos(theta);
        p.y_nm = r * std::sin(theta);
    }
    return pts;
}

namespace {

// numpy-style linear-interpolation quantile of a sorted sample
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double h = (sorted.size() - 1) * q;
    const size_t lo = static_cast<size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
}

double nn_strength(const std::vector<Position>& pts, size_t i, double J0) {
    double best_d2 = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < pts.size(); ++j) {
        if (j == i) continue;
        double dx = pts[i].x_nm - pts[j].x_nm;
        double dy = pts[i].y_nm - pts[j].y_nm;
        best_d2 = std::min(best_d2, dx * dx + dy * dy);
    }
    return J0 / std::pow(best_d2, 1.5);
}

} // namespace

CouplingDistribution nn_coupling_histogram(const EnsembleSpec& spec, int realizations,
                                           int bins, std::uint64_t seed) {
    if (realizations < 1) throw Error(errc::BAD_ARGUMENT, "need at least one realization");
    if (bins < 1) throw Error(errc::BAD_ARGUMENT, "need at least one bin");
    if (spec.n_spins < 2)
        throw Error(errc::BAD_ARGUMENT, "nearest-neighbor statistics need >= 2 spins");

    std::vector<double> pooled;
    pooled.reserve(static_cast<size_t>(realizations) * spec.n_spins);
    for (int r = 0; r < realizations; ++r) {
        auto pts = sample_positions(spec, derive_seed(seed, r, 0));
        for (size_t i = 0; i < pts.size(); ++i)
            pooled.push_back(nn_strength(pts, i, spec.J0));
    }

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    const double cap = quantile_sorted(sorted, kHistogramCapQuantile);

    CouplingDistribution dist;
    dist.sample_count = static_cast<long>(pooled.size());
    dist.bin_edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) dist.bin_edges[b] = cap * b / bins;
    dist.probabilities.assign(bins, 0.0);

    long kept = 0;
    for (double w : pooled) {
        if (w > cap) continue;
        int b = std::min(bins - 1, static_cast<int>(w / cap * bins));
        dist.probabilities[b] += 1.0;
        ++kept;
    }
    if (kept == 0) throw Error(errc::EMPTY_DISTRIBUTION, "no samples under the cap");
    for (double& p : dist.probabilities) p /= kept;

    double mean = 0.0;
    for (int b = 0; b < bins; ++b)
        mean += dist.probabilities[b] * 0.5 * (dist.bin_edges[b] + dist.bin_edges[b + 1]);
    dist.mean_strength = mean;
    return dist;
}

CouplingMatrix draw_cluster_couplings(const CouplingDistribution& dist, int cluster_size,
                                      std::uint64_t seed, DrawMode mode) {
    if (mode == DrawMode::Positions)
        throw Error(errc::BAD_ARGUMENT,
                    "positions mode needs the geometry; use draw_cluster_couplings_positions");
    dist.check();
    if (cluster_size < 2) throw Error(errc::BAD_ARGUMENT, "cluster needs >= 2 spins");
    if (cluster_size > kMaxSpins)
        throw Error(errc::DIM_TOO_LARGE, "cluster of " + std::to_string(cluster_size) + " spins");

    std::vector<double> cdf(dist.probabilities.size());
    double cum = 0.0;
    for (size_t b = 0; b < dist.probabilities.size(); ++b) {
        cum += dist.probabilities[b];
        cdf[b] = cum;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    CouplingMatrix c = CouplingMatrix::zero(cluster_size);
    for (int i = 0; i < cluster_size; ++i) {
        for (int j = i + 1; j < cluster_size; ++j) {
            double u = unit(rng) * cum;
            size_t b = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
            if (b >= dist.probabilities.size()) b = dist.probabilities.size() - 1;
            double w = dist.bin_edges[b] +
                       unit(rng) * (dist.bin_edges[b + 1] - dist.bin_edges[b]);
            c.w(i, j) = c.w(j, i) = w;
        }
    }
    return c;
}

CouplingMatrix draw_cluster_couplings_positions(const EnsembleSpec& spec, int cluster_size,
                                                std::uint64_t seed) {
    if (cluster_size < 2) throw Error(errc::BAD_ARGUMENT, "cluster needs >= 2 spins");
    if (cluster_size > kMaxSpins)
        throw Error(errc::DIM_TOO_LARGE, "cluster of " + std::to_string(cluster_size) + " spins");
    EnsembleSpec cluster_spec = spec;
    cluster_spec.n_spins = cluster_size;
    auto pts = sample_positions(cluster_spec, seed);
    CouplingMatrix c = CouplingMatrix::zero(cluster_size);
    for (int i = 0; i < cluster_size; ++i) {
        for (int j = i + 1; j < cluster_size; ++j) {
            double dx = pts[i].x_nm - pts[j].x_nm;
            double dy = pts[i].y_nm - pts[j].y_nm;
            double d2 = dx * dx + dy * dy;
            double w = spec.J0 / std::pow(d2, 1.5);
            c.w(i, j) = c.w(j, i) = w;
        }
    }
    return c;
}

double typical_strength(const CouplingDistribution& dist) {
    dist.check();
    double mean = 0.0;
    for (size_t b = 0; b < dist.probabilities.size(); ++b)
        mean += dist.probabilities[b] * 0.5 * (dist.bin_edges[b] + dist.bin_edges[b + 1]);
    return mean;
}

const EnsemblePreset& preset(const std::string& name) {
    static const std::vector<EnsemblePreset> presets = [] {
        std::vector<EnsemblePreset> v;
        v.push_back({"paper-60hz", EnsembleSpec::from_density(1e10, 4.64), 2 * M_PI * 60.0});
        v.push_back({"paper-10khz", EnsembleSpec{9980 / 4.5e-8, 4.5, 9980, kJ0}, 2 * M_PI * 1e4});
        v.push_back({"paper-1mhz", EnsembleSpec{9980 / 0.46e-8, 0.46, 9980, kJ0}, 2 * M_PI * 1e6});
        return v;
    }();
    for (const auto& p : presets)
        if (p.name == name) return p;
    std::string known;
    for (const auto& p : presets) known += (known.empty() ? "" : ", ") + p.name;
    throw Error(errc::BAD_ARGUMENT, "unknown preset '" + name + "' (known: " + known + ")");
}

std::vector<std::string> preset_names() {
    return {"paper-60hz", "paper-10khz", "paper-1mhz"};
}

} // namespace spinsim
