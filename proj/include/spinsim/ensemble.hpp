#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "spinsim/model.hpp"

namespace spinsim {

// Quasi-2D ensemble geometry. n_spins = round(density * area).
struct EnsembleSpec {
    double density_cm2 = 0.0;   // spins per cm^2
    double area_um2 = 0.0;
    int n_spins = 0;
    double J0 = kJ0;            // angular 1/s nm^3

    static EnsembleSpec from_density(double density_cm2, double area_um2,
                                     double J0 = kJ0);
    double disc_radius_nm() const;
};

// Histogram of nearest-neighbor coupling strengths pooled over geometry
// realizations. The raw strength distribution is heavy-tailed (p(w) ~ w^-5/3,
// divergent mean), so the histogram range is capped at a fixed quantile of
// the pooled sample; mean_strength is the capped-histogram mean.
struct CouplingDistribution {
    std::vector<double> bin_edges;      // size bins+1, strictly increasing, 1/s
    std::vector<double> probabilities;  // size bins, sums to 1
    double mean_strength = 0.0;         // 1/s, from capped samples
    long sample_count = 0;

    int bins() const { return static_cast<int>(probabilities.size()); }
    void check() const;
};

// Fraction of pooled NN samples kept inside the histogram range.
inline constexpr double kHistogramCapQuantile = 0.77;

struct Position { double x_nm = 0.0, y_nm = 0.0; };

// n_spins points uniform on a disc of the given area. Deterministic per seed.
std::vector<Position> sample_positions(const EnsembleSpec& spec, std::uint64_t seed);

// Pool every spin's nearest-neighbor strength J0/r^3 over `realizations`
// geometries; histogram over [0, quantile cap] with `bins` uniform bins.
CouplingDistribution nn_coupling_histogram(const EnsembleSpec& spec,
                                           int realizations, int bins,
                                           std::uint64_t seed);

enum class DrawMode { IidPairs, Positions };

// Cluster coupling matrix. IidPairs: each of the C(c,2) strengths drawn
// i.i.d. from the histogram (uniform within the landing bin). Positions:
// c fresh points on the source geometry's disc, all-pairs J0/r^3.
CouplingMatrix draw_cluster_couplings(const CouplingDistribution& dist,
                                      int cluster_size, std::uint64_t seed,
                                      DrawMode mode = DrawMode::IidPairs);

// `positions` mode needs the geometry; carried alongside the histogram.
CouplingMatrix draw_cluster_couplings_positions(const EnsembleSpec& spec,
                                                int cluster_size,
                                                std::uint64_t seed);

// Histogram mean; normalizes omega/omega0 spectral axes and drive choices.
double typical_strength(const CouplingDistribution& dist);

struct EnsemblePreset {
    std::string name;
    EnsembleSpec spec;
    double nominal_omega0 = 0.0;  // the strength the preset is named for, 1/s
};

// paper-60hz: 464 spins on 4.64 um^2 at 1e10 cm^-2, nominal 2*pi*60 1/s.
// Denser presets scale per the quoted strengths (10 kHz, 1 MHz).
const EnsemblePreset& preset(const std::string& name);
std::vector<std::string> preset_names();

} // namespace spinsim
