#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spinsim/ensemble.hpp"
#include "spinsim/model.hpp"
#include "spinsim/noise.hpp"
#include "spinsim/sequences.hpp"

namespace spinsim {

enum class AngularUnits { Bare, TwoPi };

// Where cluster couplings come from for each dipolar realization.
struct EqualCouplings { double omega0 = 0.0; };
using CouplingSource = std::variant<CouplingDistribution, CouplingMatrix, EqualCouplings>;

struct SimulationConfig {
    int cluster_size = 6;
    CouplingSource couplings = EqualCouplings{0.0};
    PulseSchedule schedule;
    std::optional<NoiseParams> noise;
    double dt = 0.0;
    double t_max = 0.0;
    int sample_stride = 1;
    int n_dipolar_realizations = 1;
    int n_noise_realizations = 1;
    std::uint64_t master_seed = 0;
    AngularUnits units = AngularUnits::Bare;
    DrawMode draw_mode = DrawMode::IidPairs;

    void check() const;
};

struct TraceResult {
    std::vector<double> times;
    std::vector<double> sx_mean;
    std::vector<double> sx_std;
    long n_realizations = 0;
    std::string fingerprint;   // hash of resolved config + seed
};

// Recommended step: dt <= min(tau_c/20, 0.05/Omega_max, 0.02/(4 w0_max)).
double default_dt(const SimulationConfig& config);

// Single realization: piecewise-constant H per step. Ideal pulses snap to
// the dt grid (error > dt/2 throws) and apply as instantaneous rotations.
// Finite-width pulses keep their exact boundaries and propagate with one
// eigendecomposition of (H_dipolar + B sum sz + Omega_pulse S_axis), the bath
// value frozen at pulse entry (chunked if the pulse outlasts tau_c/10).
// Free/drive gaps: noiseless gaps use one cached eigendecomposition; noisy
// free gaps use the exact commuting split U_dip(dt) * diag(bath phases);
// noisy driven gaps re-exponentiate per dt step. Samples land exactly on
// t_k = k * sample_stride * dt; propagation splits at sample instants.
TraceResult evolve_trace(const CouplingMatrix& couplings,
                         const PulseSchedule& schedule,
                         const std::optional<NoiseParams>& noise,
                         double dt, double t_max, std::uint64_t seed,
                         int sample_stride = 1);

// Mean/std over n_dipolar x n_noise crossed realizations; realization (i,j)
// seeded from derive_seed(master_seed, i, j). Threaded; reduction is in fixed
// (i,j) order so results are independent of thread count.
TraceResult ensemble_average(const SimulationConfig& config, int threads = 0);

struct ConvergenceEntry {
    int cluster_size = 0;
    TraceResult trace;
};
std::vector<ConvergenceEntry> convergence_scan(const SimulationConfig& config,
                                               const std::vector<int>& cluster_sizes,
                                               int threads = 0);

// Mean of the last `fraction` of the trace; the plateau estimator used by
// spin-lock experiments.
double late_window_mean(const TraceResult& trace, double fraction = 0.25);

} // namespace spinsim
