#pragma once
#include <string>

#include "spinsim/analysis.hpp"
#include "spinsim/analytic.hpp"
#include "spinsim/engine.hpp"

namespace spinsim {

// Stable fingerprint of a resolved run (FNV-1a over the canonical config
// text). Not cryptographic; just provenance.
std::string fingerprint(const std::string& canonical_text);

// trace CSV: t_seconds,sx_mean,sx_std,n_realizations
void write_trace_csv(const std::string& path, const TraceResult& trace);
TraceResult read_trace_csv(const std::string& path);

// distribution CSV: bin_low_hz,bin_high_hz,probability  (+ JSON sidecar)
void write_distribution_csv(const std::string& path, const CouplingDistribution& dist);
CouplingDistribution read_distribution_csv(const std::string& path);
void write_distribution_sidecar(const std::string& path,
                                const CouplingDistribution& dist,
                                const EnsembleSpec& spec, std::uint64_t seed,
                                double nominal_omega0);
// reads mean/nominal metadata back from a sidecar written above
struct DistributionMeta {
    double mean_strength = 0.0;
    double nominal_omega0 = 0.0;
};
DistributionMeta read_distribution_sidecar(const std::string& path);

// spectrum CSV: omega_rad_s,omega_over_omega0,magnitude
void write_spectrum_csv(const std::string& path, const SpectrumEstimate& spectrum);

// analytic line spectrum CSV: freq_multiple,weight with a trailing DC row
void write_lines_csv(const std::string& path, const EqualCouplingSpectrum& spec);

// fit JSON {model, T_seconds, p, residual}
void write_fit_json(const std::string& path, const DecayFit& fit);

// schedule JSON: ordered events {start_s, duration_s, axis, angle_rad}
// plus optional drive {omega_rad_s, axis}
void write_schedule_json(const std::string& path, const PulseSchedule& schedule);
PulseSchedule read_schedule_json(const std::string& path);

// noise trajectory CSV: t_seconds,B_rad_per_s
void write_trajectory_csv(const std::string& path, const NoiseTrajectory& traj);

// run metadata sidecar (full resolved config + seed + fingerprint)
void write_trace_sidecar(const std::string& path, const SimulationConfig& config,
                         const TraceResult& trace, const std::string& command_line);

std::string canonical_config_text(const SimulationConfig& config);

} // namespace spinsim
