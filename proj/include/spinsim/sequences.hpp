#pragma once
#include <optional>
#include <vector>

#include "spinsim/model.hpp"
#include "spinsim/spin_core.hpp"

namespace spinsim {

// A timed control event. duration == 0 means ideal (instantaneous) rotation;
// duration > 0 means a square drive segment of amplitude angle/(2*duration)
// along `axis` (so the nominal angle is exact).
struct PulseEvent {
    double start = 0.0;      // seconds
    double duration = 0.0;   // seconds, >= 0
    SignedAxis axis = SignedAxis::PlusX;
    double angle = 0.0;      // radians

    double end() const { return start + duration; }
    double drive_amplitude() const;   // angle/(2*duration); 0 for ideal
};

struct PulseSchedule {
    double total_time = 0.0;
    std::vector<PulseEvent> events;              // sorted by start
    std::optional<DriveSettings> continuous_drive;

    // sorted, non-overlapping, inside [0, total_time]; throws on violation
    void validate() const;
};

PulseSchedule build_free(double total_time);

// Continuous +x drive for the whole window, no pulse events.
PulseSchedule build_spinlock(double omega, double total_time);

// n_pulses repetitions of [tau/2 - pi_x - tau/2]; finite widths centered on
// the ideal instants (k + 1/2) tau. total_time = n_pulses * tau.
PulseSchedule build_cpmg(int n_pulses, double tau, double pulse_duration);

// Per repetition: 8 pi pulses, axes X,Y,X,Y,Y,X,Y,X, CPMG timing.
PulseSchedule build_xy8(int n_reps, double tau, double pulse_duration);

// Cycle of length 6*tau: delays (tau, tau, 2tau, tau, tau) with pi/2 pulses
// about (-x, +y, -y, +x). epsilon shifts pulse `shifted_pulse` (0-based,
// default 1 = second pulse) by epsilon*tau.
PulseSchedule build_wahuha(int n_reps, double tau, double pulse_duration,
                           double epsilon, int shifted_pulse = 1);

// CPMG backbone of n_cpmg periods; each period [k*tau, (k+1)*tau) is filled
// with `wahuha_reps_per_gap` full WAHUHA cycles (sub-delay tau/(6*reps)) and
// ends with the CPMG pi_x, so cycles never straddle a pi pulse.
// Pulse count = n_cpmg * (1 + 4*wahuha_reps_per_gap).
PulseSchedule build_combined(int n_cpmg, int wahuha_reps_per_gap, double tau_cpmg,
                             double pulse_duration);

// Zeroth-order average Hamiltonian by toggling-frame propagation:
//   (1/T) Sum_k dt_k U_k^dag H U_k,
// U_k = product of the ideal pulses before free interval k. Ideal schedules
// only. H_pair acts on 2 spins; the collective pulse rotations are applied
// to both.
HermitianOperator average_hamiltonian(const PulseSchedule& schedule,
                                      const HermitianOperator& H_pair);

// Two-spin pair Hamiltonians used by the average-Hamiltonian calculator.
HermitianOperator nv_pair_hamiltonian(double w);        // w (XX + YY - ZZ)
HermitianOperator spin_half_pair_hamiltonian(double w); // w (XX + YY - 2 ZZ)

// Coefficients of a two-spin operator on the {I,X,Y,Z}x{I,X,Y,Z} basis,
// keyed "XX", "XY", ..., excluding "II". Real for Hermitian inputs.
struct PauliCoefficient {
    char a = 'I', b = 'I';
    double value = 0.0;
};
std::vector<PauliCoefficient> pauli_decompose(const HermitianOperator& H_pair,
                                              double tol = 1e-14);

} // namespace spinsim
