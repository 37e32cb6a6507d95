#include "spinsim/sequences.hpp"

#include <algorithm>
#include <cmath>

namespace spinsim {

double PulseEvent::drive_amplitude() const {
    return duration > 0 ? angle / (2.0 * duration) : 0.0;
}

void PulseSchedule::validate() const {
    if (total_time <= 0) throw Error(errc::BAD_ARGUMENT, "schedule needs total_time > 0");
    const double tol = 1e-12 * total_time;
    double prev_end = 0.0;
    for (size_t k = 0; k < events.size(); ++k) {
        const auto& e = events[k];
        if (e.duration < 0) throw Error(errc::BAD_ARGUMENT, "negative pulse duration");
        if (e.start < -tol)
            throw Error(errc::SCHEDULE_BOUNDS, "event " + std::to_string(k) + " starts before 0");
        if (e.end() > total_time + tol)
            throw Error(errc::SCHEDULE_BOUNDS,
                        "event " + std::to_string(k) + " ends at " + std::to_string(e.end()) +
                            " past total_time " + std::to_string(total_time));
        if (k > 0 && e.start < prev_end - tol)
            throw Error(errc::SCHEDULE_OVERLAP,
                        "event " + std::to_string(k) + " starts at " + std::to_string(e.start) +
                            " before event " + std::to_string(k - 1) + " ends");
        prev_end = std::max(prev_end, e.end());
    }
}

PulseSchedule build_free(double total_time) {
    if (total_time <= 0) throw Error(errc::BAD_ARGUMENT, "total_time must be > 0");
    PulseSchedule s;
    s.total_time = total_time;
    return s;
}

PulseSchedule build_spinlock(double omega, double total_time) {
    if (omega < 0) throw Error(errc::BAD_ARGUMENT, "drive amplitude must be >= 0");
    PulseSchedule s = build_free(total_time);
    if (omega > 0) s.continuous_drive = DriveSettings{omega, SignedAxis::PlusX};
    return s;
}

namespace {

// pi or pi/2 pulse centered on the ideal instant
PulseEvent centered_pulse(double center, double duration, SignedAxis axis, double angle) {
    return PulseEvent{center - duration / 2.0, duration, axis, angle};
}

} // namespace

PulseSchedule build_cpmg(int n_pulses, double tau, double pulse_duration) {
    if (n_pulses < 1) throw Error(errc::BAD_ARGUMENT, "cpmg needs n_pulses >= 1");
    if (tau <= 0) throw Error(errc::BAD_ARGUMENT, "cpmg needs tau > 0");
    if (pulse_duration >= tau)
        throw Error(errc::SCHEDULE_OVERLAP, "pulse duration leaves no free evolution in the period");
    PulseSchedule s = build_free(n_pulses * tau);
    for (int k = 0; k < n_pulses; ++k)
        s.events.push_back(centered_pulse((k + 0.5) * tau, pulse_duration, SignedAxis::PlusX, M_PI));
    s.validate();
    return s;
}

PulseSchedule build_xy8(int n_reps, double tau, double pulse_duration) {
    if (n_reps < 1) throw Error(errc::BAD_ARGUMENT, "xy8 needs n_reps >= 1");
    if (tau <= 0) throw Error(errc::BAD_ARGUMENT, "xy8 needs tau > 0");
    if (pulse_duration >= tau)
        throw Error(errc::SCHEDULE_OVERLAP, "pulse duration leaves no free evolution in the period");
    static const SignedAxis pattern[8] = {SignedAxis::PlusX, SignedAxis::PlusY, SignedAxis::PlusX,
                                          SignedAxis::PlusY, SignedAxis::PlusY, SignedAxis::PlusX,
                                          SignedAxis::PlusY, SignedAxis::PlusX};
    PulseSchedule s = build_free(8.0 * n_reps * tau);
    for (int r = 0; r < n_reps; ++r)
        for (int k = 0; k < 8; ++k)
            s.events.push_back(
                centered_pulse((8 * r + k + 0.5) * tau, pulse_duration, pattern[k], M_PI));
    s.validate();
    return s;
}

PulseSchedule build_wahuha(int n_reps, double tau, double pulse_duration, double epsilon,
                           int shifted_pulse) {
    if (n_reps < 1) throw Error(errc::BAD_ARGUMENT, "wahuha needs n_reps >= 1");
    if (tau <= 0) throw Error(errc::BAD_ARGUMENT, "wahuha needs tau > 0");
    if (shifted_pulse < 0 || shifted_pulse > 3)
        throw Error(errc::BAD_ARGUMENT, "shifted_pulse must be 0..3");
    if (std::abs(epsilon) >= 1.0)
        throw Error(errc::BAD_ARGUMENT, "|epsilon| must be < 1 (fraction of tau)");
    // delays (tau, tau, 2tau, tau, tau): pulses at 1,2,4,5 tau within the cycle
    static const double offsets[4] = {1, 2, 4, 5};
    static const SignedAxis axes[4] = {SignedAxis::MinusX, SignedAxis::PlusY, SignedAxis::MinusY,
                                       SignedAxis::PlusX};
    PulseSchedule s = build_free(6.0 * n_reps * tau);
    for (int r = 0; r < n_reps; ++r)
        for (int k = 0; k < 4; ++k) {
            double off = offsets[k] + (k == shifted_pulse ? epsilon : 0.0);
            s.events.push_back(
                centered_pulse((6 * r + off) * tau, pulse_duration, axes[k], M_PI / 2.0));
        }
    s.validate();
    return s;
}

PulseSchedule build_combined(int n_cpmg, int wahuha_reps_per_gap, double tau_cpmg,
                             double pulse_duration) {
    if (n_cpmg < 1) throw Error(errc::BAD_ARGUMENT, "combined needs n_cpmg >= 1");
    if (wahuha_reps_per_gap < 0)
        throw Error(errc::BAD_ARGUMENT, "wahuha repetitions per gap must be >= 0");
    if (tau_cpmg <= 0) throw Error(errc::BAD_ARGUMENT, "combined needs tau > 0");
    PulseSchedule s = build_free(n_cpmg * tau_cpmg);
    static const double offsets[4] = {1, 2, 4, 5};
    static const SignedAxis axes[4] = {SignedAxis::MinusX, SignedAxis::PlusY, SignedAxis::MinusY,
                                       SignedAxis::PlusX};
    for (int k = 0; k < n_cpmg; ++k) {
        const double t0 = k * tau_cpmg;
        if (wahuha_reps_per_gap > 0) {
            const double sub_tau = tau_cpmg / (6.0 * wahuha_reps_per_gap);
            for (int r = 0; r < wahuha_reps_per_gap; ++r)
                for (int p = 0; p < 4; ++p)
                    s.events.push_back(centered_pulse(t0 + (6 * r + offsets[p]) * sub_tau,
                                                      pulse_duration, axes[p], M_PI / 2.0));
        }
        // the pi_x sits at the period boundary so no cycle straddles it
        double center = (k + 1) * tau_cpmg - pulse_duration / 2.0;
        s.events.push_back(centered_pulse(center, pulse_duration, SignedAxis::PlusX, M_PI));
    }
    s.validate();
    return s;
}

HermitianOperator nv_pair_hamiltonian(double w) {
    return dipolar_hamiltonian(CouplingMatrix::equal(2, w));
}

HermitianOperator spin_half_pair_hamiltonian(double w) {
    MatC XX = pauli_embed(Axis::X, 0, 2).matrix * pauli_embed(Axis::X, 1, 2).matrix;
    MatC YY = pauli_embed(Axis::Y, 0, 2).matrix * pauli_embed(Axis::Y, 1, 2).matrix;
    MatC ZZ = pauli_embed(Axis::Z, 0, 2).matrix * pauli_embed(Axis::Z, 1, 2).matrix;
    return HermitianOperator{2, w * (XX + YY - 2.0 * ZZ)};
}

HermitianOperator average_hamiltonian(const PulseSchedule& schedule,
                                      const HermitianOperator& H_pair) {
    schedule.validate();
    if (H_pair.n_spins != 2)
        throw Error(errc::BAD_ARGUMENT, "average hamiltonian works on two-spin operators");
    H_pair.check();
    for (const auto& e : schedule.events)
        if (e.duration > 0)
            throw Error(errc::FINITE_WIDTH_UNSUPPORTED,
                        "average hamiltonian needs ideal (zero-width) pulses");

    const long d = 4;
    MatC acc = MatC::Zero(d, d);
    MatC frame = MatC::Identity(d, d);  // control propagator so far
    MatC toggled = H_pair.matrix;
    double t_prev = 0.0;
    for (const auto& e : schedule.events) {
        acc += (e.start - t_prev) * toggled;
        // collective ideal rotation on both spins
        double half = 0.5 * e.angle * axis_sign(e.axis);
        MatC R = EigenSystem::of(collective_pauli(base_axis(e.axis), 2)).unitary(half);
        frame = R * frame;
        toggled = frame.adjoint() * H_pair.matrix * frame;
        t_prev = e.start;
    }
    acc += (schedule.total_time - t_prev) * toggled;
    acc /= schedule.total_time;
    // hermitize away the accumulation noise
    return HermitianOperator{2, (acc + acc.adjoint()) / 2.0};
}

std::vector<PauliCoefficient> pauli_decompose(const HermitianOperator& H_pair, double tol) {
    if (H_pair.n_spins != 2)
        throw Error(errc::BAD_ARGUMENT, "pauli_decompose works on two-spin operators");
    static const char names[4] = {'I', 'X', 'Y', 'Z'};
    auto single = [](char ch, int site) -> MatC {
        if (ch == 'I') return MatC::Identity(4, 4);
        Axis ax = ch == 'X' ? Axis::X : ch == 'Y' ? Axis::Y : Axis::Z;
        return pauli_embed(ax, site, 2).matrix;
    };

    std::vector<PauliCoefficient> raw;
    double max_abs = 0.0;
    for (char a : names)
        for (char b : names) {
            if (a == 'I' && b == 'I') continue;
            MatC term = single(a, 0) * single(b, 1);
            double value = (H_pair.matrix * term).trace().real() / 4.0;
            raw.push_back(PauliCoefficient{a, b, value});
            max_abs = std::max(max_abs, std::abs(value));
        }
    std::vector<PauliCoefficient> out;
    const double cut = tol * std::max(1.0, max_abs);
    for (const auto& c : raw)
        if (std::abs(c.value) > cut) out.push_back(c);
    return out;
}

} // namespace spinsim
