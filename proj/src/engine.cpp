#include "spinsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "spinsim/io.hpp"
#include "spinsim/rng.hpp"

namespace spinsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ideal pulses must sit on the dt grid; finite pulses keep exact boundaries
struct Milestone {
    double t = 0.0;
    bool ideal = true;
    PulseEvent event;
};

struct PreparedSchedule {
    std::vector<Milestone> milestones;
    std::optional<DriveSettings> drive;
};

PreparedSchedule prepare_schedule(const PulseSchedule& schedule, double dt) {
    schedule.validate();
    PreparedSchedule prep;
    prep.drive = schedule.continuous_drive;
    for (const auto& e : schedule.events) {
        Milestone m;
        m.event = e;
        if (e.duration == 0.0) {
            const double q = e.start / dt;
            const double idx = std::round(q);
            if (std::abs(q - idx) > 1e-6 + 1e-12 * std::abs(q))
                throw Error(errc::SNAP_TOLERANCE,
                            "ideal pulse at " + std::to_string(e.start) +
                                " does not sit on the dt grid (dt = " + std::to_string(dt) + ")");
            m.t = idx * dt;
            m.ideal = true;
        } else {
            m.t = e.start;
            m.ideal = false;
        }
        prep.milestones.push_back(m);
    }
    return prep;
}

// One cluster + one noise stream, walked segment by segment. Samples land
// exactly on k * stride * dt; the walker splits every stretch there.
class Realization {
public:
    Realization(const CouplingMatrix& couplings, const PreparedSchedule& prep,
                const std::optional<NoiseParams>& noise, double dt, double t_max,
                std::uint64_t seed, int stride)
        : prep_(prep), noise_(noise), dt_(dt), tiny_(1e-7 * dt) {
        n_ = couplings.n_spins;
        H_dip_ = dipolar_hamiltonian(couplings);
        es_dip_ = EigenSystem::of(H_dip_);
        if (prep.drive) {
            HermitianOperator H = H_dip_;
            H.matrix += drive_hamiltonian(*prep.drive, n_).matrix;
            es_gap_ = EigenSystem::of(H);
        } else {
            es_gap_ = es_dip_;
        }
        zd_ = collective_z_diagonal(n_);
        if (noise_) {
            gen_.emplace(*noise_, seed);
            B_ = gen_->current();
        }
        const long n_steps = std::llround(t_max / dt);
        ds_ = static_cast<double>(stride) * dt;
        last_sample_ = n_steps / stride;
        amp_ = plus_state(n_).amplitudes;
    }

    void run() {
        samples.reserve(last_sample_ + 1);
        record();
        const double t_end = last_sample_ * ds_;
        for (const auto& m : prep_.milestones) {
            if (m.t > t_end + tiny_) break;
            gap_to(m.t);
            if (m.ideal) {
                SpinState s{n_, amp_};
                amp_ = apply_rotation(s, m.event.axis, m.event.angle).amplitudes;
                maybe_record_at(t_cur_);
            } else {
                maybe_record_at(t_cur_);
                pulse(m.event);
                maybe_record_at(t_cur_);
            }
        }
        gap_to(t_end);
        maybe_record_at(t_end);
        if (std::abs(amp_.norm() - 1.0) > 1e-6)
            throw Error(errc::BAD_ARGUMENT, "state norm drifted to " + std::to_string(amp_.norm()));
    }

    std::vector<double> samples;

private:
    double next_sample_time() const { return next_ * ds_; }

    void record() {
        samples.push_back(expect_sx(SpinState{n_, amp_}));
        ++next_;
    }

    void maybe_record_at(double t) {
        if (next_ <= last_sample_ && std::abs(next_sample_time() - t) <= tiny_) record();
    }

    // constant-H stretch through `es`, recording samples strictly inside
    void stretch(const EigenSystem& es, double target) {
        if (target <= t_cur_ + tiny_) return;
        VecC c = es.eigenvectors.adjoint() * amp_;
        double t = t_cur_;
        while (next_ <= last_sample_ && next_sample_time() < target - tiny_) {
            const double s = next_sample_time();
            if (s > t + tiny_) {
                advance_phases(c, es, s - t);
                t = s;
            }
            VecC z = es.eigenvectors * c;
            samples.push_back(expect_sx(SpinState{n_, z}));
            ++next_;
        }
        advance_phases(c, es, target - t);
        amp_ = es.eigenvectors * c;
        t_cur_ = target;
    }

    static void advance_phases(VecC& c, const EigenSystem& es, double t) {
        if (t == 0.0) return;
        for (long k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -es.eigenvalues(k) * t);
    }

    void apply_bath_phase(double B, double t) {
        if (B == 0.0 || t == 0.0) return;
        for (long s = 0; s < amp_.size(); ++s) amp_(s) *= std::polar(1.0, -B * zd_(s) * t);
    }

    // noisy piece with frozen B: bath phase commutes with the dipolar part,
    // so the split is exact; with a drive present the chunk Hamiltonian is
    // re-exponentiated instead
    void noisy_piece(double len, bool with_drive) {
        if (len <= 0) return;
        if (!with_drive) {
            apply_bath_phase(B_, len);
            amp_ = es_dip_.evolve(amp_, len);
        } else {
            HermitianOperator H = H_dip_;
            H.matrix += drive_hamiltonian(*prep_.drive, n_).matrix;
            for (long s = 0; s < amp_.size(); ++s) H.matrix(s, s) += B_ * zd_(s);
            amp_ = EigenSystem::of(H).evolve(amp_, len);
        }
    }

    void gap_to(double target) {
        if (target <= t_cur_ + tiny_) return;
        if (!noise_) {
            stretch(es_gap_, target);
            return;
        }
        const bool with_drive = prep_.drive.has_value();
        while (t_cur_ < target - tiny_) {
            const double stop = std::min(target, t_cur_ + dt_);
            // pieces inside the chunk: split at sample instants, B frozen
            double t = t_cur_;
            while (next_ <= last_sample_ && next_sample_time() < stop - tiny_) {
                const double s = next_sample_time();
                if (s > t + tiny_) {
                    noisy_piece(s - t, with_drive);
                    t = s;
                }
                record();
            }
            noisy_piece(stop - t, with_drive);
            B_ = gen_->advance(stop - t_cur_);
            t_cur_ = stop;
        }
        t_cur_ = target;
    }

    void pulse(const PulseEvent& e) {
        const double amp_drive = e.drive_amplitude() * axis_sign(e.axis);
        const Axis ax = base_axis(e.axis);
        // bath frozen over the pulse unless the pulse outlasts tau_c/10
        const double chunk_max = noise_ ? noise_->tau_c / 10.0 : kInf;
        double done = 0.0;
        while (done < e.duration - tiny_) {
            const double len = std::min(e.duration - done, chunk_max);
            const double t_to = std::min(e.start + done + len, e.end());
            stretch(pulse_es(ax, amp_drive), t_to);
            if (noise_) B_ = gen_->advance(len);
            done += len;
        }
        t_cur_ = e.end();
    }

    const EigenSystem& pulse_es(Axis ax, double amp_drive) {
        if (!noise_) {
            auto key = std::make_pair(static_cast<int>(ax), amp_drive);
            auto it = pulse_cache_.find(key);
            if (it != pulse_cache_.end()) return it->second;
            HermitianOperator H = H_dip_;
            H.matrix += amp_drive * collective_pauli(ax, n_).matrix;
            return pulse_cache_.emplace(key, EigenSystem::of(H)).first->second;
        }
        HermitianOperator H = H_dip_;
        H.matrix += amp_drive * collective_pauli(ax, n_).matrix;
        for (long s = 0; s < H.matrix.rows(); ++s) H.matrix(s, s) += B_ * zd_(s);
        scratch_es_ = EigenSystem::of(H);
        return scratch_es_;
    }

    const PreparedSchedule& prep_;
    std::optional<NoiseParams> noise_;
    double dt_, tiny_;
    int n_ = 0;
    HermitianOperator H_dip_;
    EigenSystem es_dip_, es_gap_, scratch_es_;
    VecD zd_;
    std::optional<OuGenerator> gen_;
    double B_ = 0.0;
    VecC amp_;
    double t_cur_ = 0.0;
    double ds_ = 0.0;
    long last_sample_ = 0, next_ = 0;
    std::map<std::pair<int, double>, EigenSystem> pulse_cache_;
};

std::vector<double> sample_times(double dt, double t_max, int stride) {
    const long n_steps = std::llround(t_max / dt);
    const long last = n_steps / stride;
    const double ds = static_cast<double>(stride) * dt;
    std::vector<double> t(last + 1);
    for (long k = 0; k <= last; ++k) t[k] = k * ds;
    return t;
}

std::vector<double> run_one(const CouplingMatrix& couplings, const PreparedSchedule& prep,
                            const std::optional<NoiseParams>& noise, double dt, double t_max,
                            std::uint64_t seed, int stride) {
    Realization r(couplings, prep, noise, dt, t_max, seed, stride);
    r.run();
    return std::move(r.samples);
}

// configuration with the angular-units convention already applied
struct Resolved {
    CouplingSource couplings;
    PulseSchedule schedule;
    std::optional<NoiseParams> noise;
};

Resolved resolve_units(const SimulationConfig& config) {
    Resolved r{config.couplings, config.schedule, config.noise};
    if (config.units == AngularUnits::Bare) return r;
    const double f = 2.0 * M_PI;
    if (auto* eq = std::get_if<EqualCouplings>(&r.couplings)) {
        eq->omega0 *= f;
    } else if (auto* cm = std::get_if<CouplingMatrix>(&r.couplings)) {
        cm->w *= f;
    } else if (auto* cd = std::get_if<CouplingDistribution>(&r.couplings)) {
        for (double& e : cd->bin_edges) e *= f;
        cd->mean_strength *= f;
    }
    if (r.schedule.continuous_drive) r.schedule.continuous_drive->omega *= f;
    if (r.noise) r.noise->b *= f;
    return r;
}

CouplingMatrix couplings_for(const Resolved& r, const SimulationConfig& config, int cluster_size,
                             std::uint64_t master_seed, long i) {
    if (const auto* eq = std::get_if<EqualCouplings>(&r.couplings))
        return CouplingMatrix::equal(cluster_size, eq->omega0);
    if (const auto* cm = std::get_if<CouplingMatrix>(&r.couplings)) {
        if (cm->n_spins != cluster_size)
            throw Error(errc::BAD_COUPLING, "coupling matrix size does not match cluster_size");
        return *cm;
    }
    const auto& dist = std::get<CouplingDistribution>(r.couplings);
    const std::uint64_t seed = derive_seed(master_seed, i, 0xC0FFEEULL);
    if (config.draw_mode == DrawMode::Positions) {
        throw Error(errc::BAD_ARGUMENT,
                    "positions draw mode needs an ensemble geometry, not a histogram");
    }
    return draw_cluster_couplings(dist, cluster_size, seed, DrawMode::IidPairs);
}

TraceResult average_runs(const SimulationConfig& config, const Resolved& resolved,
                         int cluster_size, int threads) {
    const long ndip = config.n_dipolar_realizations;
    const long nnoise = config.n_noise_realizations;
    const long total = ndip * nnoise;
    const PreparedSchedule prep = prepare_schedule(resolved.schedule, config.dt);

    std::vector<CouplingMatrix> mats;
    mats.reserve(ndip);
    for (long i = 0; i < ndip; ++i)
        mats.push_back(couplings_for(resolved, config, cluster_size, config.master_seed, i));

    TraceResult out;
    out.times = sample_times(config.dt, config.t_max, config.sample_stride);
    const size_t K = out.times.size();
    std::vector<double> mean(K, 0.0), m2(K, 0.0);

    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;

    const long chunk = 256;
    long seen = 0;
    std::vector<std::vector<double>> results;
    for (long base = 0; base < total; base += chunk) {
        const long count = std::min(chunk, total - base);
        results.assign(count, {});
        std::atomic<long> cursor{0};
        auto worker = [&]() {
            for (;;) {
                const long m = cursor.fetch_add(1);
                if (m >= count) return;
                const long idx = base + m;
                const long i = idx / nnoise, j = idx % nnoise;
                const std::uint64_t seed = derive_seed(config.master_seed, i, j);
                results[m] = run_one(mats[i], prep, resolved.noise, config.dt, config.t_max,
                                     seed, config.sample_stride);
            }
        };
        const int nw = static_cast<int>(std::min<long>(threads, count));
        std::vector<std::thread> pool;
        std::mutex fail_mutex;
        std::exception_ptr failure;
        for (int w = 0; w < nw; ++w)
            pool.emplace_back([&]() {
                try {
                    worker();
                } catch (...) {
                    std::lock_guard<std::mutex> lock(fail_mutex);
                    if (!failure) failure = std::current_exception();
                    cursor.store(count);
                }
            });
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);

        // fixed (i, j) order keeps the reduction bitwise thread-invariant
        for (long m = 0; m < count; ++m) {
            ++seen;
            for (size_t k = 0; k < K; ++k) {
                const double x = results[m][k];
                const double delta = x - mean[k];
                mean[k] += delta / seen;
                m2[k] += delta * (x - mean[k]);
            }
        }
    }

    out.sx_mean = std::move(mean);
    out.sx_std.resize(K);
    for (size_t k = 0; k < K; ++k) out.sx_std[k] = std::sqrt(std::max(0.0, m2[k] / total));
    out.n_realizations = total;
    SimulationConfig fp = config;
    fp.cluster_size = cluster_size;
    out.fingerprint = fingerprint(canonical_config_text(fp));
    return out;
}

} // namespace

void SimulationConfig::check() const {
    if (cluster_size < 1)
        throw Error(errc::BAD_ARGUMENT, "cluster_size must be >= 1");
    if (cluster_size > kMaxSpins)
        throw Error(errc::DIM_TOO_LARGE,
                    "cluster_size " + std::to_string(cluster_size) + " exceeds " +
                        std::to_string(kMaxSpins));
    if (dt <= 0) throw Error(errc::BAD_ARGUMENT, "dt must be > 0");
    if (t_max < dt) throw Error(errc::BAD_ARGUMENT, "t_max must be >= dt");
    if (sample_stride < 1) throw Error(errc::BAD_ARGUMENT, "sample_stride must be >= 1");
    if (n_dipolar_realizations < 1)
        throw Error(errc::BAD_ARGUMENT, "n_dipolar_realizations must be >= 1");
    if (n_noise_realizations < 1)
        throw Error(errc::BAD_ARGUMENT, "n_noise_realizations must be >= 1");
    if (noise && noise->tau_c <= 0)
        throw Error(errc::BAD_ARGUMENT, "noise correlation time must be > 0");
    if (noise && noise->b < 0) throw Error(errc::BAD_ARGUMENT, "noise strength must be >= 0");
    schedule.validate();
    if (const auto* cm = std::get_if<CouplingMatrix>(&couplings)) {
        cm->check();
        if (cm->n_spins != cluster_size)
            throw Error(errc::BAD_COUPLING, "coupling matrix size does not match cluster_size");
    }
}

double default_dt(const SimulationConfig& config) {
    const Resolved r = resolve_units(config);
    double bound = kInf;
    if (r.noise && r.noise->b > 0) bound = std::min(bound, r.noise->tau_c / 20.0);
    double omega_drive = r.schedule.continuous_drive ? r.schedule.continuous_drive->omega : 0.0;
    for (const auto& e : r.schedule.events)
        omega_drive = std::max(omega_drive, e.drive_amplitude());
    if (omega_drive > 0) bound = std::min(bound, 0.05 / omega_drive);
    double w_max = 0.0;
    if (const auto* eq = std::get_if<EqualCouplings>(&r.couplings)) w_max = eq->omega0;
    if (const auto* cm = std::get_if<CouplingMatrix>(&r.couplings))
        w_max = cm->w.size() ? cm->w.cwiseAbs().maxCoeff() : 0.0;
    if (const auto* cd = std::get_if<CouplingDistribution>(&r.couplings))
        w_max = cd->bin_edges.empty() ? 0.0 : cd->bin_edges.back();
    if (w_max > 0) bound = std::min(bound, 0.02 / (4.0 * w_max));
    if (!std::isfinite(bound)) bound = config.t_max / 1000.0;
    return bound;
}

TraceResult evolve_trace(const CouplingMatrix& couplings, const PulseSchedule& schedule,
                         const std::optional<NoiseParams>& noise, double dt, double t_max,
                         std::uint64_t seed, int sample_stride) {
    if (dt <= 0) throw Error(errc::BAD_ARGUMENT, "dt must be > 0");
    if (t_max < dt) throw Error(errc::BAD_ARGUMENT, "t_max must be >= dt");
    if (sample_stride < 1) throw Error(errc::BAD_ARGUMENT, "sample_stride must be >= 1");
    couplings.check();
    const PreparedSchedule prep = prepare_schedule(schedule, dt);
    TraceResult out;
    out.times = sample_times(dt, t_max, sample_stride);
    out.sx_mean = run_one(couplings, prep, noise, dt, t_max, seed, sample_stride);
    out.sx_std.assign(out.times.size(), 0.0);
    out.n_realizations = 1;
    out.fingerprint = fingerprint("single-realization seed=" + std::to_string(seed) +
                                  " dt=" + std::to_string(dt) + " n=" +
                                  std::to_string(couplings.n_spins));
    return out;
}

TraceResult ensemble_average(const SimulationConfig& config, int threads) {
    config.check();
    const Resolved resolved = resolve_units(config);
    return average_runs(config, resolved, config.cluster_size, threads);
}

std::vector<ConvergenceEntry> convergence_scan(const SimulationConfig& config,
                                               const std::vector<int>& cluster_sizes,
                                               int threads) {
    std::vector<ConvergenceEntry> out;
    for (int size : cluster_sizes) {
        SimulationConfig cfg = config;
        cfg.cluster_size = size;
        out.push_back(ConvergenceEntry{size, ensemble_average(cfg, threads)});
    }
    return out;
}

double late_window_mean(const TraceResult& trace, double fraction) {
    if (trace.sx_mean.empty()) throw Error(errc::BAD_ARGUMENT, "empty trace");
    if (fraction <= 0 || fraction > 1)
        throw Error(errc::BAD_ARGUMENT, "window fraction must be in (0, 1]");
    const long n = static_cast<long>(trace.sx_mean.size());
    long count = std::max<long>(1, std::llround(fraction * n));
    count = std::min(count, n);
    double acc = 0.0;
    for (long k = n - count; k < n; ++k) acc += trace.sx_mean[k];
    return acc / count;
}

} // namespace spinsim
