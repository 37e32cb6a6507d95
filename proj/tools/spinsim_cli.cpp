// spinsim: cluster Monte Carlo for driven dipolar spin ensembles in an
// Ornstein-Uhlenbeck bath. Subcommands: gen-dist, simulate, analyze, avg-ham.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "spinsim/analysis.hpp"
#include "spinsim/analytic.hpp"
#include "spinsim/engine.hpp"
#include "spinsim/io.hpp"
#include "spinsim/rng.hpp"

namespace fs = std::filesystem;
using namespace spinsim;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string g_command_line;

std::string out_dir_or_default(std::string flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SPINSIM_OUT_DIR")) return env;
    return ".";
}

std::string join(const fs::path& dir, const std::string& name) {
    return (dir / name).string();
}

// bath parameters quoted as tau_c = 5 us, b = 2e4 angular 1/s
NoiseParams paper_bath() { return NoiseParams{5e-6, 2e4}; }

struct SimulateFlags {
    std::string recipe, sequence, preset_name, units = "bare", recipe_noise;
    int cluster_size = 6;
    double equal_omega0 = 0.0;
    double density = 0.0, area_um2 = 0.0;
    int dist_realizations = 200, dist_bins = 64;
    double omega = 0.0;           // spin-lock drive
    int n_pulses = 0;             // cpmg pulse count / xy8 blocks
    int n_cycles = 0;             // wahuha cycles
    int wahuha_reps = 5;          // combined: cycles per cpmg gap
    double tau = 0.0, pulse_duration = 0.0, epsilon = 0.0;
    double t_max = 0.0, dt = 0.0;
    int stride = 1, n_dipolar = 1, n_noise = 1, threads = 0;
    double tau_c = 0.0, noise_b = 0.0;
    std::uint64_t seed = 12345;
    std::string out_dir;
};

PulseSchedule build_sequence(const SimulateFlags& f, double t_max) {
    if (f.sequence == "free") return build_free(t_max);
    if (f.sequence == "spinlock") {
        if (f.omega <= 0) throw UsageError("spinlock needs --omega > 0");
        return build_spinlock(f.omega, t_max);
    }
    if (f.sequence == "cpmg") {
        if (f.n_pulses < 1 || f.tau <= 0) throw UsageError("cpmg needs --n-pulses and --tau");
        return build_cpmg(f.n_pulses, f.tau, f.pulse_duration);
    }
    if (f.sequence == "xy8") {
        if (f.n_pulses < 1 || f.tau <= 0) throw UsageError("xy8 needs --n-pulses and --tau");
        return build_xy8(f.n_pulses, f.tau, f.pulse_duration);
    }
    if (f.sequence == "wahuha") {
        const int cycles = f.n_cycles > 0 ? f.n_cycles : f.n_pulses;
        if (cycles < 1 || f.tau <= 0) throw UsageError("wahuha needs --n-cycles and --tau");
        return build_wahuha(cycles, f.tau, f.pulse_duration, f.epsilon);
    }
    if (f.sequence == "cpmg+wahuha" || f.sequence == "combined") {
        if (f.n_pulses < 1 || f.tau <= 0)
            throw UsageError("cpmg+wahuha needs --n-pulses (cpmg periods) and --tau");
        return build_combined(f.n_pulses, f.wahuha_reps, f.tau, f.pulse_duration);
    }
    throw UsageError("unknown sequence '" + f.sequence +
                     "' (known: free, spinlock, cpmg, xy8, wahuha, cpmg+wahuha)");
}

CouplingDistribution histogram_for(const EnsembleSpec& spec, int realizations, int bins,
                                   std::uint64_t master_seed) {
    return nn_coupling_histogram(spec, realizations, bins, derive_seed(master_seed, 999983, 0));
}

void run_simulation(SimulationConfig& cfg, int threads, const fs::path& out) {
    if (cfg.dt <= 0) cfg.dt = default_dt(cfg);
    TraceResult tr = ensemble_average(cfg, threads);
    write_trace_csv(join(out, "trace.csv"), tr);
    write_trace_sidecar(join(out, "trace.json"), cfg, tr, g_command_line);
    std::cout << "trace: " << tr.times.size() << " samples, " << tr.n_realizations
              << " realizations, final sx_mean = " << tr.sx_mean.back()
              << ", fingerprint " << tr.fingerprint << "\n";
}

int cmd_simulate_flags(const SimulateFlags& f) {
    const fs::path out = out_dir_or_default(f.out_dir);
    fs::create_directories(out);

    SimulationConfig cfg;
    cfg.cluster_size = f.cluster_size;
    cfg.master_seed = f.seed;
    cfg.sample_stride = f.stride;
    cfg.n_dipolar_realizations = f.n_dipolar;
    cfg.n_noise_realizations = f.n_noise;
    if (f.units != "bare" && f.units != "two-pi")
        throw UsageError("--units must be 'bare' or 'two-pi'");
    cfg.units = f.units == "two-pi" ? AngularUnits::TwoPi : AngularUnits::Bare;

    bool have_couplings = true;
    if (f.equal_omega0 > 0) {
        cfg.couplings = EqualCouplings{f.equal_omega0};
    } else if (!f.preset_name.empty()) {
        cfg.couplings = histogram_for(preset(f.preset_name).spec, f.dist_realizations,
                                      f.dist_bins, f.seed);
    } else if (f.density > 0 && f.area_um2 > 0) {
        cfg.couplings = histogram_for(EnsembleSpec::from_density(f.density, f.area_um2),
                                      f.dist_realizations, f.dist_bins, f.seed);
    } else {
        have_couplings = false;
    }

    if (f.recipe_noise == "paper-bath") {
        cfg.noise = paper_bath();
    } else if (!f.recipe_noise.empty()) {
        throw UsageError("unknown --recipe-noise '" + f.recipe_noise + "' (known: paper-bath)");
    } else if (f.tau_c > 0 && f.noise_b > 0) {
        cfg.noise = NoiseParams{f.tau_c, f.noise_b};
    }

    if (!have_couplings) {
        if (!cfg.noise) throw UsageError("no coupling source (--equal-omega0, --preset, or "
                                         "--density/--area-um2) and no bath");
        cfg.couplings = CouplingMatrix::zero(f.cluster_size);  // bath-only run
    }

    // t_max falls back to the schedule length for pulse sequences
    double t_max = f.t_max;
    if (t_max <= 0) {
        if (f.sequence == "free" || f.sequence == "spinlock")
            throw UsageError("--t-max is required for " + f.sequence);
        t_max = build_sequence(f, 0.0).total_time;
    }
    cfg.schedule = build_sequence(f, t_max);
    cfg.t_max = t_max;
    cfg.dt = f.dt;
    run_simulation(cfg, f.threads, out);
    return 0;
}

// ---------------------------------------------------------------------------
// experiment recipes: fixed parameter sets for the study's standard runs
// ---------------------------------------------------------------------------

struct Recipe {
    std::string description;
    std::function<void(const fs::path&, std::uint64_t, int)> run;
};

double snap_window(double T, double dt) { return std::round(T / dt) * dt; }

void recipe_fig5(const fs::path& out, std::uint64_t, int) {
    const auto spec = equal_coupling_spectrum(6);
    write_lines_csv(join(out, "fig5_lines.csv"), spec);
    std::cout << "six-spin equal-coupling lines (freq multiple: weight):";
    for (const auto& l : spec.lines) std::cout << " " << l.freq_multiple << ":" << l.weight;
    std::cout << " dc:" << spec.dc << "\n";
}

void recipe_fig1a(const fs::path& out, std::uint64_t seed, int) {
    const NoiseParams bath = paper_bath();
    const auto traj = ou_trajectory(10 * bath.tau_c, bath.tau_c / 50, bath, seed);
    write_trajectory_csv(join(out, "trajectory.csv"), traj);
    std::cout << "bath trajectory: " << traj.values.size() << " samples, stationary sigma "
              << bath.b / 2 << " rad/s\n";
}

void recipe_fig1b(const fs::path& out, std::uint64_t seed, int) {
    const auto& p = preset("paper-1mhz");
    const auto hist = nn_coupling_histogram(p.spec, 20, 64, seed);
    write_distribution_csv(join(out, "distribution.csv"), hist);
    write_distribution_sidecar(join(out, "distribution.json"), hist, p.spec, seed,
                               p.nominal_omega0);
    std::cout << "mean strength " << hist.mean_strength << " rad/s over " << hist.sample_count
              << " samples\n";
}

SimulationConfig bath_only_config(std::uint64_t seed, int n_noise) {
    SimulationConfig cfg;
    cfg.cluster_size = 1;
    cfg.couplings = CouplingMatrix::zero(1);
    cfg.noise = paper_bath();
    cfg.master_seed = seed;
    cfg.n_noise_realizations = n_noise;
    return cfg;
}

void recipe_fig2a(const fs::path& out, std::uint64_t seed, int threads) {
    SimulationConfig cfg = bath_only_config(seed, 400);
    cfg.t_max = 1.2e-3;
    cfg.dt = 2.5e-7;
    cfg.sample_stride = 16;
    cfg.schedule = build_free(cfg.t_max);
    TraceResult tr = ensemble_average(cfg, threads);
    write_trace_csv(join(out, "trace.csv"), tr);
    write_trace_sidecar(join(out, "trace.json"), cfg, tr, g_command_line);
    const auto fit = fit_decay(tr, DecayModel::Exponential);
    write_fit_json(join(out, "fit.json"), fit);
    std::cout << "FID T = " << fit.T << " s (1/(b^2 tau_c) = "
              << cfg.noise->t2_star() << " s)\n";
}

void recipe_fig2b(const fs::path& out, std::uint64_t seed, int threads) {
    SimulationConfig cfg = bath_only_config(seed, 400);
    cfg.t_max = 2e-3;
    cfg.dt = 2.5e-7;
    cfg.sample_stride = 16;
    cfg.schedule = build_cpmg(16, cfg.t_max / 16, 0.0);
    run_simulation(cfg, threads, out);
}

void recipe_fig2c(const fs::path& out, std::uint64_t seed, int threads) {
    SimulationConfig cfg = bath_only_config(seed, 100);
    cfg.t_max = 2e-3;
    cfg.dt = 2.5e-7;
    cfg.sample_stride = 16;
    cfg.schedule = build_spinlock(2e5, cfg.t_max);
    run_simulation(cfg, threads, out);
}

void recipe_fig3a(const fs::path& out, std::uint64_t seed, int threads) {
    SimulationConfig cfg = bath_only_config(seed, 200);
    const double tau = 2e-5;
    cfg.schedule = build_wahuha(100, tau, 0.0, 0.0);
    cfg.t_max = cfg.schedule.total_time;
    cfg.dt = 2.5e-7;
    cfg.sample_stride = 480;   // one 6*tau cycle per sample (echo points)
    TraceResult tr = ensemble_average(cfg, threads);
    write_trace_csv(join(out, "trace.csv"), tr);
    write_trace_sidecar(join(out, "trace.json"), cfg, tr, g_command_line);
    std::cout << "bath-only WAHUHA 1/e time " << one_over_e_time(tr) << " s vs T2* "
              << cfg.noise->t2_star() << " s\n";
}

SimulationConfig preset60_config(std::uint64_t seed, int n_dipolar) {
    SimulationConfig cfg;
    cfg.cluster_size = 6;
    cfg.couplings = histogram_for(preset("paper-60hz").spec, 200, 64, seed);
    cfg.master_seed = seed;
    cfg.n_dipolar_realizations = n_dipolar;
    return cfg;
}

void recipe_fig3b(const fs::path& out, std::uint64_t seed, int threads) {
    SimulationConfig cfg = preset60_config(seed, 50);
    const double tau = 6.6e-6;
    cfg.schedule = build_wahuha(100, tau, 0.0, 0.0);
    cfg.t_max = cfg.schedule.total_time;
    cfg.dt = tau / 2;
    cfg.sample_stride = 12;   // one 6*tau cycle per sample (echo points)
    run_simulation(cfg, threads, out);
}

void recipe_fig3c(const fs::path& out, std::uint64_t seed, int threads) {
    SimulationConfig cfg = preset60_config(seed, 50);
    const double tau = 3.96e-5;
    cfg.schedule = build_cpmg(100, tau, 0.0);
    cfg.t_max = cfg.schedule.total_time;
    cfg.dt = tau / 2;
    cfg.sample_stride = 3;
    TraceResult cpmg = ensemble_average(cfg, threads);
    write_trace_csv(join(out, "trace.csv"), cpmg);
    write_trace_sidecar(join(out, "trace.json"), cfg, cpmg, g_command_line);
    SimulationConfig free_cfg = cfg;
    free_cfg.schedule = build_free(cfg.t_max);
    TraceResult free_tr = ensemble_average(free_cfg, threads);
    write_trace_csv(join(out, "free_trace.csv"), free_tr);
    double max_diff = 0.0;
    for (size_t k = 0; k < cpmg.sx_mean.size(); ++k)
        max_diff = std::max(max_diff, std::abs(cpmg.sx_mean[k] - free_tr.sx_mean[k]));
    std::cout << "ideal CPMG vs free dipolar: max |difference| = " << max_diff << "\n";
}

void recipe_fig4(const fs::path& out, std::uint64_t seed, int threads) {
    const double T = 5e-3;
    SimulationConfig base = preset60_config(seed, 5);
    base.noise = paper_bath();
    base.n_noise_realizations = 2;
    base.t_max = T;

    SimulationConfig combined = base;
    const double tau = T / 1000;
    combined.schedule = build_combined(1000, 5, tau, 0.0);
    combined.dt = tau / 60;
    combined.sample_stride = 300;
    TraceResult trc = ensemble_average(combined, threads);
    write_trace_csv(join(out, "combined_trace.csv"), trc);

    SimulationConfig cpmg = base;
    cpmg.schedule = build_cpmg(21000, T / 21000, 0.0);
    cpmg.dt = T / 42000;
    cpmg.sample_stride = 210;
    TraceResult trp = ensemble_average(cpmg, threads);
    write_trace_csv(join(out, "cpmg_trace.csv"), trp);

    SimulationConfig wah = base;
    wah.schedule = build_wahuha(5250, T / (6 * 5250), 0.0, 0.0);
    wah.dt = T / 63000;
    wah.sample_stride = 600;   // 50 whole cycles per sample
    TraceResult trw = ensemble_average(wah, threads);
    write_trace_csv(join(out, "wahuha_trace.csv"), trw);

    std::cout << "late-window sx_mean: combined " << late_window_mean(trc) << ", cpmg "
              << late_window_mean(trp) << ", wahuha " << late_window_mean(trw) << "\n";
}

void recipe_fig6(const fs::path& out, std::uint64_t seed, int threads) {
    const double w0 = kTwoPi * 60;
    SimulationConfig cfg;
    cfg.cluster_size = 6;
    cfg.couplings = EqualCouplings{w0};
    cfg.master_seed = seed;
    cfg.dt = 1e-5;
    cfg.t_max = snap_window(40.0 / w0, cfg.dt);
    cfg.sample_stride = 25;
    cfg.schedule = build_spinlock(12 * w0, cfg.t_max);
    TraceResult tr = ensemble_average(cfg, threads);
    write_trace_csv(join(out, "trace.csv"), tr);
    write_trace_sidecar(join(out, "trace.json"), cfg, tr, g_command_line);
    std::cout << "plateau " << late_window_mean(tr, 0.5) << " (cancellation prediction "
              << spinlock_plateau_prediction(6, w0, 12 * w0) << ")\n";
}

void recipe_fig8(const fs::path& out, std::uint64_t seed, int threads) {
    SimulationConfig cfg = preset60_config(seed, 500);
    const double w_hat = typical_strength(std::get<CouplingDistribution>(cfg.couplings));
    cfg.dt = (24.0 / w_hat) / 2048;
    cfg.t_max = 2048 * cfg.dt;
    cfg.sample_stride = 4;
    cfg.schedule = build_free(cfg.t_max);
    TraceResult tr = ensemble_average(cfg, threads);
    write_trace_csv(join(out, "trace.csv"), tr);
    write_trace_sidecar(join(out, "trace.json"), cfg, tr, g_command_line);
    const auto sp = fourier_spectrum(tr, w_hat);
    write_spectrum_csv(join(out, "spectrum.csv"), sp);
    const auto est = extract_typical_strength(sp, 2 * w_hat);
    std::cout << "histogram mean " << w_hat << " rad/s; extracted omega0 " << est.omega0
              << " +- " << est.uncertainty << " rad/s\n";
}

void recipe_fig10(const fs::path& out, std::uint64_t seed, int threads) {
    SimulationConfig base = preset60_config(seed, 5);
    base.noise = paper_bath();
    base.n_noise_realizations = 4;
    const double tau = 1e-7, width = 2.5e-8;
    const int n_pulses = 4000;
    base.dt = 5e-8;
    base.t_max = n_pulses * tau;
    base.sample_stride = 40;

    SimulationConfig cpmg = base;
    cpmg.schedule = build_cpmg(n_pulses, tau, width);
    TraceResult trc = ensemble_average(cpmg, threads);
    write_trace_csv(join(out, "cpmg_trace.csv"), trc);

    SimulationConfig xy8 = base;
    xy8.schedule = build_xy8(n_pulses / 8, tau, width);
    TraceResult trx = ensemble_average(xy8, threads);
    write_trace_csv(join(out, "xy8_trace.csv"), trx);

    std::cout << "25 ns pulses, late-window sx_mean: cpmg " << late_window_mean(trc)
              << ", xy8 " << late_window_mean(trx) << "\n";
}

void recipe_appC_ii(const fs::path& out, std::uint64_t seed, int) {
    const auto& p = preset("paper-60hz");
    for (int bins : {32, 64, 128}) {
        const auto hist = nn_coupling_histogram(p.spec, 100, bins, seed);
        write_distribution_csv(join(out, "distribution_bins" + std::to_string(bins) + ".csv"),
                               hist);
        std::cout << "bins " << bins << ": mean strength " << hist.mean_strength << " rad/s\n";
    }
}

void recipe_appC_iii(const fs::path& out, std::uint64_t seed, int threads) {
    SimulationConfig cfg = preset60_config(seed, 100);
    const double w_hat = typical_strength(std::get<CouplingDistribution>(cfg.couplings));
    cfg.dt = 0.04 / (12 * w_hat);
    cfg.t_max = snap_window(40.0 / w_hat, cfg.dt);
    cfg.sample_stride = 50;
    cfg.schedule = build_spinlock(12 * w_hat, cfg.t_max);
    const auto entries = convergence_scan(cfg, {2, 3, 4, 5, 6, 7, 8}, threads);
    std::ofstream csv(join(out, "convergence.csv"));
    csv << "cluster_size,plateau\n";
    for (const auto& e : entries) {
        const double plateau = late_window_mean(e.trace, 0.5);
        csv << e.cluster_size << ',' << plateau << '\n';
        std::cout << "n = " << e.cluster_size << ": plateau " << plateau << "\n";
    }
}

void recipe_appC_iv(const fs::path& out, std::uint64_t, int) {
    std::ofstream csv(join(out, "epsilon_scan.csv"));
    csv << "epsilon,xx_minus_yy\n";
    for (double eps : {0.01, 0.02, 0.04}) {
        const auto H = average_hamiltonian(build_wahuha(1, 1e-6, 0.0, eps),
                                           nv_pair_hamiltonian(1.0));
        double xx = 0, yy = 0;
        for (const auto& c : pauli_decompose(H)) {
            if (c.a == 'X' && c.b == 'X') xx = c.value;
            if (c.a == 'Y' && c.b == 'Y') yy = c.value;
        }
        csv << eps << ',' << xx - yy << '\n';
        std::cout << "epsilon " << eps << ": XX - YY = " << xx - yy << "\n";
    }
}

const std::map<std::string, Recipe>& recipes() {
    static const std::map<std::string, Recipe> table = {
        {"fig1a", {"bath trajectory sample [acceptance criterion 4]", recipe_fig1a}},
        {"fig1b", {"dense-ensemble coupling histogram [acceptance criterion 3]", recipe_fig1b}},
        {"fig2a", {"bath-only FID + exponential fit [acceptance criterion 4]", recipe_fig2a}},
        {"fig2b", {"bath-only ideal CPMG [acceptance criterion 8]", recipe_fig2b}},
        {"fig2c", {"bath-only spin-lock [acceptance criterion 6]", recipe_fig2c}},
        {"fig3a", {"bath-only WAHUHA vs T2* [acceptance criterion 9]", recipe_fig3a}},
        {"fig3b", {"WAHUHA on 60 Hz dipolar clusters (100 cycles) [acceptance criterion 9]",
                   recipe_fig3b}},
        {"fig3b-wahuha100", {"alias of fig3b [acceptance criterion 9]", recipe_fig3b}},
        {"fig3c", {"ideal CPMG transparency to dipolar coupling [acceptance criterion 7]",
                   recipe_fig3c}},
        {"fig4", {"combined CPMG+WAHUHA vs components, 5 ms [acceptance criterion 11]",
                  recipe_fig4}},
        {"fig5", {"six-spin equal-coupling line spectrum [acceptance criteria 1-2]",
                  recipe_fig5}},
        {"fig6", {"equal-coupling spin-lock plateau [acceptance criterion 5]", recipe_fig6}},
        {"fig8", {"realistic-distribution spectrum + strength extraction "
                  "[acceptance criterion 3]",
                  recipe_fig8}},
        {"fig10", {"finite-width CPMG vs XY8 [acceptance criterion 12]", recipe_fig10}},
        {"appC-ii", {"histogram bin-count sensitivity [acceptance criterion 3]",
                     recipe_appC_ii}},
        {"appC-iii", {"cluster-size convergence of the spin-lock plateau "
                      "[acceptance criterion 5]",
                      recipe_appC_iii}},
        {"appC-iv", {"epsilon-shifted WAHUHA average-Hamiltonian scan "
                     "[acceptance criterion 10]",
                     recipe_appC_iv}},
    };
    return table;
}

// Apply key=value pairs from an INI file to any flag the command line left
// untouched (command-line flags win). Keys are the long option names.
void apply_config_file(SimulateFlags& f, const std::string& path, const CLI::App& sim) {
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        const auto a = s.find_first_not_of(ws);
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(ws);
        return s.substr(a, b - a + 1);
    };
    auto as_double = [&](const std::string& k, const std::string& v) {
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            throw UsageError("config key '" + k + "' has a bad numeric value '" + v + "'");
        return x;
    };
    auto as_int = [&](const std::string& k, const std::string& v) {
        return static_cast<int>(as_double(k, v));
    };

    std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
        {"sequence", [&](const std::string&, const std::string& v) { f.sequence = v; }},
        {"preset", [&](const std::string&, const std::string& v) { f.preset_name = v; }},
        {"units", [&](const std::string&, const std::string& v) { f.units = v; }},
        {"recipe", [&](const std::string&, const std::string& v) { f.recipe = v; }},
        {"recipe-noise", [&](const std::string&, const std::string& v) { f.recipe_noise = v; }},
        {"out-dir", [&](const std::string&, const std::string& v) { f.out_dir = v; }},
        {"cluster-size", [&](const std::string& k, const std::string& v) { f.cluster_size = as_int(k, v); }},
        {"equal-omega0", [&](const std::string& k, const std::string& v) { f.equal_omega0 = as_double(k, v); }},
        {"density", [&](const std::string& k, const std::string& v) { f.density = as_double(k, v); }},
        {"area-um2", [&](const std::string& k, const std::string& v) { f.area_um2 = as_double(k, v); }},
        {"dist-realizations", [&](const std::string& k, const std::string& v) { f.dist_realizations = as_int(k, v); }},
        {"dist-bins", [&](const std::string& k, const std::string& v) { f.dist_bins = as_int(k, v); }},
        {"omega", [&](const std::string& k, const std::string& v) { f.omega = as_double(k, v); }},
        {"n-pulses", [&](const std::string& k, const std::string& v) { f.n_pulses = as_int(k, v); }},
        {"n-cycles", [&](const std::string& k, const std::string& v) { f.n_cycles = as_int(k, v); }},
        {"wahuha-reps", [&](const std::string& k, const std::string& v) { f.wahuha_reps = as_int(k, v); }},
        {"tau", [&](const std::string& k, const std::string& v) { f.tau = as_double(k, v); }},
        {"pulse-duration", [&](const std::string& k, const std::string& v) { f.pulse_duration = as_double(k, v); }},
        {"epsilon", [&](const std::string& k, const std::string& v) { f.epsilon = as_double(k, v); }},
        {"t-max", [&](const std::string& k, const std::string& v) { f.t_max = as_double(k, v); }},
        {"dt", [&](const std::string& k, const std::string& v) { f.dt = as_double(k, v); }},
        {"stride", [&](const std::string& k, const std::string& v) { f.stride = as_int(k, v); }},
        {"n-dipolar", [&](const std::string& k, const std::string& v) { f.n_dipolar = as_int(k, v); }},
        {"n-noise", [&](const std::string& k, const std::string& v) { f.n_noise = as_int(k, v); }},
        {"threads", [&](const std::string& k, const std::string& v) { f.threads = as_int(k, v); }},
        {"tau-c", [&](const std::string& k, const std::string& v) { f.tau_c = as_double(k, v); }},
        {"noise-b", [&](const std::string& k, const std::string& v) { f.noise_b = as_double(k, v); }},
        {"seed", [&](const std::string& k, const std::string& v) {
             char* end = nullptr;
             f.seed = std::strtoull(v.c_str(), &end, 10);
             if (end == v.c_str() || *end != '\0')
                 throw UsageError("config key '" + k + "' has a bad numeric value '" + v + "'");
         }},
    };

    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + " is not key=value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        const auto it = setters.find(key);
        if (it == setters.end()) throw UsageError("unknown config key '" + key + "'");
        if (sim.count("--" + key) > 0) continue;   // explicit flag wins
        it->second(key, value);
    }
}

int cmd_simulate(const SimulateFlags& f) {
    if (!f.recipe.empty()) {
        const auto it = recipes().find(f.recipe);
        if (it == recipes().end()) {
            std::string names;
            for (const auto& [name, r] : recipes()) names += " " + name;
            std::cerr << "unknown recipe '" << f.recipe << "'; known recipes:" << names << "\n";
            return 2;
        }
        const fs::path out = out_dir_or_default(f.out_dir);
        fs::create_directories(out);
        std::cout << "[" << f.recipe << "] " << it->second.description << "\n";
        it->second.run(out, f.seed, f.threads);
        return 0;
    }
    if (f.sequence.empty()) throw UsageError("simulate needs --sequence or --recipe");
    return cmd_simulate_flags(f);
}

int cmd_gen_dist(const std::string& preset_name, double density, double area_um2,
                 int realizations, int bins, std::uint64_t seed, const std::string& out_flag) {
    EnsembleSpec spec;
    double nominal = 0.0;
    if (!preset_name.empty()) {
        const auto& p = preset(preset_name);
        spec = p.spec;
        nominal = p.nominal_omega0;
    } else if (density > 0 && area_um2 > 0) {
        spec = EnsembleSpec::from_density(density, area_um2);
    } else {
        throw UsageError("gen-dist needs --preset or both --density and --area-um2");
    }
    const fs::path out = out_dir_or_default(out_flag);
    fs::create_directories(out);
    const auto hist = nn_coupling_histogram(spec, realizations, bins, seed);
    write_distribution_csv(join(out, "distribution.csv"), hist);
    write_distribution_sidecar(join(out, "distribution.json"), hist, spec, seed, nominal);
    std::cout << "mean strength " << hist.mean_strength << " rad/s (" << spec.n_spins
              << " spins, " << realizations << " realizations, " << hist.sample_count
              << " pooled samples)\n";
    return 0;
}

int cmd_analyze(const std::string& in, bool do_fft, double omega0, const std::string& fit_model,
                const std::string& out_flag) {
    const fs::path out = out_dir_or_default(out_flag);
    fs::create_directories(out);
    const TraceResult tr = read_trace_csv(in);
    if (do_fft) {
        if (omega0 <= 0) throw UsageError("--fft needs --omega0 > 0");
        const auto sp = fourier_spectrum(tr, omega0);
        write_spectrum_csv(join(out, "spectrum.csv"), sp);
        const auto est = extract_typical_strength(sp, 2 * omega0);
        std::cout << "extracted omega0 = " << est.omega0 << " +- " << est.uncertainty
                  << " rad/s (hint " << omega0 << ")\n";
    }
    if (!fit_model.empty()) {
        DecayModel model;
        if (fit_model == "exponential") model = DecayModel::Exponential;
        else if (fit_model == "stretched") model = DecayModel::Stretched;
        else throw UsageError("unknown fit model '" + fit_model + "'");
        const auto fit = fit_decay(tr, model);
        write_fit_json(join(out, "fit.json"), fit);
        std::cout << "fit " << fit_model << ": T_seconds = " << fit.T << ", p = " << fit.p
                  << ", residual " << fit.residual << "\n";
    }
    if (!do_fft && fit_model.empty()) throw UsageError("analyze needs --fft and/or --fit");
    return 0;
}

int cmd_avg_ham(const std::string& sequence, const std::string& pair, double epsilon,
                double tau, double pulse_duration) {
    PulseSchedule schedule;
    if (sequence == "wahuha") schedule = build_wahuha(1, tau, pulse_duration, epsilon);
    else if (sequence == "cpmg") schedule = build_cpmg(4, tau, pulse_duration);
    else if (sequence == "xy8") schedule = build_xy8(1, tau, pulse_duration);
    else throw UsageError("unknown sequence '" + sequence + "' (known: wahuha, cpmg, xy8)");

    HermitianOperator H_pair;
    if (pair == "nv") H_pair = nv_pair_hamiltonian(1.0);
    else if (pair == "spin-half") H_pair = spin_half_pair_hamiltonian(1.0);
    else throw UsageError("unknown pair kind '" + pair + "' (known: nv, spin-half)");

    const auto H = average_hamiltonian(schedule, H_pair);
    const auto coeffs = pauli_decompose(H);
    if (coeffs.empty()) {
        std::cout << "average Hamiltonian is zero (all Pauli coefficients below tolerance)\n";
        return 0;
    }
    std::cout << "average Hamiltonian Pauli coefficients (units of w):\n";
    for (const auto& c : coeffs) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "  %c%c  %+.6f\n", c.a, c.b, c.value);
        std::cout << buf;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 0; i < argc; ++i) {
        if (i) g_command_line += " ";
        g_command_line += argv[i];
    }

    CLI::App app{"spinsim: cluster simulations of driven dipolar spin ensembles"};
    app.require_subcommand(1);

    // gen-dist
    auto* gen = app.add_subcommand("gen-dist", "build a nearest-neighbor coupling histogram");
    std::string gd_preset, gd_out;
    double gd_density = 0.0, gd_area = 0.0;
    int gd_realizations = 200, gd_bins = 64;
    std::uint64_t gd_seed = 1;
    gen->add_option("--preset", gd_preset, "ensemble preset name");
    gen->add_option("--density", gd_density, "spins per cm^2");
    gen->add_option("--area-um2", gd_area, "disc area in um^2");
    gen->add_option("--realizations", gd_realizations, "geometry realizations");
    gen->add_option("--bins", gd_bins, "histogram bins");
    gen->add_option("--seed", gd_seed, "rng seed");
    gen->add_option("--out-dir", gd_out, "output directory (default $SPINSIM_OUT_DIR or .)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run an ensemble-averaged trace");
    SimulateFlags sf;
    std::string sf_config;
    sim->add_option("--recipe", sf.recipe, "named experiment recipe");
    sim->add_option("--sequence", sf.sequence,
                    "free|spinlock|cpmg|xy8|wahuha|cpmg+wahuha");
    sim->add_option("--cluster-size", sf.cluster_size, "spins per cluster");
    sim->add_option("--equal-omega0", sf.equal_omega0, "equal coupling strength, rad/s");
    sim->add_option("--preset", sf.preset_name, "ensemble preset as coupling source");
    sim->add_option("--density", sf.density, "spins per cm^2 (coupling source)");
    sim->add_option("--area-um2", sf.area_um2, "disc area um^2 (coupling source)");
    sim->add_option("--dist-realizations", sf.dist_realizations,
                    "geometry realizations for the histogram");
    sim->add_option("--dist-bins", sf.dist_bins, "histogram bins");
    sim->add_option("--omega", sf.omega, "spin-lock drive, rad/s");
    sim->add_option("--n-pulses", sf.n_pulses, "cpmg pulse count / xy8 blocks / cpmg periods");
    sim->add_option("--n-cycles", sf.n_cycles, "wahuha cycles");
    sim->add_option("--wahuha-reps", sf.wahuha_reps, "wahuha cycles per cpmg gap (combined)");
    sim->add_option("--tau", sf.tau, "sequence period, s");
    sim->add_option("--pulse-duration", sf.pulse_duration, "finite pulse width, s (0 = ideal)");
    sim->add_option("--epsilon", sf.epsilon, "wahuha pulse-shift fraction");
    sim->add_option("--t-max", sf.t_max, "trace length, s");
    sim->add_option("--dt", sf.dt, "time step, s (default: stability bound)");
    sim->add_option("--stride", sf.stride, "sample every N steps");
    sim->add_option("--n-dipolar", sf.n_dipolar, "dipolar realizations");
    sim->add_option("--n-noise", sf.n_noise, "noise realizations");
    sim->add_option("--threads", sf.threads, "worker threads (0 = hardware)");
    sim->add_option("--recipe-noise", sf.recipe_noise, "named bath (paper-bath)");
    sim->add_option("--tau-c", sf.tau_c, "bath correlation time, s");
    sim->add_option("--noise-b", sf.noise_b, "bath coupling b, rad/s");
    sim->add_option("--seed", sf.seed, "master seed");
    sim->add_option("--units", sf.units, "bare|two-pi angular inputs");
    sim->add_option("--out-dir", sf.out_dir, "output directory (default $SPINSIM_OUT_DIR or .)");
    sim->add_option("--config", sf_config, "INI config file (flags override file values)");

    // analyze
    auto* ana = app.add_subcommand("analyze", "spectrum / decay fit of a trace CSV");
    std::string an_in, an_fit, an_out;
    bool an_fft = false;
    double an_omega0 = 0.0;
    ana->add_option("--in", an_in, "input trace CSV")->required();
    ana->add_flag("--fft", an_fft, "write the magnitude spectrum");
    ana->add_option("--omega0", an_omega0, "normalization frequency, rad/s");
    ana->add_option("--fit", an_fit, "decay model: exponential|stretched");
    ana->add_option("--out-dir", an_out, "output directory (default $SPINSIM_OUT_DIR or .)");

    // avg-ham
    auto* avg = app.add_subcommand("avg-ham", "zeroth-order average Hamiltonian of a sequence");
    std::string ah_seq = "wahuha", ah_pair = "nv";
    double ah_eps = 0.0, ah_tau = 1e-6, ah_width = 0.0;
    avg->add_option("--sequence", ah_seq, "wahuha|cpmg|xy8");
    avg->add_option("--pair", ah_pair, "nv|spin-half");
    avg->add_option("--epsilon", ah_eps, "wahuha pulse-shift fraction");
    avg->add_option("--tau", ah_tau, "sequence delay, s");
    avg->add_option("--pulse-duration", ah_width, "finite width, s (rejected if > 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage: spinsim <gen-dist|simulate|analyze|avg-ham> [options]\n"
                  << e.what() << "\n";
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen_dist(gd_preset, gd_density, gd_area, gd_realizations, gd_bins,
                                gd_seed, gd_out);
        if (sim->parsed()) {
            if (!sf_config.empty()) apply_config_file(sf, sf_config, *sim);
            return cmd_simulate(sf);
        }
        if (ana->parsed()) return cmd_analyze(an_in, an_fft, an_omega0, an_fit, an_out);
        if (avg->parsed()) return cmd_avg_ham(ah_seq, ah_pair, ah_eps, ah_tau, ah_width);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        const std::string code = e.code();
        if (code == errc::IO_ERROR || code == errc::PARSE_ERROR) return 1;
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
