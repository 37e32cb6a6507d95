#include "spinsim/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

#include <json.hpp>

namespace spinsim {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(errc::IO_ERROR, "cannot open " + path + " for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::IO_ERROR, "cannot open " + path);
    return in;
}

double parse_double(const std::string& field, const std::string& path, long line) {
    const char* s = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw Error(errc::PARSE_ERROR,
                    path + ": bad numeric field '" + field + "' at line " + std::to_string(line));
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

json load_json(const std::string& path) {
    std::ifstream in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error(errc::PARSE_ERROR, path + ": " + e.what());
    }
    return j;
}

} // namespace

std::string fingerprint(const std::string& canonical_text) {
    // FNV-1a, 64 bit
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_trace_csv(const std::string& path, const TraceResult& trace) {
    std::ofstream out = open_out(path);
    out << "t_seconds,sx_mean,sx_std,n_realizations\n";
    for (size_t k = 0; k < trace.times.size(); ++k)
        out << fmt_double(trace.times[k]) << ',' << fmt_double(trace.sx_mean[k]) << ','
            << fmt_double(trace.sx_std[k]) << ',' << trace.n_realizations << '\n';
}

TraceResult read_trace_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line))
        throw Error(errc::PARSE_ERROR, path + ": empty file at line 1");
    ++lineno;
    TraceResult tr;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 4)
            throw Error(errc::PARSE_ERROR,
                        path + ": expected 4 fields at line " + std::to_string(lineno));
        tr.times.push_back(parse_double(fields[0], path, lineno));
        tr.sx_mean.push_back(parse_double(fields[1], path, lineno));
        tr.sx_std.push_back(parse_double(fields[2], path, lineno));
        tr.n_realizations = static_cast<long>(parse_double(fields[3], path, lineno));
    }
    return tr;
}

void write_distribution_csv(const std::string& path, const CouplingDistribution& dist) {
    std::ofstream out = open_out(path);
    out << "bin_low_hz,bin_high_hz,probability\n";
    for (int b = 0; b < dist.bins(); ++b)
        out << fmt_double(dist.bin_edges[b]) << ',' << fmt_double(dist.bin_edges[b + 1]) << ','
            << fmt_double(dist.probabilities[b]) << '\n';
}

CouplingDistribution read_distribution_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    long lineno = 1;
    if (!std::getline(in, line))
        throw Error(errc::PARSE_ERROR, path + ": empty file at line 1");
    CouplingDistribution d;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3)
            throw Error(errc::PARSE_ERROR,
                        path + ": expected 3 fields at line " + std::to_string(lineno));
        const double lo = parse_double(fields[0], path, lineno);
        const double hi = parse_double(fields[1], path, lineno);
        if (d.bin_edges.empty()) d.bin_edges.push_back(lo);
        d.bin_edges.push_back(hi);
        d.probabilities.push_back(parse_double(fields[2], path, lineno));
    }
    if (d.probabilities.empty())
        throw Error(errc::EMPTY_DISTRIBUTION, path + ": no histogram rows");
    double mean = 0.0;
    for (int b = 0; b < d.bins(); ++b)
        mean += d.probabilities[b] * 0.5 * (d.bin_edges[b] + d.bin_edges[b + 1]);
    d.mean_strength = mean;
    return d;
}

void write_distribution_sidecar(const std::string& path, const CouplingDistribution& dist,
                                const EnsembleSpec& spec, std::uint64_t seed,
                                double nominal_omega0) {
    json j;
    j["mean_strength"] = dist.mean_strength;
    j["nominal_omega0"] = nominal_omega0;
    j["sample_count"] = dist.sample_count;
    j["bins"] = dist.bins();
    j["seed"] = seed;
    j["spec"] = {{"density_cm2", spec.density_cm2},
                 {"area_um2", spec.area_um2},
                 {"n_spins", spec.n_spins},
                 {"J0", spec.J0}};
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

DistributionMeta read_distribution_sidecar(const std::string& path) {
    const json j = load_json(path);
    DistributionMeta meta;
    meta.mean_strength = j.at("mean_strength").get<double>();
    meta.nominal_omega0 = j.at("nominal_omega0").get<double>();
    return meta;
}

void write_spectrum_csv(const std::string& path, const SpectrumEstimate& spectrum) {
    std::ofstream out = open_out(path);
    out << "omega_rad_s,omega_over_omega0,magnitude\n";
    for (size_t j = 0; j < spectrum.omega.size(); ++j)
        out << fmt_double(spectrum.omega[j]) << ',' << fmt_double(spectrum.omega_over_omega0[j])
            << ',' << fmt_double(spectrum.magnitude[j]) << '\n';
}

void write_lines_csv(const std::string& path, const EqualCouplingSpectrum& spec) {
    std::ofstream out = open_out(path);
    out << "freq_multiple,weight\n";
    for (const auto& line : spec.lines)
        out << line.freq_multiple << ',' << fmt_double(line.weight) << '\n';
    out << 0 << ',' << fmt_double(spec.dc) << '\n';
}

void write_fit_json(const std::string& path, const DecayFit& fit) {
    json j;
    j["model"] = fit.model == DecayModel::Exponential ? "exponential" : "stretched";
    j["T_seconds"] = fit.T;
    j["p"] = fit.p;
    j["residual"] = fit.residual;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_schedule_json(const std::string& path, const PulseSchedule& schedule) {
    json j;
    j["total_time_s"] = schedule.total_time;
    j["events"] = json::array();
    for (const auto& e : schedule.events)
        j["events"].push_back({{"start_s", e.start},
                               {"duration_s", e.duration},
                               {"axis", to_string(e.axis)},
                               {"angle_rad", e.angle}});
    if (schedule.continuous_drive)
        j["drive"] = {{"omega_rad_s", schedule.continuous_drive->omega},
                      {"axis", to_string(schedule.continuous_drive->axis)}};
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

PulseSchedule read_schedule_json(const std::string& path) {
    const json j = load_json(path);
    PulseSchedule s;
    try {
        s.total_time = j.at("total_time_s").get<double>();
        for (const auto& ev : j.at("events")) {
            PulseEvent e;
            e.start = ev.at("start_s").get<double>();
            e.duration = ev.at("duration_s").get<double>();
            e.axis = signed_axis_from_string(ev.at("axis").get<std::string>());
            e.angle = ev.at("angle_rad").get<double>();
            s.events.push_back(e);
        }
        if (j.contains("drive")) {
            DriveSettings d;
            d.omega = j.at("drive").at("omega_rad_s").get<double>();
            d.axis = signed_axis_from_string(j.at("drive").at("axis").get<std::string>());
            s.continuous_drive = d;
        }
    } catch (const json::exception& e) {
        throw Error(errc::PARSE_ERROR, path + ": " + e.what());
    }
    return s;
}

void write_trajectory_csv(const std::string& path, const NoiseTrajectory& traj) {
    std::ofstream out = open_out(path);
    out << "t_seconds,B_rad_per_s\n";
    for (size_t k = 0; k < traj.values.size(); ++k)
        out << fmt_double(k * traj.dt) << ',' << fmt_double(traj.values[k]) << '\n';
}

namespace {

std::string coupling_source_text(const CouplingSource& source) {
    if (const auto* eq = std::get_if<EqualCouplings>(&source))
        return "equal omega0=" + fmt_double(eq->omega0);
    if (const auto* cm = std::get_if<CouplingMatrix>(&source)) {
        std::string blob;
        for (int i = 0; i < cm->n_spins; ++i)
            for (int k = i + 1; k < cm->n_spins; ++k) blob += fmt_double(cm->w(i, k)) + ",";
        return "matrix n=" + std::to_string(cm->n_spins) + " digest=" + fingerprint(blob);
    }
    const auto& cd = std::get<CouplingDistribution>(source);
    std::string blob;
    for (double e : cd.bin_edges) blob += fmt_double(e) + ",";
    for (double p : cd.probabilities) blob += fmt_double(p) + ";";
    return "histogram bins=" + std::to_string(cd.bins()) + " mean=" +
           fmt_double(cd.mean_strength) + " digest=" + fingerprint(blob);
}

std::string schedule_text(const PulseSchedule& schedule) {
    std::string blob;
    for (const auto& e : schedule.events)
        blob += fmt_double(e.start) + "/" + fmt_double(e.duration) + "/" + to_string(e.axis) +
                "/" + fmt_double(e.angle) + ";";
    std::string drive = "none";
    if (schedule.continuous_drive)
        drive = std::string(to_string(schedule.continuous_drive->axis)) + "@" +
                fmt_double(schedule.continuous_drive->omega);
    return "events=" + std::to_string(schedule.events.size()) + " total_time=" +
           fmt_double(schedule.total_time) + " drive=" + drive + " digest=" + fingerprint(blob);
}

} // namespace

std::string canonical_config_text(const SimulationConfig& config) {
    std::ostringstream out;
    out << "cluster_size=" << config.cluster_size << '\n';
    out << "couplings=" << coupling_source_text(config.couplings) << '\n';
    out << "schedule=" << schedule_text(config.schedule) << '\n';
    if (config.noise)
        out << "noise=tau_c:" << fmt_double(config.noise->tau_c)
            << " b:" << fmt_double(config.noise->b) << '\n';
    else
        out << "noise=none\n";
    out << "dt=" << fmt_double(config.dt) << '\n';
    out << "t_max=" << fmt_double(config.t_max) << '\n';
    out << "sample_stride=" << config.sample_stride << '\n';
    out << "n_dipolar=" << config.n_dipolar_realizations << '\n';
    out << "n_noise=" << config.n_noise_realizations << '\n';
    out << "master_seed=" << config.master_seed << '\n';
    out << "units=" << (config.units == AngularUnits::Bare ? "bare" : "two_pi") << '\n';
    out << "draw_mode=" << (config.draw_mode == DrawMode::IidPairs ? "iid_pairs" : "positions")
        << '\n';
    return out.str();
}

void write_trace_sidecar(const std::string& path, const SimulationConfig& config,
                         const TraceResult& trace, const std::string& command_line) {
    json j;
    j["fingerprint"] = trace.fingerprint;
    j["command_line"] = command_line;
    j["n_realizations"] = trace.n_realizations;
    j["n_samples"] = trace.times.size();
    json cfg;
    cfg["cluster_size"] = config.cluster_size;
    cfg["couplings"] = coupling_source_text(config.couplings);
    cfg["schedule"] = schedule_text(config.schedule);
    if (config.noise)
        cfg["noise"] = {{"tau_c_s", config.noise->tau_c}, {"b_rad_s", config.noise->b}};
    cfg["dt"] = config.dt;
    cfg["t_max"] = config.t_max;
    cfg["sample_stride"] = config.sample_stride;
    cfg["n_dipolar_realizations"] = config.n_dipolar_realizations;
    cfg["n_noise_realizations"] = config.n_noise_realizations;
    cfg["master_seed"] = config.master_seed;
    cfg["units"] = config.units == AngularUnits::Bare ? "bare" : "two_pi";
    j["config"] = cfg;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

} // namespace spinsim
