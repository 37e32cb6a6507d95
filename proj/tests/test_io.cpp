#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "spinsim/io.hpp"

using namespace spinsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() /
              ("spinsim_io_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("trace CSV round trip") {
    TempDir tmp;
    TraceResult tr;
    for (int k = 0; k < 50; ++k) {
        tr.times.push_back(k * 1e-5);
        tr.sx_mean.push_back(std::cos(0.3 * k));
        tr.sx_std.push_back(0.01 * k);
    }
    tr.n_realizations = 12;
    tr.fingerprint = "abc123";
    auto p = tmp.path("trace.csv");
    write_trace_csv(p, tr);
    auto rd = read_trace_csv(p);
    REQUIRE(rd.times.size() == tr.times.size());
    CHECK(rd.n_realizations == 12);
    for (size_t k = 0; k < tr.times.size(); ++k) {
        CHECK(rd.times[k] == doctest::Approx(tr.times[k]).epsilon(1e-15));
        CHECK(rd.sx_mean[k] == doctest::Approx(tr.sx_mean[k]).epsilon(1e-15));
        CHECK(rd.sx_std[k] == doctest::Approx(tr.sx_std[k]).epsilon(1e-15));
    }
}

TEST_CASE("trace CSV has the contracted header") {
    TempDir tmp;
    TraceResult tr;
    tr.times = {0.0, 1e-5};
    tr.sx_mean = {1.0, 0.9};
    tr.sx_std = {0.0, 0.0};
    tr.n_realizations = 1;
    auto p = tmp.path("t.csv");
    write_trace_csv(p, tr);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t_seconds,sx_mean,sx_std,n_realizations");
}

TEST_CASE("write is byte-stable") {
    TempDir tmp;
    TraceResult tr;
    for (int k = 0; k < 20; ++k) {
        tr.times.push_back(k * 1.37e-6);
        tr.sx_mean.push_back(1.0 / (k + 1));
        tr.sx_std.push_back(0.0);
    }
    tr.n_realizations = 3;
    auto pa = tmp.path("a.csv"), pb = tmp.path("b.csv");
    write_trace_csv(pa, tr);
    write_trace_csv(pb, tr);
    std::ifstream fa(pa), fb(pb);
    std::string a((std::istreambuf_iterator<char>(fa)), {});
    std::string b((std::istreambuf_iterator<char>(fb)), {});
    CHECK(a == b);
    CHECK(!a.empty());
}

TEST_CASE("read errors carry codes and line numbers") {
    TempDir tmp;
    try {
        read_trace_csv(tmp.path("missing.csv"));
        FAIL("expected io error");
    } catch (const Error& e) {
        CHECK(std::string(e.code()) == errc::IO_ERROR);
        CHECK(std::string(e.what()).find("missing.csv") != std::string::npos);
    }

    auto p = tmp.path("bad.csv");
    {
        std::ofstream out(p);
        out << "t_seconds,sx_mean,sx_std,n_realizations\n";
        out << "0.0,1.0,0.0,1\n";
        out << "1e-5,not_a_number,0.0,1\n";
    }
    try {
        read_trace_csv(p);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.code()) == errc::PARSE_ERROR);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("distribution CSV and sidecar round trip") {
    TempDir tmp;
    CouplingDistribution d;
    d.bin_edges = {0.0, 100.0, 200.0, 300.0};
    d.probabilities = {0.2, 0.5, 0.3};
    d.mean_strength = 170.0;
    d.sample_count = 999;
    auto p = tmp.path("dist.csv");
    write_distribution_csv(p, d);
    auto rd = read_distribution_csv(p);
    REQUIRE(rd.probabilities.size() == 3);
    CHECK(rd.bin_edges[1] == doctest::Approx(100.0));
    CHECK(rd.probabilities[1] == doctest::Approx(0.5));

    auto spec = preset("paper-60hz").spec;
    auto sc = tmp.path("dist.json");
    write_distribution_sidecar(sc, d, spec, 42, 377.0);
    auto meta = read_distribution_sidecar(sc);
    CHECK(meta.mean_strength == doctest::Approx(170.0));
    CHECK(meta.nominal_omega0 == doctest::Approx(377.0));
}

TEST_CASE("schedule JSON round trip") {
    TempDir tmp;
    auto s = build_wahuha(2, 5e-6, 1e-7, 0.02);
    auto p = tmp.path("sched.json");
    write_schedule_json(p, s);
    auto rd = read_schedule_json(p);
    rd.validate();
    REQUIRE(rd.events.size() == s.events.size());
    CHECK(rd.total_time == doctest::Approx(s.total_time).epsilon(1e-15));
    for (size_t k = 0; k < s.events.size(); ++k) {
        CHECK(rd.events[k].start == doctest::Approx(s.events[k].start).epsilon(1e-15));
        CHECK(rd.events[k].duration ==
              doctest::Approx(s.events[k].duration).epsilon(1e-15));
        CHECK(rd.events[k].axis == s.events[k].axis);
        CHECK(rd.events[k].angle == doctest::Approx(s.events[k].angle).epsilon(1e-15));
    }

    auto sl = build_spinlock(2e5, 0.05);
    auto p2 = tmp.path("lock.json");
    write_schedule_json(p2, sl);
    auto rd2 = read_schedule_json(p2);
    REQUIRE(rd2.continuous_drive.has_value());
    CHECK(rd2.continuous_drive->omega == doctest::Approx(2e5));
}

TEST_CASE("fingerprint is stable and input-sensitive") {
    auto a = fingerprint("config A");
    auto b = fingerprint("config A");
    auto c = fingerprint("config B");
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == 16);  // 64-bit hex
}

TEST_CASE("canonical config text covers the physics knobs") {
    SimulationConfig cfg;
    cfg.cluster_size = 4;
    cfg.couplings = EqualCouplings{377.0};
    cfg.schedule = build_cpmg(4, 1e-5, 0.0);
    cfg.noise = NoiseParams{5e-6, 2e4};
    cfg.dt = 1e-7;
    cfg.t_max = 4e-5;
    cfg.master_seed = 99;
    auto text = canonical_config_text(cfg);
    CHECK(text.find("cluster_size=4") != std::string::npos);
    CHECK(text.find("master_seed=99") != std::string::npos);

    SimulationConfig cfg2 = cfg;
    cfg2.master_seed = 100;
    CHECK(canonical_config_text(cfg2) != text);
    CHECK(fingerprint(text) != fingerprint(canonical_config_text(cfg2)));
}

TEST_CASE("spectrum, lines, fit and trajectory writers emit contracted headers") {
    TempDir tmp;
    SpectrumEstimate sp;
    sp.omega = {0.0, 1.0, 2.0};
    sp.omega_over_omega0 = {0.0, 0.5, 1.0};
    sp.magnitude = {0.1, 0.9, 0.2};
    sp.omega0 = 2.0;
    auto p = tmp.path("spec.csv");
    write_spectrum_csv(p, sp);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    CHECK(header == "omega_rad_s,omega_over_omega0,magnitude");

    EqualCouplingSpectrum lines;
    lines.lines = {{4, 0.625}, {12, 0.3125}, {20, 0.0625}};
    lines.dc = 0.0;
    auto pl = tmp.path("lines.csv");
    write_lines_csv(pl, lines);
    std::ifstream lin(pl);
    std::getline(lin, header);
    CHECK(header == "freq_multiple,weight");

    DecayFit fit;
    fit.model = DecayModel::Exponential;
    fit.T = 5e-4;
    fit.p = 1.0;
    fit.residual = 1e-3;
    auto pf = tmp.path("fit.json");
    write_fit_json(pf, fit);
    std::ifstream fin(pf);
    std::string all((std::istreambuf_iterator<char>(fin)), {});
    CHECK(all.find("\"T_seconds\"") != std::string::npos);
    CHECK(all.find("exponential") != std::string::npos);

    NoiseTrajectory traj;
    traj.dt = 1e-6;
    traj.values = {1.0, 2.0, 3.0};
    traj.seed = 1;
    auto pt = tmp.path("traj.csv");
    write_trajectory_csv(pt, traj);
    std::ifstream tin(pt);
    std::getline(tin, header);
    CHECK(header == "t_seconds,B_rad_per_s");
}

TEST_CASE("trace sidecar embeds fingerprint and config") {
    TempDir tmp;
    SimulationConfig cfg;
    cfg.cluster_size = 2;
    cfg.couplings = EqualCouplings{100.0};
    cfg.schedule = build_free(1e-3);
    cfg.dt = 1e-5;
    cfg.t_max = 1e-3;
    cfg.master_seed = 5;
    auto tr = ensemble_average(cfg);
    auto p = tmp.path("run.json");
    write_trace_sidecar(p, cfg, tr, "spinsim simulate --test");
    std::ifstream in(p);
    std::string all((std::istreambuf_iterator<char>(in)), {});
    CHECK(all.find(tr.fingerprint) != std::string::npos);
    CHECK(all.find("master_seed") != std::string::npos);
    CHECK(all.find("spinsim simulate --test") != std::string::npos);
}
