// End-to-end checks of the command-line binary. The binary path arrives as
// the last command-line argument (wired up by CMake).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

static std::string g_cli;

namespace {

struct RunResult {
    int code = -1;
    std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
    std::string cmd = g_cli + " " + args + " 2>&1";
    RunResult r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf;
    size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0)
        r.output.append(buf.data(), got);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() /
              ("spinsim_cli_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

TEST_CASE("no arguments prints usage and exits 2") {
    auto r = run("");
    CHECK(r.code == 2);
    CHECK(r.output.find("usage") != std::string::npos);
}

TEST_CASE("unknown subcommand exits 2") {
    auto r = run("frobnicate");
    CHECK(r.code == 2);
}

TEST_CASE("gen-dist writes distribution files and prints the mean") {
    TempDir tmp;
    auto r = run("gen-dist --preset paper-60hz --realizations 20 --bins 64 --seed 1 --out-dir " +
                 tmp.dir.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(tmp.path("distribution.csv")));
    CHECK(fs::exists(tmp.path("distribution.json")));
    CHECK(r.output.find("mean") != std::string::npos);

    auto csv = slurp(tmp.path("distribution.csv"));
    CHECK(csv.rfind("bin_low_hz,bin_high_hz,probability", 0) == 0);
}

TEST_CASE("gen-dist accepts raw density/area") {
    TempDir tmp;
    auto r = run("gen-dist --density 1e10 --area-um2 0.46 --realizations 2 --bins 32 --seed 2 --out-dir " +
                 tmp.dir.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(tmp.path("distribution.csv")));
}

TEST_CASE("gen-dist without a source exits 2") {
    auto r = run("gen-dist --realizations 5");
    CHECK(r.code == 2);
}

TEST_CASE("simulate free sequence is reproducible byte for byte") {
    TempDir tmp;
    std::string common =
        " simulate --sequence free --cluster-size 2 --equal-omega0 377"
        " --t-max 2e-3 --dt 1e-5 --seed 9 --out-dir ";
    auto r1 = run(common.substr(1) + tmp.dir.string());
    CHECK(r1.code == 0);
    REQUIRE(fs::exists(tmp.path("trace.csv")));
    REQUIRE(fs::exists(tmp.path("trace.json")));
    auto first = slurp(tmp.path("trace.csv"));

    TempDir tmp2;
    auto r2 = run(common.substr(1) + tmp2.dir.string());
    CHECK(r2.code == 0);
    CHECK(slurp(tmp2.path("trace.csv")) == first);
}

TEST_CASE("simulate honors the output directory environment variable") {
    TempDir tmp;
    std::string cmd = "SPINSIM_OUT_DIR=" + tmp.dir.string() + " " + g_cli +
                      " simulate --sequence free --cluster-size 2 --equal-omega0 100"
                      " --t-max 1e-3 --dt 1e-5 --seed 3 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 1024> buf;
    while (fread(buf.data(), 1, buf.size(), p) > 0) {}
    int status = pclose(p);
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(tmp.path("trace.csv")));
}

TEST_CASE("simulate rejects unknown sequences with a usage error") {
    auto r = run("simulate --sequence warp --cluster-size 2 --equal-omega0 100 --t-max 1e-3");
    CHECK(r.code == 2);
}

TEST_CASE("physics violations exit 3 with a machine-readable code") {
    TempDir tmp;
    // pulse duration exceeding the period cannot be scheduled
    auto r = run("simulate --sequence cpmg --n-pulses 4 --tau 1e-5 --pulse-duration 2e-5"
                 " --cluster-size 2 --equal-omega0 100 --t-max 4e-5 --out-dir " +
                 tmp.dir.string());
    CHECK(r.code == 3);
    CHECK(r.output.find("SCHEDULE_OVERLAP") != std::string::npos);
}

TEST_CASE("analyze fft and fit work on a simulated trace") {
    TempDir tmp;
    auto r = run("simulate --sequence free --cluster-size 2 --equal-omega0 377"
                 " --t-max 0.1061 --dt 2.5e-5 --seed 4 --out-dir " + tmp.dir.string());
    REQUIRE(r.code == 0);

    auto ra = run("analyze --in " + tmp.path("trace.csv") + " --fft --omega0 377 --out-dir " +
                  tmp.dir.string());
    CHECK(ra.code == 0);
    REQUIRE(fs::exists(tmp.path("spectrum.csv")));
    auto spec = slurp(tmp.path("spectrum.csv"));
    CHECK(spec.rfind("omega_rad_s,omega_over_omega0,magnitude", 0) == 0);
    // extraction result printed: dominant peak at 4 w0 -> w0 = 377
    CHECK(ra.output.find("omega0") != std::string::npos);
}

TEST_CASE("analyze fit on a decaying synthetic trace") {
    TempDir tmp;
    {
        std::ofstream out(tmp.path("fid.csv"));
        out << "t_seconds,sx_mean,sx_std,n_realizations\n";
        for (int k = 0; k < 400; ++k) {
            double t = k * 5e-6;
            out << t << "," << std::exp(-t / 5e-4) << ",0,1\n";
        }
    }
    auto r = run("analyze --in " + tmp.path("fid.csv") + " --fit exponential --out-dir " +
                 tmp.dir.string());
    CHECK(r.code == 0);
    REQUIRE(fs::exists(tmp.path("fit.json")));
    auto fit = slurp(tmp.path("fit.json"));
    CHECK(fit.find("T_seconds") != std::string::npos);
    CHECK(r.output.find("0.0005") != std::string::npos);
}

TEST_CASE("analyze on a missing file exits 1") {
    auto r = run("analyze --in /nonexistent/trace.csv --fft --omega0 100");
    CHECK(r.code == 1);
}

TEST_CASE("avg-ham reports pauli coefficients") {
    auto nv = run("avg-ham --sequence wahuha --pair nv");
    CHECK(nv.code == 0);
    CHECK(nv.output.find("XX") != std::string::npos);
    CHECK(nv.output.find("0.333333") != std::string::npos);

    auto half = run("avg-ham --sequence wahuha --pair spin-half");
    CHECK(half.code == 0);
    CHECK(half.output.find("zero") != std::string::npos);

    auto eps = run("avg-ham --sequence wahuha --pair nv --epsilon 0.02");
    CHECK(eps.code == 0);
    // XX and YY split around 1/3 by eps/3
    CHECK(eps.output.find("XX") != std::string::npos);
    CHECK(eps.output.find("YY") != std::string::npos);

    auto cpmg = run("avg-ham --sequence cpmg --pair nv");
    CHECK(cpmg.code == 0);

    auto bad = run("avg-ham --sequence wahuha --pair nv --pulse-duration 1e-6");
    CHECK(bad.code == 3);
    CHECK(bad.output.find("FINITE_WIDTH_UNSUPPORTED") != std::string::npos);
}

TEST_CASE("config file values are read and flags override them") {
    TempDir tmp;
    {
        std::ofstream out(tmp.path("run.ini"));
        out << "sequence=free\n";
        out << "cluster-size=2\n";
        out << "equal-omega0=377\n";
        out << "t-max=1e-3\n";
        out << "dt=1e-5\n";
        out << "seed=5\n";
    }
    auto r = run("simulate --config " + tmp.path("run.ini") + " --out-dir " + tmp.dir.string());
    CHECK(r.code == 0);
    REQUIRE(fs::exists(tmp.path("trace.csv")));
    auto base = slurp(tmp.path("trace.csv"));

    // flag overrides the file's seed: different trace metadata, same shape
    TempDir tmp2;
    auto r2 = run("simulate --config " + tmp.path("run.ini") + " --seed 6 --out-dir " +
                  tmp2.dir.string());
    CHECK(r2.code == 0);
    auto meta1 = slurp(tmp.path("trace.json"));
    auto meta2 = slurp(tmp2.path("trace.json"));
    CHECK(meta1.find("\"master_seed\": 5") != std::string::npos);
    CHECK(meta2.find("\"master_seed\": 6") != std::string::npos);
}

TEST_CASE("recipes resolve to full configurations") {
    TempDir tmp;
    // fig5: analytic line spectrum, instant
    auto r = run("simulate --recipe fig5 --out-dir " + tmp.dir.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(tmp.path("fig5_lines.csv")));
    auto lines = slurp(tmp.path("fig5_lines.csv"));
    CHECK(lines.find("0.625") != std::string::npos);

    auto bad = run("simulate --recipe fig999");
    CHECK(bad.code == 2);
    CHECK(bad.output.find("fig1a") != std::string::npos);  // lists known recipes
}

TEST_CASE("simulate --threads does not change results") {
    TempDir a, b;
    std::string common =
        "simulate --sequence free --cluster-size 4 --preset paper-60hz"
        " --n-dipolar 4 --t-max 2e-3 --dt 1e-5 --seed 11 --dist-realizations 5 --out-dir ";
    auto r1 = run(common + a.dir.string() + " --threads 1");
    auto r2 = run(common + b.dir.string() + " --threads 4");
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(slurp(a.path("trace.csv")) == slurp(b.path("trace.csv")));
}

int main(int argc, char** argv) {
    // pop the trailing binary path before handing doctest the rest
    if (argc >= 2 && argv[argc - 1][0] != '-') {
        g_cli = argv[argc - 1];
        --argc;
    } else {
        std::fprintf(stderr, "usage: test_cli [doctest flags] <path-to-spinsim>\n");
        return 1;
    }
    doctest::Context ctx;
    ctx.applyCommandLine(argc, argv);
    return ctx.run();
}
