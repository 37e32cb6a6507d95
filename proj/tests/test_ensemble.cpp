#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "spinsim/ensemble.hpp"
#include "spinsim/model.hpp"

using namespace spinsim;

TEST_CASE("spec derives count and radius") {
    auto spec = EnsembleSpec::from_density(1e10, 4.5);
    CHECK(spec.n_spins == 450);  // 1e10 cm^-2 * 4.5e-8 cm^2
    CHECK(spec.disc_radius_nm() ==
          doctest::Approx(std::sqrt(4.5e6 / M_PI)).epsilon(1e-12));
}

TEST_CASE("presets match the reference configurations") {
    // 464 spins at 1e10 cm^-2 needs 4.64 um^2 (the quoted 4.5 rounds the area,
    // not the count; the count is what the distribution depends on)
    auto p60 = preset("paper-60hz");
    CHECK(p60.spec.n_spins == 464);
    CHECK(p60.spec.area_um2 == doctest::Approx(4.64));
    CHECK(p60.spec.density_cm2 == doctest::Approx(1e10));
    CHECK(p60.nominal_omega0 == doctest::Approx(2 * M_PI * 60.0));

    auto p10k = preset("paper-10khz");
    CHECK(p10k.spec.n_spins == 9980);
    CHECK(p10k.spec.area_um2 == doctest::Approx(4.5));

    auto p1m = preset("paper-1mhz");
    CHECK(p1m.spec.n_spins == 9980);
    CHECK(p1m.spec.area_um2 == doctest::Approx(0.46));

    CHECK_THROWS_AS(preset("nope"), Error);
    CHECK(preset_names().size() == 3);
}

TEST_CASE("positions stay inside the disc and are deterministic") {
    auto spec = preset("paper-60hz").spec;
    auto pts = sample_positions(spec, 42);
    REQUIRE(pts.size() == 464);
    double R = spec.disc_radius_nm();
    for (auto& p : pts) CHECK(std::hypot(p.x_nm, p.y_nm) <= R + 1e-9);

    auto pts2 = sample_positions(spec, 42);
    CHECK(pts[100].x_nm == pts2[100].x_nm);
    auto pts3 = sample_positions(spec, 43);
    CHECK(pts[100].x_nm != pts3[100].x_nm);
}

TEST_CASE("positions are uniform over the disc") {
    // radial CDF: P(r < q R) = q^2; compare quartile counts at 3 sigma
    auto spec = preset("paper-60hz").spec;
    double R = spec.disc_radius_nm();
    int inner = 0, total = 0;
    for (unsigned s = 0; s < 50; ++s) {
        for (auto& p : sample_positions(spec, 1000 + s)) {
            if (std::hypot(p.x_nm, p.y_nm) < R / 2) ++inner;
            ++total;
        }
    }
    double frac = double(inner) / total;
    double sigma = std::sqrt(0.25 * 0.75 / total);
    CHECK(std::abs(frac - 0.25) < 3 * sigma);
}

TEST_CASE("histogram: two spins at fixed distance") {
    // J0 / 50^3 = 5.2e7 / 125000 = 416
    CHECK(kJ0 / std::pow(50.0, 3) == doctest::Approx(416.0));
}

TEST_CASE("histogram normalizes and records count") {
    auto spec = preset("paper-60hz").spec;
    auto dist = nn_coupling_histogram(spec, 20, 64, 7);
    double total = 0;
    for (double p : dist.probabilities) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dist.sample_count == 20 * 464);
    CHECK(dist.bin_edges.size() == dist.probabilities.size() + 1);
    for (size_t i = 1; i < dist.bin_edges.size(); ++i)
        CHECK(dist.bin_edges[i] > dist.bin_edges[i - 1]);
}

TEST_CASE("histogram mean is a few hundred 1/s for the 60hz preset") {
    // nearest-neighbor couplings at 1e10 cm^-2 concentrate around
    // J0/47nm^3 ~ 500; the capped histogram mean lands near that
    auto spec = preset("paper-60hz").spec;
    auto dist = nn_coupling_histogram(spec, 40, 64, 11);
    CHECK(dist.mean_strength > 300.0);
    CHECK(dist.mean_strength < 700.0);
    CHECK(typical_strength(dist) == doctest::Approx(dist.mean_strength));
}

TEST_CASE("histogram mean stable when doubling realizations") {
    auto spec = preset("paper-60hz").spec;
    auto a = nn_coupling_histogram(spec, 30, 64, 13);
    auto b = nn_coupling_histogram(spec, 60, 64, 13);
    // the nearest-neighbor strength distribution is heavy-tailed, so the
    // capped mean carries a ~1-3% sampling error at these counts; 5% flags
    // real pooling bugs without tripping on estimator noise
    CHECK(std::abs(a.mean_strength - b.mean_strength) / b.mean_strength < 0.05);
}

TEST_CASE("histogram rejects bad inputs") {
    auto spec = preset("paper-60hz").spec;
    CHECK_THROWS_AS(nn_coupling_histogram(spec, 0, 64, 1), Error);
    EnsembleSpec tiny = spec;
    tiny.n_spins = 1;
    CHECK_THROWS_AS(nn_coupling_histogram(tiny, 1, 64, 1), Error);
}

TEST_CASE("typical_strength of a single-bin histogram") {
    CouplingDistribution d;
    d.bin_edges = {99.5, 100.5};
    d.probabilities = {1.0};
    d.sample_count = 1;
    d.mean_strength = 100.0;
    CHECK(typical_strength(d) == doctest::Approx(100.0));

    CouplingDistribution empty;
    CHECK_THROWS_AS(typical_strength(empty), Error);
}

TEST_CASE("cluster draws are symmetric, zero-diagonal, deterministic") {
    auto spec = preset("paper-60hz").spec;
    auto dist = nn_coupling_histogram(spec, 20, 64, 17);
    auto c = draw_cluster_couplings(dist, 6, 5);
    c.check();
    CHECK(c.n_spins == 6);
    for (int i = 0; i < 6; ++i) CHECK(c.w(i, i) == 0.0);
    auto c2 = draw_cluster_couplings(dist, 6, 5);
    CHECK((c.w - c2.w).cwiseAbs().maxCoeff() == 0.0);
    auto c3 = draw_cluster_couplings(dist, 6, 6);
    CHECK((c.w - c3.w).cwiseAbs().maxCoeff() > 0.0);

    CHECK_THROWS_AS(draw_cluster_couplings(dist, 1, 1), Error);
    CHECK_THROWS_AS(draw_cluster_couplings(dist, 11, 1), Error);
}

TEST_CASE("pair draws follow the histogram (KS test)") {
    auto spec = preset("paper-60hz").spec;
    auto dist = nn_coupling_histogram(spec, 20, 64, 19);
    const int N = 10000;
    std::vector<double> draws;
    draws.reserve(N);
    for (int s = 0; s < N; ++s)
        draws.push_back(draw_cluster_couplings(dist, 2, 100 + s).w(0, 1));
    std::sort(draws.begin(), draws.end());
    // histogram CDF at bin edges (within-bin sampling is uniform, so the
    // empirical CDF must match the piecewise-linear CDF; evaluate at edges
    // where it is exact)
    double dmax = 0.0;
    double cum = 0.0;
    for (size_t b = 0; b < dist.probabilities.size(); ++b) {
        cum += dist.probabilities[b];
        double edge = dist.bin_edges[b + 1];
        double emp = double(std::lower_bound(draws.begin(), draws.end(), edge) -
                            draws.begin()) / N;
        dmax = std::max(dmax, std::abs(emp - cum));
    }
    // KS 1% critical value ~ 1.63/sqrt(N)
    CHECK(dmax < 1.63 / std::sqrt(double(N)));
}

TEST_CASE("position-mode cluster draws") {
    auto spec = preset("paper-60hz").spec;
    auto c = draw_cluster_couplings_positions(spec, 5, 99);
    c.check();
    CHECK(c.n_spins == 5);
    int positive = 0;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j)
            if (c.w(i, j) > 0) ++positive;
    CHECK(positive == 10);  // all pairs coupled in position mode
}

TEST_CASE("area shrink by s scales position-mode couplings by s^{3/2}") {
    auto spec = preset("paper-60hz").spec;
    EnsembleSpec small = spec;
    double s = 4.0;
    small.area_um2 = spec.area_um2 / s;
    auto big = draw_cluster_couplings_positions(spec, 6, 31);
    auto shrunk = draw_cluster_couplings_positions(small, 6, 31);
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j)
            if (big.w(i, j) > 0)
                CHECK(shrunk.w(i, j) / big.w(i, j) ==
                      doctest::Approx(std::pow(s, 1.5)).epsilon(1e-12));
}
