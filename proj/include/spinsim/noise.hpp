#pragma once
#include <cstdint>
#include <random>
#include <vector>

namespace spinsim {

struct NoiseParams {
    double tau_c = 0.0;   // seconds, > 0
    double b = 0.0;       // angular 1/s, >= 0

    double t2_star() const { return 1.0 / (b * b * tau_c); }
};

struct NoiseTrajectory {
    double dt = 0.0;
    std::vector<double> values;   // B samples, angular 1/s
    std::uint64_t seed = 0;
};

// One exact OU update: B e^{-dt/tau_c} + (b/2) g sqrt(1 - e^{-2 dt/tau_c}).
// `gauss` is a standard-normal draw supplied by the caller.
double ou_step(double B, double dt, const NoiseParams& params, double gauss);

// Full trajectory on a uniform grid, B(0) from the stationary N(0,(b/2)^2).
// ceil(T/dt)+1 samples. Deterministic per seed.
NoiseTrajectory ou_trajectory(double T, double dt, const NoiseParams& params,
                              std::uint64_t seed);

// Incremental form with the same statistics/seeding as ou_trajectory; the
// engine draws B step by step without materializing the whole path.
class OuGenerator {
public:
    OuGenerator(const NoiseParams& params, std::uint64_t seed);
    double current() const { return B_; }
    double advance(double dt);   // exact update over dt, returns the new B

private:
    NoiseParams params_;
    double B_ = 0.0;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
};

} // namespace spinsim
