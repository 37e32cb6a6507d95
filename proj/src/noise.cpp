#include "spinsim/noise.hpp"

#include <cmath>

#include "spinsim/errors.hpp"

namespace spinsim {

double ou_step(double B, double dt, const NoiseParams& params, double gauss) {
    if (dt <= 0) throw Error(errc::BAD_ARGUMENT, "ou_step needs dt > 0, got " + std::to_string(dt));
    const double decay = std::exp(-dt / params.tau_c);
    const double diff = 0.5 * params.b * std::sqrt(1.0 - decay * decay);
    return B * decay + diff * gauss;
}

NoiseTrajectory ou_trajectory(double T, double dt, const NoiseParams& params,
                              std::uint64_t seed) {
    if (dt <= 0) throw Error(errc::BAD_ARGUMENT, "ou_trajectory needs dt > 0");
    if (T < dt) throw Error(errc::BAD_ARGUMENT, "ou_trajectory needs T >= dt");
    // guard against ratios like 100.0000000000001 pushing ceil one step up
    const long nsteps = static_cast<long>(std::ceil(T / dt - 1e-9));

    NoiseTrajectory tr;
    tr.dt = dt;
    tr.seed = seed;
    tr.values.resize(nsteps + 1);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    tr.values[0] = 0.5 * params.b * normal(rng);
    for (long k = 1; k <= nsteps; ++k)
        tr.values[k] = ou_step(tr.values[k - 1], dt, params, normal(rng));
    return tr;
}

OuGenerator::OuGenerator(const NoiseParams& params, std::uint64_t seed)
    : params_(params), rng_(seed) {
    B_ = 0.5 * params_.b * normal_(rng_);
}

double OuGenerator::advance(double dt) {
    B_ = ou_step(B_, dt, params_, normal_(rng_));
    return B_;
}

} // namespace spinsim
