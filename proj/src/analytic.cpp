#include "spinsim/analytic.hpp"

#include <cmath>
#include <stdexcept>

#include "spinsim/errors.hpp"

namespace spinsim {

namespace {

// Binomial row C(n-1, k-1) / 2^{n-1}, k = 1..n. Exact integer arithmetic in
// doubles for small n; lgamma plus renormalization once the binomials leave
// the exact-integer range.
std::vector<double> binomial_weights(int n) {
    std::vector<double> p(n);
    if (n <= 50) {
        const double scale = std::ldexp(1.0, -(n - 1));
        double c = 1.0;  // C(n-1, 0)
        for (int k = 1; k <= n; ++k) {
            p[k - 1] = c * scale;
            c = c * (n - k) / k;  // C(n-1,k) from C(n-1,k-1)
        }
    } else {
        const double ln2 = std::log(2.0);
        long double sum = 0.0L;
        for (int k = 1; k <= n; ++k) {
            double lnw = std::lgamma(n) - std::lgamma(k) - std::lgamma(n - k + 1) - (n - 1) * ln2;
            p[k - 1] = std::exp(lnw);
            sum += p[k - 1];
        }
        for (double& v : p) v = static_cast<double>(v / sum);
    }
    return p;
}

} // namespace

EqualCouplingSpectrum equal_coupling_spectrum(int n) {
    if (n < 2) throw Error(errc::BAD_ARGUMENT, "equal-coupling spectrum needs n >= 2");
    const std::vector<double> p = binomial_weights(n);
    EqualCouplingSpectrum sp;
    // k and n+1-k share the frequency multiple 4|2k-n-1|; walk k upward from
    // the tail so lines come out in descending multiple, then reverse.
    std::vector<SpectrumLine> desc;
    for (int k = 1; 2 * k <= n; ++k) {
        int m = 4 * ((n + 1) - 2 * k);
        desc.push_back(SpectrumLine{m, p[k - 1] + p[n - k]});
    }
    if (n % 2 == 1) sp.dc = p[(n - 1) / 2];
    sp.lines.assign(desc.rbegin(), desc.rend());
    return sp;
}

double equal_coupling_sx(int n, double omega0, double t) {
    EqualCouplingSpectrum sp = equal_coupling_spectrum(n);
    double acc = sp.dc;
    // lines are ascending in multiple hence descending in weight; add the
    // small terms first
    for (auto it = sp.lines.rbegin(); it != sp.lines.rend(); ++it)
        acc += it->weight * std::cos(it->freq_multiple * omega0 * t);
    return acc;
}

double spinlock_plateau_prediction(int n, double omega0, double Omega) {
    EqualCouplingSpectrum sp = equal_coupling_spectrum(n);
    double acc = sp.dc;
    for (const auto& line : sp.lines)
        if (line.freq_multiple * omega0 <= Omega * (1.0 + 1e-12)) acc += line.weight;
    return acc;
}

} // namespace spinsim
