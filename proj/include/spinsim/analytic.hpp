#pragma once
#include <vector>

namespace spinsim {

// One oscillation line of the equal-coupling spectrum: frequency is
// freq_multiple * omega0 (angular), weight normalized so all weights plus
// the DC term sum to 1.
struct SpectrumLine {
    int freq_multiple = 0;
    double weight = 0.0;
};

struct EqualCouplingSpectrum {
    std::vector<SpectrumLine> lines;   // ascending freq_multiple, no zero line
    double dc = 0.0;                   // nonzero only for odd n
};

// Closed-form <Sx>(t) for n spins all coupled at w0:
//   2^{-(n-1)} Sum_{k=1..n} C(n-1, k-1) cos(4 w0 t (2k - n - 1)).
// Binomial weights accumulated by iterative ratios in normalized form;
// cosines summed in ascending-weight order for large n.
double equal_coupling_sx(int n, double omega0, double t);

// Line multipliers 4|2k-n-1| with merged duplicate frequencies.
EqualCouplingSpectrum equal_coupling_spectrum(int n);

// Cancellation heuristic for a spin-lock at drive Omega: DC plus the weights
// of all lines with frequency <= Omega (those the drive freezes). Approximate:
// exact late-time averages deviate from the step function by up to a few
// percent between lines (quantified in tests).
double spinlock_plateau_prediction(int n, double omega0, double Omega);

} // namespace spinsim
