#pragma once

#include <complex>
#include <vector>

#include "macrobell/gaussian_engine.hpp"
#include "macrobell/stokes_geometry.hpp"

namespace macrobell {

/// Brute-force truncated-Fock representation of a single quadruple.
/// Amplitudes are indexed by occupation numbers (n_a1, n_b1, n_a2, n_b2),
/// each in [0, cutoff].
struct TruncatedState {
    int cutoff = 0;
    std::vector<std::complex<double>> amplitudes;  // (cutoff+1)^4 entries
    double truncation_deficit = 0.0;               // 1 − squared norm at build

    size_t index(int na1, int nb1, int na2, int nb2) const {
        const size_t d = static_cast<size_t>(cutoff) + 1;
        return ((static_cast<size_t>(na1) * d + static_cast<size_t>(nb1)) * d +
                static_cast<size_t>(na2)) * d + static_cast<size_t>(nb2);
    }
    double squared_norm() const;
};

/// Smallest cutoff whose truncation deficit stays within the bound.
int default_cutoff(double gain, double norm_bound = 1e-8);

/// Fock expansion of the Bell states: products of two two-mode squeezed
/// vacua, amplitudes (±1)^n tanh^{m+n}Γ / cosh²Γ on the family's pairing
/// pattern. Requires quadruples == 1. Throws truncation_error when the
/// truncated norm misses the bound.
TruncatedState build_state_fock(const BellStateSpec& spec, int cutoff,
                                double norm_bound = 1e-8);

/// Applies the waveplate polarization unitary (same SU(2) at both
/// frequencies) in truncated Fock space. Total photon number per frequency
/// is conserved, so the map acts within fixed-sum sectors; sectors reaching
/// past the cutoff may leak, and leakage beyond leak_bound is an error.
TruncatedState apply_waveplates_fock(const TruncatedState& state,
                                     const WaveplateSetting& setting,
                                     double leak_bound = 1e-10);

struct FockMoments {
    double mean = 0.0;
    std::vector<double> raw;      // ⟨S_n⟩, ⟨S_n²⟩, …
    std::vector<double> central;  // ⟨ΔS_n⟩, ⟨ΔS_n²⟩, …
};

/// Moments of the Stokes observable along `direction`, exact within the
/// truncation, via repeated sparse application of S_n.
FockMoments stokes_moment_fock(const TruncatedState& state,
                               const StokesDirection& direction, int k_max);

/// |amplitude|² table over (n_a1, n_b1, n_a2, n_b2), same indexing as the
/// state; sums to the squared norm.
std::vector<double> joint_pn_distribution(const TruncatedState& state);

}  // namespace macrobell
