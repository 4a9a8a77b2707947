#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace macrobell {

struct SuiteCheck {
    std::string suite;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Engine NRF against the closed-form fit curves, 73 angles per branch,
/// both plates, ψ+ and φ+, at (η, N) ∈ {(0.26, 0.2), (1, 1)}; |Δ| ≤ 1e−9.
std::vector<SuiteCheck> curve_reproduction_suite();

/// Gaussian engine against the truncated-Fock oracle: means, variances and
/// fourth moments of S1, S2, S3 for all four states at Γ ∈ {0.1, 0.3},
/// η = 1, cutoff 12; |Δ| ≤ 1e−6.
std::vector<SuiteCheck> oracle_equivalence_suite(int cutoff = 12);

/// Monte Carlo (binomial thinning) against the engine: NRF within 3 standard
/// errors at 5 settings per state, 20000 pulses, M = 100, η = 0.26, N = 0.2.
std::vector<SuiteCheck> loss_equivalence_suite(uint64_t seed = 20240901);

std::vector<SuiteCheck> run_all_validation_suites(uint64_t seed = 20240901);

/// Prints one line per check; returns the number of failures.
int print_suite_results(const std::vector<SuiteCheck>& checks, std::ostream& out);

}  // namespace macrobell
