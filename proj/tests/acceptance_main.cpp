// Acceptance suite: one criterion per block, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "macrobell/fit_engine.hpp"
#include "macrobell/fock_oracle.hpp"
#include "macrobell/gaussian_engine.hpp"
#include "macrobell/polarization_metrics.hpp"
#include "macrobell/pulse_simulator.hpp"
#include "macrobell/rng.hpp"
#include "macrobell/validation.hpp"

using namespace macrobell;

namespace {

int failures = 0;

void report(int criterion, const std::string& label, bool passed,
            const std::string& detail) {
    std::printf("%s  criterion %d: %s (%s)\n", passed ? "PASS" : "FAIL", criterion,
                label.c_str(), detail.c_str());
    if (!passed) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

BellStateSpec state_with(const char* name, double nbar, int quadruples) {
    const BellStateSpec named = BellStateSpec::from_name(name, 0.0);
    return BellStateSpec::from_mean_photons(named.family, named.sign, nbar, quadruples);
}

std::string format(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.3g", value);
    return buffer;
}

void criterion_1_curve_reproduction() {
    const auto start = std::chrono::steady_clock::now();
    bool passed = true;
    std::string detail;
    for (const SuiteCheck& check : curve_reproduction_suite()) {
        if (!check.passed) {
            passed = false;
            detail = check.name + ": " + check.detail;
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 10.0) {
        passed = false;
        detail += " runtime " + format(elapsed) + " s >= 10 s";
    }
    if (passed)
        detail = "8 curve branches within 1e-9, " + format(elapsed) + " s";
    report(1, "engine reproduces the NRF fit curves", passed, detail);
}

void criterion_2_closed_form_p2() {
    const double eta = 0.26;
    const double nbar = 0.2;
    bool passed = true;
    std::string detail;
    for (const char* name : {"psi+", "phi+", "phi-"}) {
        const BellStateSpec spec = state_with(name, nbar, 1);
        const DPReport report_2 = dp2_eigen(stokes_covariance_matrix(spec, eta),
                                            4.0 * eta * nbar);
        const double closed = closed_form_p2(spec.family, spec.sign, eta, nbar);
        if (std::abs(report_2.dp - closed) > 1e-9) {
            passed = false;
            detail = std::string(name) + " differs by " +
                     format(std::abs(report_2.dp - closed));
        }
    }
    const double reference = eta * (1.0 + nbar) / (1.0 + eta * nbar);
    if (std::abs(reference - 0.296578) > 1e-6) passed = false;

    const DPReport singlet = dp2_eigen(
        stokes_covariance_matrix(state_with("psi-", nbar, 1), eta), 4.0 * eta * nbar);
    if (std::abs(singlet.dp) > 1e-12) {
        passed = false;
        detail += " singlet dp " + format(singlet.dp);
    }
    if (passed)
        detail = "triplets at " + format(reference) + " within 1e-9, singlet 0 within 1e-12";
    report(2, "closed-form second-order DP", passed, detail);
}

void criterion_3_gaussian_limit() {
    bool passed = true;
    std::string detail;
    const double strong = gaussian_limit_dp(0.36, 4);
    const double weak = gaussian_limit_dp(0.14, 4);
    if (std::abs(strong - 0.64) > 0.02 || std::abs(strong - 0.637) > 5e-4)
        passed = false;
    if (std::abs(weak - 0.28) > 0.05 || std::abs(weak - 0.275) > 5e-4) passed = false;

    const double eta = 0.26;
    const double nbar = 0.2;
    const BellStateSpec spec = state_with("psi+", nbar, 100);
    const DPReport p4 = dpk_search(
        [&](const StokesDirection& d) {
            return stokes_central_moment(spec, eta, d, 4);
        },
        4, sphere_sweep(2.5, 5.0));
    const double predicted = gaussian_limit_dp(
        closed_form_p2(StateFamily::psi, +1, eta, nbar), 4);
    const double relative = std::abs(p4.dp - predicted) / predicted;
    if (relative > 0.01) {
        passed = false;
        detail = "search vs Gaussian limit off by " + format(100.0 * relative) + "%";
    } else {
        detail = "P4(0.36) = " + format(strong) + ", P4(0.14) = " + format(weak) +
                 ", search matches the limit to " + format(100.0 * relative) + "%";
    }
    report(3, "Gaussian-limit fourth-order DP", passed, detail);
}

void criterion_4_oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    bool passed = true;
    std::string detail;
    for (const SuiteCheck& check : oracle_equivalence_suite(12)) {
        if (!check.passed) {
            passed = false;
            detail = check.name + ": " + check.detail;
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 60.0) {
        passed = false;
        detail += " runtime " + format(elapsed) + " s >= 60 s";
    }
    if (passed)
        detail = "4 states x 2 gains within 1e-6 at cutoff 12, " + format(elapsed) +
                 " s";
    report(4, "Fock oracle equals the Gaussian engine", passed, detail);
}

void criterion_5_loss_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    bool passed = true;
    std::string detail;
    for (const SuiteCheck& check : loss_equivalence_suite()) {
        if (!check.passed) {
            passed = false;
            detail = check.name + ": " + check.detail;
        }
    }

    // Singlet pinned to 1 − η explicitly.
    DetectorConfig detector;
    detector.eta = 0.26;
    detector.pulses = 20000;
    detector.seed = 424242;
    const BellStateSpec singlet = state_with("psi-", 0.2, 100);
    const OutcomeTable table =
        outcome_table(singlet, WaveplateSetting::from_degrees(0.0, 0.0), 0);
    const BatchMoments moments =
        estimate_moments(sample_pulses(table, 100, detector), 2);
    const double pull =
        std::abs(moments.nrf.value - 0.74) / moments.nrf.standard_error;
    if (pull > 3.0) {
        passed = false;
        detail += " singlet pull " + format(pull);
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 120.0) {
        passed = false;
        detail += " runtime " + format(elapsed) + " s >= 120 s";
    }
    if (passed)
        detail = "4 states x 5 settings within 3 SE; singlet pull " + format(pull) +
                 ", " + format(elapsed) + " s";
    report(5, "binomial thinning equals the beamsplitter model", passed, detail);
}

void criterion_6_p1_floor() {
    const BellStateSpec singlet = state_with("psi-", 0.2, 100);
    DetectorConfig detector;
    detector.eta = 0.26;
    detector.pulses = 20000;
    detector.seed = 11011;
    const WaveplateSetting axes[3] = {WaveplateSetting::from_degrees(0.0, 0.0),
                                      WaveplateSetting::from_degrees(22.5, 0.0),
                                      WaveplateSetting::from_degrees(0.0, 45.0)};
    double sum_squares = 0.0;
    double mean_s0 = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        DetectorConfig stream = detector;
        stream.seed = derive_stream_seed(detector.seed, static_cast<uint64_t>(axis));
        const OutcomeTable table = outcome_table(singlet, axes[axis], 0);
        const BatchMoments moments =
            estimate_moments(sample_pulses(table, 100, stream), 2);
        sum_squares += moments.s_n.mean.value * moments.s_n.mean.value;
        mean_s0 += moments.s0.mean.value / 3.0;
    }
    const double p1 = std::sqrt(sum_squares) / mean_s0;
    report(6, "Monte Carlo singlet P1 floor", p1 <= 0.02,
           "P1 = " + format(p1) + " at 20000 pulses");
}

void criterion_7_fit_round_trip() {
    bool passed = true;
    std::string detail;
    const CurveModel model{StateFamily::psi, +1, Plate::hwp};
    const CurveModel model_q{StateFamily::psi, +1, Plate::qwp};

    FitDataset clean;
    clean.model = model;
    for (int i = 0; i < 73; ++i) {
        const double chi = (pi / 2.0) * i / 72.0;
        clean.samples.push_back({chi, model_nrf(model, chi, 0.26, 0.2), 1.0});
    }
    const FitResult exact = fit({clean});
    if (std::abs(exact.eta - 0.26) > 1e-7 || std::abs(exact.mean_photons - 0.2) > 1e-7) {
        passed = false;
        detail = "noiseless recovery off by (" + format(exact.eta - 0.26) + ", " +
                 format(exact.mean_photons - 0.2) + ")";
    }

    Rng rng(7777);
    std::vector<FitDataset> noisy_sets;
    for (const CurveModel& m : {model, model_q}) {
        FitDataset noisy;
        noisy.model = m;
        const double period = m.plate == Plate::hwp ? pi / 2.0 : pi;
        for (int i = 0; i < 73; ++i) {
            const double chi = period * i / 72.0;
            noisy.samples.push_back(
                {chi, model_nrf(m, chi, 0.26, 0.2) + 0.01 * rng.gaussian(), 0.01});
        }
        noisy_sets.push_back(noisy);
    }
    const FitResult noisy = fit(noisy_sets);
    const double eta_se = std::sqrt(noisy.covariance(0, 0));
    const double n_se = std::sqrt(noisy.covariance(1, 1));
    if (std::abs(noisy.eta - 0.26) > 0.02) {
        passed = false;
        detail += " noisy eta off by " + format(noisy.eta - 0.26);
    }
    if (n_se / noisy.mean_photons <= eta_se / noisy.eta) {
        passed = false;
        detail += " missing sensitivity asymmetry";
    }
    if (passed)
        detail = "noiseless exact; noisy eta " + format(noisy.eta) + " +- " +
                 format(eta_se) + ", N " + format(noisy.mean_photons) + " +- " +
                 format(n_se);
    report(7, "fit round trip and sensitivity asymmetry", passed, detail);
}

void criterion_8_invariance_suites() {
    bool passed = true;
    std::string detail;
    const double eta = 0.26;
    const double nbar = 0.2;

    // Singlet isotropy across the full sweep.
    const BellStateSpec singlet = state_with("psi-", nbar, 1);
    const double mean_s0 = 4.0 * eta * nbar;
    double worst = 0.0;
    for (const SweepPoint& p : sphere_sweep(2.5, 5.0).points) {
        const double nrf =
            stokes_central_moment(singlet, eta, p.direction, 2) / mean_s0;
        worst = std::max(worst, std::abs(nrf - (1.0 - eta)));
    }
    if (worst > 1e-10) {
        passed = false;
        detail += " singlet anisotropy " + format(worst);
    }

    // Phi+ flat in the HWP angle.
    const BellStateSpec phi_plus = state_with("phi+", nbar, 1);
    double phi_spread = 0.0;
    const double flat = 1.0 + eta + 2.0 * eta * nbar;
    for (const SweepPoint& p : hwp_trajectory(73).points) {
        const double nrf =
            stokes_central_moment(phi_plus, eta, p.direction, 2) / mean_s0;
        phi_spread = std::max(phi_spread, std::abs(nrf - flat));
    }
    if (phi_spread > 1e-10) {
        passed = false;
        detail += " phi+ modulation " + format(phi_spread);
    }

    // Zero mean Stokes vector, all four states.
    for (const char* name : {"psi+", "psi-", "phi+", "phi-"}) {
        const MomentReport report_means =
            central_moments(state_with(name, nbar, 3), eta, StokesDirection{}, 2);
        if (report_means.mean_stokes.cwiseAbs().maxCoeff() > 1e-12) {
            passed = false;
            detail += std::string(" nonzero mean for ") + name;
        }
    }

    // Oracle third central moments at several settings.
    double worst_third = 0.0;
    for (const char* name : {"psi+", "psi-", "phi+", "phi-"}) {
        const TruncatedState state =
            build_state_fock(BellStateSpec::from_name(name, 0.3), 12);
        for (const auto& [h, q] :
             {std::pair{0.0, 0.0}, {22.5, 0.0}, {0.0, 45.0}, {11.25, 22.5}, {30.0, 60.0}}) {
            const TruncatedState rotated =
                apply_waveplates_fock(state, WaveplateSetting::from_degrees(h, q));
            const FockMoments moments = stokes_moment_fock(
                rotated, StokesDirection::from_degrees(0.0, 0.0), 3);
            worst_third = std::max(worst_third, std::abs(moments.central[2]));
        }
    }
    if (worst_third > 1e-8) {
        passed = false;
        detail += " third moment " + format(worst_third);
    }
    if (passed)
        detail = "isotropy " + format(worst) + ", phi+ spread " + format(phi_spread) +
                 ", third moments " + format(worst_third);
    report(8, "invariance suites", passed, detail);
}

}  // namespace

int main() {
    criterion_1_curve_reproduction();
    criterion_2_closed_form_p2();
    criterion_3_gaussian_limit();
    criterion_4_oracle_equivalence();
    criterion_5_loss_equivalence();
    criterion_6_p1_floor();
    criterion_7_fit_round_trip();
    criterion_8_invariance_suites();
    if (failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
