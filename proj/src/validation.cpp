#include "macrobell/validation.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "macrobell/fit_engine.hpp"
#include "macrobell/fock_oracle.hpp"
#include "macrobell/gaussian_engine.hpp"
#include "macrobell/pulse_simulator.hpp"

namespace macrobell {

namespace {

std::string format_number(double value) {
    std::ostringstream out;
    out.precision(6);
    out << value;
    return out.str();
}

const std::array<const char*, 4> kStateNames = {"psi+", "psi-", "phi+", "phi-"};

}  // namespace

std::vector<SuiteCheck> curve_reproduction_suite() {
    std::vector<SuiteCheck> checks;
    const std::array<std::pair<double, double>, 4> parameter_sets = {
        std::make_pair(0.26, 0.2), std::make_pair(0.26, 1.0),
        std::make_pair(1.0, 0.2), std::make_pair(1.0, 1.0)};
    for (const char* state_name : {"psi+", "phi+"}) {
        for (const Plate plate : {Plate::hwp, Plate::qwp}) {
            for (const auto& [eta, nbar] : parameter_sets) {
                const BellStateSpec spec =
                    BellStateSpec::from_mean_photons(
                        BellStateSpec::from_name(state_name, 0.0).family,
                        BellStateSpec::from_name(state_name, 0.0).sign, nbar, 1);
                const CurveModel model{spec.family, spec.sign, plate};
                const SweepGrid trajectory =
                    plate == Plate::hwp ? hwp_trajectory(73) : qwp_trajectory(73);
                const double mean_s0 = 4.0 * eta * spec.mean_photons;
                double worst = 0.0;
                for (const SweepPoint& p : trajectory.points) {
                    const double chi =
                        plate == Plate::hwp ? p.setting.chi_h : p.setting.chi_q;
                    const double engine =
                        stokes_central_moment(spec, eta, p.direction, 2) / mean_s0;
                    const double reference = model_nrf(model, chi, eta, nbar);
                    worst = std::max(worst, std::abs(engine - reference));
                }
                SuiteCheck check;
                check.suite = "curve-reproduction";
                check.name = std::string(state_name) +
                             (plate == Plate::hwp ? " hwp" : " qwp") + " eta=" +
                             format_number(eta) + " N=" + format_number(nbar);
                check.passed = worst <= 1e-9;
                check.detail = "max |engine - closed form| = " + format_number(worst);
                checks.push_back(check);
            }
        }
    }
    return checks;
}

std::vector<SuiteCheck> oracle_equivalence_suite(int cutoff) {
    std::vector<SuiteCheck> checks;
    const std::array<StokesDirection, 3> axes = {
        StokesDirection::from_degrees(0.0, 0.0),
        StokesDirection::from_degrees(90.0, 0.0),
        StokesDirection::from_degrees(90.0, 90.0)};
    for (const double gain : {0.1, 0.3}) {
        for (const char* state_name : kStateNames) {
            const BellStateSpec spec = BellStateSpec::from_name(state_name, gain, 1);
            const TruncatedState fock = build_state_fock(spec, cutoff);
            double worst = 0.0;
            for (const StokesDirection& axis : axes) {
                const FockMoments oracle = stokes_moment_fock(fock, axis, 4);
                const MomentReport engine = central_moments(spec, 1.0, axis, 4);
                worst = std::max(worst, std::abs(oracle.mean - 0.0));
                worst = std::max(worst,
                                 std::abs(oracle.central[1] -
                                          engine.central_moments.at(2)));
                worst = std::max(worst,
                                 std::abs(oracle.central[3] -
                                          engine.central_moments.at(4)));
            }
            SuiteCheck check;
            check.suite = "oracle-equivalence";
            check.name = std::string(state_name) + " gamma=" + format_number(gain);
            check.passed = worst <= 1e-6;
            check.detail = "max |fock - engine| = " + format_number(worst);
            checks.push_back(check);
        }
    }
    return checks;
}

std::vector<SuiteCheck> loss_equivalence_suite(uint64_t seed) {
    std::vector<SuiteCheck> checks;
    const double eta = 0.26;
    const double nbar = 0.2;
    const int quadruples = 100;
    const std::array<WaveplateSetting, 5> settings = {
        WaveplateSetting::from_degrees(0.0, 0.0),
        WaveplateSetting::from_degrees(22.5, 0.0),
        WaveplateSetting::from_degrees(0.0, 45.0),
        WaveplateSetting::from_degrees(11.25, 22.5),
        WaveplateSetting::from_degrees(30.0, 60.0)};
    uint64_t stream = 0;
    for (const char* state_name : kStateNames) {
        const BellStateSpec named = BellStateSpec::from_name(state_name, 0.0);
        const BellStateSpec spec = BellStateSpec::from_mean_photons(
            named.family, named.sign, nbar, quadruples);
        const double mean_s0 = 4.0 * quadruples * eta * nbar;
        double worst_pull = 0.0;
        for (const WaveplateSetting& setting : settings) {
            DetectorConfig detector;
            detector.eta = eta;
            detector.pulses = 20000;
            detector.seed = derive_stream_seed(seed, stream++);
            const OutcomeTable table = outcome_table(spec, setting, 0);
            const PulseBatch batch = sample_pulses(table, quadruples, detector);
            const BatchMoments moments = estimate_moments(batch, 2, detector.batches);
            const double engine =
                stokes_central_moment(spec, eta, direction_from_waveplates(setting), 2) /
                mean_s0;
            const double se = moments.nrf.standard_error;
            const double pull =
                se > 0.0 ? std::abs(moments.nrf.value - engine) / se : 1e9;
            worst_pull = std::max(worst_pull, pull);
        }
        SuiteCheck check;
        check.suite = "loss-equivalence";
        check.name = state_name;
        check.passed = worst_pull <= 3.0;
        check.detail = "worst |MC - engine| = " + format_number(worst_pull) +
                       " standard errors";
        checks.push_back(check);
    }
    return checks;
}

std::vector<SuiteCheck> run_all_validation_suites(uint64_t seed) {
    std::vector<SuiteCheck> checks = curve_reproduction_suite();
    for (SuiteCheck& check : oracle_equivalence_suite()) checks.push_back(std::move(check));
    for (SuiteCheck& check : loss_equivalence_suite(seed)) checks.push_back(std::move(check));
    return checks;
}

int print_suite_results(const std::vector<SuiteCheck>& checks, std::ostream& out) {
    int failures = 0;
    for (const SuiteCheck& check : checks) {
        out << (check.passed ? "PASS" : "FAIL") << "  " << check.suite << " :: "
            << check.name << " - " << check.detail << "\n";
        if (!check.passed) ++failures;
    }
    return failures;
}

}  // namespace macrobell
