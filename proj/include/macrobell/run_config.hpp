#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "macrobell/gaussian_engine.hpp"
#include "macrobell/pulse_simulator.hpp"

namespace macrobell {

/// Flat key=value run configuration. Every key is listed below; unknown
/// keys are rejected with the offending line number. '#' starts a comment.
///
///   state        psi+ | psi- | phi+ | phi-          (default psi+)
///   eta          detection efficiency in [0, 1]     (default 0.26)
///   gain         parametric gain Γ                  (alternative to nbar)
///   nbar         mean photons per mode N = sinh²Γ   (default 0.2)
///   modes        independent quadruples M           (default 100)
///   pulses       pulses per Monte Carlo run         (default 20000)
///   seed         64-bit RNG seed                    (default 12345)
///   noise_sigma  electronic noise per channel in photons; "auto" makes
///                the added S_n noise variance 10% of the lossy singlet
///                signal variance; 0 disables       (default auto)
///   plate        hwp | qwp (curves command)         (default hwp)
///   curve_points points per curve                   (default 73)
///   step_h_deg   HWP sweep step                     (default 2.5)
///   step_q_deg   QWP sweep step                     (default 5)
///   chi_h_deg    HWP angle for `simulate`           (default 0)
///   chi_q_deg    QWP angle for `simulate`           (default 0)
///   orders       comma list of DP orders            (default 1,2,4)
///   cutoff       Fock cutoff; 0 = automatic         (default 0)
///   with_mc      true | false, add Monte Carlo      (default false)
///   out          output path                        (default per command)
///   bins         histogram bins                     (default 60)
struct RunConfig {
    std::string state = "psi+";
    double eta = 0.26;
    double gain = -1.0;  // < 0 → not set
    double nbar = -1.0;  // < 0 → not set; when neither is set, nbar = 0.2
    int modes = 100;
    int pulses = 20000;
    uint64_t seed = 12345;
    double noise_sigma = 0.0;
    bool noise_auto = true;
    std::string plate = "hwp";
    int curve_points = 73;
    double step_h_deg = 2.5;
    double step_q_deg = 5.0;
    double chi_h_deg = 0.0;
    double chi_q_deg = 0.0;
    std::vector<int> orders = {1, 2, 4};
    int cutoff = 0;
    bool with_mc = false;
    std::string out;
    int bins = 60;
};

/// Parses a config stream, throwing config_error with the line number on
/// unknown keys or malformed values.
RunConfig parse_run_config(std::istream& input);
RunConfig load_run_config(const std::string& path);

/// State spec implied by the config (gain wins over nbar when both given
/// and consistent; inconsistent values are rejected).
BellStateSpec config_state_spec(const RunConfig& config);

DetectorConfig config_detector(const RunConfig& config);

}  // namespace macrobell
