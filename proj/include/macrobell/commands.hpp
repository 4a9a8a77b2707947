#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "macrobell/csv_io.hpp"
#include "macrobell/polarization_metrics.hpp"
#include "macrobell/run_config.hpp"

namespace macrobell {

/// NRF vs plate angle (exact engine, plus Monte Carlo when requested).
std::vector<CurvePoint> compute_curves(const RunConfig& config);
/// Writes the curves CSV to config.out (default "curves.csv").
void cmd_curves(const RunConfig& config, std::ostream& log);

/// Sphere map over the sweep grid: NRF and normalized fourth moment.
std::vector<SphereMapRecord> compute_sweep(const RunConfig& config);
/// Writes CSV, or JSON when the output path ends in ".json".
void cmd_sweep(const RunConfig& config, std::ostream& log);

struct DpOrderResult {
    int order = 0;
    bool defined = true;
    std::string note;          // set when undefined (0/0 moment field)
    double dp = 0.0;
    double sup = 0.0;
    double inf = 0.0;
    std::array<double, 3> argmax{1.0, 0.0, 0.0};
    std::array<double, 3> argmin{1.0, 0.0, 0.0};
    std::string method;
};

struct DpMonteCarlo {
    double p1 = 0.0, p1_se = 0.0;
    double p2 = 0.0, p2_se = 0.0;
    double p4 = 0.0, p4_se = 0.0;
    int pulses = 0;
};

struct DpOutput {
    double p1 = 0.0;
    double p1_visibility = 0.0;
    std::vector<DpOrderResult> orders;
    double closed_form_p2 = 0.0;
    std::optional<DpMonteCarlo> mc;
};

DpOutput compute_dp(const RunConfig& config);
nlohmann::json dp_to_json(const DpOutput& output, const RunConfig& config);
/// Prints a text report; also writes JSON when config.out is set.
void cmd_dp(const RunConfig& config, std::ostream& log);

struct SimulateOutput {
    BatchMoments moments;
    double engine_nrf = 0.0;  // exact reference at the same setting
    bool noise_subtracted = false;
};

SimulateOutput compute_simulate(const RunConfig& config, PulseBatch* batch_out = nullptr);
/// Samples one setting, writes the pulse CSV (default "pulses.csv") and a
/// JSON summary next to it.
void cmd_simulate(const RunConfig& config, std::ostream& log);

/// Accepts "psi+:hwp", "phi-:qwp", …
CurveModel parse_curve_model(const std::string& name);
nlohmann::json fit_result_to_json(const FitResult& result);
/// Fits the CSV datasets (pairs of file and model name); writes JSON with
/// estimates, covariance and per-point residuals to config.out when set.
nlohmann::json cmd_fit(const std::vector<std::pair<std::string, std::string>>& inputs,
                       std::optional<std::pair<double, double>> initial_guess,
                       const std::string& out_path, std::ostream& log);

}  // namespace macrobell
