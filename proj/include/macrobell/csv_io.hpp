#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "macrobell/fit_engine.hpp"
#include "macrobell/pulse_simulator.hpp"

namespace macrobell {

/// Writes via a temporary file in the same directory, then renames.
void atomic_write_file(const std::string& path, const std::string& contents);

/// Stable shortest-round-trip text for doubles.
std::string format_double(double value);

struct CurvePoint {
    double chi_deg = 0.0;
    double nrf_exact = 0.0;
    bool has_mc = false;
    double nrf_mc = 0.0;
    double nrf_mc_se = 0.0;
};

/// Schema "macrobell.curves.v1": chi_deg, nrf_exact, nrf_mc, nrf_mc_se
/// (the Monte Carlo columns stay empty when disabled).
std::string curves_to_csv(const std::vector<CurvePoint>& points);

/// One record per sweep grid point, ready for sphere-map plotting.
struct SphereMapRecord {
    double chi_h_deg = 0.0;
    double chi_q_deg = 0.0;
    double theta_deg = 0.0;
    double phi_deg = 0.0;
    double x = 0.0;  // S2 projection
    double y = 0.0;  // S1 projection
    double nrf = 0.0;
    double m4_normalized = 0.0;

    bool operator==(const SphereMapRecord&) const = default;
};

/// Schema "macrobell.sweep.v1".
std::string sweep_to_csv(const std::vector<SphereMapRecord>& records);
nlohmann::json sweep_to_json(const std::vector<SphereMapRecord>& records);
std::vector<SphereMapRecord> sweep_from_json(const nlohmann::json& doc);

/// Schema "macrobell.pulses.v1": pulse_index, I_A, I_B, S_n, S0.
std::string pulse_batch_to_csv(const PulseBatch& batch);

/// Reads fit input: header chi_degrees, nrf[, sigma]; '#' lines skipped.
/// Parse failures carry the 1-based row number.
std::vector<FitSample> read_fit_samples_csv(const std::string& path);
std::vector<FitSample> parse_fit_samples_csv(std::istream& input);

}  // namespace macrobell
