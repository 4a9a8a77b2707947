#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "macrobell/gaussian_engine.hpp"

namespace macrobell {

enum class Plate { hwp, qwp };

/// NRF-vs-plate-angle curve family: which state, which plate rotates.
struct CurveModel {
    StateFamily family = StateFamily::psi;
    int sign = +1;
    Plate plate = Plate::hwp;
};

/// Closed-form NRF(χ; η, N). The ψ+ and φ+ branches are the explicit
/// trigonometric fit formulas; ψ− is the flat 1−η line and φ− the
/// S2-squeezed analogue. χ is in radians.
double model_nrf(const CurveModel& model, double chi, double eta, double mean_photons);

struct FitSample {
    double chi = 0.0;    // plate angle in radians
    double nrf = 0.0;
    double sigma = 1.0;  // per-point standard deviation (uniform when absent)
};

struct FitDataset {
    CurveModel model;
    std::vector<FitSample> samples;
};

struct FitResult {
    double eta = 0.0;
    double mean_photons = 0.0;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // over (η, N)
    double residual_norm = 0.0;  // sqrt of the weighted sum of squares
    int iterations = 0;
    bool converged = false;
};

/// Weighted nonlinear least squares over (η, N), jointly across the supplied
/// datasets. Bounds are enforced by smooth transforms (logit for η, log
/// for N); the damped Gauss–Newton iteration stops when the relative
/// parameter step drops below 1e−8 or after 200 iterations. A coarse 8×8
/// parameter pre-scan guards against poor starts. Throws
/// unidentifiable_parameters when no non-constant model is present.
FitResult fit(const std::vector<FitDataset>& datasets,
              std::optional<std::pair<double, double>> initial_guess = std::nullopt);

}  // namespace macrobell
