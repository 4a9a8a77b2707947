#include "macrobell/polarization_metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "macrobell/errors.hpp"

namespace macrobell {

double dp1(const Eigen::Vector3d& mean_stokes, double mean_s0) {
    if (mean_s0 <= 0.0)
        throw undefined_dp("first-order DP needs a positive mean total intensity");
    return mean_stokes.norm() / mean_s0;
}

double dp1_visibility(const Eigen::Vector3d& mean_stokes, double mean_s0,
                      const SweepGrid& grid) {
    if (mean_s0 <= 0.0)
        throw undefined_dp("first-order DP needs a positive mean total intensity");
    auto intensity = [&](const Eigen::Vector3d& n) {
        return 0.5 * (mean_s0 + mean_stokes.dot(n));
    };
    double i_max = -std::numeric_limits<double>::infinity();
    double i_min = std::numeric_limits<double>::infinity();
    for (const SweepPoint& p : grid.points) {
        const double value = intensity(p.direction.unit_vector());
        i_max = std::max(i_max, value);
        i_min = std::min(i_min, value);
    }
    const double norm = mean_stokes.norm();
    if (norm > 0.0) {
        const Eigen::Vector3d n = mean_stokes / norm;
        i_max = std::max(i_max, intensity(n));
        i_min = std::min(i_min, intensity(-n));
    }
    return (i_max - i_min) / (i_max + i_min);
}

DPReport dp2_eigen(const Eigen::Matrix3d& stokes_cov, double mean_s0) {
    const double scale = std::max(1.0, stokes_cov.cwiseAbs().maxCoeff());
    if ((stokes_cov - stokes_cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("Stokes covariance must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(stokes_cov);
    const Eigen::Vector3d values = solver.eigenvalues();  // ascending

    DPReport report;
    report.order = 2;
    report.method = DpMethod::eigen_decomposition;
    const double norm = mean_s0 > 0.0 ? mean_s0 : 1.0;
    report.sup = values(2) / norm;
    report.inf = values(0) / norm;
    report.argmax = solver.eigenvectors().col(2);
    report.argmin = solver.eigenvectors().col(0);
    if (report.sup + report.inf <= 0.0)
        throw undefined_dp("vanishing variance over the sphere; second-order DP is 0/0");
    report.dp = (report.sup - report.inf) / (report.sup + report.inf);
    return report;
}

namespace {

Eigen::Vector3d refine_extremum(
    const std::function<double(const StokesDirection&)>& moment_fn,
    Eigen::Vector3d start, bool maximize, double refine_tol, double initial_step,
    double* best_value) {
    Eigen::Vector3d v = start.normalized();
    double best = moment_fn(StokesDirection::from_unit_vector(v));
    double step = std::max(initial_step, 2.0 * refine_tol);
    const int max_rounds = 400;
    for (int round = 0; round < max_rounds && step > refine_tol; ++round) {
        // Tangent basis at the current point.
        const Eigen::Vector3d helper =
            std::abs(v.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
        const Eigen::Vector3d t1 = v.cross(helper).normalized();
        const Eigen::Vector3d t2 = v.cross(t1);
        const std::array<Eigen::Vector3d, 4> moves = {t1, Eigen::Vector3d(-t1), t2,
                                                      Eigen::Vector3d(-t2)};
        bool improved = false;
        for (const Eigen::Vector3d& dir : moves) {
            const Eigen::Vector3d candidate = (v + step * dir).normalized();
            const double value = moment_fn(StokesDirection::from_unit_vector(candidate));
            if (maximize ? value > best : value < best) {
                best = value;
                v = candidate;
                improved = true;
            }
        }
        if (!improved) step *= 0.5;
    }
    if (best_value) *best_value = best;
    return v;
}

}  // namespace

DPReport dpk_search(const std::function<double(const StokesDirection&)>& moment_fn,
                    int k, const SweepGrid& grid, double refine_tol) {
    if (grid.points.empty()) throw std::invalid_argument("search grid is empty");
    if (refine_tol <= 0.0) throw std::invalid_argument("refine_tol must be positive");

    double sup = -std::numeric_limits<double>::infinity();
    double inf = std::numeric_limits<double>::infinity();
    Eigen::Vector3d argmax = Eigen::Vector3d::UnitX();
    Eigen::Vector3d argmin = Eigen::Vector3d::UnitX();
    for (const SweepPoint& p : grid.points) {
        const double value = moment_fn(p.direction);
        if (value > sup) {
            sup = value;
            argmax = p.direction.unit_vector();
        }
        if (value < inf) {
            inf = value;
            argmin = p.direction.unit_vector();
        }
    }

    const double grid_step =
        deg_to_rad(std::max({grid.step_h_deg, grid.step_q_deg, 0.5}));
    argmax = refine_extremum(moment_fn, argmax, true, refine_tol, grid_step, &sup);
    argmin = refine_extremum(moment_fn, argmin, false, refine_tol, grid_step, &inf);

    DPReport report;
    report.order = k;
    report.method = DpMethod::grid_refine;
    report.sup = sup;
    report.inf = inf;
    report.argmax = argmax;
    report.argmin = argmin;
    const double scale = std::max(std::abs(sup), std::abs(inf));
    if (scale <= 1e-12)
        throw undefined_dp("moment field vanishes identically; DP of order " +
                           std::to_string(k) + " is 0/0");
    if (sup + inf <= 0.0)
        throw undefined_dp("sup + inf is not positive; DP of order " +
                           std::to_string(k) + " is undefined");
    report.dp = (sup - inf) / (sup + inf);
    return report;
}

double closed_form_p2(StateFamily family, int sign, double eta, double mean_photons) {
    if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("detection efficiency must be within [0, 1]");
    if (mean_photons < 0.0) throw std::invalid_argument("mean photon number must be >= 0");
    if (family == StateFamily::psi && sign < 0) return 0.0;
    return eta * (1.0 + mean_photons) / (1.0 + eta * mean_photons);
}

double gaussian_limit_dp(double p2, int order) {
    if (p2 < 0.0 || p2 > 1.0) throw std::invalid_argument("P2 must lie in [0, 1]");
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument("Gaussian-limit DP is defined for even orders >= 2");
    if (p2 == 1.0) return 1.0;
    const int m = order / 2;
    const double ratio = std::pow((1.0 + p2) / (1.0 - p2), m);
    return (ratio - 1.0) / (ratio + 1.0);
}

double coherent_fourth_moment(double mean_s0) {
    if (mean_s0 < 0.0) throw std::invalid_argument("mean intensity must be >= 0");
    return 3.0 * mean_s0 * mean_s0 + mean_s0;
}

}  // namespace macrobell
