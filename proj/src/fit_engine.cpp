#include "macrobell/fit_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "macrobell/errors.hpp"

namespace macrobell {

namespace {

// Every curve is NRF = 1 + ηN + η(N+1)·g(χ); g carries the whole shape.
double shape_factor(const CurveModel& model, double chi) {
    if (model.family == StateFamily::psi) {
        if (model.sign < 0) return -1.0;  // flat 1 − η
        return model.plate == Plate::hwp
                   ? -std::cos(8.0 * chi)
                   : 0.25 * (1.0 - 4.0 * std::cos(4.0 * chi) - std::cos(8.0 * chi));
    }
    if (model.sign > 0)
        return model.plate == Plate::hwp ? 1.0 : std::cos(4.0 * chi);
    return model.plate == Plate::hwp ? std::cos(8.0 * chi)
                                     : 0.25 * (3.0 + std::cos(8.0 * chi));
}

struct FlatSample {
    double g;
    double nrf;
    double weight;  // 1/σ
};

double logit(double p) { return std::log(p / (1.0 - p)); }
double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

double sum_of_squares(const std::vector<FlatSample>& data, double eta, double n) {
    double total = 0.0;
    for (const FlatSample& s : data) {
        const double r = (1.0 + eta * n + eta * (n + 1.0) * s.g - s.nrf) * s.weight;
        total += r * r;
    }
    return total;
}

}  // namespace

double model_nrf(const CurveModel& model, double chi, double eta, double mean_photons) {
    return 1.0 + eta * mean_photons +
           eta * (mean_photons + 1.0) * shape_factor(model, chi);
}

FitResult fit(const std::vector<FitDataset>& datasets,
              std::optional<std::pair<double, double>> initial_guess) {
    std::vector<FlatSample> data;
    for (const FitDataset& set : datasets) {
        for (const FitSample& s : set.samples) {
            if (s.sigma <= 0.0)
                throw std::invalid_argument("per-point sigma must be positive");
            data.push_back({shape_factor(set.model, s.chi), s.nrf, 1.0 / s.sigma});
        }
    }
    if (data.size() < 3)
        throw std::invalid_argument("fit needs at least 3 data points");

    double g_min = data.front().g;
    double g_max = data.front().g;
    for (const FlatSample& s : data) {
        g_min = std::min(g_min, s.g);
        g_max = std::max(g_max, s.g);
    }
    if (g_max - g_min < 1e-9)
        throw unidentifiable_parameters(
            "all supplied curves are constant in the plate angle; "
            "(eta, N) cannot be separated");

    // Start from the better of the caller's guess (default 0.5, 0.5) and a
    // coarse 8×8 parameter scan.
    double eta = initial_guess ? initial_guess->first : 0.5;
    double n = initial_guess ? initial_guess->second : 0.5;
    eta = std::clamp(eta, 1e-6, 1.0 - 1e-6);
    n = std::max(n, 1e-8);
    double best_sse = sum_of_squares(data, eta, n);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            const double eta_try = 0.05 + 0.90 * i / 7.0;
            const double n_try = 0.01 * std::pow(500.0, j / 7.0);  // 0.01..5
            const double sse = sum_of_squares(data, eta_try, n_try);
            if (sse < best_sse) {
                best_sse = sse;
                eta = eta_try;
                n = n_try;
            }
        }
    }

    Eigen::Vector2d u(logit(eta), std::log(n));
    double sse = best_sse;
    double lambda = 1e-3;
    FitResult result;
    const int max_iterations = 200;
    int performed = 0;
    for (int iteration = 0; iteration < max_iterations; ++iteration) {
        performed = iteration + 1;
        const double eta_cur = logistic(u(0));
        const double n_cur = std::exp(u(1));
        // Residuals and Jacobian in transformed coordinates.
        Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        for (const FlatSample& s : data) {
            const double r =
                (1.0 + eta_cur * n_cur + eta_cur * (n_cur + 1.0) * s.g - s.nrf) *
                s.weight;
            const double d_eta = (n_cur + (n_cur + 1.0) * s.g) * s.weight;
            const double d_n = eta_cur * (1.0 + s.g) * s.weight;
            Eigen::Vector2d j(d_eta * eta_cur * (1.0 - eta_cur), d_n * n_cur);
            a += j * j.transpose();
            grad += j * r;
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::Matrix2d damped = a;
            damped(0, 0) += lambda * std::max(a(0, 0), 1e-12);
            damped(1, 1) += lambda * std::max(a(1, 1), 1e-12);
            const Eigen::Vector2d delta = damped.ldlt().solve(-grad);
            const Eigen::Vector2d u_next = u + delta;
            const double sse_next =
                sum_of_squares(data, logistic(u_next(0)), std::exp(u_next(1)));
            if (std::isfinite(sse_next) && sse_next <= sse) {
                const double relative_step = delta.norm() / (u.norm() + 1e-8);
                u = u_next;
                sse = sse_next;
                lambda = std::max(lambda * 0.3, 1e-14);
                stepped = true;
                if (relative_step < 1e-8) result.converged = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e14) break;
        }
        if (!stepped || result.converged) break;
    }

    result.eta = logistic(u(0));
    result.mean_photons = std::exp(u(1));
    result.iterations = performed;
    result.residual_norm = std::sqrt(sse);

    // Estimate covariance from the weighted Jacobian over (η, N) itself.
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    for (const FlatSample& s : data) {
        const Eigen::Vector2d j(
            (result.mean_photons + (result.mean_photons + 1.0) * s.g) * s.weight,
            result.eta * (1.0 + s.g) * s.weight);
        a += j * j.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(a);
    if (solver.eigenvalues()(0) <= 1e-12 * std::max(solver.eigenvalues()(1), 1.0))
        throw unidentifiable_parameters("degenerate Jacobian at the optimum");
    result.covariance = a.inverse();
    return result;
}

}  // namespace macrobell
