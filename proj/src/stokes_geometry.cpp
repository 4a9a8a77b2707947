#include "macrobell/stokes_geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace macrobell {

namespace {

// Wrap an angle into (−π, π].
double wrap_pi(double a) {
    a = std::fmod(a, 2.0 * pi);
    if (a <= -pi) a += 2.0 * pi;
    if (a > pi) a -= 2.0 * pi;
    return a;
}

constexpr double kPoleTol = 1e-15;

}  // namespace

StokesDirection StokesDirection::from_radians(double theta, double phi) {
    // Canonicalize via the vector form; handles any (theta, phi) input.
    const double st = std::sin(theta);
    return from_unit_vector(
        {std::cos(theta), st * std::cos(phi), st * std::sin(phi)});
}

StokesDirection StokesDirection::from_degrees(double theta_deg, double phi_deg) {
    return from_radians(deg_to_rad(theta_deg), deg_to_rad(phi_deg));
}

StokesDirection StokesDirection::from_unit_vector(const Eigen::Vector3d& v) {
    const double norm = v.norm();
    if (norm <= 0.0) throw std::invalid_argument("zero direction vector");
    const Eigen::Vector3d u = v / norm;
    StokesDirection d;
    const double transverse = std::hypot(u.y(), u.z());
    d.theta = std::atan2(transverse, u.x());
    d.phi = transverse < kPoleTol ? 0.0 : wrap_pi(std::atan2(u.z(), u.y()));
    return d;
}

Eigen::Vector3d StokesDirection::unit_vector() const {
    const double st = std::sin(theta);
    return {std::cos(theta), st * std::cos(phi), st * std::sin(phi)};
}

WaveplateSetting WaveplateSetting::from_degrees(double chi_h_deg, double chi_q_deg) {
    return {deg_to_rad(chi_h_deg), deg_to_rad(chi_q_deg)};
}

StokesDirection direction_from_waveplates(const WaveplateSetting& setting) {
    const double q = 2.0 * setting.chi_q;
    const double psi = 4.0 * setting.chi_h - q;
    const Eigen::Vector3d n(std::cos(q) * std::cos(psi),
                            std::cos(q) * std::sin(psi),
                            std::sin(q));
    return StokesDirection::from_unit_vector(n);
}

namespace {

SweepGrid plate_trajectory(int n_steps, double period_deg, bool vary_hwp) {
    if (n_steps < 2) throw std::invalid_argument("trajectory needs n_steps >= 2");
    SweepGrid grid;
    grid.points.reserve(static_cast<size_t>(n_steps));
    const double step = period_deg / (n_steps - 1);
    if (vary_hwp)
        grid.step_h_deg = step;
    else
        grid.step_q_deg = step;
    for (int i = 0; i < n_steps; ++i) {
        const double angle = step * i;
        const WaveplateSetting s = vary_hwp
                                       ? WaveplateSetting::from_degrees(angle, 0.0)
                                       : WaveplateSetting::from_degrees(0.0, angle);
        grid.points.push_back({s, direction_from_waveplates(s)});
    }
    return grid;
}

SweepGrid plate_grid(double step_h_deg, double step_q_deg, double max_h_deg,
                     double max_q_deg) {
    if (step_h_deg <= 0.0 || step_q_deg <= 0.0)
        throw std::invalid_argument("sweep steps must be positive");
    SweepGrid grid;
    grid.step_h_deg = step_h_deg;
    grid.step_q_deg = step_q_deg;
    const int nh = static_cast<int>(std::floor(max_h_deg / step_h_deg + 1e-9)) + 1;
    const int nq = static_cast<int>(std::floor(max_q_deg / step_q_deg + 1e-9)) + 1;
    grid.points.reserve(static_cast<size_t>(nh) * nq);
    for (int i = 0; i < nh; ++i) {
        for (int j = 0; j < nq; ++j) {
            const WaveplateSetting s =
                WaveplateSetting::from_degrees(i * step_h_deg, j * step_q_deg);
            grid.points.push_back({s, direction_from_waveplates(s)});
        }
    }
    return grid;
}

}  // namespace

SweepGrid hwp_trajectory(int n_steps) { return plate_trajectory(n_steps, 90.0, true); }

SweepGrid qwp_trajectory(int n_steps) { return plate_trajectory(n_steps, 180.0, false); }

SweepGrid sphere_sweep(double step_h_deg, double step_q_deg) {
    return plate_grid(step_h_deg, step_q_deg, 45.0, 90.0);
}

SweepGrid full_sweep(double step_h_deg, double step_q_deg) {
    return plate_grid(step_h_deg, step_q_deg, 90.0, 180.0);
}

std::pair<double, double> project_to_s2s1(const StokesDirection& direction) {
    const Eigen::Vector3d v = direction.unit_vector();
    return {v.y(), v.x()};
}

}  // namespace macrobell
