#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace macrobell {

inline constexpr double pi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

/// A measurement direction n on the Poincaré sphere, stored as spherical
/// coordinates with the S1 axis as the pole:
///   n = (cos θ, sin θ cos φ, sin θ sin φ)  in the (S1, S2, S3) basis.
/// θ is kept in [0, π], φ in (−π, π]; at the poles φ is fixed to 0.
struct StokesDirection {
    double theta = 0.0;  // radians
    double phi = 0.0;    // radians

    static StokesDirection from_radians(double theta, double phi);
    static StokesDirection from_degrees(double theta_deg, double phi_deg);
    static StokesDirection from_unit_vector(const Eigen::Vector3d& v);

    Eigen::Vector3d unit_vector() const;
    double theta_deg() const { return rad_to_deg(theta); }
    double phi_deg() const { return rad_to_deg(phi); }
};

/// Half-wave and quarter-wave plate orientations. Angles are stored
/// unwrapped; the direction mapping is periodic with period π/2 in χ_H
/// and π in χ_Q.
struct WaveplateSetting {
    double chi_h = 0.0;  // radians
    double chi_q = 0.0;  // radians

    static WaveplateSetting from_degrees(double chi_h_deg, double chi_q_deg);
    double chi_h_deg() const { return rad_to_deg(chi_h); }
    double chi_q_deg() const { return rad_to_deg(chi_q); }
};

/// Direction selected by the HWP/QWP pair in front of the polarizing prism:
///   θ = arccos[cos 2χ_Q · cos(4χ_H − 2χ_Q)]
/// with the azimuth resolved through the full direction vector
///   n = (cos 2χ_Q cos(4χ_H − 2χ_Q), cos 2χ_Q sin(4χ_H − 2χ_Q), sin 2χ_Q)
/// so that φ is continuous along plate trajectories and (χ_H, χ_Q) = (0, 45°)
/// lands on +S3. At the poles (n2 = n3 = 0) φ is defined as 0.
StokesDirection direction_from_waveplates(const WaveplateSetting& setting);

struct SweepPoint {
    WaveplateSetting setting;
    StokesDirection direction;
};

struct SweepGrid {
    std::vector<SweepPoint> points;
    double step_h_deg = 0.0;
    double step_q_deg = 0.0;
};

/// Trajectory rotating only the HWP (QWP fixed at 0), n_steps settings
/// spanning one full period [0, 90°] inclusive. Directions trace the
/// S1–S2 great circle.
SweepGrid hwp_trajectory(int n_steps);

/// Trajectory rotating only the QWP (HWP fixed at 0), spanning [0, 180°].
/// Passes through S1 (χ_Q = 0) and S3 (χ_Q = 45°).
SweepGrid qwp_trajectory(int n_steps);

/// Cartesian plate grid over χ_H ∈ [0°, 45°] × χ_Q ∈ [0°, 90°]; its image
/// spans the n3 ≥ 0 hemisphere, which suffices for even-order statistics.
/// The default steps 2.5°/5° give a 19×19 grid.
SweepGrid sphere_sweep(double step_h_deg, double step_q_deg);

/// Full plate domain χ_H ∈ [0°, 90°] × χ_Q ∈ [0°, 180°]; its image covers
/// the whole sphere. Useful as a search grid for extremization.
SweepGrid full_sweep(double step_h_deg, double step_q_deg);

/// Projection used by the sphere maps: (x, y) = (S2 component, S1 component).
std::pair<double, double> project_to_s2s1(const StokesDirection& direction);

}  // namespace macrobell
