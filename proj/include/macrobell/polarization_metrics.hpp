#pragma once

#include <Eigen/Dense>
#include <functional>

#include "macrobell/gaussian_engine.hpp"
#include "macrobell/stokes_geometry.hpp"

namespace macrobell {

enum class DpMethod { eigen_decomposition, grid_refine, closed_form };

struct DPReport {
    int order = 2;
    double sup = 0.0;
    double inf = 0.0;
    double dp = 0.0;  // (sup − inf)/(sup + inf)
    Eigen::Vector3d argmax = Eigen::Vector3d::UnitX();
    Eigen::Vector3d argmin = Eigen::Vector3d::UnitX();
    DpMethod method = DpMethod::eigen_decomposition;
};

/// First-order degree of polarization |⟨S⟩| / ⟨S0⟩. Throws undefined_dp
/// when mean_s0 ≤ 0.
double dp1(const Eigen::Vector3d& mean_stokes, double mean_s0);

/// The visibility form (I_max − I_min)/(I_max + I_min) with
/// I(n) = (⟨S0⟩ + ⟨S_n⟩)/2, extremized over the grid directions together
/// with the analytic extremal directions ±⟨S⟩/|⟨S⟩|. Equals dp1 to
/// floating-point accuracy.
double dp1_visibility(const Eigen::Vector3d& mean_stokes, double mean_s0,
                      const SweepGrid& grid);

/// Exact second-order DP: ΔS_n² = nᵀCn on the unit sphere, so sup/inf are
/// the extreme eigenvalues of C and the extremizers the eigenvectors.
/// When mean_s0 > 0 the reported sup/inf are normalized by it (NRF units);
/// the DP ratio is unaffected.
DPReport dp2_eigen(const Eigen::Matrix3d& stokes_cov, double mean_s0);

/// k-th-order DP by grid evaluation plus derivative-free refinement around
/// the best and worst grid points (tangent-plane compass search, halving the
/// step until it drops below refine_tol radians). Throws undefined_dp when
/// the moment field vanishes identically (0/0), e.g. odd orders here.
DPReport dpk_search(const std::function<double(const StokesDirection&)>& moment_fn,
                    int k, const SweepGrid& grid, double refine_tol = 1e-4);

/// Closed-form P2: η(1+N)/(1+ηN) for the triplets, 0 for the singlet.
double closed_form_p2(StateFamily family, int sign, double eta, double mean_photons);

/// Gaussian-statistics prediction for even-order DP from P2: with
/// a/b = (1+P2)/(1−P2), P_{2m} = (a^m − b^m)/(a^m + b^m).
double gaussian_limit_dp(double p2, int order);

/// Fourth central moment of a coherent state of the same detected intensity:
/// the difference of two independent Poisson counters with total mean ⟨S0⟩
/// has μ4 = 3⟨S0⟩² + ⟨S0⟩. Used to normalize fourth-moment sphere maps.
double coherent_fourth_moment(double mean_s0);

}  // namespace macrobell
