#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "macrobell/stokes_geometry.hpp"

namespace macrobell {

/// Fixed ordering of the four modes: polarization a = horizontal,
/// b = vertical; subscripts 1, 2 are the two frequencies. All 4×4 matrices
/// in this module index modes in this order.
enum ModeIndex : int { mode_a1 = 0, mode_b1 = 1, mode_a2 = 2, mode_b2 = 3 };

enum class StateFamily { psi, phi };

/// Which macroscopic Bell state to build, at what parametric gain, and how
/// many independent identical 4-mode quadruples make up the beam.
struct BellStateSpec {
    StateFamily family = StateFamily::psi;
    int sign = +1;               // +1 or −1
    double gain = 0.0;           // Γ ≥ 0
    double mean_photons = 0.0;   // N = sinh²Γ per mode
    int quadruples = 1;          // M ≥ 1

    static BellStateSpec from_gain(StateFamily family, int sign, double gain,
                                   int quadruples = 1);
    static BellStateSpec from_mean_photons(StateFamily family, int sign,
                                           double mean_photons, int quadruples = 1);
    /// Accepts "psi+", "psi-", "phi+", "phi-".
    static BellStateSpec from_name(const std::string& name, double gain,
                                   int quadruples = 1);
    std::string name() const;
};

/// Second moments of a zero-mean Gaussian 4-mode state (one quadruple):
/// normal[i][j] = ⟨a_i† a_j⟩, anomalous[i][j] = ⟨a_i a_j⟩.
struct SecondMoments {
    Eigen::Matrix4cd normal = Eigen::Matrix4cd::Zero();
    Eigen::Matrix4cd anomalous = Eigen::Matrix4cd::Zero();

    /// Checks Hermiticity of `normal`, symmetry of `anomalous`, and positive
    /// semidefiniteness of the full second-moment matrix ⟨ξξ†⟩ with
    /// ξ = (a, a†), down to −tol on the smallest eigenvalue.
    bool is_physical(double tol = 1e-10) const;
};

/// A Hermitian operator quadratic in the mode operators, kept as an explicit
/// term list plus a scalar offset. Stokes observables only need the
/// number-conserving kind, but squeezer-type terms are representable too.
struct QuadraticForm {
    enum class Kind {
        create_annihilate,    // w · a_i† a_j
        annihilate_annihilate,  // w · a_i a_j
        create_create         // w · a_i† a_j†
    };
    struct Term {
        Kind kind;
        int i;
        int j;
        std::complex<double> weight;
    };
    std::vector<Term> terms;
    double offset = 0.0;

    bool is_hermitian(double tol = 1e-12) const;
};

struct MomentReport {
    double mean_s0 = 0.0;                 // detected photons, 4MηN
    Eigen::Vector3d mean_stokes = Eigen::Vector3d::Zero();
    Eigen::Matrix3d stokes_cov = Eigen::Matrix3d::Zero();  // photons²
    std::map<int, double> central_moments;  // order k → ⟨ΔS_n^k⟩
    double nrf = 1.0;  // central_moments[2]/mean_s0; 1 by convention at zero intensity
};

inline constexpr int default_max_moment_order = 6;

/// Builds the requested Bell state as a product of two two-mode squeezed
/// vacua. Diagonal of `normal` is N on all four modes; `anomalous` carries
/// sinhΓ·coshΓ on the family's pair pattern with the ± sign on the second pair.
SecondMoments build_state(const BellStateSpec& spec);

/// Uniform beamsplitter loss: n → ηn, m → ηm.
SecondMoments apply_loss(const SecondMoments& state, double eta);

/// The 2×2 polarization unitary of the HWP(χ_H)→QWP(χ_Q) chain, phased so
/// the zero setting is the identity. Measuring S1 after this unitary equals
/// measuring S_n with n = direction_from_waveplates(setting).
Eigen::Matrix2cd waveplate_unitary(const WaveplateSetting& setting);

/// Conjugates the state by waveplate_unitary acting identically on the
/// polarization pair at each frequency.
SecondMoments apply_polarization_rotation(const SecondMoments& state,
                                          const WaveplateSetting& setting);

/// S_n = cosθ·S1 + sinθcosφ·S2 + sinθsinφ·S3 summed over both frequencies,
/// with S1 = a†a − b†b, S2 = a†b + b†a, S3 = i(b†a − a†b) per frequency.
QuadraticForm stokes_quadratic_form(const StokesDirection& direction);

/// S1, S2 or S3 for axis = 0, 1, 2.
QuadraticForm stokes_component_form(int axis);

/// S0 = Σ_j (a_j†a_j + b_j†b_j).
QuadraticForm total_photon_form();

/// Raw moment ⟨F^k⟩ of a Hermitian quadratic form in the given Gaussian
/// state, by summing order-preserving pair contractions over all perfect
/// matchings of the expanded 2k-operator strings.
double wick_moment(const SecondMoments& state, const QuadraticForm& form, int order,
                   int max_order = default_max_moment_order);

/// Raw moments ⟨F⟩, ⟨F²⟩, …, ⟨F^k⟩ in one call.
std::vector<double> wick_raw_moments(const SecondMoments& state,
                                     const QuadraticForm& form, int k_max,
                                     int max_order = default_max_moment_order);

/// Mixed raw moment ⟨F_1 F_2 … F_r⟩ of several quadratic forms.
double wick_product_moment(const SecondMoments& state,
                           const std::vector<QuadraticForm>& forms,
                           int max_order = default_max_moment_order);

/// Cumulants κ_1..κ_k from raw moments μ'_1..μ'_k.
std::vector<double> cumulants_from_raw_moments(const std::vector<double>& raw);

/// Central moments μ_1..μ_k of the distribution with the given cumulants
/// (κ_1 is ignored: central moments are mean-free).
std::vector<double> central_from_cumulants(const std::vector<double>& cumulants);

/// Full per-direction report for the lossy multimode state: per-quadruple
/// cumulants of S_n are scaled by M (independent quadruples add cumulants)
/// and converted back to central moments.
MomentReport central_moments(const BellStateSpec& spec, double eta,
                             const StokesDirection& direction, int k_max,
                             int max_order = default_max_moment_order);

/// Symmetrized 3×3 Stokes covariance (in photons², including the ×M scaling):
/// C[i][j] = ½⟨S_iS_j + S_jS_i⟩ − ⟨S_i⟩⟨S_j⟩. Satisfies ΔS_n² = nᵀCn.
Eigen::Matrix3d stokes_covariance_matrix(const BellStateSpec& spec, double eta);

/// Just the k-th central moment of S_n (×M scaling included); cheaper than
/// a full report inside extremum searches.
double stokes_central_moment(const BellStateSpec& spec, double eta,
                             const StokesDirection& direction, int k,
                             int max_order = default_max_moment_order);

}  // namespace macrobell
