#include "macrobell/gaussian_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "macrobell/errors.hpp"

namespace macrobell {

using cd = std::complex<double>;

BellStateSpec BellStateSpec::from_gain(StateFamily family, int sign, double gain,
                                       int quadruples) {
    if (gain < 0.0) throw std::invalid_argument("parametric gain must be >= 0");
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
    if (quadruples < 1) throw std::invalid_argument("quadruples must be >= 1");
    BellStateSpec spec;
    spec.family = family;
    spec.sign = sign;
    spec.gain = gain;
    spec.mean_photons = std::sinh(gain) * std::sinh(gain);
    spec.quadruples = quadruples;
    return spec;
}

BellStateSpec BellStateSpec::from_mean_photons(StateFamily family, int sign,
                                               double mean_photons, int quadruples) {
    if (mean_photons < 0.0) throw std::invalid_argument("mean photon number must be >= 0");
    return from_gain(family, sign, std::asinh(std::sqrt(mean_photons)), quadruples);
}

BellStateSpec BellStateSpec::from_name(const std::string& name, double gain,
                                       int quadruples) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    StateFamily family;
    if (s.rfind("psi", 0) == 0)
        family = StateFamily::psi;
    else if (s.rfind("phi", 0) == 0)
        family = StateFamily::phi;
    else
        throw std::invalid_argument("unknown state name: " + name);
    if (s.size() != 4 || (s[3] != '+' && s[3] != '-'))
        throw std::invalid_argument("unknown state name: " + name);
    return from_gain(family, s[3] == '+' ? +1 : -1, gain, quadruples);
}

std::string BellStateSpec::name() const {
    std::string s = family == StateFamily::psi ? "psi" : "phi";
    s += sign > 0 ? '+' : '-';
    return s;
}

bool SecondMoments::is_physical(double tol) const {
    if ((normal - normal.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    if ((anomalous - anomalous.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    Eigen::Matrix<cd, 8, 8> full;
    full.topLeftCorner<4, 4>() = Eigen::Matrix4cd::Identity() + normal.transpose();
    full.topRightCorner<4, 4>() = anomalous;
    full.bottomLeftCorner<4, 4>() = anomalous.conjugate();
    full.bottomRightCorner<4, 4>() = normal;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cd, 8, 8>> solver(full);
    return solver.eigenvalues().minCoeff() >= -tol;
}

bool QuadraticForm::is_hermitian(double tol) const {
    // The adjoint of each term must be present with the conjugate weight.
    auto adjoint_of = [](const Term& t) {
        Term a;
        a.weight = std::conj(t.weight);
        switch (t.kind) {
            case Kind::create_annihilate:
                a.kind = Kind::create_annihilate;
                a.i = t.j;
                a.j = t.i;
                break;
            case Kind::annihilate_annihilate:
                a.kind = Kind::create_create;
                a.i = t.j;
                a.j = t.i;
                break;
            case Kind::create_create:
                a.kind = Kind::annihilate_annihilate;
                a.i = t.j;
                a.j = t.i;
                break;
        }
        return a;
    };
    auto total_weight = [&](Kind kind, int i, int j) {
        cd w = 0.0;
        for (const Term& t : terms)
            if (t.kind == kind && t.i == i && t.j == j) w += t.weight;
        return w;
    };
    for (const Term& t : terms) {
        const Term a = adjoint_of(t);
        // Compare aggregated weights so split/duplicated terms are accepted.
        if (std::abs(total_weight(t.kind, t.i, t.j) -
                     std::conj(total_weight(a.kind, a.i, a.j))) > tol)
            return false;
    }
    return true;
}

SecondMoments build_state(const BellStateSpec& spec) {
    SecondMoments state;
    const double n = spec.mean_photons;
    const double s = std::sinh(spec.gain) * std::cosh(spec.gain);
    state.normal = n * Eigen::Matrix4cd::Identity();
    auto set_pair = [&state](int i, int j, double value) {
        state.anomalous(i, j) = value;
        state.anomalous(j, i) = value;
    };
    if (spec.family == StateFamily::psi) {
        set_pair(mode_a1, mode_b2, s);
        set_pair(mode_b1, mode_a2, spec.sign * s);
    } else {
        set_pair(mode_a1, mode_a2, s);
        set_pair(mode_b1, mode_b2, spec.sign * s);
    }
    return state;
}

SecondMoments apply_loss(const SecondMoments& state, double eta) {
    if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("detection efficiency must be within [0, 1]");
    SecondMoments out;
    out.normal = eta * state.normal;
    out.anomalous = eta * state.anomalous;
    return out;
}

Eigen::Matrix2cd waveplate_unitary(const WaveplateSetting& setting) {
    const cd i_unit(0.0, 1.0);
    const double h2 = 2.0 * setting.chi_h;
    Eigen::Matrix2cd hwp;
    hwp << std::cos(h2), std::sin(h2), std::sin(h2), -std::cos(h2);
    const double c = std::cos(setting.chi_q);
    const double s = std::sin(setting.chi_q);
    Eigen::Matrix2cd qwp;  // R(χ) diag(1, −i) R(−χ)
    qwp << c * c - i_unit * s * s, (1.0 + i_unit) * s * c,
           (1.0 + i_unit) * s * c, s * s - i_unit * c * c;
    // Constant output phase chosen so the zero setting is the identity;
    // diagonal phases ahead of the prism do not affect the counted signals.
    Eigen::Matrix2cd phase = Eigen::Matrix2cd::Identity();
    phase(1, 1) = -i_unit;
    return phase * qwp * hwp;
}

SecondMoments apply_polarization_rotation(const SecondMoments& state,
                                          const WaveplateSetting& setting) {
    const Eigen::Matrix2cd u = waveplate_unitary(setting);
    Eigen::Matrix4cd w = Eigen::Matrix4cd::Zero();
    w.block<2, 2>(0, 0) = u;
    w.block<2, 2>(2, 2) = u;
    SecondMoments out;
    out.normal = w.conjugate() * state.normal * w.transpose();
    out.anomalous = w * state.anomalous * w.transpose();
    return out;
}

QuadraticForm stokes_quadratic_form(const StokesDirection& direction) {
    const Eigen::Vector3d n = direction.unit_vector();
    const cd i_unit(0.0, 1.0);
    // Components below numerical dust (|n| = 1) are dropped so exact-axis
    // directions give clean term lists.
    constexpr double dust = 1e-15;
    QuadraticForm form;
    for (int f = 0; f < 2; ++f) {
        const int a = 2 * f;      // horizontal mode at this frequency
        const int b = 2 * f + 1;  // vertical mode
        const cd cross = n.y() - i_unit * n.z();  // weight of a†b
        if (std::abs(n.x()) > dust) {
            form.terms.push_back({QuadraticForm::Kind::create_annihilate, a, a, n.x()});
            form.terms.push_back({QuadraticForm::Kind::create_annihilate, b, b, -n.x()});
        }
        if (std::abs(cross) > dust) {
            form.terms.push_back({QuadraticForm::Kind::create_annihilate, a, b, cross});
            form.terms.push_back({QuadraticForm::Kind::create_annihilate, b, a,
                                  std::conj(cross)});
        }
    }
    return form;
}

QuadraticForm stokes_component_form(int axis) {
    if (axis < 0 || axis > 2) throw std::invalid_argument("Stokes axis must be 0, 1 or 2");
    StokesDirection d;
    if (axis == 0)
        d = StokesDirection::from_radians(0.0, 0.0);
    else
        d = StokesDirection::from_radians(pi / 2.0, axis == 1 ? 0.0 : pi / 2.0);
    return stokes_quadratic_form(d);
}

QuadraticForm total_photon_form() {
    QuadraticForm form;
    for (int mode = 0; mode < 4; ++mode)
        form.terms.push_back({QuadraticForm::Kind::create_annihilate, mode, mode, 1.0});
    return form;
}

namespace {

struct LadderOp {
    bool create;
    int mode;
};

// Order-preserving pair contractions for a zero-mean Gaussian state.
struct ContractionTables {
    Eigen::Matrix4cd ca;  // ⟨a_i† a_j⟩
    Eigen::Matrix4cd aa;  // ⟨a_i a_j⟩
    Eigen::Matrix4cd cc;  // ⟨a_i† a_j†⟩
    Eigen::Matrix4cd ac;  // ⟨a_i a_j†⟩

    explicit ContractionTables(const SecondMoments& state) {
        ca = state.normal;
        aa = state.anomalous;
        cc = state.anomalous.conjugate();
        ac = state.normal.conjugate().transpose() + Eigen::Matrix4cd::Identity();
    }

    cd contract(const LadderOp& first, const LadderOp& second) const {
        if (first.create)
            return second.create ? cc(first.mode, second.mode)
                                 : ca(first.mode, second.mode);
        return second.create ? ac(first.mode, second.mode)
                             : aa(first.mode, second.mode);
    }
};

constexpr int kMaxOps = 2 * default_max_moment_order;

cd pairing_sum(const std::array<LadderOp, kMaxOps>& ops, int count,
               const ContractionTables& tables, unsigned mask) {
    int first = 0;
    while (first < count && (mask & (1u << first))) ++first;
    if (first == count) return 1.0;
    cd total = 0.0;
    const unsigned mask_first = mask | (1u << first);
    for (int second = first + 1; second < count; ++second) {
        if (mask & (1u << second)) continue;
        const cd value = tables.contract(ops[first], ops[second]);
        if (value == cd(0.0, 0.0)) continue;
        total += value * pairing_sum(ops, count, tables, mask_first | (1u << second));
    }
    return total;
}

void append_ops(std::array<LadderOp, kMaxOps>& ops, int& count,
                const QuadraticForm::Term& term) {
    switch (term.kind) {
        case QuadraticForm::Kind::create_annihilate:
            ops[count++] = {true, term.i};
            ops[count++] = {false, term.j};
            break;
        case QuadraticForm::Kind::annihilate_annihilate:
            ops[count++] = {false, term.i};
            ops[count++] = {false, term.j};
            break;
        case QuadraticForm::Kind::create_create:
            ops[count++] = {true, term.i};
            ops[count++] = {true, term.j};
            break;
    }
}

// Sums coefficient × Wick(pairings) over every monomial in the expansion of
// the factor product, descending one factor per level.
cd product_moment_recurse(const std::vector<const QuadraticForm*>& factors,
                          size_t level, std::array<LadderOp, kMaxOps>& ops, int count,
                          cd coefficient, const ContractionTables& tables) {
    if (level == factors.size())
        return coefficient * pairing_sum(ops, count, tables, 0u);
    const QuadraticForm& form = *factors[level];
    cd total = 0.0;
    if (form.offset != 0.0)
        total += product_moment_recurse(factors, level + 1, ops, count,
                                        coefficient * form.offset, tables);
    for (const QuadraticForm::Term& term : form.terms) {
        if (term.weight == cd(0.0, 0.0)) continue;
        const int saved = count;
        append_ops(ops, count, term);
        total += product_moment_recurse(factors, level + 1, ops, count,
                                        coefficient * term.weight, tables);
        count = saved;
    }
    return total;
}

double product_moment(const SecondMoments& state,
                      const std::vector<const QuadraticForm*>& factors) {
    const ContractionTables tables(state);
    std::array<LadderOp, kMaxOps> ops;
    const cd value = product_moment_recurse(factors, 0, ops, 0, 1.0, tables);
    return value.real();
}

}  // namespace

double wick_moment(const SecondMoments& state, const QuadraticForm& form, int order,
                   int max_order) {
    if (order < 1) throw std::invalid_argument("moment order must be >= 1");
    if (order > max_order)
        throw unsupported_order("moment order " + std::to_string(order) +
                                " exceeds the configured maximum " +
                                std::to_string(max_order));
    std::vector<const QuadraticForm*> factors(static_cast<size_t>(order), &form);
    return product_moment(state, factors);
}

std::vector<double> wick_raw_moments(const SecondMoments& state,
                                     const QuadraticForm& form, int k_max,
                                     int max_order) {
    std::vector<double> raw(static_cast<size_t>(k_max));
    for (int k = 1; k <= k_max; ++k)
        raw[static_cast<size_t>(k - 1)] = wick_moment(state, form, k, max_order);
    return raw;
}

double wick_product_moment(const SecondMoments& state,
                           const std::vector<QuadraticForm>& forms, int max_order) {
    if (forms.empty()) return 1.0;
    if (static_cast<int>(forms.size()) > max_order)
        throw unsupported_order("product of " + std::to_string(forms.size()) +
                                " forms exceeds the configured maximum");
    std::vector<const QuadraticForm*> factors;
    factors.reserve(forms.size());
    for (const QuadraticForm& f : forms) factors.push_back(&f);
    return product_moment(state, factors);
}

namespace {

double binomial(int n, int k) {
    double result = 1.0;
    for (int i = 1; i <= k; ++i) result *= static_cast<double>(n - k + i) / i;
    return result;
}

}  // namespace

std::vector<double> cumulants_from_raw_moments(const std::vector<double>& raw) {
    const int k = static_cast<int>(raw.size());
    std::vector<double> kappa(raw.size());
    for (int n = 1; n <= k; ++n) {
        double value = raw[static_cast<size_t>(n - 1)];
        for (int j = 1; j < n; ++j)
            value -= binomial(n - 1, j - 1) * kappa[static_cast<size_t>(j - 1)] *
                     raw[static_cast<size_t>(n - j - 1)];
        kappa[static_cast<size_t>(n - 1)] = value;
    }
    return kappa;
}

std::vector<double> central_from_cumulants(const std::vector<double>& cumulants) {
    const int k = static_cast<int>(cumulants.size());
    std::vector<double> central(static_cast<size_t>(k) + 1, 0.0);
    central[0] = 1.0;  // μ_0
    for (int n = 1; n <= k; ++n) {
        double value = 0.0;
        for (int j = 2; j <= n; ++j)
            value += binomial(n - 1, j - 1) * cumulants[static_cast<size_t>(j - 1)] *
                     central[static_cast<size_t>(n - j)];
        central[static_cast<size_t>(n)] = value;
    }
    central.erase(central.begin());  // drop μ_0; central[k-1] is now μ_k
    return central;
}

MomentReport central_moments(const BellStateSpec& spec, double eta,
                             const StokesDirection& direction, int k_max,
                             int max_order) {
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    if (k_max > max_order)
        throw unsupported_order("k_max exceeds the configured maximum");
    const SecondMoments state = apply_loss(build_state(spec), eta);
    const double m = static_cast<double>(spec.quadruples);

    MomentReport report;
    report.mean_s0 = m * wick_moment(state, total_photon_form(), 1, max_order);

    std::array<QuadraticForm, 3> components = {stokes_component_form(0),
                                               stokes_component_form(1),
                                               stokes_component_form(2)};
    for (int i = 0; i < 3; ++i)
        report.mean_stokes(i) =
            m * wick_moment(state, components[static_cast<size_t>(i)], 1, max_order);
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            const double sym =
                0.5 * (wick_product_moment(state,
                                           {components[static_cast<size_t>(i)],
                                            components[static_cast<size_t>(j)]},
                                           max_order) +
                       wick_product_moment(state,
                                           {components[static_cast<size_t>(j)],
                                            components[static_cast<size_t>(i)]},
                                           max_order));
            const double cov = m * sym - report.mean_stokes(i) * report.mean_stokes(j) / m;
            report.stokes_cov(i, j) = cov;
            report.stokes_cov(j, i) = cov;
        }
    }

    const QuadraticForm form = stokes_quadratic_form(direction);
    std::vector<double> kappa =
        cumulants_from_raw_moments(wick_raw_moments(state, form, k_max, max_order));
    for (double& value : kappa) value *= m;
    const std::vector<double> central = central_from_cumulants(kappa);
    for (int k = 1; k <= k_max; ++k)
        report.central_moments[k] = central[static_cast<size_t>(k - 1)];

    report.nrf = report.mean_s0 > 0.0 && k_max >= 2
                     ? report.central_moments.at(2) / report.mean_s0
                     : 1.0;
    return report;
}

double stokes_central_moment(const BellStateSpec& spec, double eta,
                             const StokesDirection& direction, int k, int max_order) {
    if (k < 1) throw std::invalid_argument("moment order must be >= 1");
    const SecondMoments state = apply_loss(build_state(spec), eta);
    const QuadraticForm form = stokes_quadratic_form(direction);
    std::vector<double> kappa =
        cumulants_from_raw_moments(wick_raw_moments(state, form, k, max_order));
    for (double& value : kappa) value *= static_cast<double>(spec.quadruples);
    return central_from_cumulants(kappa)[static_cast<size_t>(k - 1)];
}

Eigen::Matrix3d stokes_covariance_matrix(const BellStateSpec& spec, double eta) {
    const SecondMoments state = apply_loss(build_state(spec), eta);
    const double m = static_cast<double>(spec.quadruples);
    std::array<QuadraticForm, 3> components = {stokes_component_form(0),
                                               stokes_component_form(1),
                                               stokes_component_form(2)};
    Eigen::Vector3d mean;
    for (int i = 0; i < 3; ++i)
        mean(i) = wick_moment(state, components[static_cast<size_t>(i)], 1);
    Eigen::Matrix3d cov;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            const double sym =
                0.5 * (wick_product_moment(state, {components[static_cast<size_t>(i)],
                                                   components[static_cast<size_t>(j)]}) +
                       wick_product_moment(state, {components[static_cast<size_t>(j)],
                                                   components[static_cast<size_t>(i)]}));
            const double value = m * (sym - mean(i) * mean(j));
            cov(i, j) = value;
            cov(j, i) = value;
        }
    }
    return cov;
}

}  // namespace macrobell
