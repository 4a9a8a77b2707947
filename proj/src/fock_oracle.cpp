#include "macrobell/fock_oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "macrobell/errors.hpp"

namespace macrobell {

using cd = std::complex<double>;

double TruncatedState::squared_norm() const {
    double total = 0.0;
    for (const cd& a : amplitudes) total += std::norm(a);
    return total;
}

int default_cutoff(double gain, double norm_bound) {
    const double t2 = std::tanh(gain) * std::tanh(gain);
    for (int c = 1; c <= 64; ++c) {
        const double tail = std::pow(t2, c + 1);
        const double deficit = 1.0 - (1.0 - tail) * (1.0 - tail);
        if (deficit <= norm_bound) return c;
    }
    throw truncation_error("no cutoff <= 64 reaches the requested norm bound", 1.0);
}

TruncatedState build_state_fock(const BellStateSpec& spec, int cutoff,
                                double norm_bound) {
    if (spec.quadruples != 1)
        throw std::invalid_argument("Fock oracle represents a single quadruple (M = 1)");
    if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
    TruncatedState state;
    state.cutoff = cutoff;
    const size_t d = static_cast<size_t>(cutoff) + 1;
    state.amplitudes.assign(d * d * d * d, cd(0.0, 0.0));

    const double t = std::tanh(spec.gain);
    const double ch = std::cosh(spec.gain);
    for (int m = 0; m <= cutoff; ++m) {
        for (int n = 0; n <= cutoff; ++n) {
            const double amp =
                (spec.sign < 0 && (n % 2) ? -1.0 : 1.0) * std::pow(t, m + n) / (ch * ch);
            if (spec.family == StateFamily::psi)
                state.amplitudes[state.index(m, n, n, m)] = amp;
            else
                state.amplitudes[state.index(m, n, m, n)] = amp;
        }
    }
    state.truncation_deficit = 1.0 - state.squared_norm();
    if (state.truncation_deficit > norm_bound)
        throw truncation_error("truncated norm misses the bound; raise the cutoff",
                               state.truncation_deficit);
    return state;
}

namespace {

double binomial(int n, int k) {
    double result = 1.0;
    for (int i = 1; i <= k; ++i) result *= static_cast<double>(n - k + i) / i;
    return result;
}

// Matrix of Û within the total-photon sector F of one polarization pair:
// sector[k'][k] = ⟨k', F−k'| Û |k, F−k⟩ for the mode map Û a†Û† = U11 a† + U21 b†,
// Û b†Û† = U12 a† + U22 b†.
std::vector<std::vector<cd>> sector_matrix(const Eigen::Matrix2cd& u, int total) {
    std::vector<double> factorial(static_cast<size_t>(total) + 1, 1.0);
    for (int i = 1; i <= total; ++i)
        factorial[static_cast<size_t>(i)] = factorial[static_cast<size_t>(i - 1)] * i;
    std::vector<std::vector<cd>> sector(
        static_cast<size_t>(total) + 1,
        std::vector<cd>(static_cast<size_t>(total) + 1, cd(0.0, 0.0)));
    for (int k = 0; k <= total; ++k) {
        const int l = total - k;
        for (int kp = 0; kp <= total; ++kp) {
            cd sum = 0.0;
            const int p_lo = std::max(0, kp - l);
            const int p_hi = std::min(k, kp);
            for (int p = p_lo; p <= p_hi; ++p) {
                const int q = kp - p;
                sum += binomial(k, p) * binomial(l, q) *
                       std::pow(u(0, 0), p) * std::pow(u(1, 0), k - p) *
                       std::pow(u(0, 1), q) * std::pow(u(1, 1), l - q);
            }
            const double scale =
                std::sqrt(factorial[static_cast<size_t>(kp)] *
                          factorial[static_cast<size_t>(total - kp)] /
                          (factorial[static_cast<size_t>(k)] *
                           factorial[static_cast<size_t>(l)]));
            sector[static_cast<size_t>(kp)][static_cast<size_t>(k)] = scale * sum;
        }
    }
    return sector;
}

}  // namespace

TruncatedState apply_waveplates_fock(const TruncatedState& state,
                                     const WaveplateSetting& setting,
                                     double leak_bound) {
    const Eigen::Matrix2cd u = waveplate_unitary(setting);
    const int c = state.cutoff;
    const size_t d = static_cast<size_t>(c) + 1;

    std::vector<std::vector<std::vector<cd>>> sectors;
    sectors.reserve(static_cast<size_t>(2 * c) + 1);
    for (int total = 0; total <= 2 * c; ++total) sectors.push_back(sector_matrix(u, total));

    TruncatedState out = state;
    std::vector<cd> in_line(d), out_line(d);
    // One frequency at a time; within it, mix (a, b) occupations at fixed sum.
    for (int frequency = 0; frequency < 2; ++frequency) {
        TruncatedState next = out;
        for (cd& a : next.amplitudes) a = 0.0;
        for (int x = 0; x <= c; ++x) {          // spectator pair, first index
            for (int y = 0; y <= c; ++y) {      // spectator pair, second index
                for (int total = 0; total <= 2 * c; ++total) {
                    const int k_lo = std::max(0, total - c);
                    const int k_hi = std::min(total, c);
                    if (k_lo > k_hi) continue;
                    bool any = false;
                    for (int k = k_lo; k <= k_hi; ++k) {
                        const size_t idx = frequency == 0
                                               ? out.index(k, total - k, x, y)
                                               : out.index(x, y, k, total - k);
                        in_line[static_cast<size_t>(k)] = out.amplitudes[idx];
                        if (in_line[static_cast<size_t>(k)] != cd(0.0, 0.0)) any = true;
                    }
                    if (!any) continue;
                    const auto& sector = sectors[static_cast<size_t>(total)];
                    for (int kp = k_lo; kp <= k_hi; ++kp) {
                        cd sum = 0.0;
                        for (int k = k_lo; k <= k_hi; ++k)
                            sum += sector[static_cast<size_t>(kp)][static_cast<size_t>(k)] *
                                   in_line[static_cast<size_t>(k)];
                        out_line[static_cast<size_t>(kp)] = sum;
                    }
                    for (int kp = k_lo; kp <= k_hi; ++kp) {
                        const size_t idx = frequency == 0
                                               ? next.index(kp, total - kp, x, y)
                                               : next.index(x, y, kp, total - kp);
                        next.amplitudes[idx] = out_line[static_cast<size_t>(kp)];
                    }
                }
            }
        }
        out = std::move(next);
    }

    const double leak = state.squared_norm() - out.squared_norm();
    if (leak > leak_bound)
        throw truncation_error("waveplate rotation leaked past the cutoff", leak);
    return out;
}

namespace {

// Sparse application of S_n; photon number per frequency is conserved, and
// components pushed past the cutoff are dropped (their weight is part of the
// truncation budget).
std::vector<cd> apply_stokes(const TruncatedState& state, const Eigen::Vector3d& n) {
    const int c = state.cutoff;
    std::vector<cd> out(state.amplitudes.size(), cd(0.0, 0.0));
    const cd cross(n.y(), -n.z());  // weight of a†b; b†a carries the conjugate
    for (int na1 = 0; na1 <= c; ++na1)
        for (int nb1 = 0; nb1 <= c; ++nb1)
            for (int na2 = 0; na2 <= c; ++na2)
                for (int nb2 = 0; nb2 <= c; ++nb2) {
                    const cd amp = state.amplitudes[state.index(na1, nb1, na2, nb2)];
                    if (amp == cd(0.0, 0.0)) continue;
                    const double diag = n.x() * ((na1 - nb1) + (na2 - nb2));
                    if (diag != 0.0)
                        out[state.index(na1, nb1, na2, nb2)] += diag * amp;
                    if (cross != cd(0.0, 0.0)) {
                        // frequency 1: a1†b1 and b1†a1
                        if (nb1 > 0 && na1 < c)
                            out[state.index(na1 + 1, nb1 - 1, na2, nb2)] +=
                                cross * std::sqrt(double(nb1) * (na1 + 1)) * amp;
                        if (na1 > 0 && nb1 < c)
                            out[state.index(na1 - 1, nb1 + 1, na2, nb2)] +=
                                std::conj(cross) * std::sqrt(double(na1) * (nb1 + 1)) * amp;
                        // frequency 2: a2†b2 and b2†a2
                        if (nb2 > 0 && na2 < c)
                            out[state.index(na1, nb1, na2 + 1, nb2 - 1)] +=
                                cross * std::sqrt(double(nb2) * (na2 + 1)) * amp;
                        if (na2 > 0 && nb2 < c)
                            out[state.index(na1, nb1, na2 - 1, nb2 + 1)] +=
                                std::conj(cross) * std::sqrt(double(na2) * (nb2 + 1)) * amp;
                    }
                }
    return out;
}

}  // namespace

FockMoments stokes_moment_fock(const TruncatedState& state,
                               const StokesDirection& direction, int k_max) {
    if (k_max < 1 || k_max > 6)
        throw unsupported_order("Fock moments support orders 1..6");
    const Eigen::Vector3d n = direction.unit_vector();
    const double norm2 = state.squared_norm();
    if (norm2 <= 0.0) throw std::invalid_argument("empty state");

    FockMoments result;
    result.raw.resize(static_cast<size_t>(k_max));
    std::vector<cd> power = state.amplitudes;
    for (int k = 1; k <= k_max; ++k) {
        TruncatedState view;
        view.cutoff = state.cutoff;
        view.amplitudes = std::move(power);
        power = apply_stokes(view, n);
        cd moment = 0.0;
        for (size_t i = 0; i < power.size(); ++i)
            moment += std::conj(state.amplitudes[i]) * power[i];
        result.raw[static_cast<size_t>(k - 1)] = moment.real() / norm2;
    }
    result.mean = result.raw[0];

    result.central.resize(static_cast<size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        double value = std::pow(-result.mean, k);  // j = 0 term
        for (int j = 1; j <= k; ++j) {
            double coeff = 1.0;
            for (int i = 1; i <= j; ++i) coeff *= static_cast<double>(k - j + i) / i;
            value += coeff * result.raw[static_cast<size_t>(j - 1)] *
                     std::pow(-result.mean, k - j);
        }
        result.central[static_cast<size_t>(k - 1)] = value;
    }
    return result;
}

std::vector<double> joint_pn_distribution(const TruncatedState& state) {
    std::vector<double> table(state.amplitudes.size());
    for (size_t i = 0; i < table.size(); ++i) table[i] = std::norm(state.amplitudes[i]);
    return table;
}

}  // namespace macrobell
