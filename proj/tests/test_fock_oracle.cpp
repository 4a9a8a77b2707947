#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "macrobell/errors.hpp"
#include "macrobell/fock_oracle.hpp"

using namespace macrobell;
using cd = std::complex<double>;

namespace {

// Independent construction path: the squeezing exponential applied to the
// vacuum by scaled-and-repeated series action, straight from the generator
// Γ(a1†b2† ± b1†a2†) − h.c. (or the a1†a2† ± b1†b2† pattern).
struct SeriesOracle {
    int cutoff;
    double gamma;
    int sign;
    bool phi_family;

    size_t index(int na1, int nb1, int na2, int nb2) const {
        const size_t d = static_cast<size_t>(cutoff) + 1;
        return ((static_cast<size_t>(na1) * d + static_cast<size_t>(nb1)) * d +
                static_cast<size_t>(na2)) * d + static_cast<size_t>(nb2);
    }

    // out += scale * (pair-creation + pair-annihilation) acting on `in`,
    // for the creation pair (p, q) of the 4 mode indices.
    void accumulate_pair(const std::vector<cd>& in, std::vector<cd>& out, int p, int q,
                         double scale) const {
        const int c = cutoff;
        int occ[4];
        for (occ[0] = 0; occ[0] <= c; ++occ[0])
            for (occ[1] = 0; occ[1] <= c; ++occ[1])
                for (occ[2] = 0; occ[2] <= c; ++occ[2])
                    for (occ[3] = 0; occ[3] <= c; ++occ[3]) {
                        const cd amp = in[index(occ[0], occ[1], occ[2], occ[3])];
                        if (amp == cd(0.0)) continue;
                        if (occ[p] < c && occ[q] < c) {
                            int up[4] = {occ[0], occ[1], occ[2], occ[3]};
                            ++up[p];
                            ++up[q];
                            out[index(up[0], up[1], up[2], up[3])] +=
                                scale * std::sqrt(double(up[p]) * up[q]) * amp;
                        }
                        if (occ[p] > 0 && occ[q] > 0) {
                            int down[4] = {occ[0], occ[1], occ[2], occ[3]};
                            --down[p];
                            --down[q];
                            out[index(down[0], down[1], down[2], down[3])] -=
                                scale * std::sqrt(double(occ[p]) * occ[q]) * amp;
                        }
                    }
    }

    std::vector<cd> apply_generator(const std::vector<cd>& in, double scale) const {
        std::vector<cd> out(in.size(), cd(0.0));
        if (phi_family) {
            accumulate_pair(in, out, 0, 2, scale);         // a1, a2
            accumulate_pair(in, out, 1, 3, sign * scale);  // b1, b2
        } else {
            accumulate_pair(in, out, 0, 3, scale);         // a1, b2
            accumulate_pair(in, out, 1, 2, sign * scale);  // b1, a2
        }
        return out;
    }

    std::vector<cd> build() const {
        const size_t d = static_cast<size_t>(cutoff) + 1;
        std::vector<cd> state(d * d * d * d, cd(0.0));
        state[0] = 1.0;
        const int doublings = 6;
        const double scale = gamma / double(1 << doublings);
        for (int step = 0; step < (1 << doublings); ++step) {
            std::vector<cd> total = state;
            std::vector<cd> term = state;
            for (int k = 1; k <= 24; ++k) {
                term = apply_generator(term, scale);
                double norm = 0.0;
                for (size_t i = 0; i < term.size(); ++i) {
                    term[i] /= double(k);
                    total[i] += term[i];
                    norm += std::norm(term[i]);
                }
                if (norm < 1e-34) break;
            }
            state = std::move(total);
        }
        return state;
    }
};

}  // namespace

TEST_CASE("fock amplitudes at zero gain") {
    const TruncatedState vacuum =
        build_state_fock(BellStateSpec::from_gain(StateFamily::psi, +1, 0.0), 4);
    CHECK(std::abs(vacuum.amplitudes[vacuum.index(0, 0, 0, 0)] - cd(1.0)) < 1e-15);
    CHECK(vacuum.squared_norm() == doctest::Approx(1.0));
}

TEST_CASE("fock amplitudes follow the pair-squeezer expansion") {
    const double t = std::tanh(0.3);
    const double ch = std::cosh(0.3);
    const TruncatedState psi_plus =
        build_state_fock(BellStateSpec::from_gain(StateFamily::psi, +1, 0.3), 12);
    // |m=1, n=0⟩ component sits at occupations (1, 0, 0, 1).
    CHECK(psi_plus.amplitudes[psi_plus.index(1, 0, 0, 1)].real() ==
          doctest::Approx(t / (ch * ch)).epsilon(1e-12));
    CHECK(psi_plus.squared_norm() == doctest::Approx(1.0).epsilon(1e-10));

    const TruncatedState psi_minus =
        build_state_fock(BellStateSpec::from_gain(StateFamily::psi, -1, 0.3), 12);
    // |m=0, n=1⟩ lives at (0, 1, 1, 0) and carries the (−1)^n sign.
    CHECK(psi_minus.amplitudes[psi_minus.index(0, 1, 1, 0)].real() ==
          doctest::Approx(-t / (ch * ch)).epsilon(1e-12));

    const TruncatedState phi_plus =
        build_state_fock(BellStateSpec::from_gain(StateFamily::phi, +1, 0.3), 12);
    CHECK(phi_plus.amplitudes[phi_plus.index(1, 0, 1, 0)].real() ==
          doctest::Approx(t / (ch * ch)).epsilon(1e-12));
}

TEST_CASE("norm accounting and cutoff selection") {
    const double gamma = 0.3;
    const double t2 = std::tanh(gamma) * std::tanh(gamma);
    double previous_deficit = 1.0;
    for (int cutoff : {4, 6, 8, 10}) {
        const TruncatedState state = build_state_fock(
            BellStateSpec::from_gain(StateFamily::psi, +1, gamma), cutoff, 1.0);
        const double tail = std::pow(t2, cutoff + 1);
        CHECK(state.squared_norm() ==
              doctest::Approx((1.0 - tail) * (1.0 - tail)).epsilon(1e-12));
        CHECK(state.truncation_deficit < previous_deficit);
        previous_deficit = state.truncation_deficit;
    }
    const int cutoff = default_cutoff(gamma);
    const TruncatedState state =
        build_state_fock(BellStateSpec::from_gain(StateFamily::psi, +1, gamma), cutoff);
    CHECK(state.truncation_deficit <= 1e-8);

    // Too-coarse truncation is an error, with the deficit reported.
    CHECK_THROWS_AS(
        build_state_fock(BellStateSpec::from_gain(StateFamily::psi, +1, 1.0), 2),
        truncation_error);
}

TEST_CASE("series-action construction confirms the amplitude sign rule") {
    // Series box two levels above the compared block, so cutoff-boundary
    // flux does not contaminate the amplitudes under test.
    const int compare_cutoff = 8;
    const int series_cutoff = 10;
    const double gamma = 0.2;
    for (const StateFamily family : {StateFamily::psi, StateFamily::phi}) {
        for (const int sign : {+1, -1}) {
            const SeriesOracle oracle{series_cutoff, gamma, sign,
                                      family == StateFamily::phi};
            const std::vector<cd> series = oracle.build();
            const TruncatedState closed_form = build_state_fock(
                BellStateSpec::from_gain(family, sign, gamma), compare_cutoff);
            double worst = 0.0;
            for (int na1 = 0; na1 <= compare_cutoff; ++na1)
                for (int nb1 = 0; nb1 <= compare_cutoff; ++nb1)
                    for (int na2 = 0; na2 <= compare_cutoff; ++na2)
                        for (int nb2 = 0; nb2 <= compare_cutoff; ++nb2)
                            worst = std::max(
                                worst,
                                std::abs(series[oracle.index(na1, nb1, na2, nb2)] -
                                         closed_form.amplitudes[closed_form.index(
                                             na1, nb1, na2, nb2)]));
            CHECK(worst < 1e-8);
        }
    }
}

TEST_CASE("waveplate action in Fock space") {
    const BellStateSpec spec = BellStateSpec::from_gain(StateFamily::psi, +1, 0.3);
    const TruncatedState state = build_state_fock(spec, 12);

    const TruncatedState same =
        apply_waveplates_fock(state, WaveplateSetting::from_degrees(0.0, 0.0));
    double delta = 0.0;
    for (size_t i = 0; i < state.amplitudes.size(); ++i)
        delta = std::max(delta, std::abs(same.amplitudes[i] - state.amplitudes[i]));
    CHECK(delta < 1e-12);

    // Exchange identity: S1 moments after a 22.5° HWP equal S2 moments before.
    const TruncatedState rotated =
        apply_waveplates_fock(state, WaveplateSetting::from_degrees(22.5, 0.0));
    const FockMoments s1_after =
        stokes_moment_fock(rotated, StokesDirection::from_degrees(0.0, 0.0), 4);
    const FockMoments s2_before =
        stokes_moment_fock(state, StokesDirection::from_degrees(90.0, 0.0), 4);
    for (int k = 0; k < 4; ++k)
        CHECK(s1_after.raw[static_cast<size_t>(k)] ==
              doctest::Approx(s2_before.raw[static_cast<size_t>(k)]).epsilon(1e-8));

    CHECK(rotated.squared_norm() ==
          doctest::Approx(state.squared_norm()).epsilon(1e-10));
}

TEST_CASE("singlet moments are invariant under waveplates in Fock space") {
    const TruncatedState singlet =
        build_state_fock(BellStateSpec::from_gain(StateFamily::psi, -1, 0.3), 12);
    const StokesDirection axes[3] = {StokesDirection::from_degrees(0.0, 0.0),
                                     StokesDirection::from_degrees(90.0, 0.0),
                                     StokesDirection::from_degrees(90.0, 90.0)};
    for (const auto& [h, q] : {std::pair{15.0, 0.0}, {22.5, 45.0}, {5.0, 70.0}}) {
        const TruncatedState rotated =
            apply_waveplates_fock(singlet, WaveplateSetting::from_degrees(h, q));
        for (const StokesDirection& axis : axes) {
            const FockMoments before = stokes_moment_fock(singlet, axis, 4);
            const FockMoments after = stokes_moment_fock(rotated, axis, 4);
            for (int k = 0; k < 4; ++k)
                CHECK(after.raw[static_cast<size_t>(k)] ==
                      doctest::Approx(before.raw[static_cast<size_t>(k)])
                          .epsilon(1e-8));
        }
    }
}

TEST_CASE("stokes moments: perfect correlations and symmetric histograms") {
    const TruncatedState vacuum =
        build_state_fock(BellStateSpec::from_gain(StateFamily::phi, +1, 0.0), 3);
    const FockMoments nothing =
        stokes_moment_fock(vacuum, StokesDirection::from_degrees(45.0, 30.0), 4);
    for (double moment : nothing.raw) CHECK(moment == doctest::Approx(0.0));

    const BellStateSpec spec = BellStateSpec::from_gain(StateFamily::psi, +1, 0.3);
    const TruncatedState state = build_state_fock(spec, 12);
    const FockMoments s1 =
        stokes_moment_fock(state, StokesDirection::from_degrees(0.0, 0.0), 2);
    CHECK(s1.central[1] == doctest::Approx(0.0).epsilon(1e-10));  // lossless Var(S1)

    const FockMoments s2 =
        stokes_moment_fock(state, StokesDirection::from_degrees(90.0, 0.0), 2);
    const FockMoments s3 =
        stokes_moment_fock(state, StokesDirection::from_degrees(90.0, 90.0), 2);
    CHECK(s2.central[1] == doctest::Approx(s3.central[1]).epsilon(1e-10));

    // Third central moments vanish for every state: symmetric distributions.
    for (const char* name : {"psi+", "psi-", "phi+", "phi-"}) {
        const TruncatedState s =
            build_state_fock(BellStateSpec::from_name(name, 0.3), 12);
        for (const auto& [h, q] : {std::pair{0.0, 0.0}, {22.5, 0.0}, {10.0, 35.0}}) {
            const TruncatedState r =
                apply_waveplates_fock(s, WaveplateSetting::from_degrees(h, q));
            const FockMoments m =
                stokes_moment_fock(r, StokesDirection::from_degrees(0.0, 0.0), 3);
            CHECK(std::abs(m.central[2]) < 1e-8);
        }
    }
}

TEST_CASE("oracle and engine agree along random directions") {
    std::mt19937 rng(2718);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    for (const char* name : {"psi+", "psi-", "phi+", "phi-"}) {
        const BellStateSpec spec = BellStateSpec::from_name(name, 0.3);
        const TruncatedState fock = build_state_fock(spec, 12);
        for (int trial = 0; trial < 5; ++trial) {
            const StokesDirection direction =
                StokesDirection::from_radians(angle(rng), angle(rng));
            const FockMoments oracle = stokes_moment_fock(fock, direction, 4);
            const MomentReport engine = central_moments(spec, 1.0, direction, 4);
            CHECK(std::abs(oracle.mean) < 1e-8);
            CHECK(oracle.central[1] ==
                  doctest::Approx(engine.central_moments.at(2)).epsilon(1e-6));
            CHECK(std::abs(oracle.central[2]) < 1e-8);  // parity: odd orders vanish
            CHECK(oracle.central[3] ==
                  doctest::Approx(engine.central_moments.at(4)).epsilon(1e-6));
        }
    }
}

TEST_CASE("sixth moments agree between oracle and engine") {
    const BellStateSpec spec = BellStateSpec::from_gain(StateFamily::psi, +1, 0.3);
    const TruncatedState fock = build_state_fock(spec, 14);
    const StokesDirection s2 = StokesDirection::from_degrees(90.0, 0.0);
    const FockMoments oracle = stokes_moment_fock(fock, s2, 6);
    const MomentReport engine = central_moments(spec, 1.0, s2, 6);
    CHECK(engine.central_moments.at(6) ==
          doctest::Approx(oracle.central[5]).epsilon(1e-6));
    CHECK(std::abs(oracle.central[4]) < 1e-8);  // odd orders vanish
    CHECK(std::abs(engine.central_moments.at(5)) < 1e-8);
}

TEST_CASE("rotation leakage past a tight cutoff is an error") {
    // High gain crammed into a tiny box: the build is allowed through a
    // loose norm bound, but the rotation must refuse to silently leak.
    const TruncatedState cramped = build_state_fock(
        BellStateSpec::from_gain(StateFamily::psi, +1, 1.0), 6, 1.0);
    CHECK_THROWS_AS(
        apply_waveplates_fock(cramped, WaveplateSetting::from_degrees(22.5, 10.0)),
        truncation_error);
}

TEST_CASE("joint photon-number distribution") {
    const TruncatedState vacuum =
        build_state_fock(BellStateSpec::from_gain(StateFamily::psi, +1, 0.0), 3);
    const std::vector<double> unit = joint_pn_distribution(vacuum);
    CHECK(unit[vacuum.index(0, 0, 0, 0)] == doctest::Approx(1.0));

    const double gamma = 0.3;
    const BellStateSpec spec = BellStateSpec::from_gain(StateFamily::psi, +1, gamma);
    const TruncatedState state = build_state_fock(spec, 12);
    const std::vector<double> table = joint_pn_distribution(state);
    const double t = std::tanh(gamma);
    const double ch = std::cosh(gamma);
    CHECK(table[state.index(1, 0, 0, 1)] ==
          doctest::Approx(t * t / std::pow(ch, 4)).epsilon(1e-12));

    // Perfect pairwise correlation: n_a1 = n_b2 with probability one.
    double mismatch = 0.0;
    double thermal_check = 0.0;
    const double mean_n = spec.mean_photons;
    for (int na1 = 0; na1 <= 12; ++na1) {
        double marginal = 0.0;
        for (int nb1 = 0; nb1 <= 12; ++nb1)
            for (int na2 = 0; na2 <= 12; ++na2)
                for (int nb2 = 0; nb2 <= 12; ++nb2) {
                    const double p = table[state.index(na1, nb1, na2, nb2)];
                    marginal += p;
                    if (na1 != nb2) mismatch += p;
                }
        // Thermal marginal with mean N.
        const double expected =
            std::pow(mean_n, na1) / std::pow(mean_n + 1.0, na1 + 1);
        thermal_check = std::max(thermal_check, std::abs(marginal - expected));
    }
    CHECK(mismatch == doctest::Approx(0.0));
    CHECK(thermal_check < 1e-10);

    // Phi family: co-polarized correlation instead.
    const TruncatedState phi =
        build_state_fock(BellStateSpec::from_gain(StateFamily::phi, -1, gamma), 12);
    const std::vector<double> phi_table = joint_pn_distribution(phi);
    double phi_mismatch = 0.0;
    for (int na1 = 0; na1 <= 12; ++na1)
        for (int nb1 = 0; nb1 <= 12; ++nb1)
            for (int na2 = 0; na2 <= 12; ++na2)
                for (int nb2 = 0; nb2 <= 12; ++nb2)
                    if (na1 != na2 || nb1 != nb2)
                        phi_mismatch += phi_table[phi.index(na1, nb1, na2, nb2)];
    CHECK(phi_mismatch == doctest::Approx(0.0));
}
