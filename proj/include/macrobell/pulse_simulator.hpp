#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "macrobell/fock_oracle.hpp"
#include "macrobell/rng.hpp"
#include "macrobell/stokes_geometry.hpp"

namespace macrobell {

struct DetectorConfig {
    double eta = 1.0;
    double electronic_noise_sigma = 0.0;  // photons-equivalent per channel
    int pulses = 20000;
    uint64_t seed = 12345;
    /// Pulses are generated in chunks with independent seeded streams; the
    /// chunk layout is part of the determinism contract.
    int chunk_size = 1024;
    int batches = 50;  // batch-means groups for standard errors
};

/// Electronic-noise sigma making the added noise variance of S_n equal to
/// 10% of the lossy singlet signal variance (the documented default scale).
double default_noise_sigma(const BellStateSpec& spec, double eta);

/// Joint photon-count distribution of the two prism channels for one
/// quadruple in the rotated basis: N_A = n_a1 + n_a2, N_B = n_b1 + n_b2
/// (the detectors sum both wavelengths).
struct OutcomeTable {
    int max_count = 0;          // per channel, = 2 × cutoff
    std::vector<double> prob;   // (max_count+1)² row-major over (N_A, N_B)

    size_t index(int n_a, int n_b) const {
        return static_cast<size_t>(n_a) * (max_count + 1) + static_cast<size_t>(n_b);
    }
    double mass() const;
};

OutcomeTable outcome_table(const BellStateSpec& spec, const WaveplateSetting& setting,
                           int cutoff);

/// Walker/Vose alias table for O(1) categorical sampling.
class AliasTable {
 public:
    explicit AliasTable(const std::vector<double>& weights);
    int sample(Rng& rng) const;
    size_t size() const { return threshold_.size(); }

 private:
    std::vector<double> threshold_;
    std::vector<int> alias_;
};

struct PulseBatch {
    std::vector<std::array<double, 2>> records;  // (I_A, I_B) per pulse

    double i_a(size_t i) const { return records[i][0]; }
    double i_b(size_t i) const { return records[i][1]; }
    double s_n(size_t i) const { return records[i][0] - records[i][1]; }
    double s0(size_t i) const { return records[i][0] + records[i][1]; }
    std::vector<double> s_n_series() const;
    std::vector<double> s0_series() const;
};

/// Pulse-by-pulse sampling: M independent table draws per pulse, binomial
/// thinning at η per channel, Gaussian electronic noise per channel.
/// Bit-identical output for identical config (seed and chunk layout).
PulseBatch sample_pulses(const OutcomeTable& table, int quadruples,
                         const DetectorConfig& config);

struct MomentEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    int order = 0;
    int pulses = 0;
};

struct MomentEstimates {
    MomentEstimate mean;
    std::vector<MomentEstimate> central;  // index k−1 holds order k (order 1 is 0)
    int pulses = 0;
    bool over_subtracted = false;  // set when noise subtraction drove a variance < 0
};

/// Sample central moments with bias correction (exact h-statistics for
/// orders 2–4, plain estimates above) and batch-means standard errors.
MomentEstimates estimate_series_moments(std::span<const double> samples, int k_max,
                                        int batches = 50);

struct BatchMoments {
    MomentEstimates s_n;
    MomentEstimates s0;
    MomentEstimate nrf;  // Var(S_n)/⟨S0⟩ with a batch-means standard error
};

BatchMoments estimate_moments(const PulseBatch& batch, int k_max, int batches = 50);

/// Removes an independently recorded electronic-noise contribution by
/// cumulant subtraction (cumulants of independent summands add). Standard
/// errors combine in quadrature order-by-order. A negative corrected
/// variance is reported through `over_subtracted`, never clamped silently.
MomentEstimates subtract_electronic_noise(const MomentEstimates& signal,
                                          const MomentEstimates& noise_reference);

/// Same, but straight from a dark batch (vacuum table plus noise): the S_n
/// series of the reference is estimated to the signal's order first.
MomentEstimates subtract_electronic_noise(const MomentEstimates& signal,
                                          const PulseBatch& noise_reference,
                                          int batches = 50);

struct Histogram {
    double mean = 0.0;
    double bin_width = 0.0;
    std::vector<long> counts;

    double bin_center(size_t i) const {
        const double half = bin_width * static_cast<double>(counts.size()) / 2.0;
        return mean - half + bin_width * (static_cast<double>(i) + 0.5);
    }
};

/// Histogram with bins placed symmetrically around the sample mean.
Histogram histogram(std::span<const double> samples, int bins);

}  // namespace macrobell
