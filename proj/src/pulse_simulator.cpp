#include "macrobell/pulse_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "macrobell/errors.hpp"

namespace macrobell {

double default_noise_sigma(const BellStateSpec& spec, double eta) {
    // Added S_n variance is 2σ²; pin it to 10% of the lossy singlet variance.
    const double singlet_variance =
        4.0 * spec.quadruples * eta * spec.mean_photons * (1.0 - eta);
    return std::sqrt(0.05 * singlet_variance);
}

double OutcomeTable::mass() const {
    return std::accumulate(prob.begin(), prob.end(), 0.0);
}

OutcomeTable outcome_table(const BellStateSpec& spec, const WaveplateSetting& setting,
                           int cutoff) {
    BellStateSpec single = spec;
    single.quadruples = 1;
    // Deeper truncation than the oracle default: the rotation must keep its
    // leakage under the 1e-10 norm bound.
    if (cutoff <= 0) cutoff = default_cutoff(single.gain, 1e-12);
    const TruncatedState rotated =
        apply_waveplates_fock(build_state_fock(single, cutoff), setting);
    const std::vector<double> joint = joint_pn_distribution(rotated);

    OutcomeTable table;
    table.max_count = 2 * cutoff;
    table.prob.assign(static_cast<size_t>(table.max_count + 1) * (table.max_count + 1),
                      0.0);
    for (int na1 = 0; na1 <= cutoff; ++na1)
        for (int nb1 = 0; nb1 <= cutoff; ++nb1)
            for (int na2 = 0; na2 <= cutoff; ++na2)
                for (int nb2 = 0; nb2 <= cutoff; ++nb2)
                    table.prob[table.index(na1 + na2, nb1 + nb2)] +=
                        joint[rotated.index(na1, nb1, na2, nb2)];
    return table;
}

AliasTable::AliasTable(const std::vector<double>& weights) {
    const size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("alias table needs at least one weight");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("alias weights must be >= 0");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("alias weights must not all vanish");

    threshold_.assign(n, 1.0);
    alias_.resize(n);
    for (size_t i = 0; i < n; ++i) alias_[i] = static_cast<int>(i);

    std::vector<double> scaled(n);
    for (size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;
    std::vector<int> small, large;
    for (size_t i = 0; i < n; ++i)
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
    while (!small.empty() && !large.empty()) {
        const int s = small.back();
        const int l = large.back();
        small.pop_back();
        large.pop_back();
        threshold_[static_cast<size_t>(s)] = scaled[static_cast<size_t>(s)];
        alias_[static_cast<size_t>(s)] = l;
        scaled[static_cast<size_t>(l)] += scaled[static_cast<size_t>(s)] - 1.0;
        (scaled[static_cast<size_t>(l)] < 1.0 ? small : large).push_back(l);
    }
    // Leftovers are 1 up to rounding.
}

int AliasTable::sample(Rng& rng) const {
    const double u = rng.uniform() * static_cast<double>(threshold_.size());
    size_t cell = static_cast<size_t>(u);
    if (cell >= threshold_.size()) cell = threshold_.size() - 1;
    const double frac = u - static_cast<double>(cell);
    return frac < threshold_[cell] ? static_cast<int>(cell) : alias_[cell];
}

std::vector<double> PulseBatch::s_n_series() const {
    std::vector<double> out(records.size());
    for (size_t i = 0; i < records.size(); ++i) out[i] = s_n(i);
    return out;
}

std::vector<double> PulseBatch::s0_series() const {
    std::vector<double> out(records.size());
    for (size_t i = 0; i < records.size(); ++i) out[i] = s0(i);
    return out;
}

PulseBatch sample_pulses(const OutcomeTable& table, int quadruples,
                         const DetectorConfig& config) {
    if (quadruples < 1) throw std::invalid_argument("quadruples must be >= 1");
    if (config.pulses < 1) throw std::invalid_argument("pulses must be >= 1");
    if (config.eta < 0.0 || config.eta > 1.0)
        throw std::invalid_argument("detection efficiency must be within [0, 1]");
    if (config.electronic_noise_sigma < 0.0)
        throw std::invalid_argument("electronic noise sigma must be >= 0");
    if (config.chunk_size < 1) throw std::invalid_argument("chunk_size must be >= 1");

    const AliasTable alias(table.prob);
    const int columns = table.max_count + 1;

    PulseBatch batch;
    batch.records.resize(static_cast<size_t>(config.pulses));
    const int chunks = (config.pulses + config.chunk_size - 1) / config.chunk_size;
    for (int chunk = 0; chunk < chunks; ++chunk) {
        Rng rng(derive_stream_seed(config.seed, static_cast<uint64_t>(chunk)));
        const int begin = chunk * config.chunk_size;
        const int end = std::min(config.pulses, begin + config.chunk_size);
        for (int pulse = begin; pulse < end; ++pulse) {
            int n_a = 0;
            int n_b = 0;
            for (int q = 0; q < quadruples; ++q) {
                const int cell = alias.sample(rng);
                n_a += cell / columns;
                n_b += cell % columns;
            }
            double i_a = rng.binomial(n_a, config.eta);
            double i_b = rng.binomial(n_b, config.eta);
            if (config.electronic_noise_sigma > 0.0) {
                i_a += config.electronic_noise_sigma * rng.gaussian();
                i_b += config.electronic_noise_sigma * rng.gaussian();
            }
            batch.records[static_cast<size_t>(pulse)] = {i_a, i_b};
        }
    }
    return batch;
}

namespace {

double binomial_coeff(int n, int k) {
    double result = 1.0;
    for (int i = 1; i <= k; ++i) result *= static_cast<double>(n - k + i) / i;
    return result;
}

// Bias-corrected central moments of one series: h-statistics for orders 2–4,
// plain sample central moments above.
std::vector<double> corrected_central_moments(std::span<const double> samples,
                                              int k_max, double* mean_out) {
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    if (mean_out) *mean_out = mean;

    std::vector<double> m(static_cast<size_t>(k_max) + 1, 0.0);
    for (double x : samples) {
        const double d = x - mean;
        double power = 1.0;
        for (int k = 1; k <= k_max; ++k) {
            power *= d;
            m[static_cast<size_t>(k)] += power;
        }
    }
    for (int k = 1; k <= k_max; ++k) m[static_cast<size_t>(k)] /= n;

    std::vector<double> central(static_cast<size_t>(k_max), 0.0);
    for (int k = 2; k <= k_max; ++k) {
        double value = m[static_cast<size_t>(k)];
        if (k == 2 && n > 1) {
            value = n / (n - 1.0) * m[2];
        } else if (k == 3 && n > 2) {
            value = n * n / ((n - 1.0) * (n - 2.0)) * m[3];
        } else if (k == 4 && n > 3) {
            value = (n * (n * n - 2.0 * n + 3.0) * m[4] -
                     3.0 * n * (2.0 * n - 3.0) * m[2] * m[2]) /
                    ((n - 1.0) * (n - 2.0) * (n - 3.0));
        }
        central[static_cast<size_t>(k - 1)] = value;
    }
    return central;
}

double batch_standard_error(const std::vector<double>& batch_values) {
    const size_t b = batch_values.size();
    if (b < 2) return 0.0;
    double mean = 0.0;
    for (double v : batch_values) mean += v;
    mean /= static_cast<double>(b);
    double var = 0.0;
    for (double v : batch_values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(b - 1);
    return std::sqrt(var / static_cast<double>(b));
}

}  // namespace

MomentEstimates estimate_series_moments(std::span<const double> samples, int k_max,
                                        int batches) {
    const int n = static_cast<int>(samples.size());
    if (n < 2) throw insufficient_pulses("moment estimation needs at least 2 pulses");
    if (k_max >= 4 && n < 8)
        throw insufficient_pulses("fourth-order standard errors need at least 8 pulses");
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");

    MomentEstimates result;
    result.pulses = n;
    double mean = 0.0;
    const std::vector<double> central = corrected_central_moments(samples, k_max, &mean);

    // Batch means: the same estimator on non-overlapping contiguous batches.
    int b = std::min(batches, n / 2);
    if (b < 2) b = 2;
    std::vector<std::vector<double>> batch_central(static_cast<size_t>(k_max));
    std::vector<double> batch_mean;
    batch_mean.reserve(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
        const int begin = static_cast<int>(static_cast<long>(n) * i / b);
        const int end = static_cast<int>(static_cast<long>(n) * (i + 1) / b);
        if (end - begin < 2) continue;
        double bm = 0.0;
        const std::vector<double> bc =
            corrected_central_moments(samples.subspan(static_cast<size_t>(begin),
                                                      static_cast<size_t>(end - begin)),
                                      k_max, &bm);
        batch_mean.push_back(bm);
        for (int k = 1; k <= k_max; ++k)
            batch_central[static_cast<size_t>(k - 1)].push_back(
                bc[static_cast<size_t>(k - 1)]);
    }

    result.mean = {mean, batch_standard_error(batch_mean), 1, n};
    result.central.resize(static_cast<size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        result.central[static_cast<size_t>(k - 1)] = {
            central[static_cast<size_t>(k - 1)],
            batch_standard_error(batch_central[static_cast<size_t>(k - 1)]), k, n};
    }
    return result;
}

BatchMoments estimate_moments(const PulseBatch& batch, int k_max, int batches) {
    const std::vector<double> sn = batch.s_n_series();
    const std::vector<double> s0 = batch.s0_series();
    BatchMoments result;
    result.s_n = estimate_series_moments(sn, std::max(k_max, 2), batches);
    result.s0 = estimate_series_moments(s0, std::max(k_max, 2), batches);

    const int n = static_cast<int>(sn.size());
    int b = std::min(batches, n / 2);
    if (b < 2) b = 2;
    std::vector<double> batch_nrf;
    batch_nrf.reserve(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
        const int begin = static_cast<int>(static_cast<long>(n) * i / b);
        const int end = static_cast<int>(static_cast<long>(n) * (i + 1) / b);
        if (end - begin < 2) continue;
        double mean_s0 = 0.0;
        for (int j = begin; j < end; ++j) mean_s0 += s0[static_cast<size_t>(j)];
        mean_s0 /= static_cast<double>(end - begin);
        if (mean_s0 <= 0.0) continue;
        const std::vector<double> bc = corrected_central_moments(
            std::span<const double>(sn).subspan(static_cast<size_t>(begin),
                                                static_cast<size_t>(end - begin)),
            2, nullptr);
        batch_nrf.push_back(bc[1] / mean_s0);
    }
    const double mean_s0 = result.s0.mean.value;
    result.nrf = {mean_s0 > 0.0 ? result.s_n.central[1].value / mean_s0 : 0.0,
                  batch_standard_error(batch_nrf), 2, n};
    return result;
}

namespace {

// Raw moments about zero from mean + central moments.
std::vector<double> raw_from_central(double mean, const std::vector<double>& central) {
    const int k_max = static_cast<int>(central.size());
    std::vector<double> raw(static_cast<size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        double value = std::pow(mean, k);  // j = 0 term (central_0 = 1)
        for (int j = 2; j <= k; ++j)
            value += binomial_coeff(k, j) * central[static_cast<size_t>(j - 1)] *
                     std::pow(mean, k - j);
        raw[static_cast<size_t>(k - 1)] = value;
    }
    return raw;
}

}  // namespace

MomentEstimates subtract_electronic_noise(const MomentEstimates& signal,
                                          const MomentEstimates& noise_reference) {
    const int k_max = static_cast<int>(
        std::min(signal.central.size(), noise_reference.central.size()));
    auto central_values = [k_max](const MomentEstimates& e) {
        std::vector<double> v(static_cast<size_t>(k_max));
        for (int k = 1; k <= k_max; ++k)
            v[static_cast<size_t>(k - 1)] = e.central[static_cast<size_t>(k - 1)].value;
        return v;
    };
    std::vector<double> kappa_signal = cumulants_from_raw_moments(
        raw_from_central(signal.mean.value, central_values(signal)));
    const std::vector<double> kappa_noise = cumulants_from_raw_moments(
        raw_from_central(noise_reference.mean.value, central_values(noise_reference)));
    for (int k = 0; k < k_max; ++k)
        kappa_signal[static_cast<size_t>(k)] -= kappa_noise[static_cast<size_t>(k)];

    const std::vector<double> central = central_from_cumulants(kappa_signal);

    MomentEstimates out;
    out.pulses = signal.pulses;
    out.mean = {kappa_signal[0],
                std::hypot(signal.mean.standard_error,
                           noise_reference.mean.standard_error),
                1, signal.pulses};
    out.central.resize(static_cast<size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        // Quadrature combination of the per-order errors; cross-order
        // couplings in the cumulant transform are neglected.
        const double se =
            std::hypot(signal.central[static_cast<size_t>(k - 1)].standard_error,
                       noise_reference.central[static_cast<size_t>(k - 1)].standard_error);
        out.central[static_cast<size_t>(k - 1)] = {central[static_cast<size_t>(k - 1)],
                                                   se, k, signal.pulses};
    }
    if (k_max >= 2 && out.central[1].value < 0.0) out.over_subtracted = true;
    return out;
}

MomentEstimates subtract_electronic_noise(const MomentEstimates& signal,
                                          const PulseBatch& noise_reference,
                                          int batches) {
    const std::vector<double> series = noise_reference.s_n_series();
    return subtract_electronic_noise(
        signal, estimate_series_moments(
                    series, static_cast<int>(signal.central.size()), batches));
}

Histogram histogram(std::span<const double> samples, int bins) {
    if (bins < 2) throw std::invalid_argument("histogram needs at least 2 bins");
    if (samples.empty()) throw std::invalid_argument("histogram needs samples");
    Histogram h;
    h.counts.assign(static_cast<size_t>(bins), 0);
    double mean = 0.0;
    for (double x : samples) mean += x;
    h.mean = mean / static_cast<double>(samples.size());
    double half = 0.0;
    for (double x : samples) half = std::max(half, std::abs(x - h.mean));
    if (half == 0.0) {
        h.bin_width = 1.0;
        h.counts[static_cast<size_t>(bins / 2)] = static_cast<long>(samples.size());
        return h;
    }
    half *= 1.0 + 1e-12;
    h.bin_width = 2.0 * half / static_cast<double>(bins);
    for (double x : samples) {
        int idx = static_cast<int>((x - (h.mean - half)) / h.bin_width);
        idx = std::clamp(idx, 0, bins - 1);
        ++h.counts[static_cast<size_t>(idx)];
    }
    return h;
}

}  // namespace macrobell
