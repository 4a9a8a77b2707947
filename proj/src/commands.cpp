#include "macrobell/commands.hpp"

#include <algorithm>
#include <cmath>

#include "macrobell/errors.hpp"
#include "macrobell/fock_oracle.hpp"

namespace macrobell {

namespace {

double engine_nrf(const BellStateSpec& spec, double eta, const StokesDirection& dir) {
    const double mean_s0 = 4.0 * spec.quadruples * eta * spec.mean_photons;
    if (mean_s0 <= 0.0) return 1.0;  // vacuum convention: shot-noise level
    return stokes_central_moment(spec, eta, dir, 2) / mean_s0;
}

/// Monte Carlo NRF at one plate setting, with electronic-noise subtraction
/// when a noise reference is supplied.
MomentEstimates mc_moments_at(const BellStateSpec& spec, const WaveplateSetting& setting,
                              const DetectorConfig& detector, int cutoff,
                              const MomentEstimates* noise, MomentEstimate* nrf_out) {
    const OutcomeTable table = outcome_table(spec, setting, cutoff);
    const PulseBatch batch = sample_pulses(table, spec.quadruples, detector);
    BatchMoments moments = estimate_moments(batch, 4, detector.batches);
    MomentEstimates sn = moments.s_n;
    if (noise != nullptr) sn = subtract_electronic_noise(sn, *noise);
    if (nrf_out != nullptr) {
        const double mean_s0 = moments.s0.mean.value;
        *nrf_out = moments.nrf;
        if (noise != nullptr && mean_s0 > 0.0) {
            nrf_out->value = sn.central[1].value / mean_s0;
            nrf_out->standard_error =
                std::hypot(moments.nrf.standard_error,
                           noise->central[1].standard_error / mean_s0);
        }
    }
    return sn;
}

/// Noise-only reference batch: vacuum table plus electronic noise.
MomentEstimates noise_reference_moments(const DetectorConfig& detector) {
    OutcomeTable vacuum;
    vacuum.max_count = 0;
    vacuum.prob = {1.0};
    DetectorConfig noise_detector = detector;
    noise_detector.seed = derive_stream_seed(detector.seed, 0x6e6f697365ull);
    const PulseBatch batch = sample_pulses(vacuum, 1, noise_detector);
    return estimate_series_moments(batch.s_n_series(), 4, detector.batches);
}

}  // namespace

std::vector<CurvePoint> compute_curves(const RunConfig& config) {
    const BellStateSpec spec = config_state_spec(config);
    const DetectorConfig detector = config_detector(config);
    const bool hwp = config.plate == "hwp";
    const SweepGrid trajectory =
        hwp ? hwp_trajectory(config.curve_points) : qwp_trajectory(config.curve_points);

    std::optional<MomentEstimates> noise;
    if (config.with_mc && detector.electronic_noise_sigma > 0.0)
        noise = noise_reference_moments(detector);

    std::vector<CurvePoint> points;
    points.reserve(trajectory.points.size());
    for (const SweepPoint& p : trajectory.points) {
        CurvePoint point;
        point.chi_deg = hwp ? p.setting.chi_h_deg() : p.setting.chi_q_deg();
        point.nrf_exact = engine_nrf(spec, config.eta, p.direction);
        if (config.with_mc) {
            MomentEstimate nrf;
            mc_moments_at(spec, p.setting, detector, config.cutoff,
                          noise ? &*noise : nullptr, &nrf);
            point.has_mc = true;
            point.nrf_mc = nrf.value;
            point.nrf_mc_se = nrf.standard_error;
        }
        points.push_back(point);
    }
    return points;
}

void cmd_curves(const RunConfig& config, std::ostream& log) {
    const std::string path = config.out.empty() ? "curves.csv" : config.out;
    const std::vector<CurvePoint> points = compute_curves(config);
    atomic_write_file(path, curves_to_csv(points));
    log << "wrote " << points.size() << " curve points to " << path << "\n";
}

std::vector<SphereMapRecord> compute_sweep(const RunConfig& config) {
    const BellStateSpec spec = config_state_spec(config);
    const SweepGrid grid = sphere_sweep(config.step_h_deg, config.step_q_deg);
    const double mean_s0 = 4.0 * spec.quadruples * config.eta * spec.mean_photons;
    const double m4_reference = coherent_fourth_moment(mean_s0);

    std::vector<SphereMapRecord> records;
    records.reserve(grid.points.size());
    for (const SweepPoint& p : grid.points) {
        const MomentReport report = central_moments(spec, config.eta, p.direction, 4);
        SphereMapRecord r;
        r.chi_h_deg = p.setting.chi_h_deg();
        r.chi_q_deg = p.setting.chi_q_deg();
        r.theta_deg = p.direction.theta_deg();
        r.phi_deg = p.direction.phi_deg();
        const auto [x, y] = project_to_s2s1(p.direction);
        r.x = x;
        r.y = y;
        r.nrf = report.nrf;
        r.m4_normalized =
            m4_reference > 0.0 ? report.central_moments.at(4) / m4_reference : 0.0;
        records.push_back(r);
    }
    return records;
}

void cmd_sweep(const RunConfig& config, std::ostream& log) {
    const std::string path = config.out.empty() ? "sweep.csv" : config.out;
    const std::vector<SphereMapRecord> records = compute_sweep(config);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        atomic_write_file(path, sweep_to_json(records).dump(2) + "\n");
    else
        atomic_write_file(path, sweep_to_csv(records));
    log << "wrote " << records.size() << " sweep records to " << path << "\n";
}

namespace {

DpOrderResult exact_dp_entry(const BellStateSpec& spec, double eta, int order,
                             const RunConfig& config) {
    DpOrderResult entry;
    entry.order = order;
    try {
        if (order == 1) {
            const MomentReport report =
                central_moments(spec, eta, StokesDirection{}, 2);
            entry.dp = dp1(report.mean_stokes, report.mean_s0);
            entry.sup = report.mean_stokes.norm();
            entry.inf = entry.sup == 0.0 ? 0.0 : -entry.sup;
            entry.method = "mean-vector";
            return entry;
        }
        if (order == 2) {
            const Eigen::Matrix3d cov = stokes_covariance_matrix(spec, eta);
            const double mean_s0 = 4.0 * spec.quadruples * eta * spec.mean_photons;
            const DPReport report = dp2_eigen(cov, mean_s0);
            entry.dp = report.dp;
            entry.sup = report.sup;
            entry.inf = report.inf;
            for (int i = 0; i < 3; ++i) {
                entry.argmax[static_cast<size_t>(i)] = report.argmax(i);
                entry.argmin[static_cast<size_t>(i)] = report.argmin(i);
            }
            entry.method = "eigen";
            return entry;
        }
        const SweepGrid grid = sphere_sweep(config.step_h_deg, config.step_q_deg);
        const DPReport report = dpk_search(
            [&](const StokesDirection& d) {
                return stokes_central_moment(spec, eta, d, order);
            },
            order, grid);
        entry.dp = report.dp;
        entry.sup = report.sup;
        entry.inf = report.inf;
        for (int i = 0; i < 3; ++i) {
            entry.argmax[static_cast<size_t>(i)] = report.argmax(i);
            entry.argmin[static_cast<size_t>(i)] = report.argmin(i);
        }
        entry.method = "grid+refine";
        return entry;
    } catch (const undefined_dp& error) {
        entry.defined = false;
        entry.note = error.what();
        entry.method = "undefined";
        return entry;
    }
}

DpMonteCarlo monte_carlo_dp(const BellStateSpec& spec, const RunConfig& config) {
    const DetectorConfig detector = config_detector(config);
    std::optional<MomentEstimates> noise;
    if (detector.electronic_noise_sigma > 0.0)
        noise = noise_reference_moments(detector);

    DpMonteCarlo mc;
    mc.pulses = detector.pulses;

    // P1 from the three coordinate directions.
    const std::array<WaveplateSetting, 3> axis_settings = {
        WaveplateSetting::from_degrees(0.0, 0.0),     // S1
        WaveplateSetting::from_degrees(22.5, 0.0),    // S2
        WaveplateSetting::from_degrees(0.0, 45.0)};   // S3
    Eigen::Vector3d mean_vector;
    Eigen::Vector3d mean_se;
    double mean_s0 = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        DetectorConfig stream = detector;
        stream.seed = derive_stream_seed(detector.seed, 100 + static_cast<uint64_t>(axis));
        const OutcomeTable table =
            outcome_table(spec, axis_settings[static_cast<size_t>(axis)], config.cutoff);
        const PulseBatch batch = sample_pulses(table, spec.quadruples, stream);
        const BatchMoments moments = estimate_moments(batch, 2, detector.batches);
        mean_vector(axis) = moments.s_n.mean.value;
        mean_se(axis) = moments.s_n.mean.standard_error;
        mean_s0 += moments.s0.mean.value / 3.0;
    }
    mc.p1 = mean_s0 > 0.0 ? mean_vector.norm() / mean_s0 : 0.0;
    mc.p1_se = mean_s0 > 0.0 ? mean_se.norm() / mean_s0 : 0.0;

    // Variance and fourth-moment extremes over a coarse plate grid.
    const SweepGrid grid = sphere_sweep(6.0 * config.step_h_deg, 6.0 * config.step_q_deg);
    MomentEstimate var_max, var_min, m4_max, m4_min;
    bool first = true;
    uint64_t stream_index = 200;
    for (const SweepPoint& p : grid.points) {
        DetectorConfig stream = detector;
        stream.seed = derive_stream_seed(detector.seed, stream_index++);
        const OutcomeTable table = outcome_table(spec, p.setting, config.cutoff);
        const PulseBatch batch = sample_pulses(table, spec.quadruples, stream);
        BatchMoments moments = estimate_moments(batch, 4, detector.batches);
        MomentEstimates sn = moments.s_n;
        if (noise) sn = subtract_electronic_noise(sn, *noise);
        const MomentEstimate& variance = sn.central[1];
        const MomentEstimate& fourth = sn.central[3];
        if (first || variance.value > var_max.value) var_max = variance;
        if (first || variance.value < var_min.value) var_min = variance;
        if (first || fourth.value > m4_max.value) m4_max = fourth;
        if (first || fourth.value < m4_min.value) m4_min = fourth;
        first = false;
    }
    auto visibility = [](const MomentEstimate& hi, const MomentEstimate& lo,
                         double* se_out) {
        const double total = hi.value + lo.value;
        if (total <= 0.0) {
            *se_out = 0.0;
            return 0.0;
        }
        const double se = 2.0 *
                          std::hypot(lo.value * hi.standard_error,
                                     hi.value * lo.standard_error) /
                          (total * total);
        *se_out = se;
        return (hi.value - lo.value) / total;
    };
    mc.p2 = visibility(var_max, var_min, &mc.p2_se);
    mc.p4 = visibility(m4_max, m4_min, &mc.p4_se);
    return mc;
}

}  // namespace

DpOutput compute_dp(const RunConfig& config) {
    const BellStateSpec spec = config_state_spec(config);
    DpOutput output;

    const MomentReport report = central_moments(spec, config.eta, StokesDirection{}, 2);
    output.p1 = dp1(report.mean_stokes, report.mean_s0);
    output.p1_visibility = dp1_visibility(
        report.mean_stokes, report.mean_s0,
        sphere_sweep(config.step_h_deg, config.step_q_deg));
    // The two first-order definitions agree analytically; a mismatch means a
    // broken mean-Stokes path.
    if (std::abs(output.p1 - output.p1_visibility) > 1e-9)
        throw std::runtime_error("first-order DP visibility cross-check failed");
    output.closed_form_p2 =
        closed_form_p2(spec.family, spec.sign, config.eta, spec.mean_photons);
    for (int order : config.orders)
        output.orders.push_back(exact_dp_entry(spec, config.eta, order, config));
    if (config.with_mc) output.mc = monte_carlo_dp(spec, config);
    return output;
}

nlohmann::json dp_to_json(const DpOutput& output, const RunConfig& config) {
    nlohmann::json doc;
    doc["schema"] = "macrobell.dp.v1";
    doc["state"] = config.state;
    doc["eta"] = config.eta;
    doc["nbar"] = config_state_spec(config).mean_photons;
    doc["modes"] = config.modes;
    doc["p1"] = output.p1;
    doc["p1_visibility"] = output.p1_visibility;
    doc["closed_form_p2"] = output.closed_form_p2;
    nlohmann::json orders = nlohmann::json::array();
    for (const DpOrderResult& entry : output.orders) {
        nlohmann::json item;
        item["order"] = entry.order;
        item["defined"] = entry.defined;
        item["method"] = entry.method;
        if (entry.defined) {
            item["dp"] = entry.dp;
            item["sup"] = entry.sup;
            item["inf"] = entry.inf;
            item["argmax"] = entry.argmax;
            item["argmin"] = entry.argmin;
        } else {
            item["note"] = entry.note;
        }
        orders.push_back(item);
    }
    doc["orders"] = std::move(orders);
    if (output.mc) {
        doc["mc"] = {{"p1", output.mc->p1},      {"p1_se", output.mc->p1_se},
                     {"p2", output.mc->p2},      {"p2_se", output.mc->p2_se},
                     {"p4", output.mc->p4},      {"p4_se", output.mc->p4_se},
                     {"pulses", output.mc->pulses}};
    }
    return doc;
}

void cmd_dp(const RunConfig& config, std::ostream& log) {
    const DpOutput output = compute_dp(config);
    log << "state " << config.state << ", eta " << config.eta << ", N "
        << config_state_spec(config).mean_photons << ", M " << config.modes << "\n";
    log << "P1 = " << output.p1 << " (visibility form " << output.p1_visibility
        << ")\n";
    log << "closed-form P2 = " << output.closed_form_p2 << "\n";
    for (const DpOrderResult& entry : output.orders) {
        if (!entry.defined) {
            log << "P" << entry.order << " undefined: " << entry.note << "\n";
            continue;
        }
        log << "P" << entry.order << " = " << entry.dp << "  [sup " << entry.sup
            << ", inf " << entry.inf << ", " << entry.method << "]\n";
    }
    if (output.mc) {
        log << "MC (" << output.mc->pulses << " pulses): P1 = " << output.mc->p1
            << " +- " << output.mc->p1_se << ", P2 = " << output.mc->p2 << " +- "
            << output.mc->p2_se << ", P4 = " << output.mc->p4 << " +- "
            << output.mc->p4_se << "\n";
    }
    if (!config.out.empty()) {
        atomic_write_file(config.out, dp_to_json(output, config).dump(2) + "\n");
        log << "wrote DP report to " << config.out << "\n";
    }
}

SimulateOutput compute_simulate(const RunConfig& config, PulseBatch* batch_out) {
    const BellStateSpec spec = config_state_spec(config);
    const DetectorConfig detector = config_detector(config);
    const WaveplateSetting setting =
        WaveplateSetting::from_degrees(config.chi_h_deg, config.chi_q_deg);

    const OutcomeTable table = outcome_table(spec, setting, config.cutoff);
    const PulseBatch batch = sample_pulses(table, spec.quadruples, detector);

    SimulateOutput output;
    output.moments = estimate_moments(batch, 4, detector.batches);
    if (detector.electronic_noise_sigma > 0.0) {
        const MomentEstimates noise = noise_reference_moments(detector);
        output.moments.s_n = subtract_electronic_noise(output.moments.s_n, noise);
        const double mean_s0 = output.moments.s0.mean.value;
        if (mean_s0 > 0.0) {
            output.moments.nrf.value = output.moments.s_n.central[1].value / mean_s0;
            output.moments.nrf.standard_error =
                std::hypot(output.moments.nrf.standard_error,
                           noise.central[1].standard_error / mean_s0);
        }
        output.noise_subtracted = true;
    }
    output.engine_nrf =
        engine_nrf(spec, config.eta, direction_from_waveplates(setting));
    if (batch_out != nullptr) *batch_out = batch;
    return output;
}

void cmd_simulate(const RunConfig& config, std::ostream& log) {
    PulseBatch batch;
    const SimulateOutput output = compute_simulate(config, &batch);
    const std::string path = config.out.empty() ? "pulses.csv" : config.out;
    atomic_write_file(path, pulse_batch_to_csv(batch));

    nlohmann::json summary;
    summary["schema"] = "macrobell.simulate.v1";
    summary["pulses"] = static_cast<int>(batch.records.size());
    summary["mean_s0"] = output.moments.s0.mean.value;
    summary["mean_sn"] = output.moments.s_n.mean.value;
    summary["var_sn"] = output.moments.s_n.central[1].value;
    summary["nrf"] = output.moments.nrf.value;
    summary["nrf_se"] = output.moments.nrf.standard_error;
    summary["nrf_engine"] = output.engine_nrf;
    summary["noise_subtracted"] = output.noise_subtracted;
    summary["over_subtracted"] = output.moments.s_n.over_subtracted;
    const std::string summary_path = path + ".summary.json";
    atomic_write_file(summary_path, summary.dump(2) + "\n");

    log << "wrote " << batch.records.size() << " pulses to " << path << "\n";
    log << "NRF = " << output.moments.nrf.value << " +- "
        << output.moments.nrf.standard_error << " (engine " << output.engine_nrf
        << ")\n";
}

CurveModel parse_curve_model(const std::string& name) {
    const auto colon = name.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("model must look like 'psi+:hwp'");
    const BellStateSpec spec = BellStateSpec::from_name(name.substr(0, colon), 0.0);
    const std::string plate = name.substr(colon + 1);
    if (plate != "hwp" && plate != "qwp")
        throw std::invalid_argument("plate must be hwp or qwp");
    return {spec.family, spec.sign, plate == "hwp" ? Plate::hwp : Plate::qwp};
}

nlohmann::json fit_result_to_json(const FitResult& result) {
    nlohmann::json doc;
    doc["eta"] = result.eta;
    doc["nbar"] = result.mean_photons;
    doc["eta_se"] = std::sqrt(result.covariance(0, 0));
    doc["nbar_se"] = std::sqrt(result.covariance(1, 1));
    doc["covariance"] = {{result.covariance(0, 0), result.covariance(0, 1)},
                         {result.covariance(1, 0), result.covariance(1, 1)}};
    doc["residual_norm"] = result.residual_norm;
    doc["iterations"] = result.iterations;
    doc["converged"] = result.converged;
    return doc;
}

nlohmann::json cmd_fit(const std::vector<std::pair<std::string, std::string>>& inputs,
                       std::optional<std::pair<double, double>> initial_guess,
                       const std::string& out_path, std::ostream& log) {
    std::vector<FitDataset> datasets;
    for (const auto& [path, model_name] : inputs) {
        FitDataset dataset;
        dataset.model = parse_curve_model(model_name);
        dataset.samples = read_fit_samples_csv(path);
        datasets.push_back(std::move(dataset));
    }
    const FitResult result = fit(datasets, initial_guess);

    nlohmann::json doc = fit_result_to_json(result);
    nlohmann::json residuals = nlohmann::json::array();
    for (const FitDataset& dataset : datasets) {
        for (const FitSample& sample : dataset.samples) {
            const double model = model_nrf(dataset.model, sample.chi, result.eta,
                                           result.mean_photons);
            residuals.push_back({{"chi_deg", rad_to_deg(sample.chi)},
                                 {"nrf", sample.nrf},
                                 {"model", model},
                                 {"residual", sample.nrf - model}});
        }
    }
    doc["residuals"] = std::move(residuals);
    doc["schema"] = "macrobell.fit.v1";

    log << "eta = " << result.eta << " +- " << std::sqrt(result.covariance(0, 0))
        << ", N = " << result.mean_photons << " +- "
        << std::sqrt(result.covariance(1, 1)) << " (" << result.iterations
        << " iterations, " << (result.converged ? "converged" : "not converged")
        << ")\n";
    if (!out_path.empty()) {
        atomic_write_file(out_path, doc.dump(2) + "\n");
        log << "wrote fit report to " << out_path << "\n";
    }
    return doc;
}

}  // namespace macrobell
