#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "macrobell/commands.hpp"
#include "macrobell/errors.hpp"
#include "macrobell/run_config.hpp"
#include "macrobell/validation.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::string> state;
    std::optional<double> eta;
    std::optional<double> gain;
    std::optional<double> nbar;
    std::optional<int> modes;
    std::optional<int> pulses;
    std::optional<uint64_t> seed;
    std::optional<std::string> orders;
    std::optional<std::string> out;
    std::optional<std::string> plate;
    std::optional<int> curve_points;
    std::optional<double> step_h;
    std::optional<double> step_q;
    std::optional<double> chi_h;
    std::optional<double> chi_q;
    std::optional<double> noise_sigma;
    std::optional<int> cutoff;
    bool with_mc = false;
};

void add_common_options(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("--config", options.config_path, "key=value config file");
    cmd->add_option("--state", options.state, "psi+ | psi- | phi+ | phi-");
    cmd->add_option("--eta", options.eta, "detection efficiency in [0,1]");
    cmd->add_option("--gain", options.gain, "parametric gain");
    cmd->add_option("--nbar", options.nbar, "mean photons per mode");
    cmd->add_option("--modes", options.modes, "independent mode quadruples M");
    cmd->add_option("--pulses", options.pulses, "Monte Carlo pulses");
    cmd->add_option("--seed", options.seed, "64-bit RNG seed");
    cmd->add_option("--orders", options.orders, "comma list of DP orders");
    cmd->add_option("--out", options.out, "output path");
    cmd->add_option("--noise-sigma", options.noise_sigma,
                    "electronic noise per channel (photons)");
    cmd->add_option("--cutoff", options.cutoff, "Fock cutoff (0 = auto)");
}

macrobell::RunConfig resolve_config(const CommonOptions& options) {
    macrobell::RunConfig config;
    if (!options.config_path.empty())
        config = macrobell::load_run_config(options.config_path);
    if (options.state) config.state = *options.state;
    if (options.eta) config.eta = *options.eta;
    if (options.gain) config.gain = *options.gain;
    if (options.nbar) config.nbar = *options.nbar;
    if (options.modes) config.modes = *options.modes;
    if (options.pulses) config.pulses = *options.pulses;
    if (options.seed) config.seed = *options.seed;
    if (options.orders) {
        std::istringstream stream("orders = " + *options.orders);
        config.orders = macrobell::parse_run_config(stream).orders;
    }
    if (options.out) config.out = *options.out;
    if (options.plate) config.plate = *options.plate;
    if (options.curve_points) config.curve_points = *options.curve_points;
    if (options.step_h) config.step_h_deg = *options.step_h;
    if (options.step_q) config.step_q_deg = *options.step_q;
    if (options.chi_h) config.chi_h_deg = *options.chi_h;
    if (options.chi_q) config.chi_q_deg = *options.chi_q;
    if (options.noise_sigma) {
        config.noise_sigma = *options.noise_sigma;
        config.noise_auto = false;
    }
    if (options.cutoff) config.cutoff = *options.cutoff;
    if (options.with_mc) config.with_mc = true;
    macrobell::config_state_spec(config);  // validate early
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polarization statistics of macroscopic Bell states"};
    app.require_subcommand(1);

    CommonOptions curves_options;
    CLI::App* curves = app.add_subcommand(
        "curves", "NRF vs plate angle (exact engine, optional Monte Carlo)");
    add_common_options(curves, curves_options);
    curves->add_option("--plate", curves_options.plate, "hwp | qwp");
    curves->add_option("--points", curves_options.curve_points, "points per curve");
    curves->add_flag("--with-mc", curves_options.with_mc, "add Monte Carlo columns");

    CommonOptions sweep_options;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "sphere map of NRF and normalized fourth moment");
    add_common_options(sweep, sweep_options);
    sweep->add_option("--step-h", sweep_options.step_h, "HWP step in degrees");
    sweep->add_option("--step-q", sweep_options.step_q, "QWP step in degrees");

    CommonOptions dp_options;
    CLI::App* dp = app.add_subcommand(
        "dp", "degrees of polarization (P1, P2, higher orders)");
    add_common_options(dp, dp_options);
    dp->add_flag("--with-mc", dp_options.with_mc, "add Monte Carlo estimates");
    dp->add_option("--step-h", dp_options.step_h, "search grid HWP step");
    dp->add_option("--step-q", dp_options.step_q, "search grid QWP step");

    CommonOptions simulate_options;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "pulse-by-pulse Monte Carlo at one plate setting");
    add_common_options(simulate, simulate_options);
    simulate->add_option("--chi-h", simulate_options.chi_h, "HWP angle in degrees");
    simulate->add_option("--chi-q", simulate_options.chi_q, "QWP angle in degrees");

    std::vector<std::string> fit_inputs;
    std::vector<std::string> fit_models;
    std::string fit_out;
    double fit_eta0 = 0.5;
    double fit_n0 = 0.5;
    bool fit_guess_given = false;
    CLI::App* fit_cmd = app.add_subcommand(
        "fit", "weighted least-squares fit of NRF curves to the (eta, N) models");
    fit_cmd->add_option("--input", fit_inputs, "CSV file: chi_degrees,nrf[,sigma]")
        ->required();
    fit_cmd
        ->add_option("--model", fit_models,
                     "curve model per input, e.g. psi+:hwp or phi+:qwp")
        ->required();
    fit_cmd->add_option("--out", fit_out, "output JSON path");
    fit_cmd->add_flag("--guess", fit_guess_given, "use --eta0/--n0 as the start");
    fit_cmd->add_option("--eta0", fit_eta0, "initial efficiency guess");
    fit_cmd->add_option("--n0", fit_n0, "initial photon-number guess");

    uint64_t validate_seed = 20240901;
    CLI::App* validate = app.add_subcommand(
        "validate", "run the oracle, curve and loss-model validation suites");
    validate->add_option("--seed", validate_seed, "seed for the Monte Carlo suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 2;
    }

    try {
        if (curves->parsed()) {
            macrobell::cmd_curves(resolve_config(curves_options), std::cout);
        } else if (sweep->parsed()) {
            macrobell::cmd_sweep(resolve_config(sweep_options), std::cout);
        } else if (dp->parsed()) {
            macrobell::cmd_dp(resolve_config(dp_options), std::cout);
        } else if (simulate->parsed()) {
            macrobell::cmd_simulate(resolve_config(simulate_options), std::cout);
        } else if (fit_cmd->parsed()) {
            if (fit_inputs.size() != fit_models.size())
                throw std::invalid_argument("--input and --model counts must match");
            std::vector<std::pair<std::string, std::string>> inputs;
            for (size_t i = 0; i < fit_inputs.size(); ++i)
                inputs.emplace_back(fit_inputs[i], fit_models[i]);
            std::optional<std::pair<double, double>> guess;
            if (fit_guess_given) guess = std::make_pair(fit_eta0, fit_n0);
            macrobell::cmd_fit(inputs, guess, fit_out, std::cout);
        } else if (validate->parsed()) {
            const int failures = macrobell::print_suite_results(
                macrobell::run_all_validation_suites(validate_seed), std::cout);
            if (failures > 0) {
                std::cout << failures << " check(s) failed\n";
                return 1;
            }
            std::cout << "all validation suites passed\n";
        }
    } catch (const macrobell::config_error& error) {
        std::cerr << "config error: " << error.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& error) {
        std::cerr << "usage error: " << error.what() << "\n";
        return 2;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}
