#include "macrobell/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "macrobell/errors.hpp"

namespace macrobell {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& value, int line) {
    try {
        size_t used = 0;
        const double result = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return result;
    } catch (const std::exception&) {
        throw config_error("expected a number, got '" + value + "'", line);
    }
}

long parse_long(const std::string& value, int line) {
    try {
        size_t used = 0;
        const long result = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return result;
    } catch (const std::exception&) {
        throw config_error("expected an integer, got '" + value + "'", line);
    }
}

bool parse_bool(const std::string& value, int line) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw config_error("expected true/false, got '" + value + "'", line);
}

std::vector<int> parse_orders(const std::string& value, int line) {
    std::vector<int> orders;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        orders.push_back(static_cast<int>(parse_long(item, line)));
    }
    if (orders.empty()) throw config_error("orders list is empty", line);
    return orders;
}

}  // namespace

RunConfig parse_run_config(std::istream& input) {
    RunConfig config;
    std::string line;
    int line_number = 0;
    while (std::getline(input, line)) {
        ++line_number;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("expected key=value", line_number);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("missing key", line_number);
        if (value.empty()) throw config_error("missing value for '" + key + "'", line_number);

        if (key == "state") {
            config.state = value;
            BellStateSpec::from_name(value, 0.0);  // validates the name
        } else if (key == "eta") {
            config.eta = parse_double(value, line_number);
            if (config.eta < 0.0 || config.eta > 1.0)
                throw config_error("eta must lie in [0, 1]", line_number);
        } else if (key == "gain") {
            config.gain = parse_double(value, line_number);
            if (config.gain < 0.0) throw config_error("gain must be >= 0", line_number);
        } else if (key == "nbar") {
            config.nbar = parse_double(value, line_number);
            if (config.nbar < 0.0) throw config_error("nbar must be >= 0", line_number);
        } else if (key == "modes") {
            config.modes = static_cast<int>(parse_long(value, line_number));
            if (config.modes < 1) throw config_error("modes must be >= 1", line_number);
        } else if (key == "pulses") {
            config.pulses = static_cast<int>(parse_long(value, line_number));
            if (config.pulses < 1) throw config_error("pulses must be >= 1", line_number);
        } else if (key == "seed") {
            config.seed = static_cast<uint64_t>(parse_long(value, line_number));
        } else if (key == "noise_sigma") {
            if (value == "auto") {
                config.noise_auto = true;
                config.noise_sigma = 0.0;
            } else {
                config.noise_sigma = parse_double(value, line_number);
                if (config.noise_sigma < 0.0)
                    throw config_error("noise_sigma must be >= 0", line_number);
            }
        } else if (key == "plate") {
            if (value != "hwp" && value != "qwp")
                throw config_error("plate must be hwp or qwp", line_number);
            config.plate = value;
        } else if (key == "curve_points") {
            config.curve_points = static_cast<int>(parse_long(value, line_number));
            if (config.curve_points < 2)
                throw config_error("curve_points must be >= 2", line_number);
        } else if (key == "step_h_deg") {
            config.step_h_deg = parse_double(value, line_number);
            if (config.step_h_deg <= 0.0)
                throw config_error("step_h_deg must be > 0", line_number);
        } else if (key == "step_q_deg") {
            config.step_q_deg = parse_double(value, line_number);
            if (config.step_q_deg <= 0.0)
                throw config_error("step_q_deg must be > 0", line_number);
        } else if (key == "chi_h_deg") {
            config.chi_h_deg = parse_double(value, line_number);
        } else if (key == "chi_q_deg") {
            config.chi_q_deg = parse_double(value, line_number);
        } else if (key == "orders") {
            config.orders = parse_orders(value, line_number);
        } else if (key == "cutoff") {
            config.cutoff = static_cast<int>(parse_long(value, line_number));
            if (config.cutoff < 0) throw config_error("cutoff must be >= 0", line_number);
        } else if (key == "with_mc") {
            config.with_mc = parse_bool(value, line_number);
        } else if (key == "out") {
            config.out = value;
        } else if (key == "bins") {
            config.bins = static_cast<int>(parse_long(value, line_number));
            if (config.bins < 2) throw config_error("bins must be >= 2", line_number);
        } else {
            throw config_error("unknown key '" + key + "'", line_number);
        }
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream input(path);
    if (!input) throw std::runtime_error("cannot open config file: " + path);
    return parse_run_config(input);
}

BellStateSpec config_state_spec(const RunConfig& config) {
    if (config.gain >= 0.0) {
        const double implied = std::sinh(config.gain) * std::sinh(config.gain);
        // Both parametrizations supplied: they must agree.
        if (config.nbar >= 0.0 &&
            std::abs(implied - config.nbar) > 1e-9 * (1.0 + config.nbar))
            throw std::invalid_argument(
                "gain and nbar are both set but inconsistent (N must equal sinh^2 gain)");
        return BellStateSpec::from_name(config.state, config.gain, config.modes);
    }
    const double nbar = config.nbar >= 0.0 ? config.nbar : 0.2;
    const BellStateSpec named = BellStateSpec::from_name(config.state, 0.0, config.modes);
    return BellStateSpec::from_mean_photons(named.family, named.sign, nbar,
                                            config.modes);
}

DetectorConfig config_detector(const RunConfig& config) {
    DetectorConfig detector;
    detector.eta = config.eta;
    detector.pulses = config.pulses;
    detector.seed = config.seed;
    detector.electronic_noise_sigma =
        config.noise_auto ? default_noise_sigma(config_state_spec(config), config.eta)
                          : config.noise_sigma;
    return detector;
}

}  // namespace macrobell
