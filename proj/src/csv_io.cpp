#include "macrobell/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "macrobell/stokes_geometry.hpp"

namespace macrobell {

void atomic_write_file(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path temp = target.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + temp.string());
        out << contents;
        if (!out) throw std::runtime_error("write failed: " + temp.string());
    }
    fs::rename(temp, target);
}

std::string format_double(double value) {
    char buffer[32];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

std::string curves_to_csv(const std::vector<CurvePoint>& points) {
    std::ostringstream out;
    out << "# schema: macrobell.curves.v1\n";
    out << "chi_deg,nrf_exact,nrf_mc,nrf_mc_se\n";
    for (const CurvePoint& p : points) {
        out << format_double(p.chi_deg) << ',' << format_double(p.nrf_exact) << ',';
        if (p.has_mc)
            out << format_double(p.nrf_mc) << ',' << format_double(p.nrf_mc_se);
        else
            out << ',';
        out << '\n';
    }
    return out.str();
}

std::string sweep_to_csv(const std::vector<SphereMapRecord>& records) {
    std::ostringstream out;
    out << "# schema: macrobell.sweep.v1\n";
    out << "chi_H_deg,chi_Q_deg,theta_deg,phi_deg,x,y,nrf,m4_normalized\n";
    for (const SphereMapRecord& r : records) {
        out << format_double(r.chi_h_deg) << ',' << format_double(r.chi_q_deg) << ','
            << format_double(r.theta_deg) << ',' << format_double(r.phi_deg) << ','
            << format_double(r.x) << ',' << format_double(r.y) << ','
            << format_double(r.nrf) << ',' << format_double(r.m4_normalized) << '\n';
    }
    return out.str();
}

nlohmann::json sweep_to_json(const std::vector<SphereMapRecord>& records) {
    nlohmann::json doc;
    doc["schema"] = "macrobell.sweep.v1";
    nlohmann::json list = nlohmann::json::array();
    for (const SphereMapRecord& r : records) {
        list.push_back({{"chi_H_deg", r.chi_h_deg},
                        {"chi_Q_deg", r.chi_q_deg},
                        {"theta_deg", r.theta_deg},
                        {"phi_deg", r.phi_deg},
                        {"x", r.x},
                        {"y", r.y},
                        {"nrf", r.nrf},
                        {"m4_normalized", r.m4_normalized}});
    }
    doc["records"] = std::move(list);
    return doc;
}

std::vector<SphereMapRecord> sweep_from_json(const nlohmann::json& doc) {
    if (doc.value("schema", "") != "macrobell.sweep.v1")
        throw std::runtime_error("unexpected sweep schema");
    std::vector<SphereMapRecord> records;
    for (const nlohmann::json& item : doc.at("records")) {
        SphereMapRecord r;
        r.chi_h_deg = item.at("chi_H_deg").get<double>();
        r.chi_q_deg = item.at("chi_Q_deg").get<double>();
        r.theta_deg = item.at("theta_deg").get<double>();
        r.phi_deg = item.at("phi_deg").get<double>();
        r.x = item.at("x").get<double>();
        r.y = item.at("y").get<double>();
        r.nrf = item.at("nrf").get<double>();
        r.m4_normalized = item.at("m4_normalized").get<double>();
        records.push_back(r);
    }
    return records;
}

std::string pulse_batch_to_csv(const PulseBatch& batch) {
    std::ostringstream out;
    out << "# schema: macrobell.pulses.v1\n";
    out << "pulse_index,I_A,I_B,S_n,S0\n";
    for (size_t i = 0; i < batch.records.size(); ++i) {
        out << i << ',' << format_double(batch.i_a(i)) << ','
            << format_double(batch.i_b(i)) << ',' << format_double(batch.s_n(i)) << ','
            << format_double(batch.s0(i)) << '\n';
    }
    return out.str();
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& cell, int row) {
    try {
        size_t used = 0;
        const double value = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error("row " + std::to_string(row) +
                                 ": expected a number, got '" + cell + "'");
    }
}

}  // namespace

std::vector<FitSample> parse_fit_samples_csv(std::istream& input) {
    std::vector<FitSample> samples;
    std::string line;
    int row = 0;
    bool header_seen = false;
    while (std::getline(input, line)) {
        ++row;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream stream(line);
        std::string cell;
        while (std::getline(stream, cell, ',')) cells.push_back(trim(cell));
        if (!header_seen) {
            if (cells.size() < 2 || cells[0] != "chi_degrees" || cells[1] != "nrf")
                throw std::runtime_error(
                    "row " + std::to_string(row) +
                    ": expected header 'chi_degrees,nrf[,sigma]'");
            header_seen = true;
            continue;
        }
        if (cells.size() < 2 || cells.size() > 3)
            throw std::runtime_error("row " + std::to_string(row) +
                                     ": expected 2 or 3 columns");
        FitSample sample;
        sample.chi = deg_to_rad(parse_cell(cells[0], row));
        sample.nrf = parse_cell(cells[1], row);
        if (cells.size() == 3 && !cells[2].empty()) {
            sample.sigma = parse_cell(cells[2], row);
            if (sample.sigma <= 0.0)
                throw std::runtime_error("row " + std::to_string(row) +
                                         ": sigma must be positive");
        }
        samples.push_back(sample);
    }
    if (!header_seen) throw std::runtime_error("missing CSV header");
    return samples;
}

std::vector<FitSample> read_fit_samples_csv(const std::string& path) {
    std::ifstream input(path);
    if (!input) throw std::runtime_error("cannot open CSV file: " + path);
    return parse_fit_samples_csv(input);
}

}  // namespace macrobell
