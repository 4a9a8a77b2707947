#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <map>
#include <vector>

#include "macrobell/fit_engine.hpp"
#include "macrobell/fock_oracle.hpp"
#include "macrobell/gaussian_engine.hpp"
#include "macrobell/polarization_metrics.hpp"
#include "macrobell/pulse_simulator.hpp"
#include "macrobell/stokes_geometry.hpp"

namespace py = pybind11;
using namespace macrobell;

namespace {

std::array<double, 3> to_array(const Eigen::Vector3d& v) {
    return {v.x(), v.y(), v.z()};
}

std::array<std::array<double, 3>, 3> to_matrix(const Eigen::Matrix3d& m) {
    std::array<std::array<double, 3>, 3> out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = m(i, j);
    return out;
}

BellStateSpec make_spec(const std::string& state, double nbar, int modes) {
    const BellStateSpec named = BellStateSpec::from_name(state, 0.0);
    return BellStateSpec::from_mean_photons(named.family, named.sign, nbar, modes);
}

}  // namespace

PYBIND11_MODULE(_macrobell, m) {
    m.doc() = "Polarization statistics of macroscopic Bell states";

    py::class_<StokesDirection>(m, "StokesDirection")
        .def(py::init([](double theta_deg, double phi_deg) {
                 return StokesDirection::from_degrees(theta_deg, phi_deg);
             }),
             py::arg("theta_deg"), py::arg("phi_deg"))
        .def_property_readonly("theta_deg", &StokesDirection::theta_deg)
        .def_property_readonly("phi_deg", &StokesDirection::phi_deg)
        .def("unit_vector",
             [](const StokesDirection& d) { return to_array(d.unit_vector()); });

    py::class_<WaveplateSetting>(m, "WaveplateSetting")
        .def(py::init([](double chi_h_deg, double chi_q_deg) {
                 return WaveplateSetting::from_degrees(chi_h_deg, chi_q_deg);
             }),
             py::arg("chi_h_deg"), py::arg("chi_q_deg"))
        .def_property_readonly("chi_h_deg", &WaveplateSetting::chi_h_deg)
        .def_property_readonly("chi_q_deg", &WaveplateSetting::chi_q_deg);

    m.def("direction_from_waveplates",
          [](double chi_h_deg, double chi_q_deg) {
              return direction_from_waveplates(
                  WaveplateSetting::from_degrees(chi_h_deg, chi_q_deg));
          },
          py::arg("chi_h_deg"), py::arg("chi_q_deg"));

    m.def("project_to_s2s1", [](const StokesDirection& d) {
        return project_to_s2s1(d);
    });

    m.def(
        "sphere_sweep_settings",
        [](double step_h_deg, double step_q_deg) {
            std::vector<std::pair<double, double>> out;
            for (const SweepPoint& p : sphere_sweep(step_h_deg, step_q_deg).points)
                out.emplace_back(p.setting.chi_h_deg(), p.setting.chi_q_deg());
            return out;
        },
        py::arg("step_h_deg") = 2.5, py::arg("step_q_deg") = 5.0);

    m.def(
        "stokes_moments",
        [](const std::string& state, double nbar, int modes, double eta,
           double theta_deg, double phi_deg, int k_max) {
            const MomentReport report =
                central_moments(make_spec(state, nbar, modes), eta,
                                StokesDirection::from_degrees(theta_deg, phi_deg),
                                k_max);
            py::dict out;
            out["mean_s0"] = report.mean_s0;
            out["mean_stokes"] = to_array(report.mean_stokes);
            out["stokes_cov"] = to_matrix(report.stokes_cov);
            out["central_moments"] =
                std::map<int, double>(report.central_moments.begin(),
                                      report.central_moments.end());
            out["nrf"] = report.nrf;
            return out;
        },
        py::arg("state"), py::arg("nbar"), py::arg("modes"), py::arg("eta"),
        py::arg("theta_deg"), py::arg("phi_deg"), py::arg("k_max") = 4);

    m.def(
        "nrf_curve",
        [](const std::string& state, double nbar, double eta, const std::string& plate,
           int points) {
            const BellStateSpec spec = make_spec(state, nbar, 1);
            const SweepGrid grid =
                plate == "hwp" ? hwp_trajectory(points) : qwp_trajectory(points);
            std::vector<std::pair<double, double>> curve;
            const double mean_s0 = 4.0 * eta * spec.mean_photons;
            for (const SweepPoint& p : grid.points) {
                const double chi =
                    plate == "hwp" ? p.setting.chi_h_deg() : p.setting.chi_q_deg();
                const double nrf =
                    mean_s0 > 0.0
                        ? stokes_central_moment(spec, eta, p.direction, 2) / mean_s0
                        : 1.0;
                curve.emplace_back(chi, nrf);
            }
            return curve;
        },
        py::arg("state"), py::arg("nbar"), py::arg("eta"), py::arg("plate") = "hwp",
        py::arg("points") = 73);

    m.def(
        "stokes_covariance",
        [](const std::string& state, double nbar, int modes, double eta) {
            return to_matrix(stokes_covariance_matrix(make_spec(state, nbar, modes), eta));
        },
        py::arg("state"), py::arg("nbar"), py::arg("modes"), py::arg("eta"));

    m.def(
        "dp_report",
        [](const std::string& state, double nbar, int modes, double eta, int order) {
            const BellStateSpec spec = make_spec(state, nbar, modes);
            py::dict out;
            out["order"] = order;
            if (order == 2) {
                const DPReport report =
                    dp2_eigen(stokes_covariance_matrix(spec, eta),
                              4.0 * modes * eta * spec.mean_photons);
                out["dp"] = report.dp;
                out["sup"] = report.sup;
                out["inf"] = report.inf;
                out["argmax"] = to_array(report.argmax);
                out["argmin"] = to_array(report.argmin);
                return out;
            }
            const DPReport report = dpk_search(
                [&](const StokesDirection& d) {
                    return stokes_central_moment(spec, eta, d, order);
                },
                order, sphere_sweep(2.5, 5.0));
            out["dp"] = report.dp;
            out["sup"] = report.sup;
            out["inf"] = report.inf;
            out["argmax"] = to_array(report.argmax);
            out["argmin"] = to_array(report.argmin);
            return out;
        },
        py::arg("state"), py::arg("nbar"), py::arg("modes"), py::arg("eta"),
        py::arg("order") = 2);

    m.def("closed_form_p2",
          [](const std::string& state, double eta, double nbar) {
              const BellStateSpec named = BellStateSpec::from_name(state, 0.0);
              return closed_form_p2(named.family, named.sign, eta, nbar);
          },
          py::arg("state"), py::arg("eta"), py::arg("nbar"));

    m.def("gaussian_limit_dp", &gaussian_limit_dp, py::arg("p2"), py::arg("order"));

    m.def(
        "fock_stokes_moments",
        [](const std::string& state, double gain, int cutoff, double theta_deg,
           double phi_deg, int k_max) {
            const TruncatedState fock =
                build_state_fock(BellStateSpec::from_name(state, gain), cutoff);
            const FockMoments moments = stokes_moment_fock(
                fock, StokesDirection::from_degrees(theta_deg, phi_deg), k_max);
            py::dict out;
            out["mean"] = moments.mean;
            out["raw"] = moments.raw;
            out["central"] = moments.central;
            return out;
        },
        py::arg("state"), py::arg("gain"), py::arg("cutoff"), py::arg("theta_deg"),
        py::arg("phi_deg"), py::arg("k_max") = 4);

    m.def(
        "simulate_pulses",
        [](const std::string& state, double nbar, int modes, double eta,
           double chi_h_deg, double chi_q_deg, int pulses, uint64_t seed,
           double noise_sigma) {
            const BellStateSpec spec = make_spec(state, nbar, modes);
            DetectorConfig detector;
            detector.eta = eta;
            detector.pulses = pulses;
            detector.seed = seed;
            detector.electronic_noise_sigma = noise_sigma;
            const OutcomeTable table = outcome_table(
                spec, WaveplateSetting::from_degrees(chi_h_deg, chi_q_deg), 0);
            const PulseBatch batch = sample_pulses(table, modes, detector);
            const BatchMoments moments = estimate_moments(batch, 4);
            py::dict out;
            out["s_n"] = batch.s_n_series();
            out["s0"] = batch.s0_series();
            out["nrf"] = moments.nrf.value;
            out["nrf_se"] = moments.nrf.standard_error;
            out["mean_s0"] = moments.s0.mean.value;
            return out;
        },
        py::arg("state"), py::arg("nbar"), py::arg("modes"), py::arg("eta"),
        py::arg("chi_h_deg") = 0.0, py::arg("chi_q_deg") = 0.0,
        py::arg("pulses") = 20000, py::arg("seed") = 12345,
        py::arg("noise_sigma") = 0.0);

    m.def(
        "fit_nrf_curves",
        [](const std::vector<py::dict>& datasets) {
            std::vector<FitDataset> sets;
            for (const py::dict& entry : datasets) {
                FitDataset set;
                const std::string family = entry["state"].cast<std::string>();
                const std::string plate = entry["plate"].cast<std::string>();
                const BellStateSpec named = BellStateSpec::from_name(family, 0.0);
                set.model = {named.family, named.sign,
                             plate == "hwp" ? Plate::hwp : Plate::qwp};
                for (const auto& point :
                     entry["samples"].cast<std::vector<std::tuple<double, double, double>>>()) {
                    set.samples.push_back({deg_to_rad(std::get<0>(point)),
                                           std::get<1>(point), std::get<2>(point)});
                }
                sets.push_back(std::move(set));
            }
            const FitResult result = fit(sets);
            py::dict out;
            out["eta"] = result.eta;
            out["nbar"] = result.mean_photons;
            out["eta_se"] = std::sqrt(result.covariance(0, 0));
            out["nbar_se"] = std::sqrt(result.covariance(1, 1));
            out["converged"] = result.converged;
            out["iterations"] = result.iterations;
            return out;
        },
        py::arg("datasets"));

    m.def("model_nrf",
          [](const std::string& state, const std::string& plate, double chi_deg,
             double eta, double nbar) {
              const BellStateSpec named = BellStateSpec::from_name(state, 0.0);
              return model_nrf({named.family, named.sign,
                                plate == "hwp" ? Plate::hwp : Plate::qwp},
                               deg_to_rad(chi_deg), eta, nbar);
          },
          py::arg("state"), py::arg("plate"), py::arg("chi_deg"), py::arg("eta"),
          py::arg("nbar"));
}
