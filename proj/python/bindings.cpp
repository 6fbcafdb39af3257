#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ggsep/config_io.hpp"

namespace py = pybind11;
using namespace ggsep;

namespace {

py::dict fock_dict(const FockDistribution& d)
{
    py::dict out;
    out["n_max"] = d.n_max;
    out["n_modes"] = d.n_modes;
    out["truncation_defect"] = d.truncation_defect;
    out["populations"] = d.populations;
    return out;
}

} // namespace

PYBIND11_MODULE(_ggsep, m)
{
    m.doc() = "DHD crystal ground-state separation toolkit";

    py::class_<IonSpecies>(m, "IonSpecies")
        .def(py::init<>())
        .def_readwrite("mass", &IonSpecies::mass)
        .def_readwrite("charge", &IonSpecies::charge);

    py::class_<CrystalConfig>(m, "CrystalConfig")
        .def(py::init<>())
        .def_readwrite("data_ion", &CrystalConfig::data_ion)
        .def_readwrite("helper_ion", &CrystalConfig::helper_ion)
        .def_readwrite("omega_ip_initial", &CrystalConfig::omega_ip_initial)
        .def_readwrite("coulomb_constant", &CrystalConfig::coulomb_constant)
        .def_readwrite("hbar", &CrystalConfig::hbar)
        .def("omega0", &CrystalConfig::omega0)
        .def("k0", &CrystalConfig::k0);

    py::class_<GaussianState>(m, "GaussianState")
        .def(py::init<>())
        .def_readwrite("v", &GaussianState::v)
        .def_readwrite("mean", &GaussianState::mean)
        .def_readwrite("ref_freqs", &GaussianState::ref_freqs)
        .def("modes", &GaussianState::modes);

    py::class_<TransferMatrix>(m, "TransferMatrix")
        .def(py::init<>())
        .def_readwrite("m", &TransferMatrix::m)
        .def_readwrite("t_start", &TransferMatrix::t_start)
        .def_readwrite("t_end", &TransferMatrix::t_end);

    m.def("commutation_matrix", &commutation_matrix, py::arg("n_modes"));
    m.def("symplectic_defect", &symplectic_defect, py::arg("m"));
    m.def("ground_state_covariance", &ground_state_covariance, py::arg("freqs"));
    m.def("evolve_covariance", &evolve_covariance, py::arg("m"), py::arg("state"));
    m.def("occupation_number", &occupation_number, py::arg("state"),
          py::arg("mode_index"), py::arg("omega_ref"));

    py::class_<SqueezeParams>(m, "SqueezeParams")
        .def(py::init<>())
        .def_readwrite("r", &SqueezeParams::r)
        .def_readwrite("phi", &SqueezeParams::phi)
        .def_readwrite("omega_ref", &SqueezeParams::omega_ref);

    m.def("squeezer_matrix",
          [](double r, double phi, double w) {
              return squeezer_matrix({r, phi, w});
          },
          py::arg("r"), py::arg("phi"), py::arg("omega_ref"));
    m.def("rotation_matrix",
          [](double theta, double w) { return rotation_matrix({theta, w}); },
          py::arg("theta"), py::arg("omega_ref"));
    m.def("beamsplitter_matrix",
          [](double theta, double phi, double wa, double wb) {
              return beamsplitter_matrix({theta, phi, wa, wb});
          },
          py::arg("theta_bs"), py::arg("phi_bs"), py::arg("omega_a"), py::arg("omega_b"));

    m.def("equilibrium_half_spacing", &equilibrium_half_spacing, py::arg("config"),
          py::arg("k_D"));

    py::class_<OnTheFlyParams>(m, "OnTheFlyParams")
        .def(py::init<>())
        .def_readwrite("tau1", &OnTheFlyParams::tau1)
        .def_readwrite("tau2", &OnTheFlyParams::tau2)
        .def_readwrite("floor_ratio", &OnTheFlyParams::floor_ratio)
        .def_readwrite("catch_threshold", &OnTheFlyParams::catch_threshold)
        .def_readwrite("eta", &OnTheFlyParams::eta);

    py::class_<PrecompensatedParams>(m, "PrecompensatedParams")
        .def(py::init<>())
        .def_readwrite("tau", &PrecompensatedParams::tau)
        .def_readwrite("tau0", &PrecompensatedParams::tau0)
        .def_readwrite("ramp_up", &PrecompensatedParams::ramp_up)
        .def_readwrite("eta", &PrecompensatedParams::eta);

    py::enum_<ProtocolMode>(m, "ProtocolMode")
        .value("Precompensated", ProtocolMode::Precompensated)
        .value("OnTheFly", ProtocolMode::OnTheFly);

    py::class_<ProtocolConfig>(m, "ProtocolConfig")
        .def(py::init<>())
        .def_readwrite("crystal", &ProtocolConfig::crystal)
        .def_readwrite("mode", &ProtocolConfig::mode)
        .def_readwrite("precomp", &ProtocolConfig::precomp)
        .def_readwrite("onthefly", &ProtocolConfig::onthefly)
        .def_readwrite("dt", &ProtocolConfig::dt)
        .def_readwrite("n_max", &ProtocolConfig::n_max)
        .def_readwrite("decimation", &ProtocolConfig::decimation)
        .def_readwrite("reversed", &ProtocolConfig::reversed)
        .def_readwrite("full_three_body", &ProtocolConfig::full_three_body);

    py::class_<ProtocolResult>(m, "ProtocolResult")
        .def_readonly("t_series", &ProtocolResult::t_series)
        .def_readonly("n_op_series", &ProtocolResult::n_op_series)
        .def_readonly("n_a_series", &ProtocolResult::n_a_series)
        .def_readonly("n_b_series", &ProtocolResult::n_b_series)
        .def_readonly("theta_dot_series", &ProtocolResult::theta_dot_series)
        .def_readonly("n_op_final", &ProtocolResult::n_op_final)
        .def_readonly("n_a_final", &ProtocolResult::n_a_final)
        .def_readonly("n_b_final", &ProtocolResult::n_b_final)
        .def_readonly("t_catch", &ProtocolResult::t_catch)
        .def_readonly("t_final", &ProtocolResult::t_final)
        .def_readonly("r_op_final", &ProtocolResult::r_op_final)
        .def_readonly("r_a_final", &ProtocolResult::r_a_final)
        .def_readonly("r_b_final", &ProtocolResult::r_b_final)
        .def_property_readonly("op_fock",
                               [](const ProtocolResult& r) -> py::object {
                                   if (!r.op_fock) return py::none();
                                   return fock_dict(*r.op_fock);
                               })
        .def_property_readonly("ab_fock",
                               [](const ProtocolResult& r) -> py::object {
                                   if (!r.ab_fock) return py::none();
                                   return fock_dict(*r.ab_fock);
                               })
        .def_property_readonly("compensation",
                               [](const ProtocolResult& r) -> py::object {
                                   if (!r.comp_op || !r.comp_ab) return py::none();
                                   py::dict d;
                                   d["r_p"] = r.comp_op->r;
                                   d["phi_p"] = r.comp_op->phi;
                                   d["r_a"] = r.comp_ab->squeeze_a.r;
                                   d["phi_a"] = r.comp_ab->squeeze_a.phi;
                                   d["r_b"] = r.comp_ab->squeeze_b.r;
                                   d["phi_b"] = r.comp_ab->squeeze_b.phi;
                                   d["theta_bs"] = r.comp_ab->bs.theta_bs;
                                   d["phi_bs"] = r.comp_ab->bs.phi_bs;
                                   return d;
                               });

    m.def("run_protocol", &run_protocol, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("run_precompensated", &run_precompensated, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("run_onthefly", &run_onthefly, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("reverse_protocol", &reverse_protocol, py::arg("config"));

    py::class_<PerturbationSpec>(m, "PerturbationSpec")
        .def(py::init<>())
        .def_readwrite("max_fraction", &PerturbationSpec::max_fraction)
        .def_readwrite("n_samples", &PerturbationSpec::n_samples)
        .def_readwrite("seed", &PerturbationSpec::seed);

    py::class_<AveragedTable>(m, "AveragedTable")
        .def_readonly("n_modes", &AveragedTable::n_modes)
        .def_readonly("n_max", &AveragedTable::n_max)
        .def_readonly("mean", &AveragedTable::mean)
        .def_readonly("std_error", &AveragedTable::std_error);

    py::class_<MonteCarloReport>(m, "MonteCarloReport")
        .def_readonly("op", &MonteCarloReport::op)
        .def_readonly("ab", &MonteCarloReport::ab)
        .def_readonly("n_samples", &MonteCarloReport::n_samples)
        .def_readonly("n_failed", &MonteCarloReport::n_failed)
        .def_readonly("seed", &MonteCarloReport::seed)
        .def_readonly("max_fraction", &MonteCarloReport::max_fraction);

    m.def("monte_carlo_robustness", &monte_carlo_robustness, py::arg("config"),
          py::arg("spec"), py::call_guard<py::gil_scoped_release>());

    m.def("parse_config_file",
          [](const std::string& path) { return parse_config(path).protocol; },
          py::arg("path"));

    m.attr("__version__") = version_string();
}
