// Python bindings. Quantities are SI, as in the C++ API.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slugsim/backaction.hpp"
#include "slugsim/config.hpp"
#include "slugsim/device.hpp"
#include "slugsim/errors.hpp"
#include "slugsim/runner.hpp"
#include "slugsim/scattering.hpp"
#include "slugsim/small_signal.hpp"

namespace py = pybind11;
using namespace slugsim;

PYBIND11_MODULE(_slugsim, m) {
    m.doc() = "SLUG amplifier simulator";

    static py::handle error = py::exception<Error>(m, "SlugsimError").release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = error(py::str(e.what()));
            exc.attr("kind") = to_string(e.kind());
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    py::class_<DeviceParams>(m, "DeviceParams")
        .def(py::init<>())
        .def_readwrite("I0", &DeviceParams::I0)
        .def_readwrite("R", &DeviceParams::R)
        .def_readwrite("C", &DeviceParams::C)
        .def_readwrite("L", &DeviceParams::L)
        .def_readwrite("M", &DeviceParams::M)
        .def_readwrite("shunt_volume", &DeviceParams::shunt_volume)
        .def_readwrite("sigma_ep", &DeviceParams::sigma_ep)
        .def_readwrite("T_phonon", &DeviceParams::T_phonon)
        .def_readwrite("T_electron_override", &DeviceParams::T_electron_override)
        .def_readwrite("P_nominal", &DeviceParams::P_nominal)
        .def("validate", &DeviceParams::validate)
        .def("noise_temperature", &DeviceParams::noise_temperature);

    py::class_<BiasPoint>(m, "BiasPoint")
        .def(py::init<double, double>(), py::arg("I_b") = 0.0, py::arg("phi_a") = 0.0)
        .def_readwrite("I_b", &BiasPoint::I_b)
        .def_readwrite("phi_a", &BiasPoint::phi_a)
        .def("reduced_flux", &BiasPoint::reduced_flux);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("t_total", &SimConfig::t_total)
        .def_readwrite("t_transient", &SimConfig::t_transient)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("noise_enabled", &SimConfig::noise_enabled)
        .def_readwrite("junctions_enabled", &SimConfig::junctions_enabled)
        .def_readwrite("max_phase_rate", &SimConfig::max_phase_rate)
        .def_readwrite("record_stride", &SimConfig::record_stride)
        .def("validate", &SimConfig::validate);

    py::class_<PhaseTrajectory>(m, "PhaseTrajectory")
        .def_readonly("times", &PhaseTrajectory::times)
        .def_readonly("delta1", &PhaseTrajectory::delta1)
        .def_readonly("delta2", &PhaseTrajectory::delta2)
        .def_readonly("v_inst", &PhaseTrajectory::v_inst)
        .def_readonly("j_circ", &PhaseTrajectory::j_circ)
        .def_readonly("v_mean", &PhaseTrajectory::v_mean)
        .def_readonly("v_stderr", &PhaseTrajectory::v_stderr)
        .def_readonly("steps", &PhaseTrajectory::steps);

    m.def("integrate_langevin",
          [](const DeviceParams& d, const BiasPoint& b, const SimConfig& s) { return integrate_langevin(d, b, s); },
          py::arg("device"), py::arg("bias"), py::arg("sim"), py::call_guard<py::gil_scoped_release>(),
          "Noise-driven two-junction run; voltages in units of I0 R.");

    py::class_<TransferCurve>(m, "TransferCurve")
        .def_readonly("I_b", &TransferCurve::I_b)
        .def_readonly("flux", &TransferCurve::flux)
        .def_readonly("voltage", &TransferCurve::voltage)
        .def_readonly("stderr_v", &TransferCurve::stderr_v)
        .def_readonly("v_phi", &TransferCurve::v_phi)
        .def("peak_to_peak", &TransferCurve::peak_to_peak);

    m.def("v_phi_curve", &v_phi_curve, py::arg("device"), py::arg("I_b"), py::arg("flux"), py::arg("sim"),
          py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());
    m.def("derive_seed", &derive_seed);

    py::class_<ExtractionConfig>(m, "ExtractionConfig")
        .def(py::init<>())
        .def_readwrite("input_probe_flux", &ExtractionConfig::input_probe_flux)
        .def_readwrite("output_probe_current", &ExtractionConfig::output_probe_current)
        .def_readwrite("min_periods", &ExtractionConfig::min_periods)
        .def_readwrite("max_periods", &ExtractionConfig::max_periods)
        .def_readwrite("target_rel_error", &ExtractionConfig::target_rel_error)
        .def_readwrite("vphi_step", &ExtractionConfig::vphi_step)
        .def_readwrite("require_finite_voltage", &ExtractionConfig::require_finite_voltage)
        .def_readwrite("check_linearity", &ExtractionConfig::check_linearity);

    py::class_<TwoPortZ>(m, "TwoPortZ")
        .def(py::init<>())
        .def_readwrite("omega", &TwoPortZ::omega)
        .def_readwrite("Z11", &TwoPortZ::Z11)
        .def_readwrite("Z12", &TwoPortZ::Z12)
        .def_readwrite("Z21", &TwoPortZ::Z21)
        .def_readwrite("Z22", &TwoPortZ::Z22)
        .def_readwrite("V_phi", &TwoPortZ::V_phi)
        .def_readwrite("V_dc", &TwoPortZ::V_dc)
        .def_readonly("periods", &TwoPortZ::periods);

    m.def("extract_two_port",
          py::overload_cast<const DeviceParams&, const BiasPoint&, double, const SimConfig&, const ExtractionConfig&>(
              &extract_two_port),
          py::arg("device"), py::arg("bias"), py::arg("omega"), py::arg("sim"), py::arg("cfg") = ExtractionConfig{},
          py::call_guard<py::gil_scoped_release>());
    m.def("analytic_zf", &analytic_zf, py::arg("device"), py::arg("V_phi"));
    m.def("analytic_im_zr", &analytic_im_zr, py::arg("device"), py::arg("V_phi"), py::arg("omega"), py::arg("chi_r"));

    py::class_<Directionality>(m, "Directionality")
        .def_readonly("infinite", &Directionality::infinite)
        .def_readonly("ratio", &Directionality::ratio)
        .def_readonly("dB", &Directionality::dB);
    m.def("directionality_from_terms", &directionality_from_terms, py::arg("vphi_over_omega"), py::arg("bracket"),
          py::arg("chi_r"));

    py::class_<MatchingNetwork>(m, "MatchingNetwork")
        .def_static("design", &MatchingNetwork::design, py::arg("z_char") = 2.0, py::arg("f_center") = 6e9,
                    py::arg("z_source") = 50.0, py::arg("z_load") = 50.0)
        .def_readwrite("L_m", &MatchingNetwork::L_m)
        .def_readwrite("C_m", &MatchingNetwork::C_m)
        .def_readwrite("f_center", &MatchingNetwork::f_center)
        .def("z_char", &MatchingNetwork::z_char);

    py::class_<SParams>(m, "SParams")
        .def_readonly("s11", &SParams::s11)
        .def_readonly("s12", &SParams::s12)
        .def_readonly("s21", &SParams::s21)
        .def_readonly("s22", &SParams::s22)
        .def_readonly("decoupled", &SParams::decoupled);
    m.def("cascade_s_parameters", &cascade_s_parameters, py::arg("z"), py::arg("network"), py::arg("omega"));

    py::class_<QubitCavityParams>(m, "QubitCavityParams")
        .def(py::init<>())
        .def_readwrite("f_cavity", &QubitCavityParams::f_cavity)
        .def_readwrite("chi_over_2pi", &QubitCavityParams::chi_over_2pi)
        .def_readwrite("kappa", &QubitCavityParams::kappa)
        .def_readwrite("f_qubit", &QubitCavityParams::f_qubit)
        .def_readwrite("T2", &QubitCavityParams::T2)
        .def_readwrite("ramsey_detuning", &QubitCavityParams::ramsey_detuning);

    m.def("electron_temperature", &electron_temperature, py::arg("power"), py::arg("device"));
    m.def("photon_occupation", &photon_occupation, py::arg("temperature"), py::arg("frequency"));
    m.def("occupation_temperature", &occupation_temperature, py::arg("n_bar"), py::arg("frequency"));
    m.def("effective_cavity_temperature", &effective_cavity_temperature, py::arg("T_hot"), py::arg("T_cold"),
          py::arg("frequency"));
    m.def("stark_shift", &stark_shift, py::arg("n_bar"), py::arg("qc"));
    m.def("photon_dephasing_rate", &photon_dephasing_rate, py::arg("n_bar"), py::arg("qc"));

    py::class_<RamseySurface>(m, "RamseySurface")
        .def_readonly("head_start", &RamseySurface::head_start)
        .def_readonly("evolution", &RamseySurface::evolution)
        .def_readonly("amplitude", &RamseySurface::amplitude)
        .def("at", &RamseySurface::at);
    m.def("ramsey_surface", &ramsey_surface, py::arg("qc"), py::arg("n_steady"), py::arg("head_start"),
          py::arg("evolution"));
    m.def("fringe_frequencies", &fringe_frequencies);

    py::class_<RiseFit>(m, "RiseFit")
        .def_readonly("f_initial", &RiseFit::f_initial)
        .def_readonly("f_saturated", &RiseFit::f_saturated)
        .def_readonly("tau", &RiseFit::tau)
        .def_readonly("rms_residual", &RiseFit::rms_residual);
    m.def("fit_exponential_rise", &fit_exponential_rise, py::arg("t"), py::arg("f"));

    py::class_<BackactionReport>(m, "BackactionReport")
        .def_readonly("P_dissipated", &BackactionReport::P_dissipated)
        .def_readonly("T_electron", &BackactionReport::T_electron)
        .def_readonly("T_cold", &BackactionReport::T_cold)
        .def_readonly("T_cavity_effective", &BackactionReport::T_cavity_effective)
        .def_readonly("n_bar_steady", &BackactionReport::n_bar_steady)
        .def_readonly("stark_shift", &BackactionReport::stark_shift)
        .def_readonly("dephasing_rate", &BackactionReport::dephasing_rate)
        .def_readonly("josephson_frequency", &BackactionReport::josephson_frequency)
        .def_readonly("caveats", &BackactionReport::caveats);
    m.def("backaction_chain", &backaction_chain, py::arg("device"), py::arg("bias"), py::arg("v_mean"),
          py::arg("qc") = QubitCavityParams{}, py::arg("T_cold") = 0.05);

    // config and runner work on JSON text
    m.def("validate_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
          py::arg("text"), "Parse, validate and return the canonical form.");
    m.def(
        "execute",
        [](const std::string& text, std::optional<unsigned> workers) {
            RunConfig c = parse_config(text);
            if (workers) c.workers = *workers;
            c.validate();
            py::gil_scoped_release release;
            return execute(c).files;
        },
        py::arg("text"), py::arg("workers") = py::none(), "Run in memory; returns {file name: content}.");
    m.def("sha256_hex", &sha256_hex);
}
