#include "slugsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "slugsim/errors.hpp"

namespace slugsim {

using json = nlohmann::ordered_json;

namespace {

// SI value = config value * scale
constexpr double uA = 1e-6, pH = 1e-12, fF = 1e-15, pF = 1e-12, nW = 1e-9;
constexpr double GHz = 1e9, MHz = 1e6, ns = 1e-9, us = 1e-6;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::config, path + ": " + what);
}

// Reads a section while tracking which keys were consumed, so leftovers
// can be rejected.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) config_error(path_, "expected an object");
    }

    [[nodiscard]] bool has(const std::string& key) const { return node_.contains(key) && !node_.at(key).is_null(); }
    [[nodiscard]] std::string path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return node_.at(key);
    }

    double number(const std::string& key, double scale = 1.0) {
        const json& v = raw(key);
        if (!v.is_number()) config_error(path(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) config_error(path(key), "must be finite");
        return x * scale;
    }

    void assign(const std::string& key, double& out, double scale = 1.0) {
        if (has(key)) out = number(key, scale);
        else seen_.insert(key);
    }

    template <class Int>
    void integer(const std::string& key, Int& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) config_error(path(key), "expected a non-negative integer");
        out = static_cast<Int>(v.get<unsigned long long>());
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        const json& v = raw(key);
        if (!v.is_boolean()) config_error(path(key), "expected true or false");
        out = v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) config_error(path(key), "expected a string");
        return v.get<std::string>();
    }

    Section child(const std::string& key) {
        return Section(raw(key), path(key));
    }

    void require(const std::string& key) const {
        if (!has(key)) config_error(path(key), "required for this experiment");
    }

    void reject_unknown() const {
        for (const auto& [key, value] : node_.items())
            if (!seen_.count(key)) config_error(path(key), "unknown key");
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

LinearGrid read_grid(Section& parent, const std::string& key, double scale) {
    Section s = parent.child(key);
    LinearGrid g;
    s.require("start");
    s.require("stop");
    s.require("count");
    g.start = s.number("start", scale);
    g.stop = s.number("stop", scale);
    s.integer("count", g.count);
    s.reject_unknown();
    return g;
}

json grid_json(const LinearGrid& g, double scale) {
    return json{{"start", g.start / scale}, {"stop", g.stop / scale}, {"count", g.count}};
}

PulseKind pulse_kind(const std::string& name, const std::string& path) {
    if (name == "slug_active") return PulseKind::slug_active;
    if (name == "half_pi") return PulseKind::half_pi;
    if (name == "measure") return PulseKind::measure;
    config_error(path, "unknown pulse kind '" + name + "'");
}

const char* pulse_name(PulseKind k) {
    switch (k) {
        case PulseKind::slug_active: return "slug_active";
        case PulseKind::half_pi: return "half_pi";
        case PulseKind::measure: return "measure";
    }
    return "?";
}

json to_json(const RunConfig& c) {
    json j;
    j["experiment"] = to_string(c.experiment);
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;

    const DeviceParams& d = c.device;
    json dev{{"I0_uA", d.I0 / uA},
             {"R_ohm", d.R},
             {"C_fF", d.C / fF},
             {"L_pH", d.L / pH},
             {"M_pH", d.M / pH},
             {"shunt_volume_m3", d.shunt_volume},
             {"sigma_ep_W_per_m3_K5", d.sigma_ep},
             {"T_phonon_K", d.T_phonon},
             {"P_nominal_nW", d.P_nominal / nW}};
    if (d.T_electron_override) dev["T_electron_K"] = *d.T_electron_override;
    j["device"] = dev;

    const SimConfig& s = c.sim;
    j["sim"] = json{{"dt", s.dt},
                    {"t_total", s.t_total},
                    {"t_transient", s.t_transient},
                    {"seed", s.seed},
                    {"noise", s.noise_enabled},
                    {"max_phase_rate", s.max_phase_rate}};

    const ExtractionConfig& e = c.extraction;
    j["extraction"] = json{{"input_probe_flux_Phi0", e.input_probe_flux},
                           {"output_probe_current_I0", e.output_probe_current},
                           {"min_periods", e.min_periods},
                           {"max_periods", e.max_periods},
                           {"target_rel_error", e.target_rel_error},
                           {"vphi_step_Phi0", e.vphi_step},
                           {"require_finite_voltage", e.require_finite_voltage},
                           {"check_linearity", e.check_linearity}};

    json bias = json::object();
    if (c.I_b) bias["I_b_uA"] = *c.I_b / uA;
    if (c.phi_a) bias["phi_a_Phi0"] = *c.phi_a;
    if (!bias.empty()) j["bias"] = bias;

    json sweep = json::object();
    if (c.flux) sweep["flux_Phi0"] = grid_json(*c.flux, 1.0);
    if (c.freq) sweep["freq_GHz"] = grid_json(*c.freq, GHz);
    if (c.head_start) sweep["head_start_ns"] = grid_json(*c.head_start, ns);
    if (c.evolution) sweep["evolution_ns"] = grid_json(*c.evolution, ns);
    if (!sweep.empty()) j["sweep"] = sweep;

    const MatchingNetwork& n = c.network;
    j["network"] = json{{"L_m_pH", n.L_m / pH},
                        {"C_m_pF", n.C_m / pF},
                        {"f_center_GHz", n.f_center / GHz},
                        {"Z_source_ohm", n.Z_source},
                        {"Z_load_ohm", n.Z_load}};

    const QubitCavityParams& q = c.qubit_cavity;
    json qc{{"f_cavity_GHz", q.f_cavity / GHz},
            {"chi_over_2pi_MHz", q.chi_over_2pi / MHz},
            {"kappa_inv_ns", 1.0 / q.kappa / ns},
            {"f_qubit_GHz", q.f_qubit / GHz},
            {"T2_us", q.T2 / us},
            {"ramsey_detuning_MHz", q.ramsey_detuning / MHz},
            {"T_cold_K", c.T_cold}};
    if (c.n_steady) qc["n_steady"] = *c.n_steady;
    j["qubit_cavity"] = qc;

    if (c.experiment == Experiment::pulsed || !c.sequence.empty()) {
        json seq = json::array();
        for (const auto& ev : c.sequence)
            seq.push_back(json{{"kind", pulse_name(ev.kind)}, {"start_ns", ev.start / ns}, {"end_ns", ev.end / ns}});
        j["sequence"] = seq;
    }
    return j;
}

bool close(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>(), y = b.get<double>();
        return x == y || std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y));
    }
    if (a.type() != b.type()) return false;
    if (a.is_object()) {
        if (a.size() != b.size()) return false;
        for (const auto& [k, v] : a.items())
            if (!b.contains(k) || !close(v, b.at(k))) return false;
        return true;
    }
    if (a.is_array()) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!close(a[i], b[i])) return false;
        return true;
    }
    return a == b;
}

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::vphi: return "vphi";
        case Experiment::twoport: return "twoport";
        case Experiment::smatrix: return "smatrix";
        case Experiment::backaction: return "backaction";
        case Experiment::ramsey: return "ramsey";
        case Experiment::pulsed: return "pulsed";
    }
    return "?";
}

Experiment experiment_from_string(const std::string& name) {
    for (auto e : {Experiment::vphi, Experiment::twoport, Experiment::smatrix, Experiment::backaction,
                   Experiment::ramsey, Experiment::pulsed})
        if (to_string(e) == name) return e;
    config_error("experiment", "unknown experiment '" + name + "'");
}

std::vector<double> LinearGrid::values() const {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    if (count > 1) v.back() = stop;
    return v;
}

void RunConfig::validate() const {
    auto need = [](bool present, const char* path) {
        if (!present) config_error(path, "required for this experiment");
    };
    switch (experiment) {
        case Experiment::vphi:
            need(I_b.has_value(), "bias.I_b_uA");
            need(flux.has_value(), "sweep.flux_Phi0");
            break;
        case Experiment::twoport:
            need(I_b.has_value(), "bias.I_b_uA");
            need(phi_a.has_value(), "bias.phi_a_Phi0");
            need(freq.has_value(), "sweep.freq_GHz");
            break;
        case Experiment::smatrix:
            need(I_b.has_value(), "bias.I_b_uA");
            need(flux.has_value(), "sweep.flux_Phi0");
            need(freq.has_value(), "sweep.freq_GHz");
            break;
        case Experiment::backaction:
            need(I_b.has_value(), "bias.I_b_uA");
            need(phi_a.has_value(), "bias.phi_a_Phi0");
            break;
        case Experiment::ramsey:
            need(head_start.has_value(), "sweep.head_start_ns");
            need(evolution.has_value(), "sweep.evolution_ns");
            break;
        case Experiment::pulsed: break;
    }

    device.validate();
    sim.validate();
    extraction.validate();
    network.validate();
    qubit_cavity.validate();
    if (!(T_cold >= 0)) throw ParameterError("qubit_cavity.T_cold", "must be >= 0");
    if (workers < 1) throw ParameterError("workers", "must be >= 1");
    if (output_dir.empty()) throw ParameterError("output_dir", "must not be empty");
    if (n_steady && !(*n_steady >= 0)) throw ParameterError("qubit_cavity.n_steady", "must be >= 0");
    if (freq)
        for (double f : freq->values())
            if (!(f > 0)) throw ParameterError("sweep.freq_GHz", "frequencies must be > 0");
    for (const auto* g : {&head_start, &evolution})
        if (*g)
            for (double t : (*g)->values())
                if (!(t >= 0)) throw ParameterError(g == &head_start ? "sweep.head_start_ns" : "sweep.evolution_ns",
                                                    "times must be >= 0");
    if (experiment == Experiment::pulsed) {
        try {
            pulsed_mode_timeline(sequence, 1.0, qubit_cavity.kappa, 0.0);
        } catch (const Error& e) {
            config_error("sequence", e.what());
        }
    }
}

bool RunConfig::operator==(const RunConfig& other) const { return close(to_json(*this), to_json(other)); }

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        config_error("<document>", std::string("not valid JSON: ") + e.what());
    }
    Section top(root, "");
    RunConfig c;
    top.require("experiment");
    c.experiment = experiment_from_string(top.string("experiment"));
    if (top.has("output_dir")) c.output_dir = top.string("output_dir");
    top.integer("workers", c.workers);

    if (top.has("device")) {
        Section s = top.child("device");
        DeviceParams& d = c.device;
        s.assign("I0_uA", d.I0, uA);
        s.assign("R_ohm", d.R);
        s.assign("C_fF", d.C, fF);
        s.assign("L_pH", d.L, pH);
        s.assign("M_pH", d.M, pH);
        s.assign("shunt_volume_m3", d.shunt_volume);
        s.assign("sigma_ep_W_per_m3_K5", d.sigma_ep);
        s.assign("T_phonon_K", d.T_phonon);
        s.assign("P_nominal_nW", d.P_nominal, nW);
        if (s.has("T_electron_K")) d.T_electron_override = s.number("T_electron_K");
        s.reject_unknown();
    }
    if (top.has("sim")) {
        Section s = top.child("sim");
        SimConfig& m = c.sim;
        s.assign("dt", m.dt);
        s.assign("t_total", m.t_total);
        s.assign("t_transient", m.t_transient);
        s.integer("seed", m.seed);
        s.boolean("noise", m.noise_enabled);
        s.assign("max_phase_rate", m.max_phase_rate);
        s.reject_unknown();
    }
    if (top.has("extraction")) {
        Section s = top.child("extraction");
        ExtractionConfig& e = c.extraction;
        s.assign("input_probe_flux_Phi0", e.input_probe_flux);
        s.assign("output_probe_current_I0", e.output_probe_current);
        s.integer("min_periods", e.min_periods);
        s.integer("max_periods", e.max_periods);
        s.assign("target_rel_error", e.target_rel_error);
        s.assign("vphi_step_Phi0", e.vphi_step);
        s.boolean("require_finite_voltage", e.require_finite_voltage);
        s.boolean("check_linearity", e.check_linearity);
        s.reject_unknown();
    }
    if (top.has("bias")) {
        Section s = top.child("bias");
        if (s.has("I_b_uA")) c.I_b = s.number("I_b_uA", uA);
        if (s.has("phi_a_Phi0")) c.phi_a = s.number("phi_a_Phi0");
        s.reject_unknown();
    }
    if (top.has("sweep")) {
        Section s = top.child("sweep");
        if (s.has("flux_Phi0")) c.flux = read_grid(s, "flux_Phi0", 1.0);
        if (s.has("freq_GHz")) c.freq = read_grid(s, "freq_GHz", GHz);
        if (s.has("head_start_ns")) c.head_start = read_grid(s, "head_start_ns", ns);
        if (s.has("evolution_ns")) c.evolution = read_grid(s, "evolution_ns", ns);
        s.reject_unknown();
    }
    if (top.has("network")) {
        Section s = top.child("network");
        const bool by_char = s.has("Z_char_ohm");
        const bool by_elements = s.has("L_m_pH") || s.has("C_m_pF");
        if (by_char && by_elements) config_error(s.path("Z_char_ohm"), "give either Z_char_ohm or L_m_pH/C_m_pF");
        double f_center = 6e9, z_source = 50.0, z_load = 50.0;
        s.assign("f_center_GHz", f_center, GHz);
        s.assign("Z_source_ohm", z_source);
        s.assign("Z_load_ohm", z_load);
        if (by_elements) {
            s.require("L_m_pH");
            s.require("C_m_pF");
            c.network.L_m = s.number("L_m_pH", pH);
            c.network.C_m = s.number("C_m_pF", pF);
            c.network.f_center = f_center;
            c.network.Z_source = z_source;
            c.network.Z_load = z_load;
        } else {
            double z_char = 2.0;
            s.assign("Z_char_ohm", z_char);
            c.network = MatchingNetwork::design(z_char, f_center, z_source, z_load);
        }
        s.reject_unknown();
    }
    if (top.has("qubit_cavity")) {
        Section s = top.child("qubit_cavity");
        QubitCavityParams& q = c.qubit_cavity;
        s.assign("f_cavity_GHz", q.f_cavity, GHz);
        s.assign("chi_over_2pi_MHz", q.chi_over_2pi, MHz);
        if (s.has("kappa_inv_ns")) {
            const double inv = s.number("kappa_inv_ns", ns);
            if (!(inv > 0)) throw ParameterError("qubit_cavity.kappa", "1/kappa must be > 0");
            q.kappa = 1.0 / inv;
        }
        s.assign("f_qubit_GHz", q.f_qubit, GHz);
        s.assign("T2_us", q.T2, us);
        s.assign("ramsey_detuning_MHz", q.ramsey_detuning, MHz);
        s.assign("T_cold_K", c.T_cold);
        if (s.has("n_steady")) c.n_steady = s.number("n_steady");
        s.reject_unknown();
    }
    if (top.has("sequence")) {
        const json& seq = top.raw("sequence");
        if (!seq.is_array()) config_error("sequence", "expected an array");
        for (std::size_t i = 0; i < seq.size(); ++i) {
            Section s(seq[i], "sequence[" + std::to_string(i) + "]");
            s.require("kind");
            s.require("start_ns");
            PulseEvent ev;
            ev.kind = pulse_kind(s.string("kind"), s.path("kind"));
            ev.start = s.number("start_ns", ns);
            ev.end = s.has("end_ns") ? s.number("end_ns", ns) : ev.start;
            s.reject_unknown();
            c.sequence.push_back(ev);
        }
    } else if (c.experiment == Experiment::pulsed) {
        config_error("sequence", "required for this experiment");
    }
    top.reject_unknown();
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

}  // namespace slugsim
