#include "slugsim/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "slugsim/constants.hpp"
#include "slugsim/errors.hpp"
#include "slugsim/parallel.hpp"

#ifndef SLUGSIM_VERSION
#define SLUGSIM_VERSION "unknown"
#endif

namespace slugsim {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using constants::two_pi;

namespace {

constexpr double uV = 1e-6, GHz = 1e9, MHz = 1e6, ns = 1e-9, nW = 1e-9;

// Fixed textual form so that identical doubles always give identical bytes.
std::string num(double x) {
    if (!std::isfinite(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Csv {
public:
    explicit Csv(std::initializer_list<std::string> header) {
        row(std::vector<std::string>(header));
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }
    [[nodiscard]] std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string reason_of(const Error& e) { return to_string(e.kind()); }

// Steady-state occupation implied by the device's nominal dissipation, used
// when the config does not pin n_steady.
double nominal_n_steady(const RunConfig& c) {
    const double T_e = c.device.noise_temperature();
    const double T_eff = effective_cavity_temperature(T_e, c.T_cold, c.qubit_cavity.f_cavity);
    return photon_occupation(T_eff, c.qubit_cavity.f_cavity);
}

RunArtifacts run_vphi(const RunConfig& c) {
    const auto grid = c.flux->values();
    const std::size_t n = grid.size();
    std::vector<double> v(n, std::numeric_limits<double>::quiet_NaN()), se = v;
    std::vector<std::string> reason(n);
    parallel_for(n, c.workers, [&](std::size_t i) {
        SimConfig s = c.sim;
        s.seed = derive_seed(c.sim.seed, i);
        try {
            const auto tr = integrate_langevin(c.device, BiasPoint{*c.I_b, grid[i]}, s);
            v[i] = tr.v_mean * c.device.I0 * c.device.R;
            se[i] = tr.v_stderr * c.device.I0 * c.device.R;
        } catch (const Error& e) {
            reason[i] = reason_of(e);
        }
    });

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n; ++i)
        if (reason[i].empty()) {
            xs.push_back(grid[i]);
            ys.push_back(v[i]);
        }
    std::vector<double> g(xs.size(), std::numeric_limits<double>::quiet_NaN());
    if (xs.size() >= 3) g = centered_gradient(xs, ys);

    RunArtifacts out;
    Csv table({"flux_Phi0", "voltage_uV", "stderr_uV", "vphi_uV_per_Phi0"});
    Csv masked({"flux_Phi0", "reason"});
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin, gmax = 0, gmin = 0;
    for (std::size_t i = 0, k = 0; i < n; ++i) {
        if (!reason[i].empty()) {
            table.row({num(grid[i]), "", "", ""});
            masked.row({num(grid[i]), reason[i]});
            ++out.points_masked;
            continue;
        }
        const double gi = g[k++];
        table.row({num(grid[i]), num(v[i] / uV), num(se[i] / uV), num(gi / uV)});
        vmin = std::min(vmin, v[i]);
        vmax = std::max(vmax, v[i]);
        if (std::isfinite(gi)) {
            gmax = std::max(gmax, gi);
            gmin = std::min(gmin, gi);
        }
        ++out.points_ok;
    }
    out.files["vphi.csv"] = table.str();
    out.files["masked.csv"] = masked.str();
    json s;
    s["experiment"] = "vphi";
    s["I_b_uA"] = *c.I_b / uV;
    s["noise_temperature_K"] = c.sim.noise_enabled ? c.device.noise_temperature() : 0.0;
    s["peak_to_peak_uV"] = jnum(out.points_ok ? (vmax - vmin) / uV : std::nan(""));
    s["max_vphi_uV_per_Phi0"] = gmax / uV;
    s["min_vphi_uV_per_Phi0"] = gmin / uV;
    s["points_ok"] = out.points_ok;
    s["points_masked"] = out.points_masked;
    out.files["summary.json"] = dump(s);
    return out;
}

RunArtifacts run_twoport(const RunConfig& c) {
    const auto freqs = c.freq->values();
    const std::size_t n = freqs.size();
    const BiasPoint bias{*c.I_b, *c.phi_a};
    std::optional<OperatingPoint> op;
    std::string op_reason;
    try {
        op = operating_point(c.device, bias, c.sim, c.extraction.vphi_step);
    } catch (const Error& e) {
        op_reason = reason_of(e);
    }

    std::vector<TwoPortZ> z(n);
    std::vector<std::string> reason(n, op_reason);
    if (op)
        parallel_for(n, c.workers, [&](std::size_t j) {
            SimConfig s = c.sim;
            s.seed = derive_seed(c.sim.seed, j);
            try {
                z[j] = extract_two_port(c.device, *op, two_pi * freqs[j], s, c.extraction);
            } catch (const Error& e) {
                reason[j] = reason_of(e);
            }
        });

    RunArtifacts out;
    Csv table({"freq_GHz", "Z11_re_ohm", "Z11_im_ohm", "Z12_re_ohm", "Z12_im_ohm", "Z21_re_ohm", "Z21_im_ohm",
               "Z22_re_ohm", "Z22_im_ohm", "se11_ohm", "se12_ohm", "se21_ohm", "se22_ohm", "periods", "rho_i",
               "rho_o", "chi_r", "directionality_dB"});
    Csv masked({"freq_GHz", "reason"});
    for (std::size_t j = 0; j < n; ++j) {
        if (!reason[j].empty()) {
            std::vector<std::string> cells(18);
            cells[0] = num(freqs[j] / GHz);
            table.row(cells);
            masked.row({num(freqs[j] / GHz), reason[j]});
            ++out.points_masked;
            continue;
        }
        const TwoPortZ& t = z[j];
        const BiasConstants k = extract_bias_constants(t, c.device);
        std::string chi = k.chi_r ? num(*k.chi_r) : "";
        std::string dir;
        if (k.chi_r) {
            const auto d = directionality(c.device, t.V_phi, t.omega, *k.chi_r);
            dir = d.infinite ? "inf" : num(d.dB);
        }
        table.row({num(freqs[j] / GHz), num(t.Z11.real()), num(t.Z11.imag()), num(t.Z12.real()), num(t.Z12.imag()),
                   num(t.Z21.real()), num(t.Z21.imag()), num(t.Z22.real()), num(t.Z22.imag()), num(t.se11),
                   num(t.se12), num(t.se21), num(t.se22), std::to_string(t.periods), num(k.rho_i), num(k.rho_o),
                   chi, dir});
        ++out.points_ok;
    }
    out.files["twoport.csv"] = table.str();
    out.files["masked.csv"] = masked.str();
    json s;
    s["experiment"] = "twoport";
    s["I_b_uA"] = bias.I_b / uV;
    s["phi_a_Phi0"] = bias.phi_a;
    s["V_dc_uV"] = op ? jnum(op->V_dc / uV) : json(nullptr);
    s["V_phi_uV_per_Phi0"] = op ? jnum(op->V_phi / uV) : json(nullptr);
    s["Zf_analytic_ohm"] = op ? jnum(analytic_zf(c.device, op->V_phi)) : json(nullptr);
    s["reverse_bracket"] = op ? jnum(reverse_bracket(c.device, op->V_phi)) : json(nullptr);
    s["points_ok"] = out.points_ok;
    s["points_masked"] = out.points_masked;
    out.files["summary.json"] = dump(s);
    return out;
}

RunArtifacts run_smatrix(const RunConfig& c) {
    const auto flux = c.flux->values();
    const auto freqs = c.freq->values();
    const ScatteringMap m =
        scattering_map(c.device, *c.I_b, flux, freqs, c.network, c.sim, c.extraction, c.workers);

    RunArtifacts out;
    Csv table({"flux_Phi0", "freq_GHz", "S21_dB", "S12_dB", "Z11_re_ohm", "Z11_im_ohm", "Z12_re_ohm", "Z12_im_ohm",
               "Z21_re_ohm", "Z21_im_ohm", "Z22_re_ohm", "Z22_im_ohm"});
    Csv masked({"flux_Phi0", "freq_GHz", "reason"});
    Csv opcsv({"flux_Phi0", "V_dc_uV", "vphi_uV_per_Phi0"});
    struct Extreme {
        double value, flux, freq, vphi;
    };
    Extreme best21{-std::numeric_limits<double>::infinity(), 0, 0, 0};
    Extreme best12{std::numeric_limits<double>::infinity(), 0, 0, 0};
    for (std::size_t i = 0; i < flux.size(); ++i) {
        opcsv.row({num(flux[i]), num(m.V_dc[i] / uV), num(m.V_phi[i] / uV)});
        for (std::size_t j = 0; j < freqs.size(); ++j) {
            const std::size_t k = m.index(i, j);
            if (m.status[k].status == PointStatus::masked) {
                std::vector<std::string> cells(12);
                cells[0] = num(flux[i]);
                cells[1] = num(freqs[j] / GHz);
                table.row(cells);
                masked.row({num(flux[i]), num(freqs[j] / GHz), m.status[k].reason});
                ++out.points_masked;
                continue;
            }
            const TwoPortZ& z = m.two_port[k];
            table.row({num(flux[i]), num(freqs[j] / GHz), num(m.S21_dB[k]), num(m.S12_dB[k]), num(z.Z11.real()),
                       num(z.Z11.imag()), num(z.Z12.real()), num(z.Z12.imag()), num(z.Z21.real()),
                       num(z.Z21.imag()), num(z.Z22.real()), num(z.Z22.imag())});
            if (m.S21_dB[k] > best21.value) best21 = {m.S21_dB[k], flux[i], freqs[j], m.V_phi[i]};
            if (m.S12_dB[k] < best12.value) best12 = {m.S12_dB[k], flux[i], freqs[j], m.V_phi[i]};
            ++out.points_ok;
        }
    }
    out.files["smatrix.csv"] = table.str();
    out.files["masked.csv"] = masked.str();
    out.files["operating_points.csv"] = opcsv.str();

    auto extreme = [&](const Extreme& e) {
        if (!out.points_ok) return json(nullptr);
        return json{{"dB", e.value}, {"flux_Phi0", e.flux}, {"freq_GHz", e.freq / GHz},
                    {"vphi_uV_per_Phi0", e.vphi / uV}};
    };
    json s;
    s["experiment"] = "smatrix";
    s["I_b_uA"] = *c.I_b / uV;
    s["peak_S21"] = extreme(best21);
    s["min_S12"] = extreme(best12);
    s["network"] = json{{"L_m_pH", c.network.L_m / 1e-12}, {"C_m_pF", c.network.C_m / 1e-12},
                        {"Z_char_ohm", c.network.z_char()}, {"f_center_GHz", c.network.f_center / GHz}};
    s["output_embedding"] = "direct " + num(c.network.Z_load) + " ohm load, no output matching";
    s["points_ok"] = out.points_ok;
    s["points_masked"] = out.points_masked;
    out.files["summary.json"] = dump(s);
    return out;
}

RunArtifacts run_backaction(const RunConfig& c) {
    const BiasPoint bias{*c.I_b, *c.phi_a};
    RunArtifacts out;
    json s;
    s["experiment"] = "backaction";
    s["I_b_uA"] = bias.I_b / uV;
    s["phi_a_Phi0"] = bias.phi_a;
    try {
        const auto tr = integrate_langevin(c.device, bias, c.sim);
        const double v = tr.v_mean * c.device.I0 * c.device.R;
        const BackactionReport r = backaction_chain(c.device, bias, v, c.qubit_cavity, c.T_cold);
        s["V_mean_uV"] = v / uV;
        s["P_dissipated_nW"] = r.P_dissipated / nW;
        s["T_e"] = r.T_electron;
        s["T_cold"] = r.T_cold;
        s["T_eff"] = r.T_cavity_effective;
        s["n_bar"] = r.n_bar_steady;
        s["stark_shift"] = r.stark_shift;
        s["dephasing_rate_per_s"] = r.dephasing_rate;
        s["josephson_frequency_GHz"] = r.josephson_frequency / GHz;
        s["caveats"] = r.caveats;
        ++out.points_ok;
    } catch (const Error& e) {
        s["masked"] = reason_of(e);
        ++out.points_masked;
    }
    s["noise_temperature_K"] = c.sim.noise_enabled ? c.device.noise_temperature() : 0.0;
    s["units"] = json{{"T_e", "K"}, {"T_cold", "K"}, {"T_eff", "K"}, {"stark_shift", "Hz"}};
    out.files["summary.json"] = dump(s);
    return out;
}

RunArtifacts run_ramsey(const RunConfig& c) {
    const auto hs = c.head_start->values();
    const auto ev = c.evolution->values();
    const double n_ss = c.n_steady ? *c.n_steady : nominal_n_steady(c);
    RunArtifacts out;
    Csv surface({"head_start_ns", "evolution_ns", "amplitude"});
    Csv fringe({"head_start_ns", "frequency_MHz", "shift_MHz"});
    json s;
    s["experiment"] = "ramsey";
    s["n_steady"] = n_ss;
    s["stark_shift_MHz"] = stark_shift(n_ss, c.qubit_cavity) / MHz;
    s["dephasing_rate_per_s"] = photon_dephasing_rate(n_ss, c.qubit_cavity);
    s["ramsey_detuning_MHz"] = c.qubit_cavity.ramsey_detuning / MHz;
    s["rise"] = nullptr;
    if (!hs.empty() && !ev.empty()) {
        const RamseySurface r = ramsey_surface(c.qubit_cavity, n_ss, hs, ev);
        for (std::size_t h = 0; h < hs.size(); ++h)
            for (std::size_t e = 0; e < ev.size(); ++e) surface.row({num(hs[h] / ns), num(ev[e] / ns), num(r.at(h, e))});
        out.points_ok = hs.size() * ev.size();
        try {
            const auto f = fringe_frequencies(r);
            for (std::size_t h = 0; h < hs.size(); ++h)
                fringe.row({num(hs[h] / ns), num(f[h] / MHz), num((f[h] - c.qubit_cavity.ramsey_detuning) / MHz)});
            if (hs.size() >= 3) {
                const RiseFit fit = fit_exponential_rise(hs, f);
                s["rise"] = json{{"tau_ns", fit.tau / ns},
                                 {"f_initial_MHz", fit.f_initial / MHz},
                                 {"f_saturated_MHz", fit.f_saturated / MHz},
                                 {"rms_residual_MHz", fit.rms_residual / MHz}};
            }
        } catch (const ParameterError& e) {
            s["fringe_skipped"] = e.what();
        }
    }
    out.files["ramsey_surface.csv"] = surface.str();
    out.files["fringe_frequency.csv"] = fringe.str();
    out.files["summary.json"] = dump(s);
    return out;
}

RunArtifacts run_pulsed(const RunConfig& c) {
    const double n_ss = c.n_steady ? *c.n_steady : nominal_n_steady(c);
    const PulsedTimeline t = pulsed_mode_timeline(c.sequence, n_ss, c.qubit_cavity.kappa, c.device.P_nominal);
    RunArtifacts out;
    Csv table({"start_ns", "end_ns", "state", "free_evolution", "n_start", "n_end", "photon_exposure_ns",
               "dissipated_energy_fJ"});
    for (const auto& iv : t.intervals) {
        table.row({num(iv.start / ns), num(iv.end / ns), iv.state == SlugState::active ? "active" : "idle",
                   iv.free_evolution ? "1" : "0", num(iv.n_start), num(iv.n_end), num(iv.photon_exposure / ns),
                   num(iv.dissipated_energy / 1e-15)});
        ++out.points_ok;
    }
    out.files["timeline.csv"] = table.str();
    json s;
    s["experiment"] = "pulsed";
    s["n_steady"] = n_ss;
    s["free_evolution_exposure_ns"] = t.free_evolution_exposure / ns;
    s["total_dissipated_energy_fJ"] = t.total_dissipated_energy / 1e-15;
    s["active_power_nW"] = c.device.P_nominal / nW;
    out.files["summary.json"] = dump(s);
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
    f << content;
    f.close();
    if (!f) throw Error(ErrorKind::io, "failed writing '" + path.string() + "'");
}

void ensure_writable(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw Error(ErrorKind::io, "cannot create output directory '" + dir.string() + "'");
    const fs::path probe = dir / ".slugsim-write-test";
    {
        std::ofstream f(probe);
        if (!f) throw Error(ErrorKind::io, "output directory '" + dir.string() + "' is not writable");
    }
    fs::remove(probe, ec);
}

}  // namespace

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::io, "sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string s(2 * len, '0');
    for (unsigned i = 0; i < len; ++i) {
        s[2 * i] = hex[md[i] >> 4];
        s[2 * i + 1] = hex[md[i] & 15];
    }
    return s;
}

RunArtifacts execute(const RunConfig& config) {
    config.validate();
    switch (config.experiment) {
        case Experiment::vphi: return run_vphi(config);
        case Experiment::twoport: return run_twoport(config);
        case Experiment::smatrix: return run_smatrix(config);
        case Experiment::backaction: return run_backaction(config);
        case Experiment::ramsey: return run_ramsey(config);
        case Experiment::pulsed: return run_pulsed(config);
    }
    throw Error(ErrorKind::config, "unhandled experiment");
}

RunManifest emit_artifacts(const RunArtifacts& artifacts, const RunConfig& config, double wall_time) {
    const fs::path dir(config.output_dir);
    ensure_writable(dir);

    RunManifest m;
    m.experiment = to_string(config.experiment);
    m.code_version = SLUGSIM_VERSION;
    m.seed = config.sim.seed;
    m.workers = config.workers;
    m.wall_time = wall_time;
    m.points_ok = artifacts.points_ok;
    m.points_masked = artifacts.points_masked;
    m.config_echo = serialize_config(config);
    for (const auto& [name, content] : artifacts.files) {
        write_file(dir / name, content);
        m.files.push_back({name, content.size(), sha256_hex(content)});
    }

    json files = json::array();
    for (const auto& f : m.files) files.push_back(json{{"name", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
    json j;
    j["experiment"] = m.experiment;
    j["code_version"] = m.code_version;
    j["seed"] = m.seed;
    j["workers"] = m.workers;
    j["wall_time_s"] = m.wall_time;
    j["points"] = json{{"total", m.points_ok + m.points_masked}, {"ok", m.points_ok}, {"masked", m.points_masked}};
    j["files"] = files;
    j["config"] = json::parse(m.config_echo);
    write_file(dir / "manifest.json", dump(j));
    return m;
}

RunManifest run(const RunConfig& config) {
    config.validate();
    ensure_writable(config.output_dir);
    const auto t0 = std::chrono::steady_clock::now();
    const RunArtifacts a = execute(config);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return emit_artifacts(a, config, wall);
}

}  // namespace slugsim
