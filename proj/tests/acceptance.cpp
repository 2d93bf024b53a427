// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "slugsim/backaction.hpp"
#include "slugsim/config.hpp"
#include "slugsim/device.hpp"
#include "slugsim/runner.hpp"
#include "slugsim/scattering.hpp"
#include "slugsim/small_signal.hpp"

using namespace slugsim;

namespace {

constexpr double uV = 1e-6;
constexpr double kCavity = 6.605e9;

int failures = 0;

void verdict(int id, bool ok, const std::string& detail, double seconds) {
    std::printf("criterion %d: %s  %s  [%.1f s]\n", id, ok ? "PASS" : "FAIL", detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

void note(const char* fmt, auto... args) {
    std::printf("    ");
    std::printf(fmt, args...);
    std::printf("\n");
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void criterion(int id, const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::pair<bool, std::string> r;
    try {
        r = body();
    } catch (const std::exception& e) {
        r = {false, std::string("exception: ") + e.what()};
    }
    verdict(id, r.first, r.second, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Coarse flux x frequency map shared by the scattering and property checks.
struct SharedMap {
    DeviceParams device;
    ScatteringMap map;
    double flux_step = 0;
};

const SharedMap& shared_map() {
    static const SharedMap m = [] {
        SharedMap s;
        SimConfig sim;
        sim.dt = 0.04;
        sim.t_total = 1e4;
        sim.t_transient = 500;
        sim.seed = 11;
        ExtractionConfig cfg;
        cfg.min_periods = 32;
        cfg.max_periods = 256;
        const auto flux = linspace(1.0 / 64, 63.0 / 64, 32);
        s.flux_step = flux[1] - flux[0];
        s.map = scattering_map(s.device, 38e-6, flux, linspace(4e9, 8e9, 16), MatchingNetwork::design(), sim, cfg,
                               workers());
        return s;
    }();
    return m;
}

bool row_ok(const ScatteringMap& m, std::size_t i) {
    for (std::size_t j = 0; j < m.freq.size(); ++j)
        if (m.status[m.index(i, j)].status != PointStatus::ok) return false;
    return true;
}

// Midpoints between consecutive sign changes of v over the grid x.
std::vector<double> crossings(const std::vector<double>& x, const std::vector<double>& v) {
    std::vector<double> out;
    for (std::size_t i = 1; i < v.size(); ++i)
        if ((v[i - 1] > 0) != (v[i] > 0)) out.push_back(0.5 * (x[i - 1] + x[i]));
    return out;
}

std::pair<bool, std::string> scattering_shoulders() {
    const auto& s = shared_map();
    const auto& m = s.map;
    note("map: %zu x %zu at I_b = 38 uA, %zu masked", m.flux.size(), m.freq.size(), m.masked_count());

    // best forward gain per flux row
    std::vector<double> best(m.flux.size(), -INFINITY);
    for (std::size_t i = 0; i < m.flux.size(); ++i)
        for (std::size_t j = 0; j < m.freq.size(); ++j)
            if (m.status[m.index(i, j)].status == PointStatus::ok) best[i] = std::max(best[i], m.S21_dB[m.index(i, j)]);

    auto half_max = [&](bool left) {
        std::size_t arg = m.flux.size();
        for (std::size_t i = 0; i < m.flux.size(); ++i) {
            if ((m.flux[i] < 0.5) != left || !std::isfinite(best[i])) continue;
            if (arg == m.flux.size() || best[i] > best[arg]) arg = i;
        }
        return arg;
    };
    std::size_t center = 0;
    for (std::size_t i = 0; i < m.flux.size(); ++i)
        if (std::abs(m.flux[i] - 0.5) < std::abs(m.flux[center] - 0.5)) center = i;
    const std::size_t l = half_max(true), r = half_max(false);
    if (l == m.flux.size() || r == m.flux.size()) return {false, "no unmasked points on one half"};
    note("S21 max: left %.2f dB at phi %.3f (V_phi %+.0f uV/Phi0), right %.2f dB at phi %.3f (V_phi %+.0f), "
         "center %.2f dB",
         best[l], m.flux[l], m.V_phi[l] / uV, best[r], m.flux[r], m.V_phi[r] / uV, best[center]);
    const bool shoulders = m.V_phi[l] > 0 && m.V_phi[r] < 0 && best[l] > best[center] + 3 &&
                           best[r] > best[center] + 3;

    std::size_t kmin = 0;
    bool any = false;
    for (std::size_t k = 0; k < m.S12_dB.size(); ++k) {
        if (m.status[k].status != PointStatus::ok) continue;
        if (!any || m.S12_dB[k] < m.S12_dB[kmin]) kmin = k;
        any = true;
    }
    if (!any) return {false, "map fully masked"};
    const std::size_t row = kmin / m.freq.size();
    note("S12 min: %.2f dB at phi %.3f, %.2f GHz, V_phi %+.0f uV/Phi0", m.S12_dB[kmin], m.flux[row],
         m.freq[kmin % m.freq.size()] / 1e9, m.V_phi[row] / uV);
    const bool negative_shoulder = m.V_phi[row] < 0;

    double widest = 0;
    for (std::size_t a = 0; a < m.freq.size(); ++a) {
        std::size_t b = a;
        while (b < m.freq.size() && m.status[m.index(row, b)].status == PointStatus::ok &&
               m.S12_dB[m.index(row, b)] <= -15.0)
            ++b;
        if (b > a) widest = std::max(widest, m.freq[b - 1] - m.freq[a]);
    }
    note("widest contiguous band with S12 <= -15 dB at that flux: %.2f GHz", widest / 1e9);
    const bool band = widest >= 0.5e9;
    return {shoulders && negative_shoulder && band,
            fmt("S21 peaks on both shoulders: %s; S12 min on V_phi<0 shoulder: %s; band %.2f GHz >= 0.5 GHz: %s",
                shoulders ? "yes" : "no", negative_shoulder ? "yes" : "no", widest / 1e9, band ? "yes" : "no")};
}

std::pair<bool, std::string> property_suites() {
    const DeviceParams dev;
    std::vector<std::string> failed;

    // passive reciprocity
    {
        SimConfig sim;
        sim.dt = 0.04;
        sim.t_total = 1e4;
        sim.t_transient = 500;
        ExtractionConfig cfg;
        cfg.require_finite_voltage = false;
        double worst = 0;
        for (double f : {4e9, 6e9, 8e9}) {
            const auto z = extract_two_port(dev, BiasPoint{0.0, 0.0}, 2 * oracle::pi * f, sim, cfg);
            worst = std::max(worst, std::abs(z.Z12 - z.Z21) / std::abs(z.Z21));
        }
        note("reciprocity at I_b = 0: max |Z12 - Z21| / |Z21| = %.4f (< 0.05)", worst);
        if (!(worst < 0.05)) failed.push_back("reciprocity");
    }

    const auto& s = shared_map();
    const auto& m = s.map;
    const std::size_t jf = [&] {
        std::size_t best = 0;
        for (std::size_t j = 0; j < m.freq.size(); ++j)
            if (std::abs(m.freq[j] - 6e9) < std::abs(m.freq[best] - 6e9)) best = j;
        return best;
    }();
    const double f = m.freq[jf];
    const double omega = 2 * oracle::pi * f;

    // forward transimpedance at the largest |V_phi| on each shoulder, among
    // points whose Josephson frequency is well above the signal
    {
        double worst = 0;
        int checked = 0;
        for (int sign : {+1, -1}) {
            std::size_t arg = m.flux.size();
            for (std::size_t i = 0; i < m.flux.size(); ++i) {
                const auto& st = m.status[m.index(i, jf)];
                if (st.status != PointStatus::ok || sign * m.V_phi[i] <= 0) continue;
                if (m.V_dc[i] / oracle::phi0 < 4 * f) continue;
                if (arg == m.flux.size() || std::abs(m.V_phi[i]) > std::abs(m.V_phi[arg])) arg = i;
            }
            if (arg == m.flux.size()) continue;
            const auto& z = m.two_port[m.index(arg, jf)];
            const double zf = analytic_zf(dev, m.V_phi[arg]);
            const double err = std::abs(z.Z21.real() - zf) / std::abs(zf);
            note("Re Z21 vs L V_phi at phi %.3f, %.2f GHz: %.3f vs %.3f Ohm, rel %.3f (< 0.15)", m.flux[arg], f / 1e9,
                 z.Z21.real(), zf, err);
            worst = std::max(worst, err);
            ++checked;
        }
        if (checked != 2 || !(worst < 0.15)) failed.push_back("transimpedance");
    }

    // reverse transimpedance: sign and zero crossing of simulated Im Z12
    // against chi_r omega L (1 + L V_phi / R), chi_r > 0
    {
        std::vector<double> x, sim_im, ana;
        for (std::size_t i = 0; i < m.flux.size(); ++i) {
            if (!row_ok(m, i)) continue;
            x.push_back(m.flux[i]);
            sim_im.push_back(m.two_port[m.index(i, jf)].Z12.imag());
            ana.push_back(analytic_im_zr(dev, m.V_phi[i], omega, 1.0));
        }
        const auto cs = crossings(x, sim_im), ca = crossings(x, ana);
        std::string sc, ac;
        for (double c : cs) sc += fmt(" %.3f", c);
        for (double c : ca) ac += fmt(" %.3f", c);
        bool match = cs.size() == ca.size();
        for (std::size_t k = 0; match && k < cs.size(); ++k) match = std::abs(cs[k] - ca[k]) <= s.flux_step + 1e-12;
        std::size_t disagree = 0;
        for (std::size_t k = 0; k < x.size(); ++k)
            if ((sim_im[k] > 0) != (ana[k] > 0)) ++disagree;
        double min_bracket = INFINITY;
        for (std::size_t i = 0; i < m.flux.size(); ++i)
            if (row_ok(m, i)) min_bracket = std::min(min_bracket, reverse_bracket(dev, m.V_phi[i]));
        note("Im Z12 zero crossings at %.2f GHz: simulated {%s }, analytic {%s }; sign disagreements %zu of %zu; "
             "min analytic bracket %.3f",
             f / 1e9, sc.c_str(), ac.c_str(), disagree, x.size(), min_bracket);
        if (!match || disagree > 0) failed.push_back("reverse zero crossing");
    }

    // lossless matching network
    {
        const auto net = MatchingNetwork::design();
        double worst = 0;
        for (double fr : linspace(1e9, 12e9, 45)) {
            const auto sp = s_from_abcd(net.abcd(2 * oracle::pi * fr), 50, 50);
            worst = std::max(worst, std::abs(std::norm(sp.s11) + std::norm(sp.s21) - 1.0));
        }
        note("network unitarity: max ||S11|^2 + |S21|^2 - 1| = %.2e (<= 1e-6)", worst);
        if (!(worst <= 1e-6)) failed.push_back("unitarity");
    }

    // occupation round trip
    {
        double worst = 0;
        for (double T = 0.01; T < 400; T *= 1.3)
            worst = std::max(worst, std::abs(occupation_temperature(photon_occupation(T, kCavity), kCavity) / T - 1));
        note("Bose-Einstein round trip: max relative error %.2e (<= 1e-9)", worst);
        if (!(worst <= 1e-9)) failed.push_back("round trip");
    }

    // worker-count independence of artifacts
    {
        bool same = true;
        for (const char* text : {
                 R"({"experiment": "smatrix", "bias": {"I_b_uA": 38},
                   "sweep": {"flux_Phi0": {"start": 0, "stop": 0.75, "count": 4},
                             "freq_GHz": {"start": 5, "stop": 7, "count": 2}},
                   "sim": {"dt": 0.04, "t_total": 4000, "t_transient": 200, "seed": 5},
                   "extraction": {"min_periods": 16, "max_periods": 32}})",
                 R"({"experiment": "vphi", "bias": {"I_b_uA": 38},
                   "sweep": {"flux_Phi0": {"start": 0, "stop": 1, "count": 9}},
                   "sim": {"dt": 0.04, "t_total": 4000, "t_transient": 200, "seed": 5}})"}) {
            auto c = parse_config(text);
            c.workers = 1;
            const auto a = execute(c);
            c.workers = 4;
            const auto b = execute(c);
            for (const auto& [name, content] : a.files) {
                const auto it = b.files.find(name);
                if (it == b.files.end() || sha256_hex(it->second) != sha256_hex(content)) same = false;
            }
            same = same && a.files.size() == b.files.size();
        }
        note("artifact digests identical for 1 and 4 workers: %s", same ? "yes" : "no");
        if (!same) failed.push_back("determinism");
    }

    std::string detail = failed.empty() ? "all property checks hold" : "failed:";
    for (const auto& f : failed) detail += " [" + f + "]";
    return {failed.empty(), detail};
}

}  // namespace

int main() {
    criterion(1, [] {
        DeviceParams d;
        const double te = electron_temperature(1e-9, d);
        return std::pair{std::abs(te - 1.10) <= 0.02 * 1.10, fmt("T_e(1 nW) = %.4f K, target 1.10 K +- 2%%", te)};
    });

    criterion(2, [] {
        const double n = photon_occupation(0.6, kCavity);
        const double exact = oracle::bose_einstein(0.6, kCavity);
        return std::pair{std::abs(n - exact) <= 0.05 && std::abs(n - 1.46) <= 0.05,
                         fmt("n(0.6 K, 6.605 GHz) = %.4f, closed form %.4f", n, exact)};
    });

    criterion(3, [] {
        const double s = stark_shift(1.47, QubitCavityParams{});
        return std::pair{std::abs(s - 2.2e6) <= 0.05 * 2.2e6, fmt("Stark shift(n = 1.47) = %.4f MHz", s / 1e6)};
    });

    criterion(4, [] {
        const QubitCavityParams qc;
        const auto hs = linspace(0, 1e-6, 41);
        const auto surface = ramsey_surface(qc, 1.47, hs, linspace(0, 1e-6, 401));
        const auto fit = fit_exponential_rise(hs, fringe_frequencies(surface));
        const double rise = fit.f_saturated - qc.ramsey_detuning;
        const bool ok = std::abs(fit.tau - 350e-9) <= 35e-9 && std::abs(rise - 2.2e6) <= 0.05 * 2.2e6;
        return std::pair{ok, fmt("tau = %.1f ns (350 +- 35), saturation = detuning + %.3f MHz (2.2 +- 5%%)",
                                 fit.tau * 1e9, rise / 1e6)};
    });

    criterion(5, [] {
        const DeviceParams d;
        SimConfig sim;
        sim.dt = 0.01;
        sim.noise_enabled = false;
        sim.t_total = 5e4;
        sim.t_transient = 1e3;
        double worst = 0;
        std::string detail;
        for (double ib : {45e-6, 60e-6, 80e-6}) {
            const double v = integrate_langevin(d, BiasPoint{ib, 0.0}, sim).v_mean * d.I0 * d.R;
            const double ref = 0.5 * oracle::rsj_voltage(ib, 2 * d.I0, d.R);
            worst = std::max(worst, std::abs(v - ref) / ref);
            detail += fmt("%.0f uA: %.2f vs %.2f uV; ", ib / 1e-6, v / uV, ref / uV);
        }
        return std::pair{worst < 0.01, detail + fmt("max rel %.2e", worst)};
    });

    criterion(6, [] {
        const DeviceParams d;
        SimConfig sim;
        sim.dt = 0.02;
        sim.t_total = 2e4;
        sim.t_transient = 500;
        sim.seed = 7;
        const auto grid = linspace(0, 1, 33);
        const auto curve = v_phi_curve(d, 38e-6, grid, sim, workers());
        const double p2p = curve.peak_to_peak();

        // shifted and mirrored grids on independent streams
        std::vector<double> shifted, mirrored;
        for (double p : grid) {
            shifted.push_back(p + 1);
            mirrored.push_back(-p);
        }
        SimConfig s2 = sim, s3 = sim;
        s2.seed = 8;
        s3.seed = 9;
        const auto cs = v_phi_curve(d, 38e-6, shifted, s2, workers());
        const auto cm = v_phi_curve(d, 38e-6, mirrored, s3, workers());
        double worst_period = 0, worst_parity = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double sp = std::hypot(curve.stderr_v[i], cs.stderr_v[i]);
            const double sm = std::hypot(curve.stderr_v[i], cm.stderr_v[i]);
            worst_period = std::max(worst_period, std::abs(curve.voltage[i] - cs.voltage[i]) / sp);
            worst_parity = std::max(worst_parity, std::abs(curve.voltage[i] - cm.voltage[i]) / sm);
        }
        const bool ok = std::abs(p2p - 130e-6) <= 0.3 * 130e-6 && worst_period <= 3 && worst_parity <= 3;
        return std::pair{ok, fmt("peak-to-peak %.1f uV at I_b = 38 uA (130 +- 30%%); periodicity max %.2f sigma, "
                                 "parity max %.2f sigma (<= 3)",
                                 p2p / uV, worst_period, worst_parity)};
    });

    criterion(7, [] {
        const auto d = directionality_from_terms(80.0 / 6.0, 1.0, 1.0);
        return std::pair{d.dB >= 19 && d.dB <= 26, fmt("D = %.1f (%.2f dB), window 19-26 dB", d.ratio, d.dB)};
    });

    criterion(8, scattering_shoulders);
    criterion(9, property_suites);

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
