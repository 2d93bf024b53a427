#include "slugsim/small_signal.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "langevin.hpp"
#include "slugsim/constants.hpp"
#include "slugsim/errors.hpp"

namespace slugsim {

using constants::flux_quantum;
using constants::two_pi;

namespace {

constexpr std::size_t kBlockPeriods = 4;

struct ProbeResponse {
    std::vector<complex> v_out;  // per-block phasors
    std::vector<complex> v_in;
    double v_dc = 0;
};

// One driven run. The window is split into blocks of kBlockPeriods probe
// periods; each block gives a Hann-weighted phasor
// V = 2 sum(w v exp(-i omega t)) / sum(w), which suppresses leakage from the
// Josephson ripple and its probe sidebands.
ProbeResponse driven_run(const detail::LoopCoefficients& k, const detail::StepPlan& base, std::size_t per_period,
                         std::size_t periods, const ProbeDrive& drive) {
    detail::StepPlan plan = base;
    const std::size_t window = per_period * periods;
    const std::size_t block = per_period * kBlockPeriods;
    const std::size_t blocks = periods / kBlockPeriods;
    plan.steps = window + 1;
    const double dt = plan.dt;
    const double w = drive.omega;
    const double in_scale = constants::two_pi * k.input_coupling / (2.0 * dt);

    std::vector<double> hann(block);
    double wsum = 0;
    for (std::size_t i = 0; i < block; ++i) {
        const double s = std::sin(constants::pi * static_cast<double>(i) / static_cast<double>(block));
        hann[i] = s * s;
        wsum += hann[i];
    }
    // the probe period is an exact number of steps, so the carrier repeats
    std::vector<complex> carrier_mid(per_period), carrier(per_period);
    for (std::size_t i = 0; i < per_period; ++i) {
        const double t = static_cast<double>(i) * dt;
        carrier[i] = std::polar(1.0, -w * t);
        carrier_mid[i] = std::polar(1.0, -w * (t + 0.5 * dt));
    }

    ProbeResponse r;
    r.v_out.assign(blocks, complex{});
    r.v_in.assign(blocks, complex{});
    double seg_prev2 = 0, seg_prev = 0, dc = 0;

    detail::run_heun(k, plan, drive, [&](const detail::StepRecord& s) {
        const std::size_t n = s.n;
        if (n < window) {
            r.v_out[n / block] += s.v_out * hann[n % block] * carrier_mid[n % per_period];
            dc += s.v_out;
        }
        // centered difference at sample c = n - 1, samples 1..window
        if (n >= 2) {
            const std::size_t c = n - 1;
            const double v_in = in_scale * (s.i_seg - seg_prev2);
            const std::size_t pos = c - 1;
            r.v_in[pos / block] += v_in * hann[pos % block] * carrier[c % per_period];
        }
        seg_prev2 = seg_prev;
        seg_prev = s.i_seg;
    });
    const double norm = 2.0 / wsum;
    for (auto& p : r.v_out) p *= norm;
    for (auto& p : r.v_in) p *= norm;
    r.v_dc = dc / static_cast<double>(window);
    return r;
}

struct Estimate {
    complex mean;
    double se = 0;
};

Estimate antisymmetric(const std::vector<complex>& plus, const std::vector<complex>& minus, double amplitude) {
    const std::size_t K = plus.size();
    std::vector<complex> z(K);
    complex m{};
    for (std::size_t i = 0; i < K; ++i) {
        z[i] = (plus[i] - minus[i]) / (2.0 * amplitude);
        m += z[i];
    }
    m /= static_cast<double>(K);
    double var = 0;
    for (const auto& zi : z) var += std::norm(zi - m);
    var /= static_cast<double>(std::max<std::size_t>(K - 1, 1));
    return {m, std::sqrt(var / static_cast<double>(K))};
}

struct Extracted {
    Estimate z11, z12, z21, z22;
    double v_dc = 0;
};

Extracted extract_once(const detail::LoopCoefficients& k, const detail::StepPlan& base, std::size_t per_period,
                       std::size_t periods, double w, double flux_amp, double cur_amp) {
    // dimensionless input current amplitude for the flux probe
    const double i_in_amp = flux_amp / k.input_coupling;
    ProbeDrive in_p{ProbePort::input_flux, flux_amp, w};
    ProbeDrive in_m{ProbePort::input_flux, -flux_amp, w};
    ProbeDrive out_p{ProbePort::output_current, cur_amp, w};
    ProbeDrive out_m{ProbePort::output_current, -cur_amp, w};
    const auto a = driven_run(k, base, per_period, periods, in_p);
    const auto b = driven_run(k, base, per_period, periods, in_m);
    const auto c = driven_run(k, base, per_period, periods, out_p);
    const auto d = driven_run(k, base, per_period, periods, out_m);

    Extracted e;
    e.z21 = antisymmetric(a.v_out, b.v_out, i_in_amp);
    e.z11 = antisymmetric(a.v_in, b.v_in, i_in_amp);
    e.z22 = antisymmetric(c.v_out, d.v_out, cur_amp);
    e.z12 = antisymmetric(c.v_in, d.v_in, cur_amp);
    e.v_dc = 0.25 * (a.v_dc + b.v_dc + c.v_dc + d.v_dc);
    return e;
}

bool converged(const Extracted& e, double target) {
    for (const auto* est : {&e.z11, &e.z12, &e.z21, &e.z22})
        if (est->se > target * std::abs(est->mean)) return false;
    return true;
}

}  // namespace

void ExtractionConfig::validate() const {
    if (!(input_probe_flux > 0)) throw ParameterError("extraction.input_probe_flux", "must be > 0");
    if (!(output_probe_current > 0)) throw ParameterError("extraction.output_probe_current", "must be > 0");
    if (min_periods < 2 * kBlockPeriods || max_periods < min_periods)
        throw ParameterError("extraction.min_periods", "need 8 <= min_periods <= max_periods");
    if (!(target_rel_error > 0)) throw ParameterError("extraction.target_rel_error", "must be > 0");
    if (!(vphi_step > 0) || !(vphi_step < 0.5)) throw ParameterError("extraction.vphi_step", "must lie in (0, 0.5)");
}

bool OperatingPoint::finite_voltage(const DeviceParams& device) const {
    return std::abs(V_dc) >= 1e-3 * device.I0 * device.R;
}

OperatingPoint operating_point(const DeviceParams& device, const BiasPoint& bias, const SimConfig& sim,
                               double flux_step) {
    sim.validate();
    if (!(flux_step > 0)) throw ParameterError("extraction.vphi_step", "must be > 0");
    const Normalization norm = normalize(device, 0.0);
    auto dc = [&](double phi) {
        SimConfig s = sim;
        s.record_stride = 0;
        return integrate_langevin(device, BiasPoint{bias.I_b, phi}, s).v_mean;
    };
    const double v_plus = dc(bias.phi_a + flux_step);
    const double v_minus = dc(bias.phi_a - flux_step);
    const double v_center = dc(bias.phi_a);
    OperatingPoint op;
    op.bias = bias;
    op.V_dc = v_center * norm.voltage_unit;
    op.V_phi = (v_plus - v_minus) / (2.0 * flux_step) * norm.voltage_unit;
    return op;
}

TwoPortZ extract_two_port(const DeviceParams& device, const BiasPoint& bias, double omega, const SimConfig& sim,
                          const ExtractionConfig& cfg) {
    return extract_two_port(device, operating_point(device, bias, sim, cfg.vphi_step), omega, sim, cfg);
}

TwoPortZ extract_two_port(const DeviceParams& device, const OperatingPoint& op, double omega, const SimConfig& sim,
                          const ExtractionConfig& cfg) {
    sim.validate();
    cfg.validate();
    if (!(omega > 0)) throw ParameterError("omega", "must be > 0");
    if (cfg.require_finite_voltage && !op.finite_voltage(device))
        throw Error(ErrorKind::bias_state, "bias point is in the supercurrent state; gain is undefined");

    const BiasPoint& bias = op.bias;
    const auto k = detail::make_coefficients(device, bias, sim);
    const Normalization norm = normalize(device, 0.0);
    const double w = norm.from_rad_per_second(omega);

    // integer number of steps per probe period, dt not above the configured step
    const std::size_t per_period = static_cast<std::size_t>(std::ceil(two_pi / (w * sim.dt)));
    detail::StepPlan base;
    base.dt = two_pi / (w * static_cast<double>(per_period));
    base.seed = sim.seed;
    base.noise = sim.noise_enabled && k.gamma > 0;
    base.max_phase_rate = sim.max_phase_rate;
    // transient plus one settling period after the probe switches on
    base.transient_steps = static_cast<std::size_t>(std::llround(sim.t_transient / base.dt)) + per_period;

    // whole Hann blocks only
    auto whole = [](std::size_t p) { return p / kBlockPeriods * kBlockPeriods; };
    std::size_t periods = whole(cfg.min_periods);
    Extracted e = extract_once(k, base, per_period, periods, w, cfg.input_probe_flux, cfg.output_probe_current);
    while (!converged(e, cfg.target_rel_error) && periods < cfg.max_periods) {
        periods = whole(std::min(cfg.max_periods, periods * 2));
        e = extract_once(k, base, per_period, periods, w, cfg.input_probe_flux, cfg.output_probe_current);
    }

    if (cfg.check_linearity) {
        const Extracted half =
            extract_once(k, base, per_period, periods, w, 0.5 * cfg.input_probe_flux, 0.5 * cfg.output_probe_current);
        const std::pair<const Estimate*, const Estimate*> pairs[] = {
            {&e.z11, &half.z11}, {&e.z12, &half.z12}, {&e.z21, &half.z21}, {&e.z22, &half.z22}};
        for (const auto& [full, halved] : pairs) {
            const double tol = 0.05 * std::abs(full->mean) + 3.0 * std::hypot(full->se, halved->se);
            if (std::abs(full->mean - halved->mean) > tol)
                throw Error(ErrorKind::nonlinearity, "probe amplitude outside the linear-response regime");
        }
    }

    TwoPortZ z;
    z.omega = omega;
    z.bias = bias;
    z.periods = periods;
    const double R = device.R;
    z.Z11 = e.z11.mean * R;
    z.Z12 = e.z12.mean * R;
    z.Z21 = e.z21.mean * R;
    z.Z22 = e.z22.mean * R;
    z.se11 = e.z11.se * R;
    z.se12 = e.z12.se * R;
    z.se21 = e.z21.se * R;
    z.se22 = e.z22.se * R;
    z.V_phi = op.V_phi;
    z.V_dc = e.v_dc * norm.voltage_unit;
    return z;
}

double analytic_zf(const DeviceParams& device, double V_phi) { return device.M * V_phi / flux_quantum; }

double reverse_bracket(const DeviceParams& device, double V_phi) {
    return 1.0 + device.L / device.R * V_phi / flux_quantum;
}

double analytic_im_zr(const DeviceParams& device, double V_phi, double omega, double chi_r) {
    return chi_r * omega * device.L * reverse_bracket(device, V_phi);
}

Directionality directionality_from_terms(double vphi_over_omega, double bracket, double chi_r) {
    Directionality d;
    if (bracket == 0.0 || chi_r == 0.0) {
        d.infinite = true;
        d.ratio = std::numeric_limits<double>::infinity();
        d.dB = std::numeric_limits<double>::infinity();
        return d;
    }
    d.ratio = vphi_over_omega * vphi_over_omega / (chi_r * chi_r * bracket * bracket);
    d.dB = 10.0 * std::log10(d.ratio);
    return d;
}

Directionality directionality(const DeviceParams& device, double V_phi, double omega, double chi_r) {
    if (!(omega > 0)) throw ParameterError("omega", "must be > 0");
    return directionality_from_terms(V_phi / flux_quantum / omega, reverse_bracket(device, V_phi), chi_r);
}

BiasConstants extract_bias_constants(const TwoPortZ& z, const DeviceParams& device) {
    const double wl = z.omega * device.L;
    BiasConstants c;
    c.rho_i = z.Z11.real() * device.R / (wl * wl);
    c.rho_o = z.Z22.real() / device.R;
    const double bracket = reverse_bracket(device, z.V_phi);
    if (std::abs(bracket) >= 1e-3) c.chi_r = z.Z12.imag() / (wl * bracket);
    return c;
}

}  // namespace slugsim
