#include "slugsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "langevin.hpp"
#include "slugsim/backaction.hpp"
#include "slugsim/constants.hpp"
#include "slugsim/errors.hpp"
#include "slugsim/parallel.hpp"

namespace slugsim {

namespace {

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw ParameterError(field, what);
}

constexpr std::size_t kBatches = 40;

}  // namespace

void DeviceParams::validate() const {
    require(std::isfinite(I0) && I0 > 0, "device.I0", "must be > 0");
    require(std::isfinite(R) && R > 0, "device.R", "must be > 0");
    require(std::isfinite(L) && L > 0, "device.L", "must be > 0");
    require(std::isfinite(M) && M > 0, "device.M", "must be > 0");
    require(std::isfinite(C) && C >= 0, "device.C", "must be >= 0");
    require(std::isfinite(shunt_volume) && shunt_volume > 0, "device.shunt_volume", "must be > 0");
    require(std::isfinite(sigma_ep) && sigma_ep > 0, "device.sigma_ep", "must be > 0");
    require(std::isfinite(T_phonon) && T_phonon >= 0, "device.T_phonon", "must be >= 0");
    require(std::isfinite(P_nominal) && P_nominal >= 0, "device.P_nominal", "must be >= 0");
    if (T_electron_override)
        require(std::isfinite(*T_electron_override) && *T_electron_override >= 0, "device.T_electron_override",
                "must be >= 0");
}

double DeviceParams::noise_temperature() const {
    if (T_electron_override) return *T_electron_override;
    return electron_temperature(P_nominal, *this);
}

Normalization normalize(const DeviceParams& device, double T_noise) {
    device.validate();
    if (!(T_noise >= 0)) throw ParameterError("T_noise", "must be >= 0");
    using namespace constants;
    Normalization n;
    n.current_unit = device.I0;
    n.voltage_unit = device.I0 * device.R;
    n.flux_unit = flux_quantum;
    n.time_unit = flux_quantum / (two_pi * device.I0 * device.R);
    n.beta_L = 2.0 * device.L * device.I0 / flux_quantum;
    n.beta_C = two_pi * device.I0 * device.R * device.R * device.C / flux_quantum;
    n.gamma_noise = two_pi * boltzmann * T_noise / (device.I0 * flux_quantum);
    return n;
}

double BiasPoint::reduced_flux() const {
    const double r = phi_a - std::floor(phi_a);
    return r >= 1.0 ? 0.0 : r;
}

void SimConfig::validate() const {
    require(std::isfinite(dt) && dt > 0 && dt <= 0.1, "sim.dt", "must lie in (0, 0.1]");
    require(std::isfinite(t_total) && t_total > 0, "sim.t_total", "must be > 0");
    require(std::isfinite(t_transient) && t_transient >= 0 && t_transient < t_total, "sim.t_transient",
            "must lie in [0, t_total)");
    require(max_phase_rate > 0, "sim.max_phase_rate", "must be > 0");
}

namespace detail {

LoopCoefficients make_coefficients(const DeviceParams& device, const BiasPoint& bias, const SimConfig& sim) {
    const double T = sim.noise_enabled ? device.noise_temperature() : 0.0;
    const Normalization n = normalize(device, T);
    LoopCoefficients k;
    k.beta_L = n.beta_L;
    k.beta_C = n.beta_C;
    k.i_b = bias.I_b / device.I0;
    k.phi_a = bias.phi_a;
    k.input_coupling = device.M * device.I0 / constants::flux_quantum;
    k.gamma = n.gamma_noise;
    k.junctions = sim.junctions_enabled;
    return k;
}

}  // namespace detail

PhaseTrajectory integrate_langevin(const DeviceParams& device, const BiasPoint& bias, const SimConfig& sim,
                                   const std::optional<ProbeDrive>& drive) {
    sim.validate();
    const auto k = detail::make_coefficients(device, bias, sim);

    detail::StepPlan plan;
    plan.dt = sim.dt;
    plan.transient_steps = static_cast<std::size_t>(std::llround(sim.t_transient / sim.dt));
    plan.steps = static_cast<std::size_t>(std::llround((sim.t_total - sim.t_transient) / sim.dt));
    plan.steps = std::max<std::size_t>(plan.steps, 1);
    plan.seed = sim.seed;
    plan.noise = sim.noise_enabled && k.gamma > 0;
    plan.max_phase_rate = sim.max_phase_rate;

    PhaseTrajectory out;
    out.steps = plan.steps;
    const std::size_t stride = sim.record_stride;
    const double t_offset = static_cast<double>(plan.transient_steps) * sim.dt;

    const std::size_t batch_len = std::max<std::size_t>(plan.steps / kBatches, 1);
    std::vector<double> batch_means;
    double batch_sum = 0, total_sum = 0, stride_sum = 0;
    std::size_t in_batch = 0, in_stride = 0;

    detail::run_heun(k, plan, drive, [&](const detail::StepRecord& r) {
        if (r.n == plan.steps) return;
        total_sum += r.v_out;
        batch_sum += r.v_out;
        if (++in_batch == batch_len) {
            batch_means.push_back(batch_sum / static_cast<double>(batch_len));
            batch_sum = 0;
            in_batch = 0;
        }
        if (stride > 0) {
            if (in_stride == 0) {
                out.times.push_back(t_offset + r.t);
                out.delta1.push_back(r.delta1);
                out.delta2.push_back(r.delta2);
                out.j_circ.push_back(r.j);
            }
            stride_sum += r.v_out;
            if (++in_stride == stride || r.n + 1 == plan.steps) {
                out.v_inst.push_back(stride_sum / static_cast<double>(in_stride));
                stride_sum = 0;
                in_stride = 0;
            }
        }
    });

    out.v_mean = total_sum / static_cast<double>(plan.steps);
    if (batch_means.size() >= 2) {
        double m = 0;
        for (double b : batch_means) m += b;
        m /= static_cast<double>(batch_means.size());
        double var = 0;
        for (double b : batch_means) var += (b - m) * (b - m);
        var /= static_cast<double>(batch_means.size() - 1);
        out.v_stderr = std::sqrt(var / static_cast<double>(batch_means.size()));
    }
    return out;
}

double TransferCurve::peak_to_peak() const {
    if (voltage.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(voltage.begin(), voltage.end());
    return *hi - *lo;
}

std::vector<double> centered_gradient(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ParameterError("grid", "x and y sizes differ");
    const std::size_t n = x.size();
    if (n < 3) throw Error(ErrorKind::gradient_undefined, "gradient needs at least 3 grid points");
    std::vector<double> g(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        // second-order centered formula for non-uniform spacing
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        g[i] = (h0 * h0 * y[i + 1] - h1 * h1 * y[i - 1] + (h1 * h1 - h0 * h0) * y[i]) / (h0 * h1 * (h0 + h1));
    }
    g[0] = (y[1] - y[0]) / (x[1] - x[0]);
    g[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    return g;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 over a combined key
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + index + 0x632BE59BD9B4E019ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

TransferCurve v_phi_curve(const DeviceParams& device, double I_b, const std::vector<double>& flux_grid,
                          const SimConfig& sim, unsigned workers) {
    if (flux_grid.size() < 3) throw Error(ErrorKind::gradient_undefined, "flux grid needs at least 3 points");
    device.validate();
    sim.validate();
    const double vu = device.I0 * device.R;

    TransferCurve c;
    c.I_b = I_b;
    c.flux = flux_grid;
    c.voltage.resize(flux_grid.size());
    c.stderr_v.resize(flux_grid.size());

    parallel_for(flux_grid.size(), workers, [&](std::size_t i) {
        SimConfig s = sim;
        s.record_stride = 0;
        s.seed = derive_seed(sim.seed, i);
        const auto tr = integrate_langevin(device, BiasPoint{I_b, flux_grid[i]}, s);
        c.voltage[i] = tr.v_mean * vu;
        c.stderr_v[i] = tr.v_stderr * vu;
    });
    c.v_phi = centered_gradient(c.flux, c.voltage);
    return c;
}

}  // namespace slugsim
