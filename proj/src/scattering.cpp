#include "slugsim/scattering.hpp"

#include <cmath>
#include <limits>

#include "slugsim/constants.hpp"
#include "slugsim/errors.hpp"
#include "slugsim/parallel.hpp"

namespace slugsim {

using constants::two_pi;

Abcd series_impedance(complex z) { return {1.0, z, 0.0, 1.0}; }
Abcd shunt_admittance(complex y) { return {1.0, 0.0, y, 1.0}; }

MatchingNetwork MatchingNetwork::design(double z_char, double f_center, double z_source, double z_load) {
    if (!(z_char > 0)) throw ParameterError("network.Z_char", "must be > 0");
    if (!(f_center > 0)) throw ParameterError("network.f_center", "must be > 0");
    MatchingNetwork n;
    const double w0 = two_pi * f_center;
    n.L_m = z_char / w0;
    n.C_m = 1.0 / (w0 * z_char);
    n.f_center = f_center;
    n.Z_source = z_source;
    n.Z_load = z_load;
    n.validate();
    return n;
}

double MatchingNetwork::z_char() const { return std::sqrt(L_m / C_m); }

void MatchingNetwork::validate() const {
    if (!(L_m > 0)) throw ParameterError("network.L_m", "must be > 0");
    if (!(C_m > 0)) throw ParameterError("network.C_m", "must be > 0");
    if (!(Z_source > 0)) throw ParameterError("network.Z_source", "must be > 0");
    if (!(Z_load > 0)) throw ParameterError("network.Z_load", "must be > 0");
}

Abcd MatchingNetwork::abcd(double omega) const {
    return shunt_admittance(complex(0.0, omega * C_m)) * series_impedance(complex(0.0, omega * L_m));
}

SParams s_from_abcd(const Abcd& m, double z1, double z2) {
    const complex den = m.a * z2 + m.b + m.c * z1 * z2 + m.d * z1;
    const double k = 2.0 * std::sqrt(z1 * z2);
    SParams s;
    s.s11 = (m.a * z2 + m.b - m.c * z1 * z2 - m.d * z1) / den;
    s.s12 = k * m.det() / den;
    s.s21 = k / den;
    s.s22 = (-m.a * z2 + m.b - m.c * z1 * z2 + m.d * z1) / den;
    return s;
}

Abcd abcd_from_z(complex z11, complex z12, complex z21, complex z22) {
    if (std::abs(z21) == 0.0) throw Error(ErrorKind::passivity, "Z21 = 0 has no chain-matrix form");
    const complex det = z11 * z22 - z12 * z21;
    return {z11 / z21, det / z21, 1.0 / z21, z22 / z21};
}

SParams cascade_s_parameters(const TwoPortZ& z, const MatchingNetwork& network, double omega) {
    if (!(omega > 0)) throw ParameterError("omega", "must be > 0");
    network.validate();
    const Abcd match = network.abcd(omega);
    const double scale = std::max({std::abs(z.Z11), std::abs(z.Z22), 1e-300});
    if (std::abs(z.Z21) <= 1e-12 * scale) {
        // no forward transimpedance: input and output are decoupled one-ports
        SParams s;
        s.decoupled = true;
        const SParams in = s_from_abcd(match * shunt_admittance(1.0 / z.Z11), network.Z_source, 1.0);
        s.s11 = in.s11;
        s.s22 = (z.Z22 - network.Z_load) / (z.Z22 + network.Z_load);
        return s;
    }
    return s_from_abcd(match * abcd_from_z(z.Z11, z.Z12, z.Z21, z.Z22), network.Z_source, network.Z_load);
}

std::pair<double, double> ideal_matched_gain(const TwoPortZ& z, const BiasConstants& constants,
                                             const DeviceParams& device) {
    const double wl = z.omega * device.L;
    const double r_in = constants.rho_i * wl * wl / device.R;
    const double r_out = constants.rho_o * device.R;
    if (!(r_in > 0) || !(r_out > 0))
        throw Error(ErrorKind::passivity, "non-positive port resistance; extraction is not passive at the ports");
    const double den = 4.0 * r_in * r_out;
    return {std::norm(z.Z21) / den, std::norm(z.Z12) / den};
}

std::size_t ScatteringMap::masked_count() const {
    std::size_t n = 0;
    for (const auto& p : status) n += p.status == PointStatus::masked;
    return n;
}

namespace {
constexpr std::uint64_t kOperatingPointStream = 0x0b1a5ull;
}

ScatteringMap scattering_map(const DeviceParams& device, double I_b, const std::vector<double>& flux_grid,
                             const std::vector<double>& freq_grid, const MatchingNetwork& network,
                             const SimConfig& sim, const ExtractionConfig& cfg, unsigned workers) {
    device.validate();
    sim.validate();
    network.validate();
    for (double f : freq_grid)
        if (!(f > 0)) throw ParameterError("freq_grid", "frequencies must be > 0");

    ScatteringMap map;
    map.bias_current = I_b;
    map.flux = flux_grid;
    map.freq = freq_grid;
    const std::size_t nf = flux_grid.size(), nw = freq_grid.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    map.S21_dB.assign(nf * nw, nan);
    map.S12_dB.assign(nf * nw, nan);
    map.status.assign(nf * nw, {});
    map.two_port.assign(nf * nw, {});
    map.V_dc.assign(nf, nan);
    map.V_phi.assign(nf, nan);

    std::vector<OperatingPoint> ops(nf);
    std::vector<std::string> op_error(nf);
    const std::uint64_t op_seed = derive_seed(sim.seed, kOperatingPointStream);
    parallel_for(nf, workers, [&](std::size_t i) {
        SimConfig s = sim;
        s.seed = derive_seed(op_seed, i);
        try {
            ops[i] = operating_point(device, BiasPoint{I_b, flux_grid[i]}, s, cfg.vphi_step);
            map.V_dc[i] = ops[i].V_dc;
            map.V_phi[i] = ops[i].V_phi;
        } catch (const Error& e) {
            op_error[i] = to_string(e.kind());
        }
    });

    parallel_for(nf * nw, workers, [&](std::size_t idx) {
        const std::size_t i = idx / nw, j = idx % nw;
        auto mask = [&](std::string why) {
            map.status[idx] = {PointStatus::masked, std::move(why)};
        };
        if (!op_error[i].empty()) return mask(op_error[i]);
        if (!ops[i].finite_voltage(device)) return mask("supercurrent");
        SimConfig s = sim;
        s.seed = derive_seed(sim.seed, idx);
        try {
            const double omega = two_pi * freq_grid[j];
            const TwoPortZ z = extract_two_port(device, ops[i], omega, s, cfg);
            const SParams sp = cascade_s_parameters(z, network, omega);
            const double s21 = 20.0 * std::log10(std::abs(sp.s21));
            const double s12 = 20.0 * std::log10(std::abs(sp.s12));
            map.two_port[idx] = z;
            if (!std::isfinite(s21) || !std::isfinite(s12)) return mask("non_finite");
            map.S21_dB[idx] = s21;
            map.S12_dB[idx] = s12;
        } catch (const Error& e) {
            mask(to_string(e.kind()));
        }
    });
    return map;
}

}  // namespace slugsim
