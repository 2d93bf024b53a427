#pragma once

// SLUG physical model and the stochastic time-domain integrator.
//
// Circuit: junction 2 connects the output node to ground; junction 1 connects
// the output node to ground through the loop inductance L. The input current
// is injected into the loop inductor segment of inductance M (M = L for the
// SLUG). Loop flux is
//
//     Phi = Phi_a + L * I_1 + M * I_in - L * I_b,dc / 2,
//
// where I_1 = I_b/2 + J is the junction-1 branch current and Phi_a is the
// static flux threading the loop at zero circulating current (the dc bias
// contribution L * I_b,dc / 2 is absorbed into Phi_a). In units where time is
// Phi_0 / (2 pi I0 R), currents are I0 and voltages I0 R:
//
//     beta_C d2(delta_1) + d(delta_1) + sin delta_1 = i_b/2 + j + noise_1
//     beta_C d2(delta_2) + d(delta_2) + sin delta_2 = i_b/2 - j + noise_2
//     j = [(delta_2 - delta_1)/pi - 2 phi_tot] / beta_L
//     phi_tot = phi_a + (M I0/Phi_0) i_in + beta_L (i_b(t) - i_b,dc) / 4
//
// Output node voltage is d(delta_2)/dt; input node voltage is
// M d(i_b/2 + j + i_in)/dt.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace slugsim {

struct DeviceParams {
    double I0 = 20e-6;           // critical current per junction (A)
    double R = 8.0;              // shunt resistance per junction (Ohm)
    double C = 0.0;              // junction capacitance (F)
    double L = 6.7e-12;          // loop inductance (H)
    double M = 6.7e-12;          // input mutual inductance (H)
    double shunt_volume = 5e-19; // normal-metal volume (m^3)
    double sigma_ep = 1.2e9;     // electron-phonon coupling (W m^-3 K^-5)
    double T_phonon = 0.1;       // K
    std::optional<double> T_electron_override;  // K
    double P_nominal = 1e-9;     // static dissipation setting the default noise temperature (W)

    /// Throws ParameterError naming the offending field.
    void validate() const;

    /// Noise temperature used by the integrator: the override if present,
    /// otherwise the hot-electron temperature at P_nominal.
    [[nodiscard]] double noise_temperature() const;

    bool operator==(const DeviceParams&) const = default;
};

/// Dimensionless unit system of the SQUID equations.
struct Normalization {
    double time_unit = 0;     // s
    double voltage_unit = 0;  // V
    double current_unit = 0;  // A
    double flux_unit = 0;     // Wb
    double beta_L = 0;
    double beta_C = 0;
    double gamma_noise = 0;

    [[nodiscard]] double to_seconds(double t) const { return t * time_unit; }
    [[nodiscard]] double from_seconds(double t) const { return t / time_unit; }
    [[nodiscard]] double to_volts(double v) const { return v * voltage_unit; }
    [[nodiscard]] double from_volts(double v) const { return v / voltage_unit; }
    [[nodiscard]] double to_amperes(double i) const { return i * current_unit; }
    [[nodiscard]] double from_amperes(double i) const { return i / current_unit; }
    /// Angular frequency in rad/s <-> dimensionless.
    [[nodiscard]] double to_rad_per_second(double w) const { return w / time_unit; }
    [[nodiscard]] double from_rad_per_second(double w) const { return w * time_unit; }
};

Normalization normalize(const DeviceParams& device, double T_noise);

struct BiasPoint {
    double I_b = 0;    // A
    double phi_a = 0;  // Phi_0

    /// phi_a folded into [0, 1).
    [[nodiscard]] double reduced_flux() const;
};

struct SimConfig {
    double dt = 0.01;
    double t_total = 2e5;
    double t_transient = 1e3;
    std::uint64_t seed = 1;
    bool noise_enabled = true;
    /// false drops the sin(delta) supercurrent terms (I0 -> 0 limit, units kept).
    bool junctions_enabled = true;
    /// |d(delta)/dt| above this is treated as a divergent integration.
    double max_phase_rate = 1e3;
    /// Keep every n-th step in the trajectory; 0 keeps no samples.
    std::size_t record_stride = 0;

    void validate() const;

    bool operator==(const SimConfig&) const = default;
};

enum class ProbePort { input_flux, output_current };

/// Small-signal sinusoidal probe a * cos(omega t), dimensionless.
/// input_flux amplitudes are in Phi_0, output_current amplitudes in I0.
struct ProbeDrive {
    ProbePort port = ProbePort::input_flux;
    double amplitude = 0;
    double omega = 0;
};

struct PhaseTrajectory {
    std::vector<double> times;
    std::vector<double> delta1;
    std::vector<double> delta2;
    /// Output voltage averaged over each recording stride.
    std::vector<double> v_inst;
    std::vector<double> j_circ;
    double v_mean = 0;
    /// Batch-means standard error of v_mean.
    double v_stderr = 0;
    std::size_t steps = 0;
};

/// Integrates the two-junction Langevin system. Noise is Johnson noise of the
/// two shunts at device.noise_temperature(). Everything is dimensionless.
PhaseTrajectory integrate_langevin(const DeviceParams& device, const BiasPoint& bias,
                                   const SimConfig& sim,
                                   const std::optional<ProbeDrive>& drive = std::nullopt);

struct TransferCurve {
    double I_b = 0;               // A
    std::vector<double> flux;     // Phi_0
    std::vector<double> voltage;  // V
    std::vector<double> stderr_v; // V
    std::vector<double> v_phi;    // V / Phi_0

    [[nodiscard]] double peak_to_peak() const;
};

/// V-Phi sweep at fixed bias current. Point k uses the random stream derived
/// from (sim.seed, k), so the result does not depend on `workers`.
TransferCurve v_phi_curve(const DeviceParams& device, double I_b, const std::vector<double>& flux_grid,
                          const SimConfig& sim, unsigned workers = 1);

/// Centered finite-difference gradient dy/dx on a (possibly non-uniform) grid;
/// one-sided at the endpoints. Throws gradient_undefined for < 3 points.
std::vector<double> centered_gradient(const std::vector<double>& x, const std::vector<double>& y);

/// Independent per-task seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace slugsim
