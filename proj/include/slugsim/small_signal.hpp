#pragma once

// Small-signal two-port of the biased SLUG, extracted by lock-in
// demodulation of perturbed Langevin runs, plus the closed-form gain,
// transimpedance and directionality approximations.

#include <complex>
#include <cstddef>
#include <optional>

#include "slugsim/device.hpp"

namespace slugsim {

using complex = std::complex<double>;

/// Open-circuit impedance matrix of the SLUG. Port 1 is the input node
/// (signal current into the loop inductor), port 2 is the output node.
struct TwoPortZ {
    double omega = 0;  // rad/s
    complex Z11, Z12, Z21, Z22;  // Ohm
    /// Lock-in standard errors (Ohm) of the four entries.
    double se11 = 0, se12 = 0, se21 = 0, se22 = 0;
    BiasPoint bias;
    double V_phi = 0;  // V / Phi_0
    double V_dc = 0;   // V
    std::size_t periods = 0;  // probe periods averaged
};

struct BiasConstants {
    double rho_i = 0;
    double rho_o = 0;
    /// Empty at the Faraday / interference cancellation point.
    std::optional<double> chi_r;
};

struct ExtractionConfig {
    double input_probe_flux = 1e-3;      // Phi_0
    double output_probe_current = 1e-2;  // I0
    std::size_t min_periods = 32;
    std::size_t max_periods = 256;
    /// Averaging is extended until every entry's standard error is below
    /// this fraction of its magnitude, or max_periods is reached.
    double target_rel_error = 0.02;
    /// Flux step (Phi_0) of the centered difference giving V_phi.
    double vphi_step = 5e-3;
    /// Refuse supercurrent-state biases.
    bool require_finite_voltage = true;
    /// Re-extract at half amplitude and throw nonlinearity error if any
    /// entry moves by more than 5 % (plus 3 combined standard errors).
    bool check_linearity = false;

    void validate() const;
    bool operator==(const ExtractionConfig&) const = default;
};

/// dc voltage and transfer coefficient at a bias point.
struct OperatingPoint {
    BiasPoint bias;
    double V_dc = 0;   // V
    double V_phi = 0;  // V / Phi_0

    [[nodiscard]] bool finite_voltage(const DeviceParams& device) const;
};

/// V_phi from a centered difference in flux of two runs sharing one noise
/// realization, each averaged over sim.t_total - sim.t_transient.
OperatingPoint operating_point(const DeviceParams& device, const BiasPoint& bias, const SimConfig& sim,
                               double flux_step = 5e-3);

/// Lock-in extraction of Z at angular frequency omega (rad/s). Each probe
/// (input flux, output current) is applied with +a and -a on a common noise
/// realization; the antisymmetric part is demodulated over an integer number
/// of probe periods. V_in is M d(I_1 + I_in)/dt from centered differences of
/// the sampled loop current.
TwoPortZ extract_two_port(const DeviceParams& device, const BiasPoint& bias, double omega, const SimConfig& sim,
                          const ExtractionConfig& cfg = {});

/// Same, reusing a previously computed operating point.
TwoPortZ extract_two_port(const DeviceParams& device, const OperatingPoint& op, double omega, const SimConfig& sim,
                          const ExtractionConfig& cfg = {});

/// Forward transimpedance Z_f = M V_phi (M = L for the SLUG). V_phi in V/Phi_0.
double analytic_zf(const DeviceParams& device, double V_phi);

/// Im[Z_r] = chi_r omega L (1 + (L/R) V_phi), V_phi in V/Phi_0.
double analytic_im_zr(const DeviceParams& device, double V_phi, double omega, double chi_r);

struct Directionality {
    bool infinite = false;
    double ratio = 0;
    double dB = 0;
};

/// D = chi_r^-2 (V_phi/omega)^2 bracket^-2 with V_phi/omega dimensionless
/// (V_phi in V/Wb). A zero bracket yields the infinite tag.
Directionality directionality_from_terms(double vphi_over_omega, double bracket, double chi_r);

/// Directionality of the device at transfer coefficient V_phi (V/Phi_0).
Directionality directionality(const DeviceParams& device, double V_phi, double omega, double chi_r);

/// rho_i = Re Z11 R / (omega L)^2, rho_o = Re Z22 / R,
/// chi_r = Im Z12 / (omega L (1 + L V_phi / R)).
BiasConstants extract_bias_constants(const TwoPortZ& z, const DeviceParams& device);

/// (1 + L V_phi / R) with V_phi in V/Phi_0.
double reverse_bracket(const DeviceParams& device, double V_phi);

}  // namespace slugsim
