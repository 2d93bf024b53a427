#pragma once

// Embedding of the SLUG two-port between a 50 Ohm source (through a lumped
// LC input match) and a 50 Ohm load, and the flux x frequency S-parameter map.

#include <string>
#include <utility>
#include <vector>

#include "slugsim/small_signal.hpp"

namespace slugsim {

/// Transmission (chain) matrix [A B; C D].
struct Abcd {
    complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

    [[nodiscard]] complex det() const { return a * d - b * c; }
    friend Abcd operator*(const Abcd& x, const Abcd& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
};

Abcd series_impedance(complex z);
Abcd shunt_admittance(complex y);

/// Single-pole LC section: shunt C_m on the source side, series L_m toward
/// the SLUG input. At f_center it transforms Z_source down to
/// Z_char^2 / Z_source (with reactance -Z_char looking back into it).
struct MatchingNetwork {
    double L_m = 0;          // H
    double C_m = 0;          // F
    double f_center = 0;     // Hz
    double Z_source = 50.0;  // Ohm
    double Z_load = 50.0;    // Ohm

    /// Element values for characteristic impedance z_char at f_center.
    static MatchingNetwork design(double z_char = 2.0, double f_center = 6e9, double z_source = 50.0,
                                  double z_load = 50.0);

    [[nodiscard]] double z_char() const;
    [[nodiscard]] Abcd abcd(double omega) const;
    void validate() const;

    bool operator==(const MatchingNetwork&) const = default;
};

struct SParams {
    complex s11, s12, s21, s22;
    /// The SLUG conveyed no transimpedance (|Z21| below threshold) and was
    /// treated as two decoupled one-ports.
    bool decoupled = false;
};

/// Power-wave S-parameters of a chain matrix between real references z1, z2.
SParams s_from_abcd(const Abcd& m, double z1, double z2);

/// Chain matrix of an impedance two-port; throws passivity error when
/// Z21 vanishes (use cascade_s_parameters for that case).
Abcd abcd_from_z(complex z11, complex z12, complex z21, complex z22);

/// Source -- matching network -- SLUG -- load.
SParams cascade_s_parameters(const TwoPortZ& z, const MatchingNetwork& network, double omega);

/// |S21|^2 and |S12|^2 for conjugate-matched ports: |Z|^2 / (4 R_i R_o) with
/// R_i = rho_i (omega L)^2 / R and R_o = rho_o R.
std::pair<double, double> ideal_matched_gain(const TwoPortZ& z, const BiasConstants& constants,
                                             const DeviceParams& device);

enum class PointStatus { ok, masked };

struct MapPoint {
    PointStatus status = PointStatus::ok;
    std::string reason;  // empty when ok
};

struct ScatteringMap {
    double bias_current = 0;          // A
    std::vector<double> flux;         // Phi_0
    std::vector<double> freq;         // Hz
    /// Row-major (flux, freq); NaN where masked.
    std::vector<double> S21_dB;
    std::vector<double> S12_dB;
    std::vector<MapPoint> status;
    /// Per flux point.
    std::vector<double> V_dc;         // V
    std::vector<double> V_phi;        // V / Phi_0
    /// Per (flux, freq) point, as extracted.
    std::vector<TwoPortZ> two_port;

    [[nodiscard]] std::size_t index(std::size_t i_flux, std::size_t i_freq) const {
        return i_flux * freq.size() + i_freq;
    }
    [[nodiscard]] std::size_t masked_count() const;
};

/// For every flux point: operating point, then per frequency extract_two_port
/// and cascade. Supercurrent-state flux points and per-point failures are
/// masked with a reason instead of aborting. Point (i, j) draws its noise
/// from derive_seed(sim.seed, index(i, j)), so results do not depend on
/// `workers`.
ScatteringMap scattering_map(const DeviceParams& device, double I_b, const std::vector<double>& flux_grid,
                             const std::vector<double>& freq_grid, const MatchingNetwork& network,
                             const SimConfig& sim, const ExtractionConfig& cfg = {}, unsigned workers = 1);

}  // namespace slugsim
