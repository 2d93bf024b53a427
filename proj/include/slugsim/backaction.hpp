#pragma once

// Classical backaction of the SLUG on a dispersively read-out qubit:
// hot-electron heating of the shunts, thermal population of the readout
// cavity, ac Stark shift, photon dephasing, and Ramsey fringes versus SLUG
// head-start time.

#include <string>
#include <vector>

#include "slugsim/device.hpp"

namespace slugsim {

struct QubitCavityParams {
    double f_cavity = 6.605e9;      // Hz
    double chi_over_2pi = 0.75e6;   // Hz; the qubit-state cavity pull is 2 chi
    double kappa = 1.0 / 350e-9;    // s^-1
    double f_qubit = 5.5e9;         // Hz
    double T2 = 20e-6;              // s
    double ramsey_detuning = 5e6;   // Hz

    void validate() const;
    bool operator==(const QubitCavityParams&) const = default;
};

/// Hot-electron law P / (Sigma V) = Te^5 - Tp^5 solved for Te.
double electron_temperature(double power, const DeviceParams& device);

/// Bias power dissipated in the shunts, I_b * V_mean (SI units).
double static_dissipation(const BiasPoint& bias, double v_mean);

/// Bose-Einstein occupation of a mode at frequency f (Hz), temperature T (K).
double photon_occupation(double temperature, double frequency);

/// Inverse of photon_occupation.
double occupation_temperature(double n_bar, double frequency);

/// Temperature of a mode coupled symmetrically to a hot and a cold port:
/// the occupation is the mean of the two port occupations.
double effective_cavity_temperature(double T_hot, double T_cold, double frequency);

/// Qubit frequency shift (Hz) for mean photon number n_bar: 2 chi n_bar / 2 pi.
double stark_shift(double n_bar, const QubitCavityParams& qc);

/// Single-pole cavity ring-up n_steady (1 - exp(-kappa t)).
double cavity_fill(double n_steady, double kappa, double t);

/// Closed-form integral of cavity_fill over [t0, t0 + tau].
double cavity_fill_integral(double n_steady, double kappa, double t0, double tau);

/// Thermal-photon dephasing rate (s^-1) of a qubit dispersively coupled to a
/// cavity with mean occupation n_bar. Valid for any chi / kappa; reduces to
/// 4 chi^2 n (n + 1) / kappa when chi << kappa.
double photon_dephasing_rate(double n_bar, const QubitCavityParams& qc);

struct RamseySurface {
    std::vector<double> head_start;  // s
    std::vector<double> evolution;   // s
    /// amplitude[h * evolution.size() + e]
    std::vector<double> amplitude;

    [[nodiscard]] double at(std::size_t h, std::size_t e) const { return amplitude[h * evolution.size() + e]; }
};

RamseySurface ramsey_surface(const QubitCavityParams& qc, double n_steady, const std::vector<double>& head_start,
                             const std::vector<double>& evolution);

/// Fringe frequency (Hz) of each head-start row of the surface, from the
/// peak of the fringe periodogram.
std::vector<double> fringe_frequencies(const RamseySurface& surface);

struct RiseFit {
    double f_initial = 0;   // Hz
    double f_saturated = 0; // Hz
    double tau = 0;         // s
    double rms_residual = 0;
};

/// Least-squares fit of f(t) = f_sat - (f_sat - f_0) exp(-t / tau).
RiseFit fit_exponential_rise(const std::vector<double>& t, const std::vector<double>& f);

// Pulsed operation

enum class PulseKind { slug_active, half_pi, measure };

struct PulseEvent {
    PulseKind kind = PulseKind::slug_active;
    double start = 0;  // s
    double end = 0;    // s; equal to start for instantaneous pulses
};

enum class SlugState { idle, active };

struct TimelineInterval {
    double start = 0;
    double end = 0;
    SlugState state = SlugState::idle;
    bool free_evolution = false;
    double dissipated_energy = 0;   // J
    double photon_exposure = 0;     // photon-seconds (integral of n dt) during free evolution
    double n_start = 0;
    double n_end = 0;
};

struct PulsedTimeline {
    std::vector<TimelineInterval> intervals;
    double free_evolution_exposure = 0;  // photon-seconds
    double total_dissipated_energy = 0;  // J
};

/// Splits the sequence at every event boundary. The SLUG emits (cavity
/// relaxes toward n_steady) while active and reflects (cavity decays toward
/// zero) while idle. Free evolution runs from the first to the second
/// half_pi pulse. Throws sequence error for overlapping SLUG intervals,
/// overlapping qubit-track events, or a half_pi count other than 0 or 2.
PulsedTimeline pulsed_mode_timeline(const std::vector<PulseEvent>& events, double n_steady, double kappa,
                                    double active_power);

struct BackactionReport {
    double P_dissipated = 0;        // W
    double T_electron = 0;          // K
    double T_cold = 0;              // K
    double T_cavity_effective = 0;  // K
    double n_bar_steady = 0;
    double stark_shift = 0;         // Hz
    double dephasing_rate = 0;      // s^-1
    double josephson_frequency = 0; // Hz, f_J = V_mean / Phi_0
    std::vector<std::string> caveats;
};

/// Chains dissipation -> electron temperature -> cavity temperature ->
/// occupation -> Stark shift and dephasing.
BackactionReport backaction_chain(const DeviceParams& device, const BiasPoint& bias, double v_mean,
                                  const QubitCavityParams& qc, double T_cold = 0.05);

}  // namespace slugsim
