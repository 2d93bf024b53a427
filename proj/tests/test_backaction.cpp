#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "slugsim/backaction.hpp"
#include "slugsim/errors.hpp"

using namespace slugsim;

namespace {

constexpr double kCavity = 6.605e9;

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

double exposure_oracle(double n_s, double kappa, double t0, double t1) {
    // integral of n_s (1 - exp(-kappa t)) over [t0, t1]
    return n_s * ((t1 - t0) + (std::exp(-kappa * t1) - std::exp(-kappa * t0)) / kappa);
}

}  // namespace

TEST(HotElectron, NominalShuntTemperature) {
    const DeviceParams d;
    const double te = electron_temperature(1e-9, d);
    EXPECT_NEAR(te, oracle::hot_electron(1e-9, 5e-19, 1.2e9, 0.1), 1e-12);
    EXPECT_NEAR(te, 1.1076, 1e-4);
    DeviceParams big = d;
    big.shunt_volume *= 2;
    EXPECT_NEAR(electron_temperature(1e-9, big), 0.9642, 1e-4);
}

TEST(HotElectron, MonotoneAndReducesToPhononTemperature) {
    const DeviceParams d;
    EXPECT_NEAR(electron_temperature(0.0, d), d.T_phonon, 1e-15);
    double prev = electron_temperature(0.0, d);
    for (double p = 1e-15; p < 1e-7; p *= 3) {
        const double t = electron_temperature(p, d);
        EXPECT_GT(t, prev);
        EXPECT_GE(t, d.T_phonon);
        prev = t;
    }
    EXPECT_THROW(electron_temperature(-1e-12, d), ParameterError);
}

TEST(HotElectron, StaticDissipation) {
    EXPECT_NEAR(static_dissipation(BiasPoint{40e-6, 0.3}, 25e-6), 1e-9, 1e-21);
}

TEST(Occupation, BoseEinsteinValues) {
    EXPECT_NEAR(photon_occupation(0.6, kCavity), oracle::bose_einstein(0.6, kCavity), 1e-12);
    EXPECT_NEAR(photon_occupation(0.6, kCavity), 1.4366, 1e-4);
    EXPECT_EQ(photon_occupation(0.0, kCavity), 0.0);
    // Rayleigh-Jeans limit
    const double T = 50.0;
    EXPECT_NEAR(photon_occupation(T, kCavity), oracle::kB * T / (oracle::h * kCavity) - 0.5, 1e-3);
}

TEST(Occupation, RoundTrip) {
    for (double T : {0.02, 0.1, 0.6, 1.1, 4.2, 300.0}) {
        const double back = occupation_temperature(photon_occupation(T, kCavity), kCavity);
        EXPECT_NEAR(back / T, 1.0, 1e-9) << T;
    }
    EXPECT_EQ(occupation_temperature(0.0, kCavity), 0.0);
}

TEST(Occupation, EffectiveCavityTemperature) {
    const double T_hot = oracle::hot_electron(1e-9, 5e-19, 1.2e9, 0.1);
    const double n = 0.5 * (oracle::bose_einstein(T_hot, kCavity) + oracle::bose_einstein(0.05, kCavity));
    const double expected = oracle::h * kCavity / (oracle::kB * std::log1p(1.0 / n));
    const double teff = effective_cavity_temperature(T_hot, 0.05, kCavity);
    EXPECT_NEAR(teff, expected, 1e-9);
    EXPECT_NEAR(teff, 0.6, 0.03);
    EXPECT_NEAR(effective_cavity_temperature(0.3, 0.3, kCavity), 0.3, 1e-12);
    EXPECT_LT(teff, T_hot);
    EXPECT_GT(teff, 0.05);
}

TEST(Dispersive, StarkShift) {
    const QubitCavityParams qc;
    EXPECT_NEAR(stark_shift(1.47, qc), 1.5e6 * 1.47, 1e-6);
    EXPECT_NEAR(stark_shift(1.47, qc), 2.2e6, 0.05 * 2.2e6);
}

TEST(Dispersive, DephasingLimits) {
    QubitCavityParams qc;
    EXPECT_EQ(photon_dephasing_rate(0.0, qc), 0.0);
    // weak dispersive coupling
    qc.chi_over_2pi = 200;
    const double chi = 2 * oracle::pi * qc.chi_over_2pi;
    for (double n : {0.1, 1.5, 4.0}) {
        const double weak = 4 * chi * chi * n * (n + 1) / qc.kappa;
        EXPECT_NEAR(photon_dephasing_rate(n, qc) / weak, 1.0, 1e-3) << n;
    }
    // dilute photons, any coupling: n kappa 4 chi^2 / (kappa^2 + 4 chi^2)
    for (double c : {0.1e6, 0.75e6, 20e6}) {
        qc.chi_over_2pi = c;
        const double x = 2 * oracle::pi * c;
        const double n = 1e-5;
        const double dilute = n * qc.kappa * 4 * x * x / (qc.kappa * qc.kappa + 4 * x * x);
        EXPECT_NEAR(photon_dephasing_rate(n, qc) / dilute, 1.0, 1e-3) << c;
    }
}

TEST(Dispersive, DephasingGrowsWithOccupation) {
    const QubitCavityParams qc;
    double prev = 0;
    for (double n = 0.05; n < 5; n += 0.05) {
        const double g = photon_dephasing_rate(n, qc);
        EXPECT_GT(g, prev);
        prev = g;
    }
}

TEST(CavityFill, RingUpAndIntegral) {
    const double k = 1 / 350e-9;
    EXPECT_EQ(cavity_fill(1.5, k, 0.0), 0.0);
    EXPECT_NEAR(cavity_fill(1.5, k, 350e-9), 1.5 * (1 - std::exp(-1.0)), 1e-12);
    EXPECT_NEAR(cavity_fill_integral(1.5, k, 200e-9, 300e-9), exposure_oracle(1.5, k, 200e-9, 500e-9), 1e-18);
}

TEST(Ramsey, EmptyCavityGivesBareFringe) {
    const QubitCavityParams qc;
    const auto ev = linspace(0, 1e-6, 101);
    const auto s = ramsey_surface(qc, 0.0, {0.0, 500e-9}, ev);
    for (std::size_t e = 0; e < ev.size(); ++e) {
        const double bare = std::exp(-ev[e] / qc.T2) * std::cos(2 * oracle::pi * qc.ramsey_detuning * ev[e]);
        EXPECT_NEAR(s.at(0, e), bare, 1e-12);
        EXPECT_NEAR(s.at(1, e), bare, 1e-12);
    }
    const auto f = fringe_frequencies(s);
    EXPECT_NEAR(f[0], qc.ramsey_detuning, 0.01 * qc.ramsey_detuning);
}

TEST(Ramsey, FringeFrequencyRisesAndSaturates) {
    const QubitCavityParams qc;
    const double n = 1.47;
    const auto hs = linspace(0, 3e-6, 31);
    const auto s = ramsey_surface(qc, n, hs, linspace(0, 1e-6, 401));
    const auto f = fringe_frequencies(s);
    for (std::size_t i = 1; i < f.size(); ++i) EXPECT_GE(f[i], f[i - 1] - 1e3) << i;
    const double sat = qc.ramsey_detuning + stark_shift(n, qc);
    EXPECT_NEAR(f.back(), sat, 0.01 * sat);
    EXPECT_LT(f.front(), sat - 0.25 * stark_shift(n, qc));
}

TEST(Ramsey, EnvelopeShrinksWithOccupation) {
    QubitCavityParams qc;
    const double hs = 20e-6;  // cavity fully rung up
    const auto ev = linspace(50e-9, 1e-6, 60);
    std::vector<double> prev(ev.size(), 2.0);
    for (double n : {0.0, 0.5, 1.5, 3.0}) {
        const auto s = ramsey_surface(qc, n, {hs}, ev);
        for (std::size_t e = 0; e < ev.size(); ++e) {
            const double freq = qc.ramsey_detuning + 2 * qc.chi_over_2pi * n;
            const double c = std::cos(2 * oracle::pi * freq * ev[e]);
            if (std::abs(c) < 0.3) continue;
            const double env = s.at(0, e) / c;
            EXPECT_GT(env, 0);
            EXPECT_LE(env, prev[e] + 1e-12);
            prev[e] = env;
        }
    }
}

TEST(Ramsey, RiseFitRecoversCavityTime) {
    const QubitCavityParams qc;
    const auto hs = linspace(0, 1e-6, 41);
    const auto s = ramsey_surface(qc, 1.47, hs, linspace(0, 1e-6, 401));
    const auto fit = fit_exponential_rise(hs, fringe_frequencies(s));
    EXPECT_NEAR(fit.tau, 350e-9, 35e-9);
    EXPECT_NEAR(fit.f_saturated, qc.ramsey_detuning + 2.2e6, 0.05 * 2.2e6);
}

TEST(RiseFit, ExactOnSyntheticCurve) {
    const auto t = linspace(0, 2e-6, 50);
    std::vector<double> f;
    for (double x : t) f.push_back(7e6 - 2e6 * std::exp(-x / 400e-9));
    const auto fit = fit_exponential_rise(t, f);
    EXPECT_NEAR(fit.tau, 400e-9, 1e-12);
    EXPECT_NEAR(fit.f_saturated, 7e6, 1e-3);
    EXPECT_NEAR(fit.f_initial, 5e6, 1e-3);
}

TEST(Pulsed, ActivationAfterRamseyGivesNoExposure) {
    const std::vector<PulseEvent> seq{{PulseKind::half_pi, 0, 0},
                                      {PulseKind::half_pi, 500e-9, 500e-9},
                                      {PulseKind::slug_active, 500e-9, 2500e-9},
                                      {PulseKind::measure, 500e-9, 2500e-9}};
    const auto tl = pulsed_mode_timeline(seq, 1.5, 1 / 350e-9, 1e-9);
    EXPECT_EQ(tl.free_evolution_exposure, 0.0);
    EXPECT_NEAR(tl.total_dissipated_energy, 1e-9 * 2000e-9, 1e-24);
}

TEST(Pulsed, HeadStartExposureMatchesRingUp) {
    const double k = 1 / 350e-9;
    const std::vector<PulseEvent> seq{{PulseKind::slug_active, 0, 3e-6},
                                      {PulseKind::half_pi, 400e-9, 400e-9},
                                      {PulseKind::half_pi, 900e-9, 900e-9}};
    const auto tl = pulsed_mode_timeline(seq, 1.5, k, 1e-9);
    EXPECT_NEAR(tl.free_evolution_exposure, exposure_oracle(1.5, k, 400e-9, 900e-9), 1e-18);
}

TEST(Pulsed, IdleSlugReflectsAndCavityDecays) {
    const double k = 1 / 350e-9;
    const std::vector<PulseEvent> seq{{PulseKind::slug_active, 0, 1e-6},
                                      {PulseKind::half_pi, 1.2e-6, 1.2e-6},
                                      {PulseKind::half_pi, 1.7e-6, 1.7e-6}};
    const auto tl = pulsed_mode_timeline(seq, 1.5, k, 1e-9);
    const double n_off = 1.5 * (1 - std::exp(-k * 1e-6));
    const double expected = n_off * (std::exp(-k * 0.2e-6) - std::exp(-k * 0.7e-6)) / k;
    EXPECT_NEAR(tl.free_evolution_exposure, expected, 1e-18);
    for (const auto& iv : tl.intervals)
        if (iv.start >= 1e-6) EXPECT_EQ(iv.state, SlugState::idle);
}

TEST(Pulsed, InvalidSequences) {
    auto kind = [](const std::vector<PulseEvent>& seq) {
        try {
            pulsed_mode_timeline(seq, 1.0, 1e6, 0);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::io;
    };
    EXPECT_EQ(kind({{PulseKind::slug_active, 0, 2e-6}, {PulseKind::slug_active, 1e-6, 3e-6}}), ErrorKind::sequence);
    EXPECT_EQ(kind({{PulseKind::half_pi, 0, 0}}), ErrorKind::sequence);
    EXPECT_EQ(kind({{PulseKind::slug_active, 2e-6, 1e-6}}), ErrorKind::sequence);
    EXPECT_EQ(kind({{PulseKind::measure, 0, 2e-6}, {PulseKind::half_pi, 1e-6, 1e-6}, {PulseKind::half_pi, 3e-6, 3e-6}}),
              ErrorKind::sequence);
}

TEST(Chain, NominalDissipationToStarkShift) {
    const DeviceParams d;
    const QubitCavityParams qc;
    const BiasPoint bias{40e-6, 0.9};
    const auto r = backaction_chain(d, bias, 25e-6, qc, 0.05);
    EXPECT_NEAR(r.P_dissipated, 1e-9, 1e-10);
    EXPECT_NEAR(r.T_electron, 1.1, 0.11);
    EXPECT_NEAR(r.T_cavity_effective, 0.6, 0.06);
    EXPECT_NEAR(r.n_bar_steady, 1.5, 0.15);
    EXPECT_NEAR(r.stark_shift, 2.2e6, 0.22e6);
    EXPECT_NEAR(r.josephson_frequency, 25e-6 / oracle::phi0, 1.0);
    EXPECT_GE(r.T_cavity_effective, r.T_cold);
    EXPECT_GT(r.dephasing_rate, 0);
    EXPECT_FALSE(r.caveats.empty());
}
