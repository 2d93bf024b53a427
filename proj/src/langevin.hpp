#pragma once

// Stochastic Heun integrator shared by the dc and small-signal paths.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <sstream>

#include "slugsim/constants.hpp"
#include "slugsim/device.hpp"
#include "slugsim/errors.hpp"

namespace slugsim::detail {

struct LoopCoefficients {
    double beta_L = 0;
    double beta_C = 0;
    double i_b = 0;
    double phi_a = 0;
    double input_coupling = 0;  // M I0 / Phi_0: loop flux per unit dimensionless input current
    double gamma = 0;
    bool junctions = true;
};

LoopCoefficients make_coefficients(const DeviceParams& device, const BiasPoint& bias, const SimConfig& sim);

struct StepPlan {
    double dt = 0.01;
    std::size_t transient_steps = 0;
    std::size_t steps = 0;  // post-transient steps
    std::uint64_t seed = 1;
    bool noise = true;
    double max_phase_rate = 1e3;
};

/// Post-transient step record. Times are measured from the start of the
/// post-transient window. `v_out` is the output voltage averaged over
/// [t, t + dt]; `i_seg` is the input-segment current i_b/2 + j + i_in at t.
struct StepRecord {
    std::size_t n;
    double t;
    double delta1;
    double delta2;
    double j;
    double i_seg;
    double v_out;
};

struct State {
    double d1 = 0, d2 = 0, u1 = 0, u2 = 0;
};

/// Runs plan.transient_steps + plan.steps Heun steps, calling
/// observer(const StepRecord&) for every post-transient step and once more
/// with the final state (v_out = NaN) so centered differences can close.
template <class Observer>
void run_heun(const LoopCoefficients& k, const StepPlan& plan, const std::optional<ProbeDrive>& drive,
              Observer&& observer) {
    const double dt = plan.dt;
    const double sigma = plan.noise ? std::sqrt(2.0 * k.gamma * dt) : 0.0;
    const double s = k.junctions ? 1.0 : 0.0;
    const double inv_beta_L = 1.0 / k.beta_L;

    double flux_amp = 0, bias_amp = 0, omega = 0;
    if (drive) {
        omega = drive->omega;
        if (drive->port == ProbePort::input_flux) flux_amp = drive->amplitude;
        else bias_amp = drive->amplitude;
    }

    std::mt19937_64 rng(plan.seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);

    // drive modulation at absolute step index m
    const std::size_t t0_index = plan.transient_steps;
    auto modulation = [&](std::size_t m) {
        if (omega == 0.0) return 0.0;
        const double t = (static_cast<double>(m) - static_cast<double>(t0_index)) * dt;
        return std::cos(omega * t);
    };
    struct Drive {
        double ib;      // instantaneous bias
        double phi;     // instantaneous total static + probe flux
        double i_in;    // input current
    };
    auto drive_at = [&](double c) {
        Drive d;
        d.ib = k.i_b + bias_amp * c;
        const double i_in = k.input_coupling > 0 ? flux_amp * c / k.input_coupling : 0.0;
        d.i_in = i_in;
        d.phi = k.phi_a + flux_amp * c + 0.25 * k.beta_L * bias_amp * c;
        return d;
    };
    auto circulating = [&](double d1, double d2, const Drive& d) {
        return ((d2 - d1) / constants::pi - 2.0 * d.phi) * inv_beta_L;
    };

    State x;
    x.d1 = -constants::pi * k.phi_a;
    x.d2 = constants::pi * k.phi_a;
    // Both phases are shifted by the same multiple of 2 pi to keep sin()
    // arguments small; `offset` restores absolute phases in the records.
    double offset = 0.0;
    constexpr double kWrap = 64.0 * constants::two_pi;

    const bool inertial = k.beta_C > 0.0;
    const double inv_bc = inertial ? 1.0 / k.beta_C : 0.0;
    const std::size_t total = plan.transient_steps + plan.steps;

    auto fail = [&](std::size_t m) {
        std::ostringstream os;
        os << "phase rate exceeded " << plan.max_phase_rate << " at step " << m << " (dt = " << dt << ")";
        throw Error(ErrorKind::integration_stability, os.str());
    };

    double c_next = modulation(0);
    for (std::size_t m = 0; m < total; ++m) {
        const Drive d0 = drive_at(c_next);
        c_next = modulation(m + 1);
        const Drive d1 = drive_at(c_next);
        double n1 = 0, n2 = 0;
        if (sigma > 0) {
            n1 = sigma * normal(rng);
            n2 = sigma * normal(rng);
        }
        const double j0 = circulating(x.d1, x.d2, d0);

        State next;
        if (!inertial) {
            const double f1 = 0.5 * d0.ib + j0 - s * std::sin(x.d1);
            const double f2 = 0.5 * d0.ib - j0 - s * std::sin(x.d2);
            const double p1 = x.d1 + dt * f1 + n1;
            const double p2 = x.d2 + dt * f2 + n2;
            const double jp = circulating(p1, p2, d1);
            const double g1 = 0.5 * d1.ib + jp - s * std::sin(p1);
            const double g2 = 0.5 * d1.ib - jp - s * std::sin(p2);
            next.d1 = x.d1 + 0.5 * dt * (f1 + g1) + n1;
            next.d2 = x.d2 + 0.5 * dt * (f2 + g2) + n2;
            if (!(std::abs(f1) < plan.max_phase_rate && std::abs(f2) < plan.max_phase_rate)) fail(m);
        } else {
            const double a1 = (0.5 * d0.ib + j0 - s * std::sin(x.d1) - x.u1) * inv_bc;
            const double a2 = (0.5 * d0.ib - j0 - s * std::sin(x.d2) - x.u2) * inv_bc;
            const double w1 = n1 * inv_bc, w2 = n2 * inv_bc;
            const double p1 = x.d1 + dt * x.u1, p2 = x.d2 + dt * x.u2;
            const double q1 = x.u1 + dt * a1 + w1, q2 = x.u2 + dt * a2 + w2;
            const double jp = circulating(p1, p2, d1);
            const double b1 = (0.5 * d1.ib + jp - s * std::sin(p1) - q1) * inv_bc;
            const double b2 = (0.5 * d1.ib - jp - s * std::sin(p2) - q2) * inv_bc;
            next.d1 = x.d1 + 0.5 * dt * (x.u1 + q1);
            next.d2 = x.d2 + 0.5 * dt * (x.u2 + q2);
            next.u1 = x.u1 + 0.5 * dt * (a1 + b1) + w1;
            next.u2 = x.u2 + 0.5 * dt * (a2 + b2) + w2;
            if (!(std::abs(x.u1) < plan.max_phase_rate && std::abs(x.u2) < plan.max_phase_rate)) fail(m);
        }

        if (m >= plan.transient_steps) {
            const std::size_t n = m - plan.transient_steps;
            StepRecord r{n,
                         static_cast<double>(n) * dt,
                         x.d1 + offset,
                         x.d2 + offset,
                         j0,
                         0.5 * d0.ib + j0 + d0.i_in,
                         (next.d2 - x.d2) / dt};
            observer(r);
        }
        x = next;
        if (x.d1 > kWrap || x.d1 < -kWrap) {
            const double shift = kWrap * std::floor(x.d1 / kWrap);
            x.d1 -= shift;
            x.d2 -= shift;
            offset += shift;
        }
    }

    const Drive dend = drive_at(modulation(total));
    const double jend = circulating(x.d1, x.d2, dend);
    StepRecord last{plan.steps, static_cast<double>(plan.steps) * dt, x.d1 + offset, x.d2 + offset, jend,
                    0.5 * dend.ib + jend + dend.i_in, std::nan("")};
    if (!std::isfinite(x.d1) || !std::isfinite(x.d2)) fail(total);
    observer(last);
}

}  // namespace slugsim::detail
