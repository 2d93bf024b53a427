#include "slugsim/backaction.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "slugsim/constants.hpp"
#include "slugsim/errors.hpp"

namespace slugsim {

using constants::boltzmann;
using constants::planck;
using constants::two_pi;

void QubitCavityParams::validate() const {
    auto req = [](bool ok, const char* f, const char* w) {
        if (!ok) throw ParameterError(f, w);
    };
    req(f_cavity > 0, "qubit_cavity.f_cavity", "must be > 0");
    req(chi_over_2pi >= 0, "qubit_cavity.chi_over_2pi", "must be >= 0");
    req(kappa > 0, "qubit_cavity.kappa", "must be > 0");
    req(f_qubit > 0, "qubit_cavity.f_qubit", "must be > 0");
    req(T2 > 0, "qubit_cavity.T2", "must be > 0");
    req(std::isfinite(ramsey_detuning), "qubit_cavity.ramsey_detuning", "must be finite");
}

double electron_temperature(double power, const DeviceParams& device) {
    if (!(power >= 0)) throw ParameterError("P", "dissipated power must be >= 0");
    if (!(device.sigma_ep > 0)) throw ParameterError("device.sigma_ep", "must be > 0");
    if (!(device.shunt_volume > 0)) throw ParameterError("device.shunt_volume", "must be > 0");
    const double tp5 = std::pow(device.T_phonon, 5);
    return std::pow(power / (device.sigma_ep * device.shunt_volume) + tp5, 0.2);
}

double static_dissipation(const BiasPoint& bias, double v_mean) { return bias.I_b * v_mean; }

double photon_occupation(double temperature, double frequency) {
    if (!(temperature >= 0)) throw ParameterError("T", "temperature must be >= 0");
    if (!(frequency > 0)) throw ParameterError("f", "frequency must be > 0");
    if (temperature == 0) return 0.0;
    return 1.0 / std::expm1(planck * frequency / (boltzmann * temperature));
}

double occupation_temperature(double n_bar, double frequency) {
    if (!(n_bar >= 0)) throw ParameterError("n_bar", "must be >= 0");
    if (!(frequency > 0)) throw ParameterError("f", "frequency must be > 0");
    if (n_bar == 0) return 0.0;
    return planck * frequency / (boltzmann * std::log1p(1.0 / n_bar));
}

double effective_cavity_temperature(double T_hot, double T_cold, double frequency) {
    const double n = 0.5 * (photon_occupation(T_hot, frequency) + photon_occupation(T_cold, frequency));
    return occupation_temperature(n, frequency);
}

double stark_shift(double n_bar, const QubitCavityParams& qc) { return 2.0 * qc.chi_over_2pi * n_bar; }

double cavity_fill(double n_steady, double kappa, double t) { return n_steady * -std::expm1(-kappa * t); }

double cavity_fill_integral(double n_steady, double kappa, double t0, double tau) {
    // n_s * [tau - e^{-k t0} (1 - e^{-k tau}) / k]
    return n_steady * (tau + std::exp(-kappa * t0) * std::expm1(-kappa * tau) / kappa);
}

double photon_dephasing_rate(double n_bar, const QubitCavityParams& qc) {
    if (n_bar <= 0) return 0.0;
    const double chi = two_pi * qc.chi_over_2pi;
    const double x = chi / qc.kappa;
    const std::complex<double> a(1.0, 2.0 * x);
    const std::complex<double> root = std::sqrt(a * a + std::complex<double>(0.0, 8.0 * x * n_bar));
    return 0.5 * qc.kappa * (root.real() - 1.0);
}

namespace {

// Simpson integral of the dephasing rate along the ring-up, t in [t0, t0 + tau].
double dephasing_exponent(const QubitCavityParams& qc, double n_steady, double t0, double tau) {
    if (n_steady <= 0 || tau <= 0) return 0.0;
    constexpr int kIntervals = 32;
    const double h = tau / kIntervals;
    double sum = 0;
    for (int i = 0; i <= kIntervals; ++i) {
        const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * photon_dephasing_rate(cavity_fill(n_steady, qc.kappa, t0 + i * h), qc);
    }
    return sum * h / 3.0;
}

double periodogram(const RamseySurface& s, std::size_t row, double f) {
    double re = 0, im = 0;
    for (std::size_t e = 0; e < s.evolution.size(); ++e) {
        const double ph = two_pi * f * s.evolution[e];
        const double y = s.at(row, e);
        re += y * std::cos(ph);
        im -= y * std::sin(ph);
    }
    return re * re + im * im;
}

template <class F>
double golden_max(F&& f, double a, double b, int iters = 80) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a); fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

RamseySurface ramsey_surface(const QubitCavityParams& qc, double n_steady, const std::vector<double>& head_start,
                             const std::vector<double>& evolution) {
    qc.validate();
    if (head_start.empty() || evolution.empty()) throw ParameterError("grid", "ramsey grids must be non-empty");
    for (double t : head_start)
        if (!(t >= 0)) throw ParameterError("head_start", "must be >= 0");
    for (double t : evolution)
        if (!(t >= 0)) throw ParameterError("evolution", "must be >= 0");
    if (!(n_steady >= 0)) throw ParameterError("n_steady", "must be >= 0");

    RamseySurface s;
    s.head_start = head_start;
    s.evolution = evolution;
    s.amplitude.resize(head_start.size() * evolution.size());
    const double pull = 2.0 * qc.chi_over_2pi;
    for (std::size_t h = 0; h < head_start.size(); ++h) {
        for (std::size_t e = 0; e < evolution.size(); ++e) {
            const double tau = evolution[e];
            const double photons = cavity_fill_integral(n_steady, qc.kappa, head_start[h], tau);
            const double phase = two_pi * (qc.ramsey_detuning * tau + pull * photons);
            const double decay = tau / qc.T2 + dephasing_exponent(qc, n_steady, head_start[h], tau);
            s.amplitude[h * evolution.size() + e] = std::exp(-decay) * std::cos(phase);
        }
    }
    return s;
}

std::vector<double> fringe_frequencies(const RamseySurface& s) {
    std::vector<double> out(s.head_start.size(), 0.0);
    const std::size_t n = s.evolution.size();
    if (n < 4) throw ParameterError("evolution", "need at least 4 evolution samples");
    const double span = s.evolution.back() - s.evolution.front();
    const double step = span / static_cast<double>(n - 1);
    if (!(span > 0)) throw ParameterError("evolution", "grid must span a positive interval");
    const double f_max = 0.5 / step;
    const double df = 0.25 / span;
    for (std::size_t h = 0; h < s.head_start.size(); ++h) {
        double best_f = df, best_p = -1;
        for (double f = df; f < f_max; f += df) {
            const double p = periodogram(s, h, f);
            if (p > best_p) {
                best_p = p;
                best_f = f;
            }
        }
        out[h] = golden_max([&](double f) { return periodogram(s, h, f); }, std::max(0.0, best_f - df),
                            std::min(f_max, best_f + df));
    }
    return out;
}

RiseFit fit_exponential_rise(const std::vector<double>& t, const std::vector<double>& f) {
    if (t.size() != f.size() || t.size() < 3) throw ParameterError("fit", "need >= 3 matched samples");
    const double span = *std::max_element(t.begin(), t.end()) - *std::min_element(t.begin(), t.end());
    if (!(span > 0)) throw ParameterError("fit", "time samples must span a positive interval");

    // For fixed tau the model is linear in (f_sat, f_sat - f_0).
    auto solve = [&](double tau, RiseFit& fit) {
        double s1 = 0, se = 0, see = 0, sf = 0, sef = 0;
        const double n = static_cast<double>(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double e = std::exp(-t[i] / tau);
            se += e; see += e * e; sf += f[i]; sef += e * f[i];
        }
        s1 = n;
        const double det = s1 * see - se * se;
        const double a = (see * sf - se * sef) / det;   // f_sat
        const double b = (s1 * sef - se * sf) / det;    // -(f_sat - f_0)
        double sse = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double r = f[i] - (a + b * std::exp(-t[i] / tau));
            sse += r * r;
        }
        fit.f_saturated = a;
        fit.f_initial = a + b;
        fit.tau = tau;
        fit.rms_residual = std::sqrt(sse / n);
        return sse;
    };

    RiseFit fit;
    double best_log = 0, best_sse = std::numeric_limits<double>::infinity();
    const double lo = std::log(span * 1e-3), hi = std::log(span * 1e2);
    for (int i = 0; i <= 400; ++i) {
        const double lt = lo + (hi - lo) * i / 400.0;
        const double sse = solve(std::exp(lt), fit);
        if (sse < best_sse) {
            best_sse = sse;
            best_log = lt;
        }
    }
    const double w = (hi - lo) / 400.0;
    const double lt = golden_max([&](double x) { return -solve(std::exp(x), fit); }, best_log - w, best_log + w);
    solve(std::exp(lt), fit);
    return fit;
}

PulsedTimeline pulsed_mode_timeline(const std::vector<PulseEvent>& events, double n_steady, double kappa,
                                    double active_power) {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::sequence, what); };
    if (!(kappa > 0)) throw ParameterError("kappa", "must be > 0");
    if (!(n_steady >= 0)) throw ParameterError("n_steady", "must be >= 0");

    std::vector<const PulseEvent*> slug, qubit;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (!(e.end >= e.start) || !std::isfinite(e.start) || !std::isfinite(e.end))
            fail("event " + std::to_string(i) + " ends before it starts");
        if (i > 0 && e.start < events[i - 1].start) fail("events are not time-ordered at index " + std::to_string(i));
        (e.kind == PulseKind::slug_active ? slug : qubit).push_back(&e);
    }
    auto check_disjoint = [&](const std::vector<const PulseEvent*>& track, const char* name) {
        for (std::size_t i = 1; i < track.size(); ++i)
            if (track[i]->start < track[i - 1]->end) fail(std::string("overlapping ") + name + " events");
    };
    check_disjoint(slug, "SLUG");
    check_disjoint(qubit, "qubit");

    std::vector<double> pulses;
    for (const auto* e : qubit)
        if (e->kind == PulseKind::half_pi) pulses.push_back(e->start), pulses.push_back(e->end);
    if (pulses.size() != 0 && pulses.size() != 4) fail("sequence needs zero or two half-pi pulses");
    const bool has_ramsey = pulses.size() == 4;
    const double fe_start = has_ramsey ? pulses[1] : 0.0;
    const double fe_end = has_ramsey ? pulses[2] : 0.0;

    std::vector<double> cuts;
    for (const auto& e : events) cuts.push_back(e.start), cuts.push_back(e.end);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    PulsedTimeline out;
    double n = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        TimelineInterval iv;
        iv.start = cuts[i];
        iv.end = cuts[i + 1];
        const double mid = 0.5 * (iv.start + iv.end);
        for (const auto* e : slug)
            if (mid > e->start && mid < e->end) iv.state = SlugState::active;
        iv.free_evolution = has_ramsey && mid > fe_start && mid < fe_end;

        const double d = iv.end - iv.start;
        const double target = iv.state == SlugState::active ? n_steady : 0.0;
        iv.n_start = n;
        const double integral = target * d - (n - target) * std::expm1(-kappa * d) / kappa;
        n = target + (n - target) * std::exp(-kappa * d);
        iv.n_end = n;
        if (iv.free_evolution) iv.photon_exposure = integral;
        if (iv.state == SlugState::active) iv.dissipated_energy = active_power * d;

        out.free_evolution_exposure += iv.photon_exposure;
        out.total_dissipated_energy += iv.dissipated_energy;
        out.intervals.push_back(iv);
    }
    return out;
}

BackactionReport backaction_chain(const DeviceParams& device, const BiasPoint& bias, double v_mean,
                                  const QubitCavityParams& qc, double T_cold) {
    qc.validate();
    if (!(T_cold >= 0)) throw ParameterError("T_cold", "must be >= 0");
    BackactionReport r;
    r.P_dissipated = static_dissipation(bias, v_mean);
    r.T_electron = electron_temperature(r.P_dissipated, device);
    r.T_cold = T_cold;
    r.T_cavity_effective = effective_cavity_temperature(r.T_electron, T_cold, qc.f_cavity);
    r.n_bar_steady = photon_occupation(r.T_cavity_effective, qc.f_cavity);
    r.stark_shift = stark_shift(r.n_bar_steady, qc);
    r.dephasing_rate = photon_dephasing_rate(r.n_bar_steady, qc);
    r.josephson_frequency = v_mean / constants::flux_quantum;
    r.caveats = {
        "dephasing_rate uses the general thermal-photon dephasing formula (not given by the source model)",
        "dressed dephasing is not modeled",
        "Josephson emission is reported as f_J only; it is assumed filtered from qubit and cavity",
    };
    return r;
}

}  // namespace slugsim
