#pragma once

// Run configuration: a JSON document whose keys carry their physical unit
// (I0_uA, L_pH, freq_GHz, ...). Everything is converted to SI on load.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "slugsim/backaction.hpp"
#include "slugsim/device.hpp"
#include "slugsim/scattering.hpp"
#include "slugsim/small_signal.hpp"

namespace slugsim {

enum class Experiment { vphi, twoport, smatrix, backaction, ramsey, pulsed };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

/// Inclusive linear range. count == 1 yields {start}; count == 0 is empty.
struct LinearGrid {
    double start = 0;
    double stop = 0;
    std::size_t count = 0;

    [[nodiscard]] std::vector<double> values() const;
    bool operator==(const LinearGrid&) const = default;
};

struct RunConfig {
    Experiment experiment = Experiment::vphi;
    DeviceParams device;
    SimConfig sim;
    ExtractionConfig extraction;
    MatchingNetwork network = MatchingNetwork::design();
    QubitCavityParams qubit_cavity;
    double T_cold = 0.05;  // K

    // bias; I_b in A, phi_a in Phi_0
    std::optional<double> I_b;
    std::optional<double> phi_a;

    // sweeps, stored in SI (flux in Phi_0)
    std::optional<LinearGrid> flux;
    std::optional<LinearGrid> freq;
    std::optional<LinearGrid> head_start;
    std::optional<LinearGrid> evolution;

    /// Steady-state cavity occupation for ramsey/pulsed. When absent it is
    /// derived from the device's nominal dissipation.
    std::optional<double> n_steady;
    std::vector<PulseEvent> sequence;

    std::string output_dir = "slugsim-out";
    unsigned workers = 1;

    /// Section presence and physical domains for the chosen experiment.
    void validate() const;

    bool operator==(const RunConfig&) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical JSON; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

}  // namespace slugsim
