#pragma once

// Executes a RunConfig and writes its artifacts: CSV tables, summary.json
// and manifest.json into the output directory.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slugsim/config.hpp"

namespace slugsim {

struct ArtifactFile {
    std::string name;
    std::size_t bytes = 0;
    std::string sha256;
};

struct RunManifest {
    std::string experiment;
    std::string code_version;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double wall_time = 0;  // s
    std::size_t points_ok = 0;
    std::size_t points_masked = 0;
    std::string config_echo;  // serialize_config of the executed config
    std::vector<ArtifactFile> files;
};

/// In-memory result of an experiment, before anything touches the disk.
struct RunArtifacts {
    std::map<std::string, std::string> files;  // name -> content
    std::size_t points_ok = 0;
    std::size_t points_masked = 0;
};

/// Computes the experiment. Per-point failures are masked; only config
/// errors propagate.
RunArtifacts execute(const RunConfig& config);

/// Writes the files plus manifest.json. Fails with an io error before
/// writing anything if the directory cannot be created or written.
RunManifest emit_artifacts(const RunArtifacts& artifacts, const RunConfig& config, double wall_time);

/// execute + emit_artifacts into config.output_dir.
RunManifest run(const RunConfig& config);

std::string sha256_hex(const std::string& data);

}  // namespace slugsim
