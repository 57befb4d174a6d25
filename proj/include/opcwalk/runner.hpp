#pragma once

// Experiment orchestration: dispatches a validated config to the matching
// experiment, writes deterministic CSV/JSON outputs plus a manifest, and
// reports whether any replica exhausted its budget (partial results).

#include <memory>
#include <string>
#include <vector>

#include "opcwalk/config.hpp"
#include "opcwalk/environment.hpp"

namespace opcwalk {

inline constexpr const char* kVersion = "opcwalk 1.0.0";

struct RunManifest {
    std::string command;
    std::vector<std::string> files;  // outputs written, relative to output_dir
    bool partial = false;            // a budget ran out somewhere; results are incomplete
    double wall_ms = 0;
};

// Named finite windows with tractable exact laws, shared by the oracle-check
// command and the acceptance runs.
struct OracleWindow {
    std::string name;
    std::unique_ptr<WindowEnvironment> env;
    int steps;  // horizon of the exact dynamic program
};
std::vector<OracleWindow> oracle_windows();

// Runs cfg.command and writes results plus manifest.json into cfg.output_dir
// (created if missing).  Throws std::invalid_argument on unusable configs and
// std::runtime_error on I/O failures.
RunManifest run_experiment(const ExperimentConfig& cfg);

}  // namespace opcwalk
