#pragma once

// Experiment configuration: JSON parsing and schema validation with
// JSON-pointer error paths, plus a defaults-applied echo used by the run
// manifest so a run can be reproduced bit-exactly from its outputs.

#include <cstdint>
#include <string>
#include <vector>

#include "opcwalk/environment.hpp"
#include "opcwalk/regeneration.hpp"
#include "opcwalk/stats.hpp"

namespace opcwalk {

// Per-command settings beyond the shared fields; all have usable defaults.
struct PairTvSettings {
    std::vector<int> separations{0, 4, 8, 16, 32};
    int samples = 5000;  // pairs per law per separation
    int tau_clip = 64;
};

struct AnnulusSettings {
    double r1 = 10;
    double r = 20;
    double r2 = 40;
    int samples = 5000;
    int max_skeleton = 100000;
    Matrix sigma{};          // optional covariance; whitened when given
    bool has_sigma = false;  // zero matrix means plain sup-norm separation
};

struct MixingSettings {
    std::string mode = "alpha";  // or "phi"
    std::string axis = "time";   // or "space", "spacetime"
    std::vector<int> gaps{1, 2, 3, 4, 6, 8};
};

struct TailSettings {
    bool include_pair = true;  // also sample the first simultaneous time
    int separation = 0;        // starting separation of the pair, along axis 1
};

struct OracleSettings {
    int runs = 100000;  // empirical sample size per window and sampler
};

struct ExperimentConfig {
    std::string command;
    LatticeConfig lattice;
    WeightFieldSpec weight_spec;
    int m = 1;
    long long steps = 1000;  // walk steps, or regeneration increments per record (drift)
    int replicas = 1000;
    int environments = 2;  // quenched mode only
    std::uint64_t master_seed = 1;
    std::string output_dir;
    int threads = 1;
    RegenOptions regen;
    long long clt_presteps = 0;  // 0: choose automatically from `steps`
    PairTvSettings pair;
    AnnulusSettings annulus;
    MixingSettings mixing;
    TailSettings tail;
    OracleSettings oracle;
};

struct ConfigParse {
    ExperimentConfig config;
    std::vector<std::string> errors;  // "<json pointer>: message"
    bool ok() const { return errors.empty(); }
};

const std::vector<std::string>& command_names();

// Full schema validation of raw JSON text for the given command verb; every
// violation is reported with the JSON pointer of the offending value.  On
// success the returned config has every default applied.
ConfigParse validate_config(const std::string& raw, const std::string& command);

// Canonical JSON echo of a config (defaults applied, keys sorted): equal
// configs produce equal bytes.
std::string config_echo_json(const ExperimentConfig& cfg);

}  // namespace opcwalk
