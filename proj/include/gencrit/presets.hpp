#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "gencrit/harness.hpp"

namespace gencrit {

/// One directional claim checked by a preset. Hard claims drive the exit
/// code; exploratory claims are emergent at full scale and only reported.
struct ClaimResult {
    std::string name;
    bool pass = false;
    bool exploratory = false;
    std::string detail;
};

struct PresetArm {
    std::string name;
    RunConfig config;  // seed is overwritten per run
    std::vector<RunResult> runs;
};

struct PresetResult {
    std::string name;
    std::vector<PresetArm> arms;
    std::vector<ClaimResult> claims;

    bool hard_pass() const;
};

struct PresetOptions {
    std::vector<std::uint64_t> seeds;  // empty: {1,2,3,4,5}
    int steps_override = 0;            // 0: preset default
    std::string output_dir;            // empty: nothing written to disk
    bool echo = false;
};

std::vector<std::string> preset_names();

/// Runs every arm of the named preset across the seeds, prints a pass/fail
/// line per claim to `out`, and (with an output dir) writes per-run metrics
/// CSVs, a comparison CSV, and the claim lines.
PresetResult run_experiment_preset(const std::string& name, const PresetOptions& options,
                                   std::ostream& out);

/// Detects the reward-hacking signature in one run's trace: generation
/// success falling below its starting value while critique reward rises.
bool hacking_signature(const RunResult& run);

}  // namespace gencrit
