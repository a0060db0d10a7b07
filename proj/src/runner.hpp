#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mfg {

struct RunOutcome {
    int exit_code = 0; // 0 success, 2 validation failure, 3 solver non-convergence
    std::string run_dir;
    std::string message;
};

// Executes one CLI command end to end: parse + validate the config, run the
// pipeline, and persist manifest.json, config.json, summary.txt and the
// command's CSV/JSON artifacts into a fresh run directory.
// Commands: solve | lq-oracle | nash-gap | chaos | wasserstein-rate | validate.
RunOutcome run_command(const std::string& command, const std::string& config_text,
                       const std::string& out_dir, std::optional<std::uint64_t> seed_override,
                       bool quiet);

} // namespace mfg
