#pragma once

#include "varimotion/config.hpp"
#include "varimotion/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace varimotion {

/// Initial cloud of a run: generated shape or loaded file, then noise.
struct InitialCloud {
    PointCloudVarifold varifold;
    std::string note; // N adjustment or input description
};

InitialCloud prepare_initial_cloud(const RunConfig& config);

struct RunOutcome {
    int exit_code = 0;
    long steps_completed = 0;
    std::optional<long> failed_step;
    std::string failure;
    RunMetrics metrics;
    double wall_seconds = 0.0;
    double min_dominance_margin = 0.0;
};

/// Runs the configured flow, writing snapshots, metrics.csv and summary.json
/// into config.output_dir. Step failures end the run with exit code 2.
/// Progress lines go to `log` when given.
RunOutcome run(const RunConfig& config, std::ostream* log = nullptr);

} // namespace varimotion
