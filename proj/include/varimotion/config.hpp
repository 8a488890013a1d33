#pragma once

#include "varimotion/flow.hpp"
#include "varimotion/shapes.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace varimotion {

struct NoiseSpec {
    double std_dev = 0.0;
    std::uint64_t seed = 1;
};

struct RunConfig {
    std::string preset; // empty when built from scratch
    ShapeSpec shape;
    FlowConfig flow;
    NoiseSpec noise;
    std::optional<long> steps;
    std::optional<double> final_time;
    int snapshot_every = 10;
    std::string output_dir = "out";
    std::optional<std::string> input_file;
    /// Intrinsic dimension for clouds loaded from plain XYZ files.
    int intrinsic_dim = 1;
    int ambient_dim = 2;

    /// Throws ConfigError unless exactly one of steps/final_time is set,
    /// snapshot_every >= 1 and shape/flow parameters are valid.
    void validate() const;

    /// steps, or round(final_time / tau).
    long total_steps() const;
};

std::vector<std::string> preset_names();

/// Parameter sets of the reference experiments; throws ConfigError for
/// unknown names.
RunConfig make_preset(std::string_view name);

/// Applies a JSON document on top of `base` (a "preset" key is expanded
/// first). Unknown keys and bad values raise ConfigError naming the key path.
RunConfig parse_config(const nlohmann::json& doc, RunConfig base = {});
RunConfig load_config_file(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& config);

/// Command-line values; each set field replaces the configured value.
struct ConfigOverrides {
    std::optional<std::string> preset;
    std::optional<std::string> shape;
    std::optional<std::size_t> n;
    std::optional<int> k_eps;
    std::optional<int> k_sigma;
    std::optional<int> k_delta;
    std::optional<double> tau;
    std::optional<long> steps;
    std::optional<double> time;
    std::optional<std::string> projector;
    std::optional<std::string> scheme;
    std::optional<int> rebuild_every;
    std::optional<double> noise_std;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> snapshot_every;
    std::optional<std::string> input;
};

/// Throws ConfigError when both steps and time are given as overrides.
void apply_overrides(RunConfig& config, const ConfigOverrides& overrides);

} // namespace varimotion
