#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "polycode/can_baseline.hpp"
#include "polycode/echo_sim.hpp"
#include "polycode/filter_design.hpp"
#include "polycode/optimizer.hpp"
#include "polycode/waveforms.hpp"

namespace polycode {

using Json = nlohmann::json;

// Invalid configuration; field() names the offending entry ("trips[1].trip").
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument("config field '" + field + "': " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// {label, length, phases_radians}
Json to_json(const PolyphaseCode& code);
PolyphaseCode code_from_json(const Json& j);

// {label, length, re, im, achieved_error, regularization_used}
Json to_json(const MismatchedFilter& filter);
MismatchedFilter filter_from_json(const Json& j);

// {mainlobe_width, joint_error, codes: [...], filters: [...]}
Json to_json(const CodeFilterSet& set);
CodeFilterSet set_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
// Two-space indented, trailing newline; identical values give identical bytes.
void write_json_file(const Json& j, const std::filesystem::path& path);

// CSV with header "start,iteration,error"; failed starts are omitted.
void write_trace_csv(const DesignResult& result, std::ostream& out);

struct DesignConfig {
    std::size_t M = 2;
    std::size_t L = 40;
    std::size_t filter_length = 480;
    std::size_t mainlobe_width = 5;
    int p = 1;
    std::size_t starts = 16;
    std::uint64_t seed = 1;
    std::size_t max_iterations = 500;
    double tolerance = 1e-8;

    void validate() const;
    ErrorFunctionConfig error_config() const;
    OptimizerConfig optimizer_config(std::size_t threads) const;
};
DesignConfig design_config_from_json(const Json& j);
Json to_json(const DesignConfig& cfg);

struct CanRunConfig {
    std::size_t M = 2;
    std::size_t L = 256;
    std::size_t band = 0;  // WeCAN lag band P; 0 = plain CAN
    std::size_t max_cycles = 2000;
    double tolerance = 1e-6;
    std::uint64_t seed = 1;

    CanConfig can_config() const;
};
CanRunConfig can_config_from_json(const Json& j);

enum class EvalMode { kCorrelation, kAmbiguity };

struct ChirpSource {
    double bandwidth_mhz = 2.0;
    double pulse_width_us = 20.0;
    std::size_t filter_length = 480;
    std::size_t mainlobe_width = 5;
};

struct HadamardSource {
    std::size_t order = 256;
    std::vector<std::size_t> rows{1, 2};
};

struct EvalConfig {
    std::optional<std::filesystem::path> set;  // resolved against the config directory
    std::optional<ChirpSource> chirp;
    std::optional<HadamardSource> hadamard;
    EvalMode mode = EvalMode::kCorrelation;
    std::size_t mainlobe_width = 5;  // sidelobe figures; overridden by a set file's own width
    double sample_rate_mhz = 2.0;
    double doppler_max_hz = 2000.0;
    double doppler_step_hz = 25.0;

    std::vector<double> doppler_grid() const;
};
EvalConfig eval_config_from_json(const Json& j, const std::filesystem::path& base_dir);

struct SimulateConfig {
    std::filesystem::path set;
    SuppressionScenario scenario;
    std::uint64_t seed = 1;
    std::size_t seeds = 16;
    std::vector<double> jitter_sweep_deg;  // single-target cross PSL per jitter value
    std::size_t jitter_pulses = 64;
};
SimulateConfig simulate_config_from_json(const Json& j, const std::filesystem::path& base_dir);

}  // namespace polycode
