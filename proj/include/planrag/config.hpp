#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "planrag/errors.hpp"
#include "planrag/orchestrator.hpp"

namespace planrag::cli {

struct BackendConfig {
    std::optional<std::string> lm_url;
    std::optional<std::string> mock_script;  // path to a script library file
    std::optional<std::string> reranker_url;
    std::optional<std::string> annotation_url;
    int timeout_ms = 10000;
    int retries = 2;
    int backoff_base_ms = 100;

    bool operator==(const BackendConfig&) const = default;
};

struct EngineConfig {
    orchestrator::RunConfig run;
    BackendConfig backends;
    std::string prompt_template;  // template file path; empty = builtin
    std::vector<std::string> metrics;  // empty = per-task defaults
    int in_flight = 4;
    bool emit_timings = false;

    bool operator==(const EngineConfig&) const = default;
};

/// Throws ConfigError on malformed URLs, negative retries, zero caps, or
/// when not exactly one of {lm_url, mock_script} is set.
void validate(const EngineConfig& config);

nlohmann::ordered_json dump_config(const EngineConfig& config);
EngineConfig parse_config(const nlohmann::json& doc);

/// Load + validate. Throws IoError when the file cannot be read and
/// ConfigError when it does not validate.
EngineConfig load_config(const std::string& path);

}  // namespace planrag::cli
