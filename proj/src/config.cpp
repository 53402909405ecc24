#include "planrag/config.hpp"

#include <fstream>

namespace planrag::cli {

namespace {

bool well_formed_url(const std::string& url) {
    const bool http = url.starts_with("http://");
    const bool https = url.starts_with("https://");
    if (!http && !https) return false;
    const std::string host = url.substr(http ? 7 : 8);
    return !host.empty() && host != "/";
}

void check_url(const std::optional<std::string>& url, const char* field) {
    if (url && !well_formed_url(*url)) {
        throw ConfigError(std::string(field) + " is not a well-formed URL: " +
                          *url);
    }
}

}  // namespace

void validate(const EngineConfig& config) {
    if (config.run.plan_token_cap < 1 || config.run.answer_token_cap < 1 ||
        config.run.max_iterations < 1 || config.run.retrieval_k < 1 ||
        config.run.evidence_k < 1) {
        throw ConfigError("all run caps must be at least 1");
    }
    if (config.backends.retries < 0) {
        throw ConfigError("retries must be non-negative");
    }
    if (config.backends.timeout_ms < 1 || config.backends.backoff_base_ms < 0) {
        throw ConfigError("timeout/backoff values out of range");
    }
    if (config.in_flight < 1) {
        throw ConfigError("in_flight must be at least 1");
    }
    const bool has_lm = config.backends.lm_url.has_value();
    const bool has_mock = config.backends.mock_script.has_value();
    if (has_lm == has_mock) {
        throw ConfigError(
            "exactly one of backends.lm_url and backends.mock_script must be set");
    }
    check_url(config.backends.lm_url, "backends.lm_url");
    check_url(config.backends.reranker_url, "backends.reranker_url");
    check_url(config.backends.annotation_url, "backends.annotation_url");
}

nlohmann::ordered_json dump_config(const EngineConfig& config) {
    nlohmann::ordered_json run;
    run["plan_token_cap"] = config.run.plan_token_cap;
    run["answer_token_cap"] = config.run.answer_token_cap;
    run["max_iterations"] = config.run.max_iterations;
    run["retrieval_k"] = config.run.retrieval_k;
    run["evidence_k"] = config.run.evidence_k;
    run["evidence_mode"] =
        std::string(retrieval::evidence_mode_name(config.run.evidence_mode));
    run["stop_on_plan_repeat"] = config.run.stop_on_plan_repeat;

    nlohmann::ordered_json backends;
    auto put_optional = [&](const char* key,
                            const std::optional<std::string>& value) {
        if (value) {
            backends[key] = *value;
        } else {
            backends[key] = nullptr;
        }
    };
    put_optional("lm_url", config.backends.lm_url);
    put_optional("mock_script", config.backends.mock_script);
    put_optional("reranker_url", config.backends.reranker_url);
    put_optional("annotation_url", config.backends.annotation_url);
    backends["timeout_ms"] = config.backends.timeout_ms;
    backends["retries"] = config.backends.retries;
    backends["backoff_base_ms"] = config.backends.backoff_base_ms;

    nlohmann::ordered_json out;
    out["run"] = std::move(run);
    out["backends"] = std::move(backends);
    out["prompt_template"] = config.prompt_template;
    out["metrics"] = config.metrics;
    out["in_flight"] = config.in_flight;
    out["emit_timings"] = config.emit_timings;
    return out;
}

EngineConfig parse_config(const nlohmann::json& doc) {
    EngineConfig config;
    try {
        if (doc.contains("run")) {
            const auto& run = doc.at("run");
            config.run.plan_token_cap =
                run.value("plan_token_cap", config.run.plan_token_cap);
            config.run.answer_token_cap =
                run.value("answer_token_cap", config.run.answer_token_cap);
            config.run.max_iterations =
                run.value("max_iterations", config.run.max_iterations);
            config.run.retrieval_k =
                run.value("retrieval_k", config.run.retrieval_k);
            config.run.evidence_k = run.value("evidence_k", config.run.evidence_k);
            if (run.contains("evidence_mode")) {
                config.run.evidence_mode = retrieval::evidence_mode_from_name(
                    run.at("evidence_mode").get<std::string>());
            }
            config.run.stop_on_plan_repeat =
                run.value("stop_on_plan_repeat", config.run.stop_on_plan_repeat);
        }
        if (doc.contains("backends")) {
            const auto& backends = doc.at("backends");
            auto get_optional = [&](const char* key) -> std::optional<std::string> {
                if (!backends.contains(key) || backends.at(key).is_null()) {
                    return std::nullopt;
                }
                return backends.at(key).get<std::string>();
            };
            config.backends.lm_url = get_optional("lm_url");
            config.backends.mock_script = get_optional("mock_script");
            config.backends.reranker_url = get_optional("reranker_url");
            config.backends.annotation_url = get_optional("annotation_url");
            config.backends.timeout_ms =
                backends.value("timeout_ms", config.backends.timeout_ms);
            config.backends.retries =
                backends.value("retries", config.backends.retries);
            config.backends.backoff_base_ms =
                backends.value("backoff_base_ms", config.backends.backoff_base_ms);
        }
        config.prompt_template = doc.value("prompt_template", std::string());
        if (doc.contains("metrics")) {
            config.metrics = doc.at("metrics").get<std::vector<std::string>>();
        }
        config.in_flight = doc.value("in_flight", config.in_flight);
        config.emit_timings = doc.value("emit_timings", config.emit_timings);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return config;
}

EngineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    EngineConfig config = parse_config(doc);
    validate(config);
    return config;
}

}  // namespace planrag::cli
