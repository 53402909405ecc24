#include "planrag/wire_clients.hpp"

#include <chrono>
#include <fstream>
#include <thread>

#include "httplib.h"

namespace planrag::cli {

namespace {

constexpr const char* kBuiltinTemplate =
    "{instruction}\n"
    "\n"
    "Question:\n"
    "{x}\n"
    "\n"
    "Evidence:\n"
    "{e}\n"
    "\n"
    "Answer so far:\n"
    "{y_history}\n"
    "\n"
    "Current topic:\n"
    "{plan}\n"
    "\n"
    "Response:\n";

constexpr const char* kPlanInstruction =
    "Propose the next topic for answering the question. Reply with the topic "
    "between <plan_start> and <plan_end>. Reply <NOT_NEED_EXTRA_INFO> if no "
    "retrieved knowledge is needed, or <EOS> if the answer is complete.";

constexpr const char* kAnswerInstruction =
    "Write the next answer segment between <answer_start> and <answer_end>, "
    "grounded in the evidence when given. Append <EOS> after <answer_end> "
    "once the answer is complete.";

void replace_all(std::string& text, const std::string& needle,
                 const std::string& value) {
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
}

std::string finish_reason_error(const nlohmann::json& body) {
    return "response is missing a string \"text\" field: " + body.dump();
}

}  // namespace

nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, const WireOptions& options) {
    std::string last_error;
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(
                options.backoff_base_ms * (1L << (attempt - 1))));
        }
        httplib::Client client(base_url);
        client.set_connection_timeout(std::chrono::milliseconds(options.timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(options.timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(options.timeout_ms));

        httplib::Result result =
            client.Post(path, body.dump(), "application/json");
        if (!result) {
            last_error = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status < 200 || result->status >= 300) {
            last_error = "HTTP " + std::to_string(result->status) + " from " +
                         base_url + path;
            continue;
        }
        try {
            return nlohmann::json::parse(result->body);
        } catch (const nlohmann::json::exception& e) {
            last_error = std::string("unparseable response body: ") + e.what();
            continue;
        }
    }
    throw BackendUnavailable(base_url + path + " unavailable after " +
                             std::to_string(options.retries + 1) +
                             " attempts: " + last_error);
}

PromptTemplate PromptTemplate::builtin() {
    return PromptTemplate(kBuiltinTemplate);
}

PromptTemplate PromptTemplate::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open prompt template: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return PromptTemplate(std::move(text));
}

std::string PromptTemplate::render(const orchestrator::LmRequest& request) const {
    std::string out = text_;
    replace_all(out, "{instruction}",
                request.mode == orchestrator::LmMode::Plan ? kPlanInstruction
                                                           : kAnswerInstruction);
    replace_all(out, "{x}", request.part(orchestrator::PartKind::UserInput));
    replace_all(out, "{e}", request.part(orchestrator::PartKind::Evidence));
    replace_all(out, "{y_history}", request.part(orchestrator::PartKind::History));
    replace_all(out, "{plan}", request.part(orchestrator::PartKind::Plan));
    return out;
}

HttpLmBackend::HttpLmBackend(std::string base_url, WireOptions options,
                             PromptTemplate prompt_template)
    : base_url_(std::move(base_url)),
      options_(options),
      template_(std::move(prompt_template)) {}

orchestrator::LmResponse HttpLmBackend::generate(
    const orchestrator::LmRequest& request) {
    nlohmann::json body;
    body["mode"] = std::string(orchestrator::lm_mode_name(request.mode));
    body["prompt"] = template_.render(request);
    body["max_new_tokens"] = request.max_new_tokens;
    body["stop"] = request.stop;
    body["temperature"] = request.temperature;

    const nlohmann::json response = post_json(base_url_, "/generate", body, options_);
    if (!response.contains("text") || !response.at("text").is_string()) {
        throw BackendUnavailable(finish_reason_error(response));
    }
    orchestrator::LmResponse out;
    out.text = response.at("text").get<std::string>();
    const std::string reason = response.value("finish_reason", "stop");
    if (reason == "stop") {
        out.finish_reason = orchestrator::FinishReason::Stop;
    } else if (reason == "length") {
        out.finish_reason = orchestrator::FinishReason::Length;
    } else if (reason == "error") {
        out.finish_reason = orchestrator::FinishReason::Error;
    } else {
        throw BackendUnavailable("unknown finish_reason: " + reason);
    }
    return out;
}

std::vector<double> HttpRerankerScorer::score(
    const std::string& plan, const std::vector<std::string>& sentences) {
    nlohmann::json body;
    body["query"] = plan;
    body["sentences"] = sentences;
    const nlohmann::json response = post_json(base_url_, "/score", body, options_);
    if (!response.contains("scores") || !response.at("scores").is_array()) {
        throw BackendUnavailable("reranker response is missing \"scores\": " +
                                 response.dump());
    }
    std::vector<double> scores;
    for (const auto& value : response.at("scores")) {
        if (!value.is_number()) {
            throw BackendUnavailable("reranker score is not a number: " +
                                     response.dump());
        }
        scores.push_back(value.get<double>());
    }
    if (scores.size() != sentences.size()) {
        throw BackendUnavailable(
            "reranker returned " + std::to_string(scores.size()) +
            " scores for " + std::to_string(sentences.size()) + " sentences");
    }
    return scores;
}

std::string HttpAnnotationClient::complete(const std::string& prompt) {
    nlohmann::json body;
    body["prompt"] = prompt;
    const nlohmann::json response =
        post_json(base_url_, "/complete", body, options_);
    if (!response.contains("text") || !response.at("text").is_string()) {
        throw BackendUnavailable(finish_reason_error(response));
    }
    return response.at("text").get<std::string>();
}

std::unique_ptr<ScriptLibraryBackend> ScriptLibraryBackend::from_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open LM script library: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("LM script library is not valid JSON: " +
                      std::string(e.what()));
    }
    std::map<std::string, PerQuestion> scripts;
    try {
        for (const auto& script : doc.at("scripts")) {
            PerQuestion per;
            for (const auto& entry : script.at("responses")) {
                orchestrator::ScriptEntry parsed;
                parsed.mode = orchestrator::lm_mode_from_name(
                    entry.at("mode").get<std::string>());
                parsed.text = entry.at("text").get<std::string>();
                per.entries.push_back(std::move(parsed));
            }
            scripts[script.at("question").get<std::string>()] = std::move(per);
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed LM script library: " + std::string(e.what()));
    }
    return std::unique_ptr<ScriptLibraryBackend>(
        new ScriptLibraryBackend(std::move(scripts)));
}

orchestrator::LmResponse ScriptLibraryBackend::generate(
    const orchestrator::LmRequest& request) {
    const std::string question = request.part(orchestrator::PartKind::UserInput);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = scripts_.find(question);
    if (it == scripts_.end()) {
        throw ScriptExhausted("no script for question: " + question);
    }
    PerQuestion& per = it->second;
    if (per.cursor >= per.entries.size()) {
        throw ScriptExhausted("script for question exhausted: " + question);
    }
    const orchestrator::ScriptEntry& entry = per.entries[per.cursor];
    if (entry.mode != request.mode) {
        throw ModeMismatch("script for '" + question + "' entry " +
                           std::to_string(per.cursor) + " is tagged " +
                           std::string(orchestrator::lm_mode_name(entry.mode)) +
                           " but the request is " +
                           std::string(orchestrator::lm_mode_name(request.mode)));
    }
    ++per.cursor;
    return orchestrator::LmResponse{entry.text, orchestrator::FinishReason::Stop};
}

}  // namespace planrag::cli
