#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "planrag/dataset_builder.hpp"
#include "planrag/mock_backend.hpp"
#include "planrag/orchestrator.hpp"
#include "planrag/retrieval.hpp"

namespace planrag::cli {

struct WireOptions {
    int timeout_ms = 10000;
    int retries = 2;
    int backoff_base_ms = 100;
};

/// JSON-over-HTTP POST with bounded retries and exponential backoff. Every
/// failure mode (transport, non-2xx after retries, unparseable body)
/// surfaces as BackendUnavailable carrying the cause. A request never takes
/// longer than timeout x (retries + 1) plus backoff sleeps.
nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, const WireOptions& options);

/// The text wrapper rendered for remote LM backends, interpolating
/// {instruction}, {x}, {e}, {y_history} and {plan}. The instruction line is
/// chosen by request mode and tells the model which markers to emit.
class PromptTemplate {
public:
    static PromptTemplate builtin();
    static PromptTemplate from_file(const std::string& path);

    std::string render(const orchestrator::LmRequest& request) const;
    const std::string& text() const { return text_; }

private:
    explicit PromptTemplate(std::string text) : text_(std::move(text)) {}

    std::string text_;
};

/// POST /generate {"mode","prompt","max_new_tokens","stop","temperature"}
/// -> {"text","finish_reason"}.
class HttpLmBackend final : public orchestrator::LmBackend {
public:
    HttpLmBackend(std::string base_url, WireOptions options,
                  PromptTemplate prompt_template);

    orchestrator::LmResponse generate(const orchestrator::LmRequest& request) override;

private:
    std::string base_url_;
    WireOptions options_;
    PromptTemplate template_;
};

/// POST /score {"query","sentences"} -> {"scores"}.
class HttpRerankerScorer final : public retrieval::SentenceScorer {
public:
    HttpRerankerScorer(std::string base_url, WireOptions options)
        : base_url_(std::move(base_url)), options_(options) {}

    std::vector<double> score(const std::string& plan,
                              const std::vector<std::string>& sentences) override;

private:
    std::string base_url_;
    WireOptions options_;
};

/// POST /complete {"prompt"} -> {"text"}.
class HttpAnnotationClient final : public dataset::AnnotationClient {
public:
    HttpAnnotationClient(std::string base_url, WireOptions options)
        : base_url_(std::move(base_url)), options_(options) {}

    std::string complete(const std::string& prompt) override;

private:
    std::string base_url_;
    WireOptions options_;
};

/// Offline LM backend for CLI runs: an ordered response script per question,
/// routed by the request's user-input part. Cursors are independent per
/// question, so concurrent queries stay deterministic.
class ScriptLibraryBackend final : public orchestrator::LmBackend {
public:
    static std::unique_ptr<ScriptLibraryBackend> from_file(const std::string& path);

    orchestrator::LmResponse generate(const orchestrator::LmRequest& request) override;

private:
    struct PerQuestion {
        std::vector<orchestrator::ScriptEntry> entries;
        size_t cursor = 0;
    };

    explicit ScriptLibraryBackend(std::map<std::string, PerQuestion> scripts)
        : scripts_(std::move(scripts)) {}

    std::mutex mutex_;
    std::map<std::string, PerQuestion> scripts_;
};

}  // namespace planrag::cli
