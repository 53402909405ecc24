#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "planrag/retrieval.hpp"
#include "planrag/segment_grammar.hpp"

namespace planrag::orchestrator {

enum class LmMode { Plan, Answer };

std::string_view lm_mode_name(LmMode mode);
LmMode lm_mode_from_name(std::string_view name);

enum class PartKind { UserInput, Evidence, History, Plan };

std::string_view part_kind_name(PartKind kind);

/// One typed piece of the generation context; backends render parts into
/// their own prompt format.
struct ContextPart {
    PartKind kind;
    std::string text;
};

struct LmRequest {
    LmMode mode = LmMode::Plan;
    std::vector<ContextPart> parts;
    int max_new_tokens = 0;
    std::vector<std::string> stop;
    double temperature = 0.0;  // greedy decoding

    /// The text of the first part of the given kind, or empty.
    std::string part(PartKind kind) const;
};

enum class FinishReason { Stop, Length, Error };

struct LmResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::Stop;
};

class LmBackend {
public:
    virtual ~LmBackend() = default;
    virtual LmResponse generate(const LmRequest& request) = 0;
};

struct RunConfig {
    int plan_token_cap = 30;
    int answer_token_cap = 100;
    int max_iterations = 3;
    int retrieval_k = 5;
    int evidence_k = 5;  // k_s, sentences kept per plan
    retrieval::EvidenceMode evidence_mode = retrieval::EvidenceMode::Selected;
    bool stop_on_plan_repeat = true;

    bool operator==(const RunConfig&) const = default;
};

enum class TaskKind { Short, Long, Multihop };

std::string_view task_kind_name(TaskKind kind);
TaskKind task_kind_from_name(std::string_view name);

struct Query {
    std::string id;
    std::string question;
    TaskKind task = TaskKind::Short;
};

/// Run the iterative plan/answer loop for one query.
///
/// The first plan request carries only the user input. A
/// `<NOT_NEED_EXTRA_INFO>` first plan short-circuits to a single evidence-free
/// answer call. Otherwise passages are retrieved once, and each iteration
/// selects evidence for the current plan, requests an answer segment, and
/// requests the next plan until `<EOS>`, the iteration cap, or a verbatim
/// plan repetition (when enabled) ends the loop.
///
/// Backend output that violates the segment grammar stops the loop; the
/// trace built so far is returned with the error attached. Transport-level
/// failures propagate as BackendUnavailable.
grammar::GenerationTrace run_query(const std::string& user_input,
                                   LmBackend& backend,
                                   const retrieval::Retriever* retriever,
                                   retrieval::SentenceScorer* scorer,
                                   const RunConfig& config);

/// Same loop, plus combine handling: an answer segment ending in `[Combine]`
/// triggers one final answer call over the accumulated history whose output
/// becomes the trace's combine answer (the final answer for evaluation).
grammar::GenerationTrace run_multihop(const std::string& user_input,
                                      LmBackend& backend,
                                      const retrieval::Retriever* retriever,
                                      retrieval::SentenceScorer* scorer,
                                      const RunConfig& config);

/// Run a batch with at most `in_flight` queries in parallel. Output order
/// matches input order; a failing query yields a partial trace with the
/// error attached instead of aborting the batch.
std::vector<grammar::GenerationTrace> run_batch(
    const std::vector<Query>& queries, LmBackend& backend,
    const retrieval::Retriever* retriever, retrieval::SentenceScorer* scorer,
    const RunConfig& config, int in_flight = 4,
    std::vector<double>* timings_ms = nullptr);

}  // namespace planrag::orchestrator
