#include "planrag/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cctype>
#include <set>
#include <thread>
#include <utility>

#include "planrag/mock_backend.hpp"

namespace planrag::orchestrator {

namespace {

using grammar::GenerationTrace;
using grammar::MarkerKind;
using grammar::Segment;
using grammar::Termination;
using grammar::TraceError;

std::string marker(MarkerKind kind) {
    return std::string(grammar::marker_literal(kind));
}

std::string trim(std::string_view text) {
    size_t begin = 0;
    size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return std::string(text.substr(begin, end - begin));
}

/// Keep at most `max_words` whitespace-delimited words, preserving the
/// original spacing of the kept prefix.
std::string truncate_words(const std::string& text, int max_words) {
    int words = 0;
    bool in_word = false;
    for (size_t i = 0; i < text.size(); ++i) {
        const bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
        if (!space && !in_word) {
            ++words;
            if (words > max_words) return text.substr(0, i);
        }
        in_word = !space;
    }
    return text;
}

void erase_all(std::string& text, const std::string& needle) {
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.erase(pos, needle.size());
    }
}

bool contains_any_marker(const std::string& text) {
    for (const grammar::Marker& m : grammar::marker_inventory()) {
        if (text.find(m.literal) != std::string::npos) return true;
    }
    return false;
}

struct PlanSignal {
    enum class Kind { Plan, NoExtraInfo, Eos };
    Kind kind = Kind::Plan;
    std::string text;
};

PlanSignal parse_plan_response(const std::string& raw, const RunConfig& config) {
    if (raw.find(marker(MarkerKind::NoExtraInfo)) != std::string::npos) {
        return {PlanSignal::Kind::NoExtraInfo, {}};
    }
    std::string text = raw;
    if (size_t end = text.find(marker(MarkerKind::PlanClose));
        end != std::string::npos) {
        text = text.substr(0, end);
    }
    std::string lead = trim(text);
    const std::string open = marker(MarkerKind::PlanOpen);
    if (lead.starts_with(open)) lead = lead.substr(open.size());
    bool saw_eos = false;
    if (lead.find(marker(MarkerKind::Eos)) != std::string::npos) {
        saw_eos = true;
        erase_all(lead, marker(MarkerKind::Eos));
    }
    lead = trim(lead);
    if (lead.empty()) {
        if (saw_eos) return {PlanSignal::Kind::Eos, {}};
        throw MalformedGeneration("plan stage produced no plan text: '" + raw + "'");
    }
    if (contains_any_marker(lead)) {
        throw MalformedGeneration("plan text contains markup: '" + lead + "'");
    }
    lead = truncate_words(lead, 4 * config.plan_token_cap);
    return {PlanSignal::Kind::Plan, lead};
}

struct AnswerResult {
    std::string text;
    bool eos = false;
    bool combine = false;
};

AnswerResult parse_answer_response(const std::string& raw,
                                   const RunConfig& config) {
    AnswerResult result;
    std::string payload = raw;
    std::string tail;
    if (size_t end = payload.find(marker(MarkerKind::AnswerClose));
        end != std::string::npos) {
        tail = payload.substr(end + marker(MarkerKind::AnswerClose).size());
        payload = payload.substr(0, end);
    }
    if (payload.starts_with(marker(MarkerKind::AnswerOpen))) {
        payload = payload.substr(marker(MarkerKind::AnswerOpen).size());
    }
    if (size_t eos = payload.find(marker(MarkerKind::Eos));
        eos != std::string::npos) {
        result.eos = true;
        payload = payload.substr(0, eos);
    }
    if (tail.find(marker(MarkerKind::Eos)) != std::string::npos) result.eos = true;
    if (tail.find(marker(MarkerKind::Combine)) != std::string::npos) {
        result.combine = true;
    }
    // A [Combine] at the payload tail (ignoring trailing whitespace) also
    // counts; everything from the marker on is dropped.
    if (size_t pos = payload.rfind(marker(MarkerKind::Combine));
        pos != std::string::npos &&
        trim(payload.substr(pos + marker(MarkerKind::Combine).size())).empty()) {
        result.combine = true;
        payload = payload.substr(0, pos);
    }
    if (contains_any_marker(payload)) {
        throw MalformedGeneration("answer text contains markup: '" + payload + "'");
    }
    result.text = truncate_words(payload, 4 * config.answer_token_cap);
    return result;
}

LmRequest plan_request(const std::string& user_input, const std::string& history,
                       const RunConfig& config) {
    LmRequest request;
    request.mode = LmMode::Plan;
    request.parts.push_back({PartKind::UserInput, user_input});
    if (!history.empty()) request.parts.push_back({PartKind::History, history});
    request.max_new_tokens = config.plan_token_cap;
    request.stop = {marker(MarkerKind::PlanClose), marker(MarkerKind::Eos)};
    return request;
}

LmRequest answer_request(const std::string& user_input,
                         const std::string& evidence, const std::string& history,
                         const std::string& plan, const RunConfig& config) {
    LmRequest request;
    request.mode = LmMode::Answer;
    request.parts.push_back({PartKind::UserInput, user_input});
    if (!evidence.empty()) request.parts.push_back({PartKind::Evidence, evidence});
    if (!history.empty()) request.parts.push_back({PartKind::History, history});
    if (!plan.empty()) request.parts.push_back({PartKind::Plan, plan});
    request.max_new_tokens = config.answer_token_cap;
    request.stop = {marker(MarkerKind::AnswerClose), marker(MarkerKind::Eos)};
    return request;
}

GenerationTrace engine_run(const std::string& user_input, LmBackend& backend,
                           const retrieval::Retriever* retriever,
                           retrieval::SentenceScorer* scorer,
                           const RunConfig& config, bool combine_enabled) {
    GenerationTrace trace;
    try {
        PlanSignal first = parse_plan_response(
            backend.generate(plan_request(user_input, {}, config)).text, config);

        if (first.kind == PlanSignal::Kind::NoExtraInfo) {
            trace.needs_retrieval = false;
            AnswerResult answer = parse_answer_response(
                backend.generate(answer_request(user_input, {}, {}, {}, config)).text,
                config);
            Segment seg;
            seg.answer = answer.text;
            trace.segments.push_back(std::move(seg));
            trace.terminated_by = Termination::Eos;
            return trace;
        }
        if (first.kind == PlanSignal::Kind::Eos) {
            trace.terminated_by = Termination::Eos;
            return trace;
        }

        std::vector<retrieval::Passage> passages;
        if (config.evidence_mode != retrieval::EvidenceMode::Disabled) {
            if (retriever == nullptr) {
                throw BackendUnavailable(
                    "evidence selection is enabled but no retriever is configured");
            }
            passages = retriever->retrieve(user_input, config.retrieval_k);
        }

        std::string plan = first.text;
        std::set<std::string> plans_seen;
        std::string history;
        int iterations = 0;
        while (true) {
            if (config.stop_on_plan_repeat && plans_seen.count(plan) > 0) {
                trace.terminated_by = Termination::PlanRepeat;
                break;
            }
            plans_seen.insert(plan);

            retrieval::EvidenceSelection evidence = retrieval::select_evidence(
                plan, passages, scorer, config.evidence_k, config.evidence_mode);
            const std::string evidence_text = evidence.evidence_text();

            AnswerResult answer = parse_answer_response(
                backend.generate(
                           answer_request(user_input, evidence_text, history,
                                          plan, config))
                    .text,
                config);

            Segment seg;
            seg.plan = plan;
            if (!evidence_text.empty()) seg.fine_paragraph = evidence_text;
            seg.answer = answer.text;
            trace.segments.push_back(std::move(seg));
            history += answer.text;
            ++iterations;

            if (combine_enabled && answer.combine) {
                AnswerResult combined = parse_answer_response(
                    backend.generate(
                               answer_request(user_input, {}, history, {}, config))
                        .text,
                    config);
                trace.combine_answer = combined.text;
                trace.terminated_by = Termination::Eos;
                break;
            }
            if (answer.eos) {
                trace.terminated_by = Termination::Eos;
                break;
            }
            if (iterations >= config.max_iterations) {
                trace.terminated_by = Termination::IterationCap;
                break;
            }

            PlanSignal next = parse_plan_response(
                backend.generate(plan_request(user_input, history, config)).text,
                config);
            if (next.kind == PlanSignal::Kind::Eos) {
                trace.terminated_by = Termination::Eos;
                break;
            }
            if (next.kind == PlanSignal::Kind::NoExtraInfo) {
                throw MalformedGeneration(
                    "backend emitted <NOT_NEED_EXTRA_INFO> after the first plan");
            }
            plan = next.text;
        }
    } catch (const MalformedGeneration& e) {
        // Keep the longest grammatical prefix and stop the loop.
        trace.error = TraceError{"malformed_generation", e.what()};
    }
    return trace;
}

}  // namespace

std::string_view lm_mode_name(LmMode mode) {
    return mode == LmMode::Plan ? "plan" : "answer";
}

LmMode lm_mode_from_name(std::string_view name) {
    if (name == "plan") return LmMode::Plan;
    if (name == "answer") return LmMode::Answer;
    throw Error("unknown LM mode: " + std::string(name));
}

std::string_view part_kind_name(PartKind kind) {
    switch (kind) {
    case PartKind::UserInput: return "user_input";
    case PartKind::Evidence: return "evidence";
    case PartKind::History: return "history";
    case PartKind::Plan: return "plan";
    }
    return "user_input";
}

std::string LmRequest::part(PartKind kind) const {
    for (const ContextPart& p : parts) {
        if (p.kind == kind) return p.text;
    }
    return {};
}

std::string_view task_kind_name(TaskKind kind) {
    switch (kind) {
    case TaskKind::Short: return "short";
    case TaskKind::Long: return "long";
    case TaskKind::Multihop: return "multihop";
    }
    return "short";
}

TaskKind task_kind_from_name(std::string_view name) {
    if (name == "short") return TaskKind::Short;
    if (name == "long") return TaskKind::Long;
    if (name == "multihop") return TaskKind::Multihop;
    throw Error("unknown task kind: " + std::string(name));
}

grammar::GenerationTrace run_query(const std::string& user_input,
                                   LmBackend& backend,
                                   const retrieval::Retriever* retriever,
                                   retrieval::SentenceScorer* scorer,
                                   const RunConfig& config) {
    return engine_run(user_input, backend, retriever, scorer, config,
                      /*combine_enabled=*/false);
}

grammar::GenerationTrace run_multihop(const std::string& user_input,
                                      LmBackend& backend,
                                      const retrieval::Retriever* retriever,
                                      retrieval::SentenceScorer* scorer,
                                      const RunConfig& config) {
    return engine_run(user_input, backend, retriever, scorer, config,
                      /*combine_enabled=*/true);
}

std::vector<grammar::GenerationTrace> run_batch(
    const std::vector<Query>& queries, LmBackend& backend,
    const retrieval::Retriever* retriever, retrieval::SentenceScorer* scorer,
    const RunConfig& config, int in_flight, std::vector<double>* timings_ms) {
    std::vector<grammar::GenerationTrace> traces(queries.size());
    if (timings_ms != nullptr) timings_ms->assign(queries.size(), 0.0);
    if (queries.empty()) return traces;

    auto run_one = [&](size_t i) {
        const Query& q = queries[i];
        const auto started = std::chrono::steady_clock::now();
        try {
            traces[i] = q.task == TaskKind::Multihop
                            ? run_multihop(q.question, backend, retriever, scorer,
                                           config)
                            : run_query(q.question, backend, retriever, scorer,
                                        config);
        } catch (const BackendUnavailable& e) {
            traces[i].segments.clear();
            traces[i].error = TraceError{"backend_unavailable", e.what()};
        } catch (const Error& e) {
            traces[i].segments.clear();
            traces[i].error = TraceError{"error", e.what()};
        }
        if (timings_ms != nullptr) {
            (*timings_ms)[i] = std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - started)
                                   .count();
        }
    };

    const int workers = std::max(1, std::min<int>(in_flight,
                                                  static_cast<int>(queries.size())));
    if (workers == 1) {
        for (size_t i = 0; i < queries.size(); ++i) run_one(i);
        return traces;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const size_t i = next.fetch_add(1);
                if (i >= queries.size()) return;
                run_one(i);
            }
        });
    }
    for (std::thread& t : pool) t.join();
    return traces;
}

}  // namespace planrag::orchestrator
