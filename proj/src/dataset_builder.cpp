#include "planrag/dataset_builder.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "planrag/segment_grammar.hpp"

namespace planrag::dataset {

namespace {

using grammar::MarkerKind;

std::string marker(MarkerKind kind) {
    return std::string(grammar::marker_literal(kind));
}

std::string trim(const std::string& text) {
    size_t b = 0;
    size_t e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    return text.substr(b, e - b);
}

// "[3]" citation groups removed: used to clean expanded two-hop steps.
std::string strip_citation_brackets(const std::string& text) {
    std::string out;
    for (size_t i = 0; i < text.size();) {
        if (text[i] == '[') {
            size_t j = i + 1;
            while (j < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[j]))) {
                ++j;
            }
            if (j > i + 1 && j < text.size() && text[j] == ']') {
                i = j + 1;
                continue;
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

std::vector<retrieval::Sentence> doc_sentences(const retrieval::Document& doc) {
    return retrieval::split_sentences(doc.body);
}

const retrieval::Document& document_for_segment(const SourceExample& example,
                                                size_t segment_index) {
    if (example.documents.size() == example.answer_segments.size()) {
        return example.documents[segment_index];
    }
    return example.documents[std::min(segment_index,
                                      example.documents.size() - 1)];
}

}  // namespace

std::string_view dataset_kind_name(DatasetKind kind) {
    switch (kind) {
    case DatasetKind::ShortForm: return "short_form";
    case DatasetKind::Asqa: return "asqa";
    case DatasetKind::ShareGpt: return "sharegpt";
    case DatasetKind::HotpotQa: return "hotpotqa";
    }
    return "short_form";
}

DatasetKind dataset_kind_from_name(std::string_view name) {
    if (name == "short_form" || name == "short") return DatasetKind::ShortForm;
    if (name == "asqa") return DatasetKind::Asqa;
    if (name == "sharegpt") return DatasetKind::ShareGpt;
    if (name == "hotpotqa") return DatasetKind::HotpotQa;
    throw Error("unknown dataset kind: " + std::string(name));
}

ScriptedAnnotationClient ScriptedAnnotationClient::from_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotation script: " + path);
    nlohmann::json doc = nlohmann::json::parse(in);
    const nlohmann::json& rules_json =
        doc.is_array() ? doc : doc.at("rules");
    std::vector<Rule> rules;
    for (const auto& entry : rules_json) {
        rules.push_back(Rule{entry.value("match", ""),
                             entry.at("response").get<std::string>()});
    }
    return ScriptedAnnotationClient(std::move(rules));
}

std::string ScriptedAnnotationClient::complete(const std::string& prompt) {
    for (const Rule& rule : rules_) {
        if (rule.match.empty() || prompt.find(rule.match) != std::string::npos) {
            return rule.response;
        }
    }
    throw BackendUnavailable("no scripted response matches the prompt");
}

std::vector<int> parse_citations(const std::string& response, size_t limit) {
    std::set<int> seen;
    for (size_t i = 0; i < response.size(); ++i) {
        if (response[i] != '[') continue;
        size_t j = i + 1;
        while (j < response.size() &&
               std::isdigit(static_cast<unsigned char>(response[j]))) {
            ++j;
        }
        if (j == i + 1 || j >= response.size() || response[j] != ']') continue;
        seen.insert(std::stoi(response.substr(i + 1, j - i - 1)));
        i = j;
    }
    if (seen.empty()) {
        throw AnnotationFailure("response carries no [i] citations: '" +
                                response + "'");
    }
    std::vector<int> indices(seen.begin(), seen.end());
    if (indices.back() >= static_cast<int>(limit)) {
        throw IndexOutOfRange("citation [" + std::to_string(indices.back()) +
                              "] exceeds " + std::to_string(limit) +
                              " candidates");
    }
    return indices;
}

std::string annotate_plan(const std::string& segment, const PlanContext& context,
                          DatasetKind kind, AnnotationClient& client) {
    switch (kind) {
    case DatasetKind::ShortForm: {
        const std::string response =
            client.complete(prompts::short_form_plan(context.question));
        std::vector<std::string> plans =
            grammar::extract_intermediate_plans(response);
        if (plans.empty() || plans.front().empty()) {
            throw AnnotationFailure("no [Plan: ...] token in response: '" +
                                    response + "'");
        }
        return plans.front();
    }
    case DatasetKind::ShareGpt: {
        const std::string response =
            client.complete(prompts::sharegpt_plan(segment));
        std::vector<std::string> plans =
            grammar::extract_intermediate_plans(response);
        if (plans.empty() || plans.back().empty()) {
            throw AnnotationFailure("no [Plan: ...] token in response: '" +
                                    response + "'");
        }
        // The response echoes the whole input; the freshly filled slot is
        // the last bracket.
        return plans.back();
    }
    case DatasetKind::HotpotQa: {
        const std::string response = client.complete(
            prompts::hotpot_plan(context.question, segment, context.evidence));
        std::vector<std::string> plans =
            grammar::extract_intermediate_plans(response);
        if (plans.empty() || plans.front().empty()) {
            throw AnnotationFailure("no [Plan: ...] token in response: '" +
                                    response + "'");
        }
        return plans.front();
    }
    case DatasetKind::Asqa: {
        const std::vector<int> cited = parse_citations(
            client.complete(prompts::asqa_citations(context.qa_subpairs, segment)),
            context.qa_subpairs.size());
        std::vector<std::string> questions;
        for (int index : cited) {
            questions.push_back(context.qa_subpairs[static_cast<size_t>(index)]
                                    .question);
        }
        const std::string summary =
            client.complete(prompts::asqa_summarize(questions));
        std::vector<std::string> plans =
            grammar::extract_intermediate_plans(summary);
        if (!plans.empty() && !plans.front().empty()) return plans.front();
        const std::string bare = trim(summary);
        if (bare.empty()) {
            throw AnnotationFailure("empty question summary response");
        }
        return bare;
    }
    }
    throw AnnotationFailure("unhandled dataset kind");
}

std::vector<int> annotate_evidence(const std::string& plan,
                                   const std::string& answer_segment,
                                   const std::vector<retrieval::Sentence>& sentences,
                                   AnnotationClient& client) {
    if (sentences.empty()) {
        throw InvariantViolation("evidence annotation needs candidate sentences");
    }
    std::vector<std::string> texts;
    texts.reserve(sentences.size());
    for (const retrieval::Sentence& s : sentences) texts.push_back(s.text);
    const std::string response = client.complete(
        prompts::evidence_selection(plan, answer_segment, texts));
    return parse_citations(response, sentences.size());
}

HotpotAnnotation annotate_hotpot(const SourceExample& example,
                                 AnnotationClient& client) {
    if (example.answer_segments.empty()) {
        throw InvariantViolation("two-hop example carries no answer");
    }
    std::vector<std::string> evidence;
    for (const retrieval::Document& doc : example.documents) {
        evidence.push_back(doc.body);
    }
    const std::string response = client.complete(prompts::hotpot_plan(
        example.question, example.answer_segments.front(), evidence));

    HotpotAnnotation annotation;
    static constexpr std::string_view kOpen = "[Plan:";
    size_t pos = response.find(kOpen);
    if (pos == std::string::npos) {
        throw AnnotationFailure("no [Plan: ...] token in response: '" +
                                response + "'");
    }
    while (pos != std::string::npos) {
        const size_t body_begin = pos + kOpen.size();
        const size_t close = response.find(']', body_begin);
        if (close == std::string::npos) break;
        const std::string plan =
            trim(response.substr(body_begin, close - body_begin));
        size_t next = response.find(kOpen, close + 1);
        std::string segment = response.substr(
            close + 1,
            (next == std::string::npos ? response.size() : next) - close - 1);
        if (plan.empty()) {
            throw AnnotationFailure("empty plan token in response");
        }
        annotation.plans.push_back(plan);
        annotation.answer_segments.push_back(strip_citation_brackets(segment));
        pos = next;
    }
    if (annotation.plans.empty()) {
        throw AnnotationFailure("no parseable plan/answer steps in response");
    }
    return annotation;
}

TrainingRecord assemble_record(const SourceExample& example,
                               const std::vector<SegmentAnnotation>& annotations,
                               const std::optional<std::string>& combine_answer) {
    TrainingRecord record;
    record.input_text = example.question;

    auto append_payload = [&](MarkerKind open, const std::string& payload,
                              MarkerKind close,
                              std::vector<std::pair<size_t, size_t>>* spans) {
        record.target_text += marker(open);
        const size_t begin = record.target_text.size();
        record.target_text += payload;
        if (spans != nullptr) {
            spans->push_back({begin, record.target_text.size()});
        }
        record.target_text += marker(close);
    };

    if (!example.needs_retrieval) {
        if (!annotations.empty() || combine_answer) {
            throw InvariantViolation(
                "a no-retrieval example takes no plan annotations");
        }
        std::string answer;
        for (const std::string& segment : example.answer_segments) {
            answer += segment;
        }
        record.target_text += marker(MarkerKind::NoExtraInfo);
        append_payload(MarkerKind::AnswerOpen, answer, MarkerKind::AnswerClose,
                       &record.answer_mask_spans);
    } else {
        if (example.answer_segments.empty()) {
            throw InvariantViolation("example carries no answer segments");
        }
        if (annotations.size() != example.answer_segments.size()) {
            throw InvariantViolation(
                "need exactly one plan annotation per answer segment");
        }
        if (example.kind == DatasetKind::HotpotQa && !combine_answer) {
            throw InvariantViolation("two-hop records need a combine answer");
        }
        if (example.kind != DatasetKind::HotpotQa && combine_answer) {
            throw InvariantViolation(
                "only two-hop records carry a combine answer");
        }
        for (size_t i = 0; i < example.answer_segments.size(); ++i) {
            const SegmentAnnotation& annotation = annotations[i];
            if (annotation.plan.empty()) {
                throw InvariantViolation("segment plan is empty");
            }
            append_payload(MarkerKind::PlanOpen, annotation.plan,
                           MarkerKind::PlanClose, &record.plan_mask_spans);
            if (!example.documents.empty()) {
                const retrieval::Document& doc = document_for_segment(example, i);
                append_payload(MarkerKind::ParagraphOpen, doc.body,
                               MarkerKind::ParagraphClose, nullptr);
                if (!annotation.evidence_indices.empty()) {
                    const std::vector<retrieval::Sentence> sentences =
                        doc_sentences(doc);
                    std::string selected;
                    for (int index : annotation.evidence_indices) {
                        if (index < 0 ||
                            index >= static_cast<int>(sentences.size())) {
                            throw IndexOutOfRange(
                                "evidence index " + std::to_string(index) +
                                " exceeds " + std::to_string(sentences.size()) +
                                " sentences");
                        }
                        if (!selected.empty()) selected.push_back(' ');
                        selected += sentences[static_cast<size_t>(index)].text;
                    }
                    append_payload(MarkerKind::FParagraphOpen, selected,
                                   MarkerKind::FParagraphClose, nullptr);
                }
            } else if (!annotation.evidence_indices.empty()) {
                throw IndexOutOfRange(
                    "evidence indices given but the example has no documents");
            }
            append_payload(MarkerKind::AnswerOpen, example.answer_segments[i],
                           MarkerKind::AnswerClose, &record.answer_mask_spans);
        }
        if (combine_answer) {
            record.target_text += marker(MarkerKind::Combine);
            append_payload(MarkerKind::AnswerOpen, *combine_answer,
                           MarkerKind::AnswerClose, &record.answer_mask_spans);
        }
    }

    // The emitted record must survive the grammar byte-exactly.
    try {
        if (grammar::serialize_trace(grammar::parse_trace(record.target_text)) !=
            record.target_text) {
            throw InvariantViolation("assembled record is not byte-stable");
        }
    } catch (const ParseError& e) {
        throw InvariantViolation(std::string("assembled record does not parse: ") +
                                 e.what());
    }
    return record;
}

bool verify_masks(const TrainingRecord& record) {
    auto scan_pairs = [&](MarkerKind open, MarkerKind close,
                          std::vector<std::pair<size_t, size_t>>* out) {
        const std::string open_lit = marker(open);
        const std::string close_lit = marker(close);
        size_t pos = 0;
        while (true) {
            const size_t begin = record.target_text.find(open_lit, pos);
            if (begin == std::string::npos) return true;
            const size_t payload = begin + open_lit.size();
            const size_t end = record.target_text.find(close_lit, payload);
            if (end == std::string::npos) return false;
            out->push_back({payload, end});
            pos = end + close_lit.size();
        }
    };

    std::vector<std::pair<size_t, size_t>> plan_spans;
    std::vector<std::pair<size_t, size_t>> answer_spans;
    if (!scan_pairs(MarkerKind::PlanOpen, MarkerKind::PlanClose, &plan_spans)) {
        return false;
    }
    if (!scan_pairs(MarkerKind::AnswerOpen, MarkerKind::AnswerClose,
                    &answer_spans)) {
        return false;
    }
    if (plan_spans != record.plan_mask_spans ||
        answer_spans != record.answer_mask_spans) {
        return false;
    }
    std::vector<std::pair<size_t, size_t>> all = plan_spans;
    all.insert(all.end(), answer_spans.begin(), answer_spans.end());
    std::sort(all.begin(), all.end());
    for (size_t i = 0; i < all.size(); ++i) {
        if (all[i].first > all[i].second) return false;
        if (all[i].second > record.target_text.size()) return false;
        if (i > 0 && all[i].first < all[i - 1].second) return false;
    }
    return true;
}

std::pair<promptmath::MaskedBatch, promptmath::MaskedBatch> char_masked_batches(
    const TrainingRecord& record, const Eigen::MatrixXd& logits) {
    const size_t length = record.target_text.size();
    if (static_cast<size_t>(logits.rows()) != length) {
        throw DimensionMismatch("need one logit row per target character");
    }
    const int vocab = static_cast<int>(logits.cols());
    promptmath::MaskedBatch plan_batch;
    plan_batch.logits = logits;
    plan_batch.targets.resize(length);
    plan_batch.mask.assign(length, false);
    for (size_t i = 0; i < length; ++i) {
        plan_batch.targets[i] =
            static_cast<int>(static_cast<unsigned char>(record.target_text[i])) %
            vocab;
    }
    promptmath::MaskedBatch ans_batch = plan_batch;
    for (const auto& [begin, end] : record.plan_mask_spans) {
        for (size_t i = begin; i < end; ++i) plan_batch.mask[i] = true;
    }
    for (const auto& [begin, end] : record.answer_mask_spans) {
        for (size_t i = begin; i < end; ++i) ans_batch.mask[i] = true;
    }
    return {std::move(plan_batch), std::move(ans_batch)};
}

BuildOutcome build_record(const SourceExample& example,
                          AnnotationClient& client) {
    try {
        if (!example.needs_retrieval) {
            return {assemble_record(example, {}, {}), ""};
        }
        switch (example.kind) {
        case DatasetKind::ShortForm: {
            if (example.answer_segments.size() != 1) {
                return {std::nullopt,
                        "short-form examples carry exactly one answer segment"};
            }
            PlanContext context;
            context.question = example.question;
            const std::string plan = annotate_plan(example.answer_segments[0],
                                                   context, DatasetKind::ShortForm,
                                                   client);
            SegmentAnnotation annotation;
            annotation.plan = plan;
            if (!example.documents.empty()) {
                annotation.evidence_indices = annotate_evidence(
                    plan, example.answer_segments[0],
                    doc_sentences(document_for_segment(example, 0)), client);
            }
            return {assemble_record(example, {annotation}, {}), ""};
        }
        case DatasetKind::Asqa: {
            if (example.qa_subpairs.empty()) {
                return {std::nullopt, "ambiguous-question example without qa_subpairs"};
            }
            std::vector<SegmentAnnotation> annotations;
            for (size_t i = 0; i < example.answer_segments.size(); ++i) {
                PlanContext context;
                context.question = example.question;
                context.qa_subpairs = example.qa_subpairs;
                SegmentAnnotation annotation;
                annotation.plan = annotate_plan(example.answer_segments[i],
                                                context, DatasetKind::Asqa, client);
                if (!example.documents.empty()) {
                    annotation.evidence_indices = annotate_evidence(
                        annotation.plan, example.answer_segments[i],
                        doc_sentences(document_for_segment(example, i)), client);
                }
                annotations.push_back(std::move(annotation));
            }
            return {assemble_record(example, annotations, {}), ""};
        }
        case DatasetKind::ShareGpt: {
            std::vector<SegmentAnnotation> annotations;
            std::string prior;
            for (size_t i = 0; i < example.answer_segments.size(); ++i) {
                PlanContext context;
                context.question = example.question;
                SegmentAnnotation annotation;
                annotation.plan =
                    annotate_plan(prior + "[Plan] " + example.answer_segments[i],
                                  context, DatasetKind::ShareGpt, client);
                if (!example.documents.empty()) {
                    annotation.evidence_indices = annotate_evidence(
                        annotation.plan, example.answer_segments[i],
                        doc_sentences(document_for_segment(example, i)), client);
                }
                annotations.push_back(std::move(annotation));
                prior += example.answer_segments[i];
            }
            return {assemble_record(example, annotations, {}), ""};
        }
        case DatasetKind::HotpotQa: {
            const HotpotAnnotation expanded = annotate_hotpot(example, client);
            SourceExample local = example;
            local.answer_segments = expanded.answer_segments;
            std::vector<SegmentAnnotation> annotations;
            for (size_t i = 0; i < expanded.plans.size(); ++i) {
                SegmentAnnotation annotation;
                annotation.plan = expanded.plans[i];
                if (!local.documents.empty()) {
                    annotation.evidence_indices = annotate_evidence(
                        annotation.plan, local.answer_segments[i],
                        doc_sentences(document_for_segment(local, i)), client);
                }
                annotations.push_back(std::move(annotation));
            }
            return {assemble_record(local, annotations,
                                    example.answer_segments.front()),
                    ""};
        }
        }
        return {std::nullopt, "unhandled dataset kind"};
    } catch (const AnnotationFailure& e) {
        return {std::nullopt, e.what()};
    } catch (const IndexOutOfRange& e) {
        return {std::nullopt, e.what()};
    } catch (const InvariantViolation& e) {
        return {std::nullopt, e.what()};
    }
}

}  // namespace planrag::dataset
