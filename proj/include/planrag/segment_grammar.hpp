#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "planrag/errors.hpp"

namespace planrag::grammar {

/// Special tokens of the plan/answer markup. Literals are exact bytes,
/// case-sensitive; open markers pair with exactly one close marker, the
/// last three are self-closing.
enum class MarkerKind {
    PlanOpen,
    PlanClose,
    ParagraphOpen,
    ParagraphClose,
    FParagraphOpen,
    FParagraphClose,
    AnswerOpen,
    AnswerClose,
    NoExtraInfo,
    Combine,
    Eos,
};

std::string_view marker_literal(MarkerKind kind);

struct Marker {
    MarkerKind kind;
    std::string_view literal;
};

/// All eleven markers, in a fixed order.
const std::vector<Marker>& marker_inventory();

/// One plan/answer alternation of a trace. `preamble` holds free text that
/// appeared immediately before this segment's plan marker (some records open
/// with an untagged sentence); paragraphs are optional in both training
/// records and generated output.
struct Segment {
    std::string preamble;
    std::string plan;
    std::optional<std::string> coarse_paragraph;
    std::optional<std::string> fine_paragraph;
    std::string answer;

    bool operator==(const Segment&) const = default;
};

enum class Termination { Eos, IterationCap, PlanRepeat };

std::string_view termination_name(Termination t);
Termination termination_from_name(std::string_view name);

/// Attached to a trace when generation had to be cut short (e.g. the backend
/// produced output the grammar cannot accept). Not part of the markup form.
struct TraceError {
    std::string kind;
    std::string message;

    bool operator==(const TraceError&) const = default;
};

/// Full structured record of one query: the alternation of plans, evidence
/// and answer segments, plus the optional final combine answer for
/// multi-hop questions.
struct GenerationTrace {
    bool needs_retrieval = true;
    std::vector<Segment> segments;
    std::optional<std::string> combine_answer;
    Termination terminated_by = Termination::Eos;
    std::optional<TraceError> error;

    /// The answer string used for evaluation: the combine answer when
    /// present, otherwise the in-order concatenation of segment answers.
    std::string final_answer() const;

    /// Structural equality over the markup-bearing fields plus the
    /// termination cause; `error` is orchestration metadata and excluded.
    bool operator==(const GenerationTrace& other) const;
};

/// Parse a complete markup record into a trace.
///
/// Grammar per segment: preamble? plan (paragraph)? (fparagraph)? answer,
/// repeated, optionally followed by `[Combine]` + answer and a trailing
/// `<EOS>`. A record starting with `<NOT_NEED_EXTRA_INFO>` is a single
/// segment whose answer may appear bare or between answer markers.
///
/// Throws ParseError with kind UnbalancedMarker, OrderViolation or
/// UnknownMarker; never anything else.
GenerationTrace parse_trace(std::string_view text);

/// Inverse of parse_trace. Throws InvariantViolation when the trace is
/// self-inconsistent (empty plan outside a no-retrieval trace, markers
/// inside payloads, combine answer without segments, ...).
std::string serialize_trace(const GenerationTrace& trace);

/// Collect the payloads of every inline "[Plan: ...]" bracket, in order.
/// Text without such brackets yields an empty list.
std::vector<std::string> extract_intermediate_plans(std::string_view text);

}  // namespace planrag::grammar
