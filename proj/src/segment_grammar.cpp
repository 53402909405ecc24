#include "planrag/segment_grammar.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace planrag::grammar {

namespace {

constexpr std::array<std::pair<MarkerKind, std::string_view>, 11> kMarkers = {{
    {MarkerKind::PlanOpen, "<plan_start>"},
    {MarkerKind::PlanClose, "<plan_end>"},
    {MarkerKind::ParagraphOpen, "<paragraph>"},
    {MarkerKind::ParagraphClose, "</paragraph>"},
    {MarkerKind::FParagraphOpen, "<fparagraph>"},
    {MarkerKind::FParagraphClose, "</fparagraph>"},
    {MarkerKind::AnswerOpen, "<answer_start>"},
    {MarkerKind::AnswerClose, "<answer_end>"},
    {MarkerKind::NoExtraInfo, "<NOT_NEED_EXTRA_INFO>"},
    {MarkerKind::Combine, "[Combine]"},
    {MarkerKind::Eos, "<EOS>"},
}};

struct Token {
    bool is_marker = false;
    MarkerKind kind = MarkerKind::Eos;
    std::string text;  // payload for text tokens
};

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Length of a marker-shaped angle token ("<tag>" or "</tag>") starting at
/// `pos`, or 0 when the text at `pos` is not marker-shaped.
size_t marker_shaped_length(std::string_view text, size_t pos) {
    size_t i = pos + 1;  // past '<'
    if (i < text.size() && text[i] == '/') ++i;
    size_t name_begin = i;
    while (i < text.size() && is_word_char(text[i])) ++i;
    if (i == name_begin) return 0;
    if (i < text.size() && text[i] == '>') return i + 1 - pos;
    return 0;
}

std::vector<Token> lex(std::string_view text) {
    std::vector<Token> tokens;
    std::string pending;
    auto flush = [&] {
        if (!pending.empty()) {
            Token t;
            t.text = std::move(pending);
            pending.clear();
            tokens.push_back(std::move(t));
        }
    };

    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '<' || c == '[') {
            bool matched = false;
            for (const auto& [kind, literal] : kMarkers) {
                if (text.compare(i, literal.size(), literal) == 0) {
                    flush();
                    tokens.push_back(Token{true, kind, {}});
                    i += literal.size();
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
            if (c == '<') {
                if (size_t len = marker_shaped_length(text, i); len > 0) {
                    throw ParseError(ParseError::Kind::UnknownMarker,
                                     "unknown marker token '" +
                                         std::string(text.substr(i, len)) + "'");
                }
            }
        }
        pending.push_back(c);
        ++i;
    }
    flush();
    return tokens;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    GenerationTrace run() {
        GenerationTrace trace;
        if (at_marker(MarkerKind::NoExtraInfo)) {
            parse_no_extra_info(trace);
            return trace;
        }
        parse_segments(trace);
        return trace;
    }

private:
    bool done() const { return pos_ >= tokens_.size(); }

    const Token& peek() const { return tokens_[pos_]; }

    bool at_marker(MarkerKind kind) const {
        return !done() && peek().is_marker && peek().kind == kind;
    }

    bool at_text() const { return !done() && !peek().is_marker; }

    [[noreturn]] void fail(ParseError::Kind kind, const std::string& msg) const {
        throw ParseError(kind, msg);
    }

    /// Consume an optional text token followed by the mandatory close
    /// marker of an already-consumed open marker.
    std::string payload(MarkerKind close, std::string_view open_name) {
        std::string body;
        if (at_text()) {
            body = peek().text;
            ++pos_;
        }
        if (!at_marker(close)) {
            fail(ParseError::Kind::UnbalancedMarker,
                 std::string(open_name) + " without matching " +
                     std::string(marker_literal(close)));
        }
        ++pos_;
        return body;
    }

    void expect_end(const char* what) {
        if (at_marker(MarkerKind::Eos)) ++pos_;
        if (!done()) {
            fail(ParseError::Kind::OrderViolation,
                 std::string("content after ") + what);
        }
    }

    void parse_no_extra_info(GenerationTrace& trace) {
        ++pos_;  // the marker itself
        trace.needs_retrieval = false;
        Segment seg;
        if (at_text()) {
            seg.answer = peek().text;
            ++pos_;
        } else if (at_marker(MarkerKind::AnswerOpen)) {
            ++pos_;
            seg.answer = payload(MarkerKind::AnswerClose, "<answer_start>");
        }
        expect_end("no-retrieval answer");
        trace.segments.push_back(std::move(seg));
    }

    void parse_segments(GenerationTrace& trace) {
        std::string preamble;
        while (!done()) {
            if (at_text()) {
                preamble = peek().text;
                ++pos_;
                if (!at_marker(MarkerKind::PlanOpen)) {
                    fail(ParseError::Kind::OrderViolation,
                         "free text is only allowed immediately before a plan");
                }
                continue;
            }
            switch (peek().kind) {
            case MarkerKind::PlanOpen:
                trace.segments.push_back(parse_segment(std::exchange(preamble, {})));
                break;
            case MarkerKind::Combine:
                parse_combine(trace);
                return;
            case MarkerKind::Eos:
                expect_end("record");
                if (trace.segments.empty()) {
                    fail(ParseError::Kind::OrderViolation,
                         "record contains no segments");
                }
                return;
            default:
                fail(ParseError::Kind::OrderViolation,
                     std::string(marker_literal(peek().kind)) +
                         " before any plan marker");
            }
        }
        if (trace.segments.empty()) {
            fail(ParseError::Kind::OrderViolation, "record contains no segments");
        }
    }

    Segment parse_segment(std::string preamble) {
        Segment seg;
        seg.preamble = std::move(preamble);
        ++pos_;  // <plan_start>
        seg.plan = payload(MarkerKind::PlanClose, "<plan_start>");
        if (at_marker(MarkerKind::ParagraphOpen)) {
            ++pos_;
            seg.coarse_paragraph = payload(MarkerKind::ParagraphClose, "<paragraph>");
        }
        if (at_marker(MarkerKind::FParagraphOpen)) {
            ++pos_;
            seg.fine_paragraph = payload(MarkerKind::FParagraphClose, "<fparagraph>");
        }
        if (!at_marker(MarkerKind::AnswerOpen)) {
            fail(ParseError::Kind::OrderViolation,
                 "segment for plan '" + seg.plan + "' has no answer");
        }
        ++pos_;
        seg.answer = payload(MarkerKind::AnswerClose, "<answer_start>");
        return seg;
    }

    void parse_combine(GenerationTrace& trace) {
        if (trace.segments.empty()) {
            fail(ParseError::Kind::OrderViolation,
                 "[Combine] before any complete segment");
        }
        ++pos_;  // [Combine]
        if (!at_marker(MarkerKind::AnswerOpen)) {
            fail(ParseError::Kind::OrderViolation,
                 "[Combine] must be followed by an answer");
        }
        ++pos_;
        trace.combine_answer = payload(MarkerKind::AnswerClose, "<answer_start>");
        expect_end("combine answer");
    }

    std::vector<Token> tokens_;
    size_t pos_ = 0;
};

/// True when `text` would not survive lexing as plain payload: it contains a
/// marker literal or a marker-shaped angle token.
bool contains_marker_like(std::string_view text) {
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != '<' && c != '[') continue;
        for (const auto& [kind, literal] : kMarkers) {
            (void)kind;
            if (text.compare(i, literal.size(), literal) == 0) return true;
        }
        if (c == '<' && marker_shaped_length(text, i) > 0) return true;
    }
    return false;
}

void require_clean_payload(std::string_view text, const char* field) {
    if (contains_marker_like(text)) {
        throw InvariantViolation(std::string(field) +
                                 " contains marker-like text: " + std::string(text));
    }
}

}  // namespace

std::string_view marker_literal(MarkerKind kind) {
    for (const auto& [k, literal] : kMarkers) {
        if (k == kind) return literal;
    }
    return {};
}

const std::vector<Marker>& marker_inventory() {
    static const std::vector<Marker> inventory = [] {
        std::vector<Marker> all;
        all.reserve(kMarkers.size());
        for (const auto& [kind, literal] : kMarkers) {
            all.push_back(Marker{kind, literal});
        }
        return all;
    }();
    return inventory;
}

std::string_view termination_name(Termination t) {
    switch (t) {
    case Termination::Eos: return "eos";
    case Termination::IterationCap: return "iteration_cap";
    case Termination::PlanRepeat: return "plan_repeat";
    }
    return "eos";
}

Termination termination_from_name(std::string_view name) {
    if (name == "eos") return Termination::Eos;
    if (name == "iteration_cap") return Termination::IterationCap;
    if (name == "plan_repeat") return Termination::PlanRepeat;
    throw Error("unknown termination name: " + std::string(name));
}

std::string GenerationTrace::final_answer() const {
    if (combine_answer) return *combine_answer;
    std::string out;
    for (const Segment& seg : segments) out += seg.answer;
    return out;
}

bool GenerationTrace::operator==(const GenerationTrace& other) const {
    return needs_retrieval == other.needs_retrieval &&
           segments == other.segments &&
           combine_answer == other.combine_answer &&
           terminated_by == other.terminated_by;
}

GenerationTrace parse_trace(std::string_view text) {
    return Parser(lex(text)).run();
}

std::string serialize_trace(const GenerationTrace& trace) {
    std::string out;
    if (!trace.needs_retrieval) {
        if (trace.segments.size() != 1) {
            throw InvariantViolation(
                "no-retrieval trace must hold exactly one segment");
        }
        const Segment& seg = trace.segments.front();
        if (!seg.plan.empty() || seg.coarse_paragraph || seg.fine_paragraph ||
            !seg.preamble.empty() || trace.combine_answer) {
            throw InvariantViolation(
                "no-retrieval trace carries only a bare answer");
        }
        require_clean_payload(seg.answer, "answer");
        out += marker_literal(MarkerKind::NoExtraInfo);
        out += marker_literal(MarkerKind::AnswerOpen);
        out += seg.answer;
        out += marker_literal(MarkerKind::AnswerClose);
        return out;
    }

    if (trace.segments.empty()) {
        throw InvariantViolation("trace holds no segments");
    }
    for (const Segment& seg : trace.segments) {
        if (seg.plan.empty()) {
            throw InvariantViolation("segment plan is empty");
        }
        require_clean_payload(seg.preamble, "preamble");
        require_clean_payload(seg.plan, "plan");
        if (seg.coarse_paragraph) require_clean_payload(*seg.coarse_paragraph, "paragraph");
        if (seg.fine_paragraph) require_clean_payload(*seg.fine_paragraph, "fparagraph");
        require_clean_payload(seg.answer, "answer");

        out += seg.preamble;
        out += marker_literal(MarkerKind::PlanOpen);
        out += seg.plan;
        out += marker_literal(MarkerKind::PlanClose);
        if (seg.coarse_paragraph) {
            out += marker_literal(MarkerKind::ParagraphOpen);
            out += *seg.coarse_paragraph;
            out += marker_literal(MarkerKind::ParagraphClose);
        }
        if (seg.fine_paragraph) {
            out += marker_literal(MarkerKind::FParagraphOpen);
            out += *seg.fine_paragraph;
            out += marker_literal(MarkerKind::FParagraphClose);
        }
        out += marker_literal(MarkerKind::AnswerOpen);
        out += seg.answer;
        out += marker_literal(MarkerKind::AnswerClose);
    }
    if (trace.combine_answer) {
        require_clean_payload(*trace.combine_answer, "combine answer");
        out += marker_literal(MarkerKind::Combine);
        out += marker_literal(MarkerKind::AnswerOpen);
        out += *trace.combine_answer;
        out += marker_literal(MarkerKind::AnswerClose);
    }
    return out;
}

std::vector<std::string> extract_intermediate_plans(std::string_view text) {
    static constexpr std::string_view kOpen = "[Plan:";
    std::vector<std::string> plans;
    size_t pos = 0;
    while (true) {
        size_t start = text.find(kOpen, pos);
        if (start == std::string_view::npos) break;
        size_t body_begin = start + kOpen.size();
        size_t end = text.find(']', body_begin);
        if (end == std::string_view::npos) break;
        std::string_view body = text.substr(body_begin, end - body_begin);
        while (!body.empty() && std::isspace(static_cast<unsigned char>(body.front()))) {
            body.remove_prefix(1);
        }
        while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) {
            body.remove_suffix(1);
        }
        plans.emplace_back(body);
        pos = end + 1;
    }
    return plans;
}

}  // namespace planrag::grammar
