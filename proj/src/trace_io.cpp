#include "planrag/trace_io.hpp"

#include <fstream>

namespace planrag::cli {

namespace {

nlohmann::ordered_json optional_string(const std::optional<std::string>& value) {
    if (value) return *value;
    return nullptr;
}

std::optional<std::string> read_optional_string(const nlohmann::json& doc,
                                                const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    return doc.at(key).get<std::string>();
}

}  // namespace

nlohmann::ordered_json trace_to_json(const TraceEnvelope& envelope) {
    const grammar::GenerationTrace& trace = envelope.trace;
    nlohmann::ordered_json out;
    out["id"] = envelope.id;
    out["question"] = envelope.question;
    out["needs_retrieval"] = trace.needs_retrieval;
    nlohmann::ordered_json segments = nlohmann::ordered_json::array();
    for (const grammar::Segment& seg : trace.segments) {
        nlohmann::ordered_json item;
        item["preamble"] = seg.preamble;
        item["plan"] = seg.plan;
        item["coarse_paragraph"] = optional_string(seg.coarse_paragraph);
        item["fine_paragraph"] = optional_string(seg.fine_paragraph);
        item["answer"] = seg.answer;
        segments.push_back(std::move(item));
    }
    out["segments"] = std::move(segments);
    out["combine_answer"] = optional_string(trace.combine_answer);
    out["terminated_by"] =
        std::string(grammar::termination_name(trace.terminated_by));
    out["final_answer"] = trace.final_answer();
    try {
        out["markup"] = grammar::serialize_trace(trace);
    } catch (const InvariantViolation&) {
        out["markup"] = nullptr;  // partial traces may not serialize
    }
    if (trace.error) {
        nlohmann::ordered_json err;
        err["kind"] = trace.error->kind;
        err["message"] = trace.error->message;
        out["error"] = std::move(err);
    } else {
        out["error"] = nullptr;
    }
    if (envelope.timing_ms) out["timing_ms"] = *envelope.timing_ms;
    return out;
}

TraceEnvelope trace_from_json(const nlohmann::json& doc) {
    try {
        TraceEnvelope envelope;
        envelope.id = doc.at("id").get<std::string>();
        envelope.question = doc.value("question", std::string());
        grammar::GenerationTrace& trace = envelope.trace;
        trace.needs_retrieval = doc.value("needs_retrieval", true);
        for (const auto& item : doc.value("segments", nlohmann::json::array())) {
            grammar::Segment seg;
            seg.preamble = item.value("preamble", std::string());
            seg.plan = item.value("plan", std::string());
            seg.coarse_paragraph = read_optional_string(item, "coarse_paragraph");
            seg.fine_paragraph = read_optional_string(item, "fine_paragraph");
            seg.answer = item.value("answer", std::string());
            trace.segments.push_back(std::move(seg));
        }
        trace.combine_answer = read_optional_string(doc, "combine_answer");
        trace.terminated_by =
            grammar::termination_from_name(doc.value("terminated_by", "eos"));
        if (doc.contains("error") && !doc.at("error").is_null()) {
            grammar::TraceError err;
            err.kind = doc.at("error").value("kind", std::string());
            err.message = doc.at("error").value("message", std::string());
            trace.error = std::move(err);
        }
        if (doc.contains("timing_ms") && !doc.at("timing_ms").is_null()) {
            envelope.timing_ms = doc.at("timing_ms").get<double>();
        }
        return envelope;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed trace record: ") + e.what());
    }
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<nlohmann::json> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        bool blank = true;
        for (char c : line) {
            if (!std::isspace(static_cast<unsigned char>(c))) {
                blank = false;
                break;
            }
        }
        if (blank) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path + ":" + std::to_string(line_no) +
                          ": invalid JSON: " + e.what());
        }
    }
    return out;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    for (const std::string& line : lines) {
        out << line << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<orchestrator::Query> parse_queries(
    const std::vector<nlohmann::json>& lines) {
    std::vector<orchestrator::Query> queries;
    for (const auto& doc : lines) {
        try {
            orchestrator::Query q;
            q.id = doc.at("id").get<std::string>();
            q.question = doc.at("question").get<std::string>();
            q.task = orchestrator::task_kind_from_name(doc.value("task", "short"));
            queries.push_back(std::move(q));
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("malformed query record: ") + e.what());
        }
    }
    return queries;
}

std::vector<retrieval::Document> parse_corpus(
    const std::vector<nlohmann::json>& lines) {
    std::vector<retrieval::Document> corpus;
    for (const auto& doc : lines) {
        try {
            retrieval::Document d;
            d.doc_id = doc.at("doc_id").get<std::string>();
            if (doc.contains("title") && !doc.at("title").is_null()) {
                d.title = doc.at("title").get<std::string>();
            }
            d.body = doc.at("body").get<std::string>();
            corpus.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("malformed corpus record: ") + e.what());
        }
    }
    return corpus;
}

std::vector<GoldEntry> parse_golds(const std::vector<nlohmann::json>& lines) {
    std::vector<GoldEntry> golds;
    for (const auto& doc : lines) {
        try {
            GoldEntry entry;
            entry.id = doc.at("id").get<std::string>();
            entry.golds = doc.at("golds").get<std::vector<std::string>>();
            golds.push_back(std::move(entry));
        } catch (const nlohmann::json::exception& e) {
            throw IoError(std::string("malformed gold record: ") + e.what());
        }
    }
    return golds;
}

}  // namespace planrag::cli
