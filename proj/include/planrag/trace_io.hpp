#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "planrag/errors.hpp"
#include "planrag/retrieval.hpp"
#include "planrag/orchestrator.hpp"
#include "planrag/segment_grammar.hpp"

namespace planrag::cli {

/// A trace tagged with the query it answers, as written to the output JSONL.
struct TraceEnvelope {
    std::string id;
    std::string question;
    grammar::GenerationTrace trace;
    std::optional<double> timing_ms;
};

nlohmann::ordered_json trace_to_json(const TraceEnvelope& envelope);
TraceEnvelope trace_from_json(const nlohmann::json& doc);

/// One JSON value per non-empty line. Throws IoError on unreadable files or
/// unparseable lines.
std::vector<nlohmann::json> read_jsonl(const std::string& path);

/// Serialized single-line records, one per element, newline terminated.
void write_lines(const std::string& path, const std::vector<std::string>& lines);

std::vector<orchestrator::Query> parse_queries(
    const std::vector<nlohmann::json>& lines);
std::vector<retrieval::Document> parse_corpus(
    const std::vector<nlohmann::json>& lines);

struct GoldEntry {
    std::string id;
    std::vector<std::string> golds;
};
std::vector<GoldEntry> parse_golds(const std::vector<nlohmann::json>& lines);

}  // namespace planrag::cli
