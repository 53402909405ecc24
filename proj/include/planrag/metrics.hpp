#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "planrag/errors.hpp"
#include "planrag/orchestrator.hpp"

namespace planrag::metrics {

/// Prediction plus the set of acceptable answers. Texts are normalized
/// (lowercase, collapsed whitespace, outer punctuation stripped) before any
/// scoring; articles are additionally dropped for accuracy and token F1.
struct EvalItem {
    std::string prediction;
    std::vector<std::string> golds;
};

std::string normalize(std::string_view text, bool strip_articles = false);

/// 1 iff any normalized gold is a substring of the normalized prediction.
int match_accuracy(const EvalItem& item);

/// Max over golds of the harmonic mean of token precision/recall under
/// multiset overlap. Both sides empty scores 1, exactly one empty scores 0.
double token_f1(const EvalItem& item);

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

/// LCS-based score over word tokens: recall against the gold length,
/// precision against the prediction length, balanced F.
RougeScore rouge_l(std::string_view prediction, std::string_view gold);

/// Sentence-level variant: per gold sentence, the union of LCS hit positions
/// against every prediction sentence, clipped by prediction token counts,
/// aggregated into one P/R/F. Reduces to rouge_l on single-sentence pairs.
double rouge_lsum(std::string_view prediction, std::string_view gold);

/// Names the harness knows, including slots that are registered but not
/// computable locally ("mauve" needs an external embedding model).
const std::vector<std::string>& registered_metrics();
bool metric_supported(std::string_view name);

/// Score one item under a named metric. Throws NotSupported for registered
/// but unimplemented metrics and Error for unknown names.
double compute_metric(std::string_view name, const EvalItem& item);

/// The metrics reported for each task kind.
const std::vector<std::string>& metrics_for_task(orchestrator::TaskKind task);

struct EvalInput {
    std::string id;
    std::string prediction;
    std::vector<std::string> golds;
};

struct EvalRow {
    std::string id;
    std::map<std::string, double> scores;
};

struct EvalReport {
    orchestrator::TaskKind task = orchestrator::TaskKind::Short;
    std::vector<EvalRow> rows;
    /// Corpus means per metric; empty report leaves them unset (null in JSON).
    std::map<std::string, std::optional<double>> means;

    nlohmann::ordered_json to_json() const;
    std::string to_table() const;
};

/// Per-item scores plus corpus means for the task's metric set.
EvalReport evaluate_run(const std::vector<EvalInput>& items,
                        orchestrator::TaskKind task);

}  // namespace planrag::metrics
