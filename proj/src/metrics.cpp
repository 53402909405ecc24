#include "planrag/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>

#include "planrag/retrieval.hpp"

namespace planrag::metrics {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (is_space(c)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string> scoring_tokens(std::string_view text,
                                        bool strip_articles) {
    return whitespace_tokens(normalize(text, strip_articles));
}

size_t lcs_length(const std::vector<std::string>& a,
                  const std::vector<std::string>& b) {
    const size_t n = a.size();
    const size_t m = b.size();
    std::vector<size_t> prev(m + 1, 0);
    std::vector<size_t> curr(m + 1, 0);
    for (size_t i = 1; i <= n; ++i) {
        for (size_t j = 1; j <= m; ++j) {
            if (a[i - 1] == b[j - 1]) {
                curr[j] = prev[j - 1] + 1;
            } else {
                curr[j] = std::max(prev[j], curr[j - 1]);
            }
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

/// Indices into `a` of one canonical longest common subsequence of a and b.
std::vector<size_t> lcs_positions(const std::vector<std::string>& a,
                                  const std::vector<std::string>& b) {
    const size_t n = a.size();
    const size_t m = b.size();
    if (n == 0 || m == 0) return {};
    std::vector<std::vector<size_t>> table(n + 1, std::vector<size_t>(m + 1, 0));
    for (size_t i = 1; i <= n; ++i) {
        for (size_t j = 1; j <= m; ++j) {
            if (a[i - 1] == b[j - 1]) {
                table[i][j] = table[i - 1][j - 1] + 1;
            } else {
                table[i][j] = std::max(table[i - 1][j], table[i][j - 1]);
            }
        }
    }
    std::vector<size_t> positions;
    size_t i = n, j = m;
    while (i > 0 && j > 0) {
        if (a[i - 1] == b[j - 1]) {
            positions.push_back(i - 1);
            --i;
            --j;
        } else if (table[i - 1][j] >= table[i][j - 1]) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(positions.begin(), positions.end());
    return positions;
}

RougeScore from_overlap(double hits, double pred_len, double gold_len) {
    RougeScore score;
    if (pred_len == 0.0 && gold_len == 0.0) {
        return RougeScore{1.0, 1.0, 1.0};
    }
    if (pred_len == 0.0 || gold_len == 0.0) {
        return score;
    }
    score.precision = hits / pred_len;
    score.recall = hits / gold_len;
    if (score.precision + score.recall > 0.0) {
        score.f = 2.0 * score.precision * score.recall /
                  (score.precision + score.recall);
    }
    return score;
}

}  // namespace

std::string normalize(std::string_view text, bool strip_articles) {
    std::string lowered;
    lowered.reserve(text.size());
    bool gap = true;
    for (char c : text) {
        if (is_space(c)) {
            gap = true;
            continue;
        }
        if (gap && !lowered.empty()) lowered.push_back(' ');
        gap = false;
        lowered.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    size_t begin = 0;
    size_t end = lowered.size();
    while (begin < end &&
           std::ispunct(static_cast<unsigned char>(lowered[begin]))) {
        ++begin;
    }
    while (end > begin &&
           std::ispunct(static_cast<unsigned char>(lowered[end - 1]))) {
        --end;
    }
    std::string trimmed = lowered.substr(begin, end - begin);
    while (!trimmed.empty() && trimmed.front() == ' ') trimmed.erase(0, 1);
    while (!trimmed.empty() && trimmed.back() == ' ') trimmed.pop_back();
    if (!strip_articles) return trimmed;

    std::string out;
    for (const std::string& token : whitespace_tokens(trimmed)) {
        if (token == "a" || token == "an" || token == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

int match_accuracy(const EvalItem& item) {
    const std::string pred = normalize(item.prediction, /*strip_articles=*/true);
    for (const std::string& gold : item.golds) {
        if (pred.find(normalize(gold, /*strip_articles=*/true)) !=
            std::string::npos) {
            return 1;
        }
    }
    return 0;
}

double token_f1(const EvalItem& item) {
    const std::vector<std::string> pred =
        scoring_tokens(item.prediction, /*strip_articles=*/false);
    double best = 0.0;
    for (const std::string& gold_text : item.golds) {
        const std::vector<std::string> gold =
            scoring_tokens(gold_text, /*strip_articles=*/false);
        if (pred.empty() && gold.empty()) {
            best = std::max(best, 1.0);
            continue;
        }
        if (pred.empty() || gold.empty()) continue;
        std::unordered_map<std::string, int> counts;
        for (const std::string& t : gold) ++counts[t];
        double overlap = 0.0;
        for (const std::string& t : pred) {
            auto it = counts.find(t);
            if (it != counts.end() && it->second > 0) {
                --it->second;
                overlap += 1.0;
            }
        }
        if (overlap == 0.0) continue;
        const double precision = overlap / static_cast<double>(pred.size());
        const double recall = overlap / static_cast<double>(gold.size());
        best = std::max(best, 2.0 * precision * recall / (precision + recall));
    }
    return best;
}

RougeScore rouge_l(std::string_view prediction, std::string_view gold) {
    const std::vector<std::string> pred = scoring_tokens(prediction, false);
    const std::vector<std::string> ref = scoring_tokens(gold, false);
    const double hits = static_cast<double>(lcs_length(ref, pred));
    return from_overlap(hits, static_cast<double>(pred.size()),
                        static_cast<double>(ref.size()));
}

double rouge_lsum(std::string_view prediction, std::string_view gold) {
    const std::string pred_text = normalize(prediction, false);
    const std::string gold_text = normalize(gold, false);

    std::vector<std::vector<std::string>> pred_sents;
    for (const retrieval::Sentence& s : retrieval::split_sentences(pred_text)) {
        pred_sents.push_back(whitespace_tokens(s.text));
    }
    std::vector<std::vector<std::string>> gold_sents;
    for (const retrieval::Sentence& s : retrieval::split_sentences(gold_text)) {
        gold_sents.push_back(whitespace_tokens(s.text));
    }

    double pred_len = 0.0;
    std::unordered_map<std::string, int> pred_counts;
    for (const auto& sent : pred_sents) {
        pred_len += static_cast<double>(sent.size());
        for (const std::string& t : sent) ++pred_counts[t];
    }
    double gold_len = 0.0;
    for (const auto& sent : gold_sents) {
        gold_len += static_cast<double>(sent.size());
    }

    double hits = 0.0;
    for (const auto& ref : gold_sents) {
        std::set<size_t> union_positions;
        for (const auto& cand : pred_sents) {
            for (size_t pos : lcs_positions(ref, cand)) union_positions.insert(pos);
        }
        // Clip by available prediction tokens so P and R stay within [0, 1].
        for (size_t pos : union_positions) {
            auto it = pred_counts.find(ref[pos]);
            if (it != pred_counts.end() && it->second > 0) {
                --it->second;
                hits += 1.0;
            }
        }
    }
    return from_overlap(hits, pred_len, gold_len).f;
}

const std::vector<std::string>& registered_metrics() {
    static const std::vector<std::string> names = {
        "accuracy", "f1", "rouge_l", "rouge_lsum", "mauve"};
    return names;
}

bool metric_supported(std::string_view name) {
    if (name == "mauve") return false;  // needs an external embedding model
    return std::find(registered_metrics().begin(), registered_metrics().end(),
                     name) != registered_metrics().end();
}

double compute_metric(std::string_view name, const EvalItem& item) {
    if (name == "accuracy") return static_cast<double>(match_accuracy(item));
    if (name == "f1") return token_f1(item);
    if (name == "rouge_l" || name == "rouge_lsum") {
        double best = 0.0;
        bool first = true;
        for (const std::string& gold : item.golds) {
            const double score = name == "rouge_l"
                                     ? rouge_l(item.prediction, gold).f
                                     : rouge_lsum(item.prediction, gold);
            best = first ? score : std::max(best, score);
            first = false;
        }
        return best;
    }
    if (name == "mauve") {
        throw NotSupported("mauve requires an external embedding model");
    }
    throw Error("unknown metric: " + std::string(name));
}

const std::vector<std::string>& metrics_for_task(orchestrator::TaskKind task) {
    static const std::vector<std::string> short_form = {"accuracy"};
    static const std::vector<std::string> multihop = {"f1"};
    static const std::vector<std::string> long_form = {"rouge_l", "rouge_lsum"};
    switch (task) {
    case orchestrator::TaskKind::Short: return short_form;
    case orchestrator::TaskKind::Multihop: return multihop;
    case orchestrator::TaskKind::Long: return long_form;
    }
    return short_form;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json out;
    out["task"] = std::string(orchestrator::task_kind_name(task));
    out["count"] = rows.size();
    nlohmann::ordered_json items = nlohmann::ordered_json::array();
    for (const EvalRow& row : rows) {
        nlohmann::ordered_json item;
        item["id"] = row.id;
        for (const auto& [metric, score] : row.scores) item[metric] = score;
        items.push_back(std::move(item));
    }
    out["items"] = std::move(items);
    nlohmann::ordered_json mean_obj;
    for (const auto& [metric, value] : means) {
        if (value) {
            mean_obj[metric] = *value;
        } else {
            mean_obj[metric] = nullptr;
        }
    }
    out["means"] = std::move(mean_obj);
    return out;
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    out << "id";
    std::vector<std::string> metric_names;
    for (const auto& [metric, value] : means) {
        (void)value;
        metric_names.push_back(metric);
        out << '\t' << metric;
    }
    out << '\n';
    for (const EvalRow& row : rows) {
        out << row.id;
        for (const std::string& metric : metric_names) {
            auto it = row.scores.find(metric);
            out << '\t';
            if (it != row.scores.end()) out << it->second;
        }
        out << '\n';
    }
    out << "mean";
    for (const std::string& metric : metric_names) {
        const auto& value = means.at(metric);
        out << '\t';
        if (value) {
            out << *value;
        } else {
            out << "null";
        }
    }
    out << '\n';
    return out.str();
}

EvalReport evaluate_run(const std::vector<EvalInput>& items,
                        orchestrator::TaskKind task) {
    EvalReport report;
    report.task = task;
    const std::vector<std::string>& names = metrics_for_task(task);
    std::map<std::string, double> sums;
    for (const EvalInput& input : items) {
        EvalRow row;
        row.id = input.id;
        EvalItem item{input.prediction, input.golds};
        for (const std::string& metric : names) {
            const double score = compute_metric(metric, item);
            row.scores[metric] = score;
            sums[metric] += score;
        }
        report.rows.push_back(std::move(row));
    }
    for (const std::string& metric : names) {
        if (items.empty()) {
            report.means[metric] = std::nullopt;
        } else {
            report.means[metric] = sums[metric] / static_cast<double>(items.size());
        }
    }
    return report;
}

}  // namespace planrag::metrics
