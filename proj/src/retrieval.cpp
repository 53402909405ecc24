#include "planrag/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace planrag::retrieval {

namespace {

char to_lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_gap = true;  // swallows leading whitespace
    for (char c : text) {
        if (is_space(c)) {
            in_gap = true;
            continue;
        }
        if (in_gap && !out.empty()) out.push_back(' ');
        in_gap = false;
        out.push_back(c);
    }
    return out;
}

bool is_sentence_end(char c) {
    return c == '.' || c == '?' || c == '!';
}

// The whitespace-delimited word ending at `pos` (inclusive), without leading
// punctuation, lowercased: "(e.g." -> "e.g.".
std::string word_ending_at(const std::string& text, size_t pos) {
    size_t begin = pos;
    while (begin > 0 && !is_space(text[begin - 1])) --begin;
    while (begin < pos &&
           !std::isalnum(static_cast<unsigned char>(text[begin]))) {
        ++begin;
    }
    std::string word;
    for (size_t i = begin; i <= pos; ++i) word.push_back(to_lower(text[i]));
    return word;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current.push_back(to_lower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

const std::vector<std::string>& default_abbreviations() {
    static const std::vector<std::string> abbreviations = {
        "mr.",  "mrs.", "ms.",   "dr.",   "prof.", "sr.",   "jr.",
        "st.",  "vs.",  "etc.",  "e.g.",  "i.e.",  "inc.",  "ltd.",
        "co.",  "corp.", "fig.", "al.",   "no.",   "dept.", "est.",
        "approx.", "u.s.", "u.k.", "a.m.", "p.m.",
    };
    return abbreviations;
}

std::vector<Sentence> split_sentences(std::string_view text,
                                      const SentenceSplitOptions& options) {
    const std::string normalized = normalize_whitespace(text);
    std::vector<Sentence> sentences;
    auto emit = [&](size_t begin, size_t end) {
        if (end <= begin) return;
        Sentence s;
        s.sentence_index = static_cast<int>(sentences.size());
        s.text = normalized.substr(begin, end - begin);
        sentences.push_back(std::move(s));
    };

    size_t start = 0;
    for (size_t i = 0; i < normalized.size(); ++i) {
        if (!is_sentence_end(normalized[i])) continue;
        const bool at_end = i + 1 == normalized.size();
        if (!at_end && normalized[i + 1] != ' ') continue;
        if (normalized[i] == '.') {
            const std::string word = word_ending_at(normalized, i);
            if (std::find(options.abbreviations.begin(),
                          options.abbreviations.end(),
                          word) != options.abbreviations.end()) {
                continue;
            }
        }
        emit(start, i + 1);
        start = i + 2;  // skip the separating space
        if (start > normalized.size()) start = normalized.size();
        i = start > 0 ? start - 1 : 0;
    }
    emit(start, normalized.size());
    return sentences;
}

std::vector<Sentence> split_passage(const Passage& passage,
                                    const SentenceSplitOptions& options) {
    std::vector<Sentence> sentences = split_sentences(passage.body, options);
    for (Sentence& s : sentences) s.doc_id = passage.doc_id;
    return sentences;
}

const std::unordered_set<std::string>& default_stopwords() {
    static const std::unordered_set<std::string> stopwords = {
        "a",    "an",   "the",  "is",    "are",   "was",  "were", "be",
        "been", "being", "of",  "in",    "on",    "at",   "to",   "for",
        "with", "by",   "from", "as",    "and",   "or",   "but",  "not",
        "no",   "it",   "its",  "this",  "that",  "these", "those", "he",
        "she",  "they", "them", "his",   "her",   "their", "we",  "you",
        "i",    "do",   "does", "did",   "have",  "has",  "had",  "will",
        "would", "can", "could", "should", "may", "might", "about", "into",
        "over", "under", "what", "which", "who",  "whom", "when", "where",
        "why",  "how",  "there", "here",  "if",   "then", "than", "so",
        "such", "only", "also", "very",  "too",   "own",  "same", "s",
        "t",
    };
    return stopwords;
}

double lexical_score(const std::string& plan, const std::string& sentence) {
    const auto& stop = default_stopwords();
    std::unordered_set<std::string> plan_words;
    for (const std::string& word : tokenize(plan)) {
        if (!stop.count(word)) plan_words.insert(word);
    }
    if (plan_words.empty()) return 0.0;
    std::unordered_set<std::string> sentence_words;
    for (const std::string& word : tokenize(sentence)) sentence_words.insert(word);
    size_t overlap = 0;
    for (const std::string& word : plan_words) {
        if (sentence_words.count(word)) ++overlap;
    }
    return static_cast<double>(overlap) / static_cast<double>(plan_words.size());
}

std::vector<double> LexicalOverlapScorer::score(
    const std::string& plan, const std::vector<std::string>& sentences) {
    std::vector<double> scores;
    scores.reserve(sentences.size());
    for (const std::string& s : sentences) scores.push_back(lexical_score(plan, s));
    return scores;
}

std::string_view evidence_mode_name(EvidenceMode mode) {
    switch (mode) {
    case EvidenceMode::Selected: return "selected";
    case EvidenceMode::PassthroughFullDocs: return "passthrough_full_docs";
    case EvidenceMode::Disabled: return "disabled";
    }
    return "disabled";
}

EvidenceMode evidence_mode_from_name(std::string_view name) {
    if (name == "selected") return EvidenceMode::Selected;
    if (name == "passthrough_full_docs") return EvidenceMode::PassthroughFullDocs;
    if (name == "disabled") return EvidenceMode::Disabled;
    throw ConfigError("unknown evidence mode: " + std::string(name));
}

std::string EvidenceSelection::evidence_text() const {
    switch (mode) {
    case EvidenceMode::PassthroughFullDocs:
        return passthrough_text;
    case EvidenceMode::Disabled:
        return {};
    case EvidenceMode::Selected: {
        std::string out;
        for (const Sentence& s : sentences) {
            if (!out.empty()) out.push_back(' ');
            out += s.text;
        }
        return out;
    }
    }
    return {};
}

EvidenceSelection select_evidence(const std::string& plan,
                                  const std::vector<Passage>& passages,
                                  SentenceScorer* scorer, int k_s,
                                  EvidenceMode mode,
                                  const SentenceSplitOptions& split) {
    EvidenceSelection selection;
    selection.plan = plan;
    selection.mode = mode;
    if (mode == EvidenceMode::Disabled) return selection;
    if (mode == EvidenceMode::PassthroughFullDocs) {
        std::string all;
        for (const Passage& p : passages) {
            if (!all.empty()) all.push_back('\n');
            all += p.body;
        }
        selection.passthrough_text = std::move(all);
        return selection;
    }

    if (scorer == nullptr) {
        throw InvariantViolation("Selected evidence mode requires a scorer");
    }
    if (k_s < 1) {
        throw InvariantViolation("k_s must be at least 1");
    }

    struct Candidate {
        size_t passage_order;
        Sentence sentence;
        double score = 0.0;
    };
    std::vector<Candidate> candidates;
    std::vector<std::string> texts;
    for (size_t p = 0; p < passages.size(); ++p) {
        for (Sentence& s : split_passage(passages[p], split)) {
            texts.push_back(s.text);
            candidates.push_back(Candidate{p, std::move(s), 0.0});
        }
    }
    if (candidates.empty()) return selection;

    const std::vector<double> scores = scorer->score(plan, texts);
    if (scores.size() != candidates.size()) {
        throw BackendUnavailable(
            "scorer returned " + std::to_string(scores.size()) +
            " scores for " + std::to_string(candidates.size()) + " sentences");
    }
    for (size_t i = 0; i < candidates.size(); ++i) candidates[i].score = scores[i];

    std::vector<size_t> order(candidates.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (candidates[a].score != candidates[b].score)
            return candidates[a].score > candidates[b].score;
        if (candidates[a].passage_order != candidates[b].passage_order)
            return candidates[a].passage_order < candidates[b].passage_order;
        return candidates[a].sentence.sentence_index <
               candidates[b].sentence.sentence_index;
    });
    order.resize(std::min<size_t>(order.size(), static_cast<size_t>(k_s)));
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (candidates[a].passage_order != candidates[b].passage_order)
            return candidates[a].passage_order < candidates[b].passage_order;
        return candidates[a].sentence.sentence_index <
               candidates[b].sentence.sentence_index;
    });
    for (size_t idx : order) {
        selection.sentences.push_back(candidates[idx].sentence);
        selection.scores.push_back(candidates[idx].score);
    }
    return selection;
}

LexicalIndex LexicalIndex::build(const std::vector<Document>& corpus,
                                 Bm25Params params) {
    if (corpus.empty()) throw EmptyCorpus("cannot index an empty corpus");

    LexicalIndex index;
    index.params_ = params;
    index.docs_ = corpus;

    std::unordered_set<std::string> seen_ids;
    long total_len = 0;
    for (size_t d = 0; d < corpus.size(); ++d) {
        const Document& doc = corpus[d];
        if (!seen_ids.insert(doc.doc_id).second) {
            throw DuplicateDocId("duplicate doc_id: " + doc.doc_id);
        }
        std::string indexed = doc.title ? *doc.title + " " + doc.body : doc.body;
        std::unordered_map<std::string, int> freqs;
        int len = 0;
        for (std::string& token : tokenize(indexed)) {
            ++freqs[std::move(token)];
            ++len;
        }
        index.doc_len_.push_back(len);
        total_len += len;
        for (auto& [term, freq] : freqs) {
            index.postings_[term].push_back(Posting{static_cast<int>(d), freq});
        }
    }
    index.avg_doc_len_ =
        static_cast<double>(total_len) / static_cast<double>(corpus.size());
    for (auto& [term, postings] : index.postings_) {
        std::sort(postings.begin(), postings.end(),
                  [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
    }
    return index;
}

std::vector<Passage> LexicalIndex::retrieve(const std::string& query,
                                            int k) const {
    if (k < 1) throw InvariantViolation("k must be at least 1");

    const double n_docs = static_cast<double>(docs_.size());
    std::vector<double> scores(docs_.size(), 0.0);
    std::vector<char> matched(docs_.size(), 0);
    for (const std::string& term : tokenize(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const Posting& posting : it->second) {
            const double tf = static_cast<double>(posting.term_freq);
            const double norm_len =
                avg_doc_len_ > 0.0 ? doc_len_[static_cast<size_t>(posting.doc)] /
                                         avg_doc_len_
                                   : 0.0;
            const double denom =
                tf + params_.k1 * (1.0 - params_.b + params_.b * norm_len);
            scores[static_cast<size_t>(posting.doc)] +=
                idf * tf * (params_.k1 + 1.0) / denom;
            matched[static_cast<size_t>(posting.doc)] = 1;
        }
    }

    std::vector<size_t> hits;
    for (size_t d = 0; d < docs_.size(); ++d) {
        if (matched[d]) hits.push_back(d);
    }
    std::sort(hits.begin(), hits.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return docs_[a].doc_id < docs_[b].doc_id;
    });
    hits.resize(std::min<size_t>(hits.size(), static_cast<size_t>(k)));

    std::vector<Passage> results;
    results.reserve(hits.size());
    for (size_t i = 0; i < hits.size(); ++i) {
        const Document& doc = docs_[hits[i]];
        Passage p;
        p.doc_id = doc.doc_id;
        p.rank = static_cast<int>(i) + 1;
        p.title = doc.title;
        p.body = doc.body;
        p.score = scores[hits[i]];
        results.push_back(std::move(p));
    }
    return results;
}

}  // namespace planrag::retrieval
