#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "planrag/errors.hpp"

namespace planrag::retrieval {

struct Document {
    std::string doc_id;
    std::optional<std::string> title;
    std::string body;
};

/// One retrieved document. Ranks within a retrieval result are unique and
/// contiguous from 1.
struct Passage {
    std::string doc_id;
    int rank = 0;
    std::optional<std::string> title;
    std::string body;
    double score = 0.0;
};

struct Sentence {
    std::string doc_id;
    int sentence_index = 0;
    std::string text;

    bool operator==(const Sentence&) const = default;
};

/// Lowercased alphanumeric tokens of `text`.
std::vector<std::string> tokenize(std::string_view text);

const std::vector<std::string>& default_abbreviations();

struct SentenceSplitOptions {
    std::vector<std::string> abbreviations = default_abbreviations();
};

/// Split at '.', '?' or '!' followed by whitespace or end of text, after
/// whitespace normalization. Words on the abbreviation guard list do not end
/// a sentence. Joining the result with single spaces reconstructs the
/// normalized input.
std::vector<Sentence> split_sentences(std::string_view text,
                                      const SentenceSplitOptions& options = {});

std::vector<Sentence> split_passage(const Passage& passage,
                                    const SentenceSplitOptions& options = {});

/// Scores candidate sentences against the current plan; higher is more
/// relevant. Implementations must return one score per sentence.
class SentenceScorer {
public:
    virtual ~SentenceScorer() = default;
    virtual std::vector<double> score(const std::string& plan,
                                      const std::vector<std::string>& sentences) = 0;
};

const std::unordered_set<std::string>& default_stopwords();

/// Fraction of the plan's content words that appear in the sentence,
/// lowercased, stopwords removed from the plan. A plan with no content
/// words scores 0 against everything.
double lexical_score(const std::string& plan, const std::string& sentence);

class LexicalOverlapScorer final : public SentenceScorer {
public:
    std::vector<double> score(const std::string& plan,
                              const std::vector<std::string>& sentences) override;
};

enum class EvidenceMode { Selected, PassthroughFullDocs, Disabled };

std::string_view evidence_mode_name(EvidenceMode mode);
EvidenceMode evidence_mode_from_name(std::string_view name);

/// Fine-grained evidence chosen for one plan. In Selected mode `sentences`
/// holds at most k_s sentences in source order (passage rank, then sentence
/// index) with `scores` parallel to them; in PassthroughFullDocs mode the
/// untouched passage bodies are carried instead; Disabled mode is empty.
struct EvidenceSelection {
    std::string plan;
    EvidenceMode mode = EvidenceMode::Disabled;
    std::vector<Sentence> sentences;
    std::vector<double> scores;
    std::string passthrough_text;

    /// The evidence string fed to the answer stage: selected sentences
    /// joined with single spaces, the passage concatenation, or empty.
    std::string evidence_text() const;
};

/// Pick the k_s highest-scoring sentences across all passages and re-order
/// them by source position. Ties break by (passage rank, sentence index), so
/// raising k_s only ever extends the selection. PassthroughFullDocs returns
/// the unscored passage bodies joined with newlines; Disabled returns empty
/// evidence. Selected mode requires a scorer.
EvidenceSelection select_evidence(const std::string& plan,
                                  const std::vector<Passage>& passages,
                                  SentenceScorer* scorer, int k_s,
                                  EvidenceMode mode,
                                  const SentenceSplitOptions& split = {});

/// The retriever abstraction: top-k passages for a query.
class Retriever {
public:
    virtual ~Retriever() = default;
    virtual std::vector<Passage> retrieve(const std::string& query, int k) const = 0;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// In-memory inverted index with BM25 ranking. Immutable once built; reads
/// are safe for concurrent use.
class LexicalIndex final : public Retriever {
public:
    /// Throws EmptyCorpus / DuplicateDocId.
    static LexicalIndex build(const std::vector<Document>& corpus,
                              Bm25Params params = {});

    /// Top-k by BM25 score, descending; ties break by ascending doc_id;
    /// only documents matching at least one query term are returned, so
    /// fewer than k matches yield a shorter list.
    std::vector<Passage> retrieve(const std::string& query, int k) const override;

    size_t size() const { return docs_.size(); }
    const Bm25Params& params() const { return params_; }

private:
    struct Posting {
        int doc = 0;
        int term_freq = 0;
    };

    LexicalIndex() = default;

    std::vector<Document> docs_;
    std::vector<int> doc_len_;
    double avg_doc_len_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    Bm25Params params_;
};

}  // namespace planrag::retrieval
