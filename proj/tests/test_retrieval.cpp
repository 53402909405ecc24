#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "planrag/retrieval.hpp"

using namespace planrag;
using namespace planrag::retrieval;

namespace {

// Per-document re-scoring without an inverted index.
std::vector<std::pair<std::string, double>> brute_force_bm25(
    const std::vector<Document>& corpus, const std::string& query,
    const Bm25Params& params) {
    std::vector<std::vector<std::string>> doc_tokens;
    double total_len = 0.0;
    for (const Document& doc : corpus) {
        std::string indexed = doc.title ? *doc.title + " " + doc.body : doc.body;
        doc_tokens.push_back(tokenize(indexed));
        total_len += static_cast<double>(doc_tokens.back().size());
    }
    const double avgdl = total_len / static_cast<double>(corpus.size());
    const double n = static_cast<double>(corpus.size());

    auto doc_freq = [&](const std::string& term) {
        double df = 0;
        for (const auto& tokens : doc_tokens) {
            if (std::find(tokens.begin(), tokens.end(), term) != tokens.end()) df += 1;
        }
        return df;
    };

    std::vector<std::pair<std::string, double>> scored;
    const std::vector<std::string> query_tokens = tokenize(query);
    for (size_t d = 0; d < corpus.size(); ++d) {
        double score = 0.0;
        bool any = false;
        for (const std::string& term : query_tokens) {
            const double tf = static_cast<double>(
                std::count(doc_tokens[d].begin(), doc_tokens[d].end(), term));
            if (tf == 0) continue;
            any = true;
            const double df = doc_freq(term);
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double dl = static_cast<double>(doc_tokens[d].size());
            score += idf * tf * (params.k1 + 1.0) /
                     (tf + params.k1 * (1.0 - params.b + params.b * dl / avgdl));
        }
        if (any) scored.emplace_back(corpus[d].doc_id, score);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return scored;
}

std::vector<Document> fuzz_corpus(std::mt19937& rng, int n_docs) {
    static const std::vector<std::string> vocab = {
        "river",  "mountain", "valley", "storm",  "harvest", "lantern",
        "copper", "granite",  "meadow", "falcon", "winter",  "ember",
        "bridge", "orchard",  "quarry", "signal", "harbor",  "cedar"};
    std::uniform_int_distribution<int> len(3, 40);
    std::uniform_int_distribution<size_t> pick(0, vocab.size() - 1);
    std::vector<Document> corpus;
    for (int d = 0; d < n_docs; ++d) {
        Document doc;
        doc.doc_id = "d" + std::to_string(100 + d);
        std::string body;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) {
            if (!body.empty()) body.push_back(' ');
            body += vocab[pick(rng)];
        }
        doc.body = body;
        corpus.push_back(std::move(doc));
    }
    return corpus;
}

void check_matches_brute_force(const std::vector<Document>& corpus,
                               const std::string& query, int k) {
    LexicalIndex index = LexicalIndex::build(corpus);
    std::vector<Passage> got = index.retrieve(query, k);
    auto want = brute_force_bm25(corpus, query, index.params());
    want.resize(std::min<size_t>(want.size(), static_cast<size_t>(k)));
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].doc_id == want[i].first);
        CHECK(std::abs(got[i].score - want[i].second) <= 1e-9);
        CHECK(got[i].rank == static_cast<int>(i) + 1);
    }
}

}  // namespace

TEST_CASE("index construction") {
    SUBCASE("single-document corpus matches its own terms") {
        LexicalIndex index = LexicalIndex::build({{"only", std::nullopt,
                                                   "granite bridge over the river"}});
        std::vector<Passage> hits = index.retrieve("granite", 5);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].doc_id == "only");
        CHECK(hits[0].score > 0.0);
    }
    SUBCASE("empty corpus is rejected") {
        CHECK_THROWS_AS(LexicalIndex::build({}), EmptyCorpus);
    }
    SUBCASE("duplicate doc ids are rejected") {
        std::vector<Document> corpus = {{"same", std::nullopt, "a"},
                                        {"same", std::nullopt, "b"}};
        CHECK_THROWS_AS(LexicalIndex::build(corpus), DuplicateDocId);
    }
    SUBCASE("a uniquely matching term ranks its document first") {
        std::vector<Document> corpus = {
            {"a", std::nullopt, "river valley storm"},
            {"b", std::nullopt, "river falcon ember quarry"},
            {"c", std::nullopt, "river meadow"}};
        LexicalIndex index = LexicalIndex::build(corpus);
        std::vector<Passage> hits = index.retrieve("falcon", 3);
        REQUIRE(!hits.empty());
        CHECK(hits[0].doc_id == "b");
        auto want = brute_force_bm25(corpus, "falcon", index.params());
        CHECK(want[0].first == "b");
    }
}

TEST_CASE("retrieval ranking") {
    std::vector<Document> corpus;
    for (int d = 0; d < 10; ++d) {
        corpus.push_back({"doc" + std::to_string(d), std::nullopt,
                          d % 2 == 0 ? "copper lantern signal harbor cedar"
                                     : "storm winter ember signal"});
    }
    corpus[3].body = "copper copper copper lantern";

    SUBCASE("query equal to a document's full text puts it first") {
        std::vector<Document> small = {
            {"x", std::nullopt, "granite meadow falcon"},
            {"y", std::nullopt, "granite bridge orchard quarry signal harbor"},
            {"z", std::nullopt, "winter ember"}};
        LexicalIndex index = LexicalIndex::build(small);
        std::vector<Passage> hits = index.retrieve("granite meadow falcon", 3);
        REQUIRE(!hits.empty());
        CHECK(hits[0].doc_id == "x");
    }
    SUBCASE("query with no corpus terms yields an empty list") {
        LexicalIndex index = LexicalIndex::build(corpus);
        CHECK(index.retrieve("zzz qqq", 5).empty());
    }
    SUBCASE("fixed corpus matches brute force") {
        check_matches_brute_force(corpus, "copper signal", 10);
        check_matches_brute_force(corpus, "storm", 4);
    }
    SUBCASE("ranking is independent of corpus insertion order") {
        LexicalIndex index = LexicalIndex::build(corpus);
        std::vector<Passage> baseline = index.retrieve("copper signal ember", 10);
        std::mt19937 rng(5);
        std::vector<Document> shuffled = corpus;
        for (int round = 0; round < 5; ++round) {
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            LexicalIndex again = LexicalIndex::build(shuffled);
            std::vector<Passage> hits = again.retrieve("copper signal ember", 10);
            REQUIRE(hits.size() == baseline.size());
            for (size_t i = 0; i < hits.size(); ++i) {
                CHECK(hits[i].doc_id == baseline[i].doc_id);
                CHECK(std::abs(hits[i].score - baseline[i].score) <= 1e-9);
            }
        }
    }
    SUBCASE("fuzzed corpora match brute force") {
        std::mt19937 rng(90210);
        for (int round = 0; round < 10; ++round) {
            std::vector<Document> fuzz = fuzz_corpus(rng, 30);
            check_matches_brute_force(fuzz, "river mountain ember cedar", 7);
        }
    }
}

TEST_CASE("sentence splitting") {
    SUBCASE("single letters end sentences") {
        std::vector<Sentence> got = split_sentences("A. B.");
        REQUIRE(got.size() == 2);
        CHECK(got[0].text == "A.");
        CHECK(got[1].text == "B.");
        CHECK(got[0].sentence_index == 0);
        CHECK(got[1].sentence_index == 1);
    }
    SUBCASE("empty input") {
        CHECK(split_sentences("").empty());
        CHECK(split_sentences("   \n\t ").empty());
    }
    SUBCASE("three-sentence company paragraph") {
        const std::string paragraph =
            "Haier Pakistan is a consumer electronics and home appliances "
            "company in Pakistan. Established in 2000, it is a subsidiary of "
            "the Chinese multinational group Haier. It is one of the largest "
            "companies in Pakistan's home appliances market, in terms of "
            "sales and revenues generated.";
        std::vector<Sentence> got = split_sentences(paragraph);
        REQUIRE(got.size() == 3);
        CHECK(got[0].text ==
              "Haier Pakistan is a consumer electronics and home appliances "
              "company in Pakistan.");
        CHECK(got[1].text ==
              "Established in 2000, it is a subsidiary of the Chinese "
              "multinational group Haier.");
        CHECK(got[2].text ==
              "It is one of the largest companies in Pakistan's home "
              "appliances market, in terms of sales and revenues generated.");
    }
    SUBCASE("abbreviations do not end sentences") {
        std::vector<Sentence> got = split_sentences("Dr. Smith arrived. He left.");
        REQUIRE(got.size() == 2);
        CHECK(got[0].text == "Dr. Smith arrived.");
        CHECK(got[1].text == "He left.");
    }
    SUBCASE("question and exclamation marks") {
        std::vector<Sentence> got = split_sentences("Really?! Yes. Go now!");
        REQUIRE(got.size() == 3);
        CHECK(got[0].text == "Really?!");
    }
    SUBCASE("joining with spaces reconstructs the normalized body") {
        std::mt19937 rng(777);
        std::uniform_int_distribution<int> len(0, 120);
        std::uniform_int_distribution<int> ch(0, 25);
        static constexpr const char* kChars = "ab .!?\tum\nDr viz e.g:,xq40";
        for (int round = 0; round < 300; ++round) {
            std::string text;
            const int n = len(rng);
            for (int i = 0; i < n; ++i) text.push_back(kChars[static_cast<size_t>(ch(rng))]);
            std::string joined;
            for (const Sentence& s : split_sentences(text)) {
                CHECK(!s.text.empty());
                if (!joined.empty()) joined.push_back(' ');
                joined += s.text;
            }
            std::string normalized;
            bool gap = true;
            for (char c : text) {
                if (std::isspace(static_cast<unsigned char>(c))) {
                    gap = true;
                    continue;
                }
                if (gap && !normalized.empty()) normalized.push_back(' ');
                gap = false;
                normalized.push_back(c);
            }
            CHECK(joined == normalized);
        }
    }
}

TEST_CASE("lexical overlap scoring") {
    CHECK(lexical_score("granite bridge", "granite bridge") == 1.0);
    CHECK(lexical_score("granite bridge", "falcon meadow") == 0.0);
    CHECK(lexical_score("alpha beta gamma delta",
                        "alpha beta something else entirely") == 0.5);
    CHECK(lexical_score("", "anything") == 0.0);
    CHECK(lexical_score("the of and", "the of and") == 0.0);  // stopwords only
}

namespace {

std::vector<Passage> make_passages(const std::vector<std::string>& bodies) {
    std::vector<Passage> passages;
    for (size_t i = 0; i < bodies.size(); ++i) {
        Passage p;
        p.doc_id = "p" + std::to_string(i);
        p.rank = static_cast<int>(i) + 1;
        p.body = bodies[i];
        passages.push_back(std::move(p));
    }
    return passages;
}

}  // namespace

TEST_CASE("evidence selection") {
    LexicalOverlapScorer scorer;

    SUBCASE("verbatim plan selects exactly its sentence") {
        std::vector<Passage> passages = make_passages(
            {"Falcons hunt at dawn. The copper lantern glows. Weather varies."});
        EvidenceSelection ev = select_evidence("copper lantern", passages,
                                               &scorer, 1, EvidenceMode::Selected);
        REQUIRE(ev.sentences.size() == 1);
        CHECK(ev.sentences[0].text == "The copper lantern glows.");
        CHECK(ev.evidence_text() == "The copper lantern glows.");
    }

    SUBCASE("passthrough mode returns the exact passage concatenation") {
        std::vector<Passage> passages =
            make_passages({"First body. Two sentences.", "Second body."});
        EvidenceSelection ev = select_evidence(
            "anything", passages, nullptr, 3, EvidenceMode::PassthroughFullDocs);
        CHECK(ev.evidence_text() == "First body. Two sentences.\nSecond body.");
        CHECK(ev.sentences.empty());
    }

    SUBCASE("disabled mode returns empty evidence") {
        std::vector<Passage> passages = make_passages({"Some body."});
        EvidenceSelection ev =
            select_evidence("plan", passages, nullptr, 3, EvidenceMode::Disabled);
        CHECK(ev.evidence_text().empty());
        CHECK(ev.sentences.empty());
    }

    SUBCASE("selected mode requires a scorer") {
        std::vector<Passage> passages = make_passages({"Some body."});
        CHECK_THROWS_AS(
            select_evidence("plan", passages, nullptr, 3, EvidenceMode::Selected),
            InvariantViolation);
    }

    SUBCASE("top-k selection matches exhaustive scoring") {
        std::vector<Passage> passages = make_passages(
            {"Falcon ember. Granite quarry. Copper signal. Harbor cedar.",
             "Falcon granite. Meadow storm. Falcon copper granite. River.",
             "Winter lantern. Orchard bridge. Ember falcon granite copper. Valley."});
        const std::string plan = "falcon granite copper";
        const int k_s = 3;
        EvidenceSelection ev =
            select_evidence(plan, passages, &scorer, k_s, EvidenceMode::Selected);
        REQUIRE(ev.sentences.size() == 3);

        // Exhaustive oracle over every sentence of every passage.
        struct Scored {
            size_t passage;
            int index;
            std::string text;
            double score;
        };
        std::vector<Scored> all;
        for (size_t p = 0; p < passages.size(); ++p) {
            for (const Sentence& s : split_passage(passages[p])) {
                all.push_back({p, s.sentence_index, s.text,
                               lexical_score(plan, s.text)});
            }
        }
        std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.passage != b.passage) return a.passage < b.passage;
            return a.index < b.index;
        });
        std::set<std::string> want;
        for (int i = 0; i < k_s; ++i) want.insert(all[static_cast<size_t>(i)].text);
        std::set<std::string> got;
        for (const Sentence& s : ev.sentences) got.insert(s.text);
        CHECK(got == want);
    }

    SUBCASE("selection is ordered by source position, not score") {
        std::vector<Passage> passages = make_passages(
            {"Nothing relevant here. Copper granite falcon ember. Copper only."});
        EvidenceSelection ev = select_evidence("copper granite falcon ember",
                                               passages, &scorer, 2,
                                               EvidenceMode::Selected);
        REQUIRE(ev.sentences.size() == 2);
        CHECK(ev.sentences[0].sentence_index < ev.sentences[1].sentence_index);
        CHECK(ev.sentences[0].text == "Copper granite falcon ember.");
    }

    SUBCASE("raising k_s never drops a previously selected sentence") {
        std::mt19937 rng(31337);
        for (int round = 0; round < 30; ++round) {
            std::vector<Document> docs = fuzz_corpus(rng, 3);
            std::vector<std::string> bodies;
            for (const Document& d : docs) {
                std::string spaced;
                int i = 0;
                for (const std::string& tok : tokenize(d.body)) {
                    spaced += tok;
                    spaced += (++i % 4 == 0) ? ". " : " ";
                }
                bodies.push_back(spaced + ".");
            }
            std::vector<Passage> passages = make_passages(bodies);
            std::set<std::pair<std::string, int>> previous;
            for (int k_s = 1; k_s <= 6; ++k_s) {
                EvidenceSelection ev = select_evidence("river mountain cedar",
                                                       passages, &scorer, k_s,
                                                       EvidenceMode::Selected);
                std::set<std::pair<std::string, int>> current;
                for (const Sentence& s : ev.sentences) {
                    current.insert({s.doc_id, s.sentence_index});
                }
                CHECK(std::includes(current.begin(), current.end(),
                                    previous.begin(), previous.end()));
                previous = current;
            }
        }
    }

    SUBCASE("zero-scoring plans still fill k_s by source order") {
        std::vector<Passage> passages =
            make_passages({"One sentence. Another sentence. Third sentence."});
        EvidenceSelection ev = select_evidence("zzz unmatched words", passages,
                                               &scorer, 2, EvidenceMode::Selected);
        REQUIRE(ev.sentences.size() == 2);
        CHECK(ev.sentences[0].text == "One sentence.");
        CHECK(ev.sentences[1].text == "Another sentence.");
        CHECK(ev.scores[0] == 0.0);
    }

    SUBCASE("selected sentences are a subset of the split sentences") {
        std::vector<Passage> passages = make_passages(
            {"Copper falcon. Granite river.", "Meadow ember storm. Cedar."});
        EvidenceSelection ev = select_evidence("copper river cedar", passages,
                                               &scorer, 3, EvidenceMode::Selected);
        std::set<std::string> universe;
        for (const Passage& p : passages) {
            for (const Sentence& s : split_passage(p)) universe.insert(s.text);
        }
        for (const Sentence& s : ev.sentences) {
            CHECK(universe.count(s.text) == 1);
        }
    }
}
