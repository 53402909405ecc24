#pragma once

#include <string>
#include <vector>

namespace planrag::dataset {

struct QaSubPair {
    std::string question;
    std::string answer;
};

namespace prompts {

/// Instruction asking for one "[Plan: ...]" token summarizing a short-form
/// question.
std::string short_form_plan(const std::string& question);

/// First stage of the ambiguous-question flow: decide which numbered
/// qa-pairs a sentence is supported by, answered as "[i][j]" citations.
std::string asqa_citations(const std::vector<QaSubPair>& qa_pairs,
                           const std::string& sentence);

/// Second stage: summarize the cited sub-questions into one question.
std::string asqa_summarize(const std::vector<std::string>& questions);

/// Fill the "[Plan]" slot inside a dialogue answer segment with a
/// "[Plan: ...]" token.
std::string sharegpt_plan(const std::string& segment_with_slot);

/// Expand a two-hop short answer into plan-tagged steps over the numbered
/// evidence.
std::string hotpot_plan(const std::string& question, const std::string& answer,
                        const std::vector<std::string>& evidence);

/// Pick the minimum sufficient subset of numbered sentences supporting a
/// question/answer pair, answered as "[i]" citations.
std::string evidence_selection(const std::string& question,
                               const std::string& answer,
                               const std::vector<std::string>& sentences);

}  // namespace prompts
}  // namespace planrag::dataset
