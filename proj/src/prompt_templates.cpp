#include "planrag/prompt_templates.hpp"

namespace planrag::dataset::prompts {

namespace {

std::string numbered_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        out += "[" + std::to_string(i) + "] " + lines[i] + "\n";
    }
    return out;
}

}  // namespace

std::string short_form_plan(const std::string& question) {
    return
        "Extract the body of the statement from the question into a Plan "
        "token. The plan token should be like [Plan: XX].\n"
        "Input: which company Javed Afridi is best known as CEO?\n"
        "Output: [Plan: Javed Afridi best known company].\n"
        "Input: " + question + "\n"
        "Output:";
}

std::string asqa_citations(const std::vector<QaSubPair>& qa_pairs,
                           const std::string& sentence) {
    std::string out =
        "Given several short qa-pairs and a sentence, you need to decide "
        "which qa-pair is this sentence relevant to. Always cite for any "
        "factual claim. When citing several search results, use [1][2][3]. "
        "If multiple qa-pairs support the sentence, only cite a minimum "
        "sufficient subset of the qa-pairs.\n"
        "QA-Pairs:\n"
        "[0] Where Haier Pakistan is located? Pakistan.\n"
        "[1] When was Haier Pakistan established? 2000.\n"
        "Sentence:\n"
        "Established in 2000, it is a subsidiary of the Chinese "
        "multinational group Haier.\n"
        "Out: [1]\n"
        "QA-Pairs:\n"
        "[0] When does episode 42 of bunk'd come out? May 24, 2017.\n"
        "[1] When does episode 41 of bunk'd come out?? April 28, 2017.\n"
        "[2] When does episode 40 of bunk'd come out? April 21, 2017.\n"
        "Sentence:\n"
        "The new bunk'd episode 41 comes out on April 21, 2017, episode 42 "
        "comes out on April 28, 2017 and episode 42 is due to come out on "
        "May 24, 2017.\n"
        "Out: [0][1][2]\n"
        "QA-Pairs:\n";
    for (size_t i = 0; i < qa_pairs.size(); ++i) {
        out += "[" + std::to_string(i) + "] " + qa_pairs[i].question + " " +
               qa_pairs[i].answer + "\n";
    }
    out += "Sentence:\n" + sentence + "\nOut:";
    return out;
}

std::string asqa_summarize(const std::vector<std::string>& questions) {
    return
        "Given a number of questions, you need to summarize them as "
        "concisely and accurately as possible into one question, avoiding "
        "missing information about each question. You don't have to answer "
        "these questions.\n"
        "Questions:\n" + numbered_lines(questions) +
        "Output:";
}

std::string sharegpt_plan(const std::string& segment_with_slot) {
    return
        "Generate appropriate Plan token in the following format: "
        "[Plan: xx], for each [Plan] based on relevant context. Be sure "
        "always generate a Plan Token for each [Plan] in order, Keep the "
        "details to be as different as possible from other Plan tokens. Do "
        "not generate a Plan Token where there is no [Plan].\n"
        "Input: AB is famous for his work in Parkistan Haier.[Plan] "
        "Established in 2000, it is a subsidiary of the Chinese "
        "multinational group Haier.\n"
        "Output:AB is famous for his work in Parkistan Haier.[Plan: "
        "Parkistan Haier establish time] Established in 2000, it is a "
        "subsidiary of the Chinese multinational group Haier.\n"
        "Input: " + segment_with_slot + "\n"
        "Output:";
}

std::string hotpot_plan(const std::string& question, const std::string& answer,
                        const std::vector<std::string>& evidence) {
    return
        "Given a question and corresponding short answer. Expand the short "
        "answer to an accurate, fine-grained, and concise answer with "
        "thinking steps for the given question using only the provided "
        "search results (some of which might be irrelevant) and cite them "
        "properly. During the generation, make sure the plan token in "
        "answers start with the question and work their way up logically "
        "from the answers you already have. Use an unbiased and journalistic "
        "tone. Always cite for any factual claim. Cite at most one evidence "
        "in each sentence. If multiple documents support the sentence, only "
        "cite the first one.\n"
        "Question: In what year was the company, for which Javed Afridi is "
        "best known as CEO, established?\n"
        "Answer: 2000.\n"
        "Evidence:\n"
        "[0] Established in 2000, Haier Pakistan is a subsidiary of the "
        "Chinese multinational group Haier.\n"
        "[1] Javed Afridi is best known as the CEO of Haier Pakistan and "
        "owner of MG Motors Pakistan.\n"
        "Out: [Plan: Javed Afridi best known company]Javed Afridi is best "
        "known as the CEO of Haier Pakistan[1],[Plan: Haier Pakistan "
        "establish]which was established in 2000.[0]\n"
        "As mentioned before, the first plan token should be generated from "
        "question [Plan: Javed Afridi best known company], considering the "
        "answer already generated and further plan the establish time of "
        "Haier Pakistan.\n"
        "Question: Where are Steph Curry and Lebron James both from?\n"
        "Answer: America.\n"
        "Evidence:\n"
        "[0] Stephen Curry is a professional American basketball player "
        "with the Golden State Warriors..\n"
        "[1] Lebron James is a professional American basketball player with "
        "the Lakers.\n"
        "Out: [Plan: Steph Curry from]Steph Curry is from America[0],[Plan: "
        "Lebron James from]Lebron James is also from America.[1]\n"
        "Question: " + question + "\n"
        "Answer: " + answer + "\n"
        "Evidence:\n" + numbered_lines(evidence) +
        "Out:";
}

std::string evidence_selection(const std::string& question,
                               const std::string& answer,
                               const std::vector<std::string>& sentences) {
    return
        "Write an accurate, engaging, and concise answer for the given "
        "question answer pair using only the provided search results (some "
        "of which might be irrelevant) and cite them properly. Use an "
        "unbiased and journalistic tone. Always cite for any factual claim. "
        "When citing several search results, use [1][2][3]. If multiple "
        "documents support the sentence, only cite a minimum sufficient "
        "subset of the documents.\n"
        "Question: When was Haier Pakistan established?\n"
        "Answer: 2000.\n"
        "[0] Haier Pakistan is a consumer electronics and home appliances "
        "company in Pakistan.\n"
        "[1] Established in 2000, it is a subsidiary of the Chinese "
        "multinational group Haier.\n"
        "[2] It is one of the largest companies in Pakistan's home "
        "appliances market, in terms of sales and revenues generated.\n"
        "Out: [1]\n"
        "Question: " + question + "\n"
        "Answer: " + answer + "\n" + numbered_lines(sentences) +
        "Out:";
}

}  // namespace planrag::dataset::prompts
