#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "planrag/prompt_math.hpp"
#include "planrag/prompt_templates.hpp"
#include "planrag/retrieval.hpp"

namespace planrag::dataset {

enum class DatasetKind { ShortForm, Asqa, ShareGpt, HotpotQa };

std::string_view dataset_kind_name(DatasetKind kind);
DatasetKind dataset_kind_from_name(std::string_view name);

/// One source QA example as shipped in the input JSONL. `question` carries
/// the full rendered task input (instruction prefix included, when any);
/// `answer_segments` are the gold answer pieces in order.
struct SourceExample {
    DatasetKind kind = DatasetKind::ShortForm;
    std::string id;
    std::string question;
    std::vector<std::string> answer_segments;
    std::vector<retrieval::Document> documents;
    std::vector<QaSubPair> qa_subpairs;  // ambiguous-question decompositions
    bool needs_retrieval = true;
};

/// Serialized supervision target. Mask spans are character ranges
/// [begin, end) into target_text: plan spans tile exactly the payloads
/// between plan markers, answer spans the payloads between answer markers
/// (including a final combine answer), and the two sets never overlap.
struct TrainingRecord {
    std::string input_text;
    std::string target_text;
    std::vector<std::pair<size_t, size_t>> plan_mask_spans;
    std::vector<std::pair<size_t, size_t>> answer_mask_spans;

    bool operator==(const TrainingRecord&) const = default;
};

/// Completion client used by the annotation pipeline (same wire contract as
/// the LM backend, mode unused).
class AnnotationClient {
public:
    virtual ~AnnotationClient() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

/// Offline client replaying canned responses: the first rule whose `match`
/// occurs in the prompt wins (an empty match always fires). Read-only, so
/// rebuilds are byte-identical.
class ScriptedAnnotationClient final : public AnnotationClient {
public:
    struct Rule {
        std::string match;
        std::string response;
    };

    explicit ScriptedAnnotationClient(std::vector<Rule> rules)
        : rules_(std::move(rules)) {}

    static ScriptedAnnotationClient from_file(const std::string& path);

    std::string complete(const std::string& prompt) override;

private:
    std::vector<Rule> rules_;
};

struct PlanContext {
    std::string question;
    std::vector<QaSubPair> qa_subpairs;   // ambiguous-question kinds
    std::vector<std::string> evidence;    // two-hop prompt evidence lines
};

/// Annotate one answer segment with its plan. Renders the kind-specific
/// template, sends it, and extracts the "[Plan: ...]" payload (the
/// ambiguous-question kind runs its two-stage flow and accepts the bare
/// summarized question as the plan). Throws AnnotationFailure when no plan
/// can be parsed from the response.
std::string annotate_plan(const std::string& segment, const PlanContext& context,
                          DatasetKind kind, AnnotationClient& client);

/// Numbered-citation parse of a client response: "[0][2]" -> {0, 2},
/// deduplicated and sorted. Throws AnnotationFailure when the response
/// carries no citation and IndexOutOfRange when one exceeds `limit`.
std::vector<int> parse_citations(const std::string& response, size_t limit);

/// Pick the evidence sentences supporting one answer segment. Returns
/// sorted, duplicate-free indices into `sentences`.
std::vector<int> annotate_evidence(const std::string& plan,
                                   const std::string& answer_segment,
                                   const std::vector<retrieval::Sentence>& sentences,
                                   AnnotationClient& client);

struct HotpotAnnotation {
    std::vector<std::string> plans;
    std::vector<std::string> answer_segments;
};

/// One-call expansion of a two-hop example into plan-tagged answer steps.
/// Citation brackets are stripped from the returned segments.
HotpotAnnotation annotate_hotpot(const SourceExample& example,
                                 AnnotationClient& client);

struct SegmentAnnotation {
    std::string plan;
    std::vector<int> evidence_indices;
};

/// Emit the markup target plus both mask span lists. A no-retrieval example
/// becomes `<NOT_NEED_EXTRA_INFO><answer_start>...<answer_end>` with zero
/// plan spans; the two-hop kind requires `combine_answer` and appends the
/// `[Combine]` block. Throws InvariantViolation / IndexOutOfRange on
/// inconsistent inputs.
TrainingRecord assemble_record(const SourceExample& example,
                               const std::vector<SegmentAnnotation>& annotations,
                               const std::optional<std::string>& combine_answer = {});

/// True iff the stored mask spans exactly tile the plan/answer payloads of
/// target_text and are pairwise disjoint. Recomputes the spans by scanning
/// the markers, independently of how the record was assembled.
bool verify_masks(const TrainingRecord& record);

/// Character-level bridge to the numeric core: one masked batch per task
/// over the record's bytes. `logits` must have one row per target character;
/// targets are byte values modulo the vocabulary width.
std::pair<promptmath::MaskedBatch, promptmath::MaskedBatch> char_masked_batches(
    const TrainingRecord& record, const Eigen::MatrixXd& logits);

struct BuildOutcome {
    std::optional<TrainingRecord> record;
    std::string reject_reason;  // set when record is absent
};

/// Full per-example pipeline: plan annotation, evidence annotation, record
/// assembly. Annotation failures reject the example instead of guessing.
BuildOutcome build_record(const SourceExample& example, AnnotationClient& client);

}  // namespace planrag::dataset
