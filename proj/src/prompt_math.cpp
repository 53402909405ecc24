#include "planrag/prompt_math.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace planrag::promptmath {

namespace {

void check_composition(const PromptComposition& c) {
    if (c.u.size() != c.shared_prompt.rows() ||
        c.v.size() != c.shared_prompt.cols()) {
        throw DimensionMismatch(
            "task factors (" + std::to_string(c.u.size()) + ", " +
            std::to_string(c.v.size()) + ") do not match prompt shape " +
            std::to_string(c.shared_prompt.rows()) + "x" +
            std::to_string(c.shared_prompt.cols()));
    }
}

void check_batch(const MaskedBatch& b) {
    const auto positions = static_cast<size_t>(b.logits.rows());
    if (b.targets.size() != positions || b.mask.size() != positions) {
        throw DimensionMismatch("targets/mask length does not match logit rows");
    }
}

}  // namespace

Eigen::MatrixXd compose_task_prompt(const PromptComposition& c) {
    check_composition(c);
    return (c.shared_prompt.array() *
            (c.u * c.v.transpose()).array()).matrix();
}

ComposeGradients grad_compose(const PromptComposition& c,
                              const Eigen::MatrixXd& upstream) {
    check_composition(c);
    if (upstream.rows() != c.shared_prompt.rows() ||
        upstream.cols() != c.shared_prompt.cols()) {
        throw DimensionMismatch("upstream shape does not match prompt shape");
    }
    ComposeGradients g;
    g.d_shared = (upstream.array() * (c.u * c.v.transpose()).array()).matrix();
    const Eigen::MatrixXd weighted =
        (upstream.array() * c.shared_prompt.array()).matrix();
    g.d_u = weighted * c.v;
    g.d_v = weighted.transpose() * c.u;
    return g;
}

double masked_nll(const MaskedBatch& batch) {
    check_batch(batch);
    const long vocab = batch.logits.cols();
    double loss = 0.0;
    for (long i = 0; i < batch.logits.rows(); ++i) {
        if (!batch.mask[static_cast<size_t>(i)]) continue;
        const int target = batch.targets[static_cast<size_t>(i)];
        if (target < 0 || target >= vocab) {
            throw IndexOutOfVocab("target " + std::to_string(target) +
                                  " outside vocabulary of size " +
                                  std::to_string(vocab) + " at position " +
                                  std::to_string(i));
        }
        const auto row = batch.logits.row(i);
        const double row_max = row.maxCoeff();
        double sum = 0.0;
        for (long j = 0; j < vocab; ++j) sum += std::exp(row(j) - row_max);
        const double log_z = row_max + std::log(sum);
        loss += log_z - row(target);
    }
    return loss;
}

double joint_loss(const MaskedBatch& plan_batch, const MaskedBatch& ans_batch,
                  LossWeights weights) {
    return weights.plan * masked_nll(plan_batch) +
           weights.ans * masked_nll(ans_batch);
}

int rank_of(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sigma = svd.singularValues();
    const double tol = 1e-10 * sigma(0);
    int rank = 0;
    for (long i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > tol) ++rank;
    }
    return rank;
}

}  // namespace planrag::promptmath
