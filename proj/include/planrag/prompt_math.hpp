#pragma once

#include <Eigen/Dense>
#include <vector>

#include "planrag/errors.hpp"

namespace planrag::promptmath {

enum class TaskKind { Plan, Ans };

// Default desk-scale soft prompt shape used by tests and examples. The
// prompt length/width of a production run is configuration, not a property
// of the math.
inline constexpr long kDefaultPromptLength = 8;
inline constexpr long kDefaultPromptWidth = 16;

/// Shared soft prompt plus the rank-1 factors that specialize it to one
/// task. The effective task transform is the outer product u v^T, so its
/// rank never exceeds 1.
struct PromptComposition {
    Eigen::MatrixXd shared_prompt;  // L x d
    Eigen::VectorXd u;              // L
    Eigen::VectorXd v;              // d
    TaskKind task = TaskKind::Plan;

    /// The rank-1 task transform u v^T.
    Eigen::MatrixXd task_transform() const { return u * v.transpose(); }
};

/// Elementwise product of the shared prompt with the rank-1 task transform:
/// out(i,j) = shared(i,j) * u(i) * v(j). Throws DimensionMismatch when the
/// factor lengths do not match the prompt shape.
Eigen::MatrixXd compose_task_prompt(const PromptComposition& c);

struct ComposeGradients {
    Eigen::MatrixXd d_shared;
    Eigen::VectorXd d_u;
    Eigen::VectorXd d_v;
};

/// Analytic gradients of sum(upstream .* compose_task_prompt(c)) with
/// respect to the shared prompt and both factors.
ComposeGradients grad_compose(const PromptComposition& c,
                              const Eigen::MatrixXd& upstream);

/// Per-position logits with the supervised-span mask. Positions outside the
/// mask never contribute to the loss; plan and answer spans of one training
/// target are disjoint by construction.
struct MaskedBatch {
    Eigen::MatrixXd logits;  // T x V
    std::vector<int> targets;
    std::vector<bool> mask;
};

/// Negative log-likelihood summed left-to-right over masked-in positions,
/// with log-sum-exp stabilized softmax. An empty mask yields exactly 0.
/// Throws IndexOutOfVocab for a masked-in target outside [0, V), and
/// DimensionMismatch when targets/mask lengths disagree with the logits.
double masked_nll(const MaskedBatch& batch);

struct LossWeights {
    double plan = 1.0;
    double ans = 1.0;
};

/// Weighted sum of the two masked losses; defaults to plain addition.
double joint_loss(const MaskedBatch& plan_batch, const MaskedBatch& ans_batch,
                  LossWeights weights = {});

/// Numerical rank via singular values, thresholded at 1e-10 times the
/// largest singular value. The zero and empty matrices have rank 0.
int rank_of(const Eigen::MatrixXd& m);

}  // namespace planrag::promptmath
