#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathroute/errors.hpp"
#include "pathroute/path_space.hpp"

namespace pathroute {

// Role tag of one target token. Context covers prompt/context tokens, which
// always get weight zero.
enum class TokenRole { Context, Understanding, Reasoning, Construction, Hypothesis, Answer };

std::string_view token_role_name(TokenRole r);
std::optional<TokenRole> parse_token_role(std::string_view name);
bool is_thought_token(TokenRole r);  // U/R/C/H

// One stage of the executor curriculum: token weights for the text loss and
// the three objective coefficients.
struct StageConfig {
    std::string stage_id;
    double w_thought = 1.0;
    double w_answer = 1.0;
    double lambda_text = 1.0;
    double lambda_mse = 0.0;
    double lambda_vis = 0.0;
};

// Built-in stages:
//   S1: w=(0.5, 4.0),  lambda=(1,   0,   0)
//   S2: w=(0.25, 6.0), lambda=(1,   0,   0.05)
//   S3: unit weights,  lambda=(2.0, 0.3, 0)
//   S4: unit weights,  lambda=(2.0, 0.3, 0.05)
StageConfig stage_preset(std::string_view name);

// Per-token supervision target: log-probability of the target token (always
// <= 0) plus its role tag.
struct TokenStream {
    std::string id;
    std::vector<double> logp;
    std::vector<TokenRole> roles;

    size_t size() const { return logp.size(); }
};

// w_t = 0 for Context, stage.w_answer for Answer, stage.w_thought otherwise.
Eigen::VectorXd build_loss_mask(const TokenStream& stream, const StageConfig& stage);

// Weight-normalized negative log-likelihood:  -(sum w_t logp_t) / (sum w_t).
// Throws InvalidInput("AllZeroWeights...") when the mask sums to zero.
double text_loss(const TokenStream& stream, const Eigen::VectorXd& weights);

// Mean over the span rows. Throws on an empty span.
template <typename Derived>
Eigen::VectorXd pool_span(const Eigen::MatrixBase<Derived>& span) {
    if (span.rows() == 0) throw InvalidInput("EmptySpan: cannot pool zero rows");
    return span.colwise().mean().transpose();
}

// A visual-thought span, already pooled, with its target summary vector.
struct VisualSpan {
    Eigen::VectorXd pooled;  // d_h
    Eigen::VectorXd target;  // d_v
};

// Affine projection from executor hidden space to the visual-summary space.
struct ProjectionHead {
    Eigen::MatrixXd weight;  // d_v x d_h
    Eigen::VectorXd bias;    // d_v
};

ProjectionHead identity_head(int dim);

// (1/J) sum_j || W h_j + b - v_j ||^2
double visual_loss(std::span<const VisualSpan> spans, const ProjectionHead& head);

struct VisualLossGrad {
    Eigen::MatrixXd d_weight;
    Eigen::VectorXd d_bias;
    std::vector<Eigen::VectorXd> d_pooled;  // per span
};

// Closed-form gradients of visual_loss with respect to W, b, and each pooled
// vector.
VisualLossGrad visual_loss_grad(std::span<const VisualSpan> spans, const ProjectionHead& head);

// lambda_text*L_text + lambda_mse*L_latent + lambda_vis*L_vis; absent
// components contribute nothing. At least one component must be present.
double exec_loss(std::optional<double> text, std::optional<double> latent,
                 std::optional<double> visual, const StageConfig& stage);

// One recorded evaluation point of a training stage.
struct CheckpointMetrics {
    int step = 0;
    double metric = 0.0;           // stage validation metric, lower is better
    double format_accuracy = 0.0;  // in [0,1]
};

// Stage checkpoint gate: a checkpoint is admissible when its format accuracy
// is within `tolerance` of the best format accuracy in the run; among
// admissible checkpoints the lowest metric wins, earliest step on ties.
// Returns the index into `checkpoints`, or nullopt for an empty list.
std::optional<size_t> gate_checkpoints(std::span<const CheckpointMetrics> checkpoints,
                                       double tolerance);

// One row of the loss-input file for the `losses` command:
// {"id", "tokens":[{"role","logp"}], "spans":[{"pooled"|"matrix", "target"}], "latent"?}
struct LossInput {
    std::string id;
    std::optional<TokenStream> stream;
    std::vector<VisualSpan> spans;
    std::optional<double> latent;
};

std::vector<LossInput> read_loss_inputs(const std::string& file);

}  // namespace pathroute
