#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pathroute/path_space.hpp"

namespace pathroute {

using PathVector = Eigen::Matrix<double, kNumPaths, 1>;

// Path-scoring MLP: feature vector -> 5 logits, rectifier hidden layers.
// The input layout is one image-summary block followed by, for each path in
// canonical order, a (last-token, mean-text) block pair; all blocks share the
// block dimension D, so the feature dimension is 11*D.
struct PlannerModel {
    Eigen::MatrixXd w1;  // hidden x F
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // hidden x hidden
    Eigen::VectorXd b2;
    Eigen::MatrixXd w3;  // 5 x hidden
    Eigen::VectorXd b3;

    Eigen::Index feature_dim() const { return w1.cols(); }
    Eigen::Index hidden_dim() const { return w1.rows(); }
};

inline constexpr int kFeatureBlocks = 11;  // image + 2 per path
inline constexpr int kDefaultHidden = 768;

constexpr int feature_dim_for_block(int block_dim) { return kFeatureBlocks * block_dim; }

// Glorot-uniform weights, zero biases; the same seed reproduces the model
// bit for bit.
PlannerModel init_model(uint64_t seed, int block_dim, int hidden = kDefaultHidden);

Eigen::VectorXd forward(const PlannerModel& m, const Eigen::VectorXd& features);
// Columns are samples.
Eigen::MatrixXd forward_batch(const PlannerModel& m, const Eigen::MatrixXd& features);

// Elementwise sigmoid of the logits: the per-path success estimates.
PathVector scores(const Eigen::VectorXd& logits);

// argmax with canonical-order tie-break (lowest path index wins).
Path argmax_path(const Eigen::VectorXd& values);

// Sample weight by number of successful paths: 3.0 / 2.0 / 1.0 for 1 / 2 / >=3.
// n_pos = 0 samples must have been filtered out beforehand.
double sample_weight(int n_pos);

// 1.3 for positive labels on every path except p_A, else 1.0.
double label_weight(Path p, int r_label);

struct LabeledSample {
    std::string id;
    Eigen::VectorXd features;
    std::array<int, kNumPaths> outcomes{};

    int n_pos() const {
        int n = 0;
        for (int r : outcomes) n += r;
        return n;
    }
};

// Data term of the planner objective: the doubly weighted mean of per-path
// binary cross-entropy with logits, computed in the stable
// max(t,0) - t r + log(1 + exp(-|t|)) form. The weight-decay regularizer is
// applied by the optimizer, not here.
double planner_loss(const PlannerModel& m, std::span<const LabeledSample> batch);

struct PlannerGrad {
    Eigen::MatrixXd d_w1, d_w2, d_w3;
    Eigen::VectorXd d_b1, d_b2, d_b3;
};

PlannerGrad planner_grad(const PlannerModel& m, std::span<const LabeledSample> batch);
// Single pass computing both; used by the trainer.
double planner_loss_and_grad(const PlannerModel& m, std::span<const LabeledSample> batch,
                             PlannerGrad& grad);

struct TrainConfig {
    double learning_rate = 5e-4;
    int batch_size = 256;
    double weight_decay = 5e-5;
    int epochs = 10;
    uint64_t seed = 0;
    double validation_fraction = 0.1;
    int hidden = kDefaultHidden;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_utility = 0.0;
};

struct TrainResult {
    PlannerModel model;  // checkpoint with the best validation utility
    std::vector<EpochStats> history;
    int filtered_count = 0;  // all-fail samples removed from the training split
    int best_epoch = 0;
    double best_val_utility = 0.0;
    size_t train_size = 0;
    size_t val_size = 0;
};

// Trains with decoupled weight decay (beta1=0.9, beta2=0.999, eps=1e-8; decay
// on weights only). Validation comes from `external_val` when nonempty,
// otherwise from a seeded id-hash split of `data`. All-fail samples are
// dropped from the training split only and counted. The returned checkpoint
// maximizes validation utility, earliest epoch on ties.
TrainResult train(std::span<const LabeledSample> data, const TrainConfig& config,
                  std::span<const LabeledSample> external_val = {});

// Fraction of samples whose argmax-score path has outcome 1. All-fail
// samples are legal here and count as misses.
double validation_utility(const PlannerModel& m, std::span<const LabeledSample> samples);

// JSON model file: dimension header plus row-major parameter arrays; load
// reproduces bit-identical forward outputs.
void save_model(const PlannerModel& m, const std::string& file);
PlannerModel load_model(const std::string& file);

// Feature files. JSON-lines: {"id", "features":[...]}. Binary: magic "PLNF",
// little-endian u32 block dim, u64 count, then count * 11*D float64.
struct FeatureRow {
    std::string id;
    Eigen::VectorXd features;
};

void write_features_jsonl(const std::string& file, std::span<const FeatureRow> rows);
std::vector<FeatureRow> read_features_jsonl(const std::string& file);
void write_features_plnf(const std::string& file, std::span<const FeatureRow> rows);
// Binary rows have no ids; callers align them with records by order.
std::vector<Eigen::VectorXd> read_features_plnf(const std::string& file);

}  // namespace pathroute
