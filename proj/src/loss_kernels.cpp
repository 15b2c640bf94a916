#include "pathroute/loss_kernels.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace pathroute {

using nlohmann::json;

std::string_view token_role_name(TokenRole r) {
    switch (r) {
        case TokenRole::Context: return "context";
        case TokenRole::Understanding: return "understanding";
        case TokenRole::Reasoning: return "reasoning";
        case TokenRole::Construction: return "construction";
        case TokenRole::Hypothesis: return "hypothesis";
        case TokenRole::Answer: return "answer";
    }
    return {};
}

std::optional<TokenRole> parse_token_role(std::string_view name) {
    std::string low;
    low.reserve(name.size());
    for (char c : name) low += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    if (low == "context") return TokenRole::Context;
    if (low == "understanding" || low == "u") return TokenRole::Understanding;
    if (low == "reasoning" || low == "r") return TokenRole::Reasoning;
    if (low == "construction" || low == "visual" || low == "c") return TokenRole::Construction;
    if (low == "hypothesis" || low == "h") return TokenRole::Hypothesis;
    if (low == "answer" || low == "a") return TokenRole::Answer;
    return std::nullopt;
}

bool is_thought_token(TokenRole r) {
    return r != TokenRole::Context && r != TokenRole::Answer;
}

StageConfig stage_preset(std::string_view name) {
    if (name == "S1") return {"S1", 0.5, 4.0, 1.0, 0.0, 0.0};
    if (name == "S2") return {"S2", 0.25, 6.0, 1.0, 0.0, 0.05};
    if (name == "S3") return {"S3", 1.0, 1.0, 2.0, 0.3, 0.0};
    if (name == "S4") return {"S4", 1.0, 1.0, 2.0, 0.3, 0.05};
    throw InvalidInput("unknown stage '" + std::string(name) + "' (expected S1, S2, S3, or S4)");
}

Eigen::VectorXd build_loss_mask(const TokenStream& stream, const StageConfig& stage) {
    if (stream.logp.size() != stream.roles.size())
        throw InvalidInput("TokenStream: logp and role arrays differ in length");
    Eigen::VectorXd w(static_cast<Eigen::Index>(stream.size()));
    for (size_t t = 0; t < stream.size(); ++t) {
        switch (stream.roles[t]) {
            case TokenRole::Context: w[t] = 0.0; break;
            case TokenRole::Answer: w[t] = stage.w_answer; break;
            default: w[t] = stage.w_thought; break;
        }
    }
    return w;
}

double text_loss(const TokenStream& stream, const Eigen::VectorXd& weights) {
    if (weights.size() != static_cast<Eigen::Index>(stream.size()))
        throw InvalidInput("text_loss: weight vector length mismatch");
    double wsum = 0.0, acc = 0.0;
    for (Eigen::Index t = 0; t < weights.size(); ++t) {
        wsum += weights[t];
        acc += weights[t] * stream.logp[static_cast<size_t>(t)];
    }
    if (wsum <= 0.0) throw InvalidInput("AllZeroWeights: loss mask sums to zero");
    return -acc / wsum;
}

ProjectionHead identity_head(int dim) {
    return {Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim)};
}

namespace {
void check_span_dims(std::span<const VisualSpan> spans, const ProjectionHead& head) {
    if (spans.empty()) throw InvalidInput("visual_loss: no spans");
    for (const auto& s : spans) {
        if (s.pooled.size() != head.weight.cols() || s.target.size() != head.weight.rows() ||
            head.bias.size() != head.weight.rows())
            throw InvalidInput("DimensionMismatch: span/head dimensions disagree");
    }
}
}  // namespace

double visual_loss(std::span<const VisualSpan> spans, const ProjectionHead& head) {
    check_span_dims(spans, head);
    double acc = 0.0;
    for (const auto& s : spans)
        acc += (head.weight * s.pooled + head.bias - s.target).squaredNorm();
    return acc / static_cast<double>(spans.size());
}

VisualLossGrad visual_loss_grad(std::span<const VisualSpan> spans, const ProjectionHead& head) {
    check_span_dims(spans, head);
    const double scale = 2.0 / static_cast<double>(spans.size());
    VisualLossGrad g;
    g.d_weight = Eigen::MatrixXd::Zero(head.weight.rows(), head.weight.cols());
    g.d_bias = Eigen::VectorXd::Zero(head.bias.size());
    g.d_pooled.reserve(spans.size());
    for (const auto& s : spans) {
        Eigen::VectorXd err = head.weight * s.pooled + head.bias - s.target;
        g.d_weight.noalias() += scale * err * s.pooled.transpose();
        g.d_bias += scale * err;
        g.d_pooled.push_back(scale * head.weight.transpose() * err);
    }
    return g;
}

double exec_loss(std::optional<double> text, std::optional<double> latent,
                 std::optional<double> visual, const StageConfig& stage) {
    if (!text && !latent && !visual)
        throw InvalidInput("NoComponents: exec_loss needs at least one loss term");
    double acc = 0.0;
    if (text) acc += stage.lambda_text * *text;
    if (latent) acc += stage.lambda_mse * *latent;
    if (visual) acc += stage.lambda_vis * *visual;
    return acc;
}

std::optional<size_t> gate_checkpoints(std::span<const CheckpointMetrics> checkpoints,
                                       double tolerance) {
    if (checkpoints.empty()) return std::nullopt;
    double best_format = checkpoints[0].format_accuracy;
    for (const auto& c : checkpoints) best_format = std::max(best_format, c.format_accuracy);
    std::optional<size_t> best;
    for (size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i].format_accuracy < best_format - tolerance) continue;
        if (!best || checkpoints[i].metric < checkpoints[*best].metric) best = i;
    }
    return best;
}

std::vector<LossInput> read_loss_inputs(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file);
    std::vector<LossInput> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InvalidInput(file + ":" + std::to_string(lineno) + ": not valid JSON");
        LossInput li;
        try {
            li.id = j.at("id").get<std::string>();
            if (j.contains("tokens")) {
                TokenStream ts;
                ts.id = li.id;
                for (const auto& tok : j.at("tokens")) {
                    auto role = parse_token_role(tok.at("role").get<std::string>());
                    if (!role) throw InvalidInput("unknown token role");
                    double lp = tok.at("logp").get<double>();
                    if (lp > 0.0) throw InvalidInput("token logp must be <= 0");
                    ts.roles.push_back(*role);
                    ts.logp.push_back(lp);
                }
                if (ts.size() == 0) throw InvalidInput("empty token stream");
                li.stream = std::move(ts);
            }
            if (j.contains("spans")) {
                for (const auto& sp : j.at("spans")) {
                    VisualSpan vs;
                    if (sp.contains("pooled")) {
                        auto v = sp.at("pooled").get<std::vector<double>>();
                        vs.pooled = Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
                    } else {
                        auto rows = sp.at("matrix").get<std::vector<std::vector<double>>>();
                        if (rows.empty()) throw InvalidInput("empty span matrix");
                        Eigen::MatrixXd m(rows.size(), rows[0].size());
                        for (size_t r = 0; r < rows.size(); ++r) {
                            if (rows[r].size() != rows[0].size())
                                throw InvalidInput("ragged span matrix");
                            for (size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
                        }
                        vs.pooled = pool_span(m);
                    }
                    auto tv = sp.at("target").get<std::vector<double>>();
                    vs.target = Eigen::Map<Eigen::VectorXd>(tv.data(), tv.size());
                    li.spans.push_back(std::move(vs));
                }
            }
            if (j.contains("latent")) li.latent = j.at("latent").get<double>();
        } catch (const json::exception& e) {
            throw InvalidInput(file + ":" + std::to_string(lineno) + ": schema violation: " +
                               e.what());
        } catch (const InvalidInput& e) {
            throw InvalidInput(file + ":" + std::to_string(lineno) + ": " + e.what());
        }
        out.push_back(std::move(li));
    }
    return out;
}

}  // namespace pathroute
