#include "pathroute/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pathroute/errors.hpp"
#include "pathroute/rng.hpp"

namespace pathroute {

using nlohmann::json;

namespace {

void fill_glorot(Eigen::MatrixXd& w, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    // Row-major fill order, pinned so a seed always yields the same model.
    for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            w(r, c) = rng.uniform_range(-bound, bound);
}

inline double stable_bce(double logit, double r) {
    return std::max(logit, 0.0) - logit * r + std::log1p(std::exp(-std::abs(logit)));
}

}  // namespace

PlannerModel init_model(uint64_t seed, int block_dim, int hidden) {
    if (block_dim < 1) throw InvalidInput("init_model: block dim must be >= 1");
    if (hidden < 1) throw InvalidInput("init_model: hidden width must be >= 1");
    const int f = feature_dim_for_block(block_dim);
    PlannerModel m;
    m.w1.resize(hidden, f);
    m.w2.resize(hidden, hidden);
    m.w3.resize(kNumPaths, hidden);
    Rng rng(seed);
    fill_glorot(m.w1, rng);
    fill_glorot(m.w2, rng);
    fill_glorot(m.w3, rng);
    m.b1 = Eigen::VectorXd::Zero(hidden);
    m.b2 = Eigen::VectorXd::Zero(hidden);
    m.b3 = Eigen::VectorXd::Zero(kNumPaths);
    return m;
}

Eigen::MatrixXd forward_batch(const PlannerModel& m, const Eigen::MatrixXd& x) {
    if (x.rows() != m.feature_dim())
        throw InvalidInput("DimensionMismatch: feature dim " + std::to_string(x.rows()) +
                           " vs model " + std::to_string(m.feature_dim()));
    Eigen::MatrixXd a1 = ((m.w1 * x).colwise() + m.b1).cwiseMax(0.0);
    Eigen::MatrixXd a2 = ((m.w2 * a1).colwise() + m.b2).cwiseMax(0.0);
    return (m.w3 * a2).colwise() + m.b3;
}

Eigen::VectorXd forward(const PlannerModel& m, const Eigen::VectorXd& features) {
    return forward_batch(m, features);
}

PathVector scores(const Eigen::VectorXd& logits) {
    PathVector s;
    for (int p = 0; p < kNumPaths; ++p) s[p] = 1.0 / (1.0 + std::exp(-logits[p]));
    return s;
}

Path argmax_path(const Eigen::VectorXd& values) {
    int best = 0;
    for (int p = 1; p < kNumPaths; ++p)
        if (values[p] > values[best]) best = p;
    return static_cast<Path>(best);
}

double sample_weight(int n_pos) {
    if (n_pos == 0)
        throw InvalidInput("ZeroPositives: all-fail samples must be filtered before weighting");
    if (n_pos < 0 || n_pos > kNumPaths) throw InvalidInput("sample_weight: n_pos out of range");
    if (n_pos == 1) return 3.0;
    if (n_pos == 2) return 2.0;
    return 1.0;
}

double label_weight(Path p, int r_label) {
    return (r_label == 1 && p != Path::A) ? 1.3 : 1.0;
}

namespace {

struct BatchTensors {
    Eigen::MatrixXd x;   // F x B
    Eigen::MatrixXd r;   // 5 x B
    Eigen::MatrixXd bw;  // 5 x B, beta * omega
    double omega_sum = 0.0;
};

BatchTensors pack_batch(const PlannerModel& m, std::span<const LabeledSample> batch) {
    if (batch.empty()) throw InvalidInput("EmptyBatch: planner loss over no samples");
    BatchTensors t;
    const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
    t.x.resize(m.feature_dim(), b);
    t.r.resize(kNumPaths, b);
    t.bw.resize(kNumPaths, b);
    for (Eigen::Index i = 0; i < b; ++i) {
        const auto& s = batch[static_cast<size_t>(i)];
        if (s.features.size() != m.feature_dim())
            throw InvalidInput("DimensionMismatch: sample feature dim");
        const double omega = sample_weight(s.n_pos());
        t.omega_sum += omega;
        t.x.col(i) = s.features;
        for (int p = 0; p < kNumPaths; ++p) {
            t.r(p, i) = s.outcomes[static_cast<size_t>(p)];
            t.bw(p, i) = omega * label_weight(static_cast<Path>(p), s.outcomes[static_cast<size_t>(p)]);
        }
    }
    return t;
}

}  // namespace

double planner_loss(const PlannerModel& m, std::span<const LabeledSample> batch) {
    BatchTensors t = pack_batch(m, batch);
    Eigen::MatrixXd logits = forward_batch(m, t.x);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < logits.cols(); ++i)
        for (int p = 0; p < kNumPaths; ++p)
            acc += t.bw(p, i) * stable_bce(logits(p, i), t.r(p, i));
    return acc / (kNumPaths * t.omega_sum);
}

double planner_loss_and_grad(const PlannerModel& m, std::span<const LabeledSample> batch,
                             PlannerGrad& g) {
    BatchTensors t = pack_batch(m, batch);

    Eigen::MatrixXd z1 = (m.w1 * t.x).colwise() + m.b1;
    Eigen::MatrixXd a1 = z1.cwiseMax(0.0);
    Eigen::MatrixXd z2 = (m.w2 * a1).colwise() + m.b2;
    Eigen::MatrixXd a2 = z2.cwiseMax(0.0);
    Eigen::MatrixXd logits = (m.w3 * a2).colwise() + m.b3;

    const double norm = 1.0 / (kNumPaths * t.omega_sum);
    double loss = 0.0;
    Eigen::MatrixXd dlogits(kNumPaths, logits.cols());
    for (Eigen::Index i = 0; i < logits.cols(); ++i) {
        for (int p = 0; p < kNumPaths; ++p) {
            const double z = logits(p, i);
            loss += t.bw(p, i) * stable_bce(z, t.r(p, i));
            const double sig = 1.0 / (1.0 + std::exp(-z));
            dlogits(p, i) = norm * t.bw(p, i) * (sig - t.r(p, i));
        }
    }
    loss *= norm;

    g.d_w3.noalias() = dlogits * a2.transpose();
    g.d_b3 = dlogits.rowwise().sum();
    Eigen::MatrixXd da2 = m.w3.transpose() * dlogits;
    Eigen::MatrixXd dz2 = (z2.array() > 0.0).select(da2, 0.0);
    g.d_w2.noalias() = dz2 * a1.transpose();
    g.d_b2 = dz2.rowwise().sum();
    Eigen::MatrixXd da1 = m.w2.transpose() * dz2;
    Eigen::MatrixXd dz1 = (z1.array() > 0.0).select(da1, 0.0);
    g.d_w1.noalias() = dz1 * t.x.transpose();
    g.d_b1 = dz1.rowwise().sum();
    return loss;
}

PlannerGrad planner_grad(const PlannerModel& m, std::span<const LabeledSample> batch) {
    PlannerGrad g;
    planner_loss_and_grad(m, batch, g);
    return g;
}

double validation_utility(const PlannerModel& m, std::span<const LabeledSample> samples) {
    if (samples.empty()) return 0.0;
    size_t hits = 0;
    for (const auto& s : samples) {
        Path chosen = argmax_path(forward(m, s.features));
        hits += static_cast<size_t>(s.outcomes[static_cast<size_t>(path_index(chosen))]);
    }
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

namespace {

struct AdamState {
    Eigen::MatrixXd mw1, vw1, mw2, vw2, mw3, vw3;
    Eigen::VectorXd mb1, vb1, mb2, vb2, mb3, vb3;

    explicit AdamState(const PlannerModel& m) {
        auto zm = [](const Eigen::MatrixXd& w) { return Eigen::MatrixXd::Zero(w.rows(), w.cols()); };
        auto zv = [](const Eigen::VectorXd& b) { return Eigen::VectorXd::Zero(b.size()); };
        mw1 = zm(m.w1); vw1 = zm(m.w1);
        mw2 = zm(m.w2); vw2 = zm(m.w2);
        mw3 = zm(m.w3); vw3 = zm(m.w3);
        mb1 = zv(m.b1); vb1 = zv(m.b1);
        mb2 = zv(m.b2); vb2 = zv(m.b2);
        mb3 = zv(m.b3); vb3 = zv(m.b3);
    }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

template <typename T>
void adam_step(T& param, T& mom, T& vel, const T& grad, double lr, double decay, long step) {
    mom = kBeta1 * mom + (1.0 - kBeta1) * grad;
    vel = kBeta2 * vel + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
    param -= lr * ((mom / c1).array() / ((vel / c2).array().sqrt() + kEps)).matrix();
    if (decay > 0.0) param -= (lr * decay) * param;  // decoupled decay; weights only
}

void shuffle_indices(std::vector<size_t>& idx, uint64_t seed) {
    Rng rng(seed);
    for (size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
}

}  // namespace

TrainResult train(std::span<const LabeledSample> data, const TrainConfig& config,
                  std::span<const LabeledSample> external_val) {
    if (data.empty()) throw InvalidInput("EmptyDataset: no training samples");
    if (config.batch_size < 1 || config.learning_rate <= 0.0 || config.epochs < 1 ||
        config.weight_decay < 0.0)
        throw InvalidInput("train: config values must be positive");

    std::vector<LabeledSample> train_set;
    std::vector<LabeledSample> val_set;
    if (!external_val.empty()) {
        train_set.assign(data.begin(), data.end());
        val_set.assign(external_val.begin(), external_val.end());
    } else {
        const uint64_t threshold =
            static_cast<uint64_t>(config.validation_fraction * 1e6);
        for (const auto& s : data) {
            const bool to_val = mix64(fnv1a64(s.id), config.seed) % 1000000ull < threshold;
            (to_val ? val_set : train_set).push_back(s);
        }
    }
    if (val_set.empty())
        throw InvalidInput(
            "train: validation split is empty; raise validation_fraction or pass a "
            "validation set");

    TrainResult result;
    result.filtered_count = 0;
    std::erase_if(train_set, [&](const LabeledSample& s) {
        if (s.n_pos() == 0) {
            ++result.filtered_count;
            return true;
        }
        return false;
    });
    if (train_set.empty())
        throw InvalidInput("AllSamplesFiltered: every training sample had zero successful paths");
    result.train_size = train_set.size();
    result.val_size = val_set.size();

    const int block_dim = static_cast<int>(train_set[0].features.size()) / kFeatureBlocks;
    if (block_dim * kFeatureBlocks != static_cast<int>(train_set[0].features.size()))
        throw InvalidInput("train: feature dim is not a multiple of the block count");
    PlannerModel model = init_model(config.seed, block_dim, config.hidden);
    AdamState opt(model);

    std::vector<size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    PlannerGrad grad;
    long step = 0;
    result.best_val_utility = -1.0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_indices(order, mix64(config.seed, static_cast<uint64_t>(epoch)));
        double loss_weighted = 0.0, weight_total = 0.0;
        std::vector<LabeledSample> batch;
        for (size_t at = 0; at < order.size(); at += static_cast<size_t>(config.batch_size)) {
            const size_t end = std::min(order.size(), at + static_cast<size_t>(config.batch_size));
            batch.clear();
            for (size_t i = at; i < end; ++i) batch.push_back(train_set[order[i]]);
            const double loss = planner_loss_and_grad(model, batch, grad);
            double omega = 0.0;
            for (const auto& s : batch) omega += sample_weight(s.n_pos());
            loss_weighted += loss * omega;
            weight_total += omega;
            ++step;
            const double lr = config.learning_rate;
            adam_step(model.w1, opt.mw1, opt.vw1, grad.d_w1, lr, config.weight_decay, step);
            adam_step(model.w2, opt.mw2, opt.vw2, grad.d_w2, lr, config.weight_decay, step);
            adam_step(model.w3, opt.mw3, opt.vw3, grad.d_w3, lr, config.weight_decay, step);
            adam_step(model.b1, opt.mb1, opt.vb1, grad.d_b1, lr, 0.0, step);
            adam_step(model.b2, opt.mb2, opt.vb2, grad.d_b2, lr, 0.0, step);
            adam_step(model.b3, opt.mb3, opt.vb3, grad.d_b3, lr, 0.0, step);
        }
        EpochStats st;
        st.epoch = epoch;
        st.train_loss = loss_weighted / weight_total;
        st.val_utility = validation_utility(model, val_set);
        result.history.push_back(st);
        if (st.val_utility > result.best_val_utility) {
            result.best_val_utility = st.val_utility;
            result.best_epoch = epoch;
            result.model = model;
        }
    }
    return result;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    auto flat = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw InvalidInput("model file: array length disagrees with dimensions");
    Eigen::MatrixXd m(rows, cols);
    size_t at = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[at++];
    return m;
}

}  // namespace

void save_model(const PlannerModel& m, const std::string& file) {
    json j{{"format", "planner-mlp"},
           {"version", 1},
           {"layers", json::array({
               json{{"weight", matrix_to_json(m.w1)}, {"bias", std::vector<double>(m.b1.data(), m.b1.data() + m.b1.size())}},
               json{{"weight", matrix_to_json(m.w2)}, {"bias", std::vector<double>(m.b2.data(), m.b2.data() + m.b2.size())}},
               json{{"weight", matrix_to_json(m.w3)}, {"bias", std::vector<double>(m.b3.data(), m.b3.data() + m.b3.size())}},
           })}};
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    out << j.dump() << '\n';
    if (!out) throw IoError("write failed: " + file);
}

PlannerModel load_model(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw InvalidInput(file + ": not valid JSON");
    PlannerModel m;
    try {
        if (j.at("format").get<std::string>() != "planner-mlp")
            throw InvalidInput(file + ": not a planner model file");
        const auto& layers = j.at("layers");
        if (layers.size() != 3) throw InvalidInput(file + ": expected 3 layers");
        auto vec = [](const json& a) {
            auto v = a.get<std::vector<double>>();
            return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
        };
        m.w1 = matrix_from_json(layers[0].at("weight"));
        m.b1 = vec(layers[0].at("bias"));
        m.w2 = matrix_from_json(layers[1].at("weight"));
        m.b2 = vec(layers[1].at("bias"));
        m.w3 = matrix_from_json(layers[2].at("weight"));
        m.b3 = vec(layers[2].at("bias"));
    } catch (const json::exception& e) {
        throw InvalidInput(file + ": model schema violation: " + e.what());
    }
    if (m.w3.rows() != kNumPaths)
        throw InvalidInput(file + ": output dimension must be " + std::to_string(kNumPaths));
    if (m.w2.cols() != m.w1.rows() || m.w3.cols() != m.w2.rows() ||
        m.b1.size() != m.w1.rows() || m.b2.size() != m.w2.rows() || m.b3.size() != m.w3.rows())
        throw InvalidInput(file + ": layer dimensions do not chain");
    return m;
}

void write_features_jsonl(const std::string& file, std::span<const FeatureRow> rows) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    for (const auto& r : rows) {
        json j{{"id", r.id},
               {"features", std::vector<double>(r.features.data(),
                                                r.features.data() + r.features.size())}};
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + file);
}

std::vector<FeatureRow> read_features_jsonl(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file);
    std::vector<FeatureRow> rows;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InvalidInput(file + ":" + std::to_string(lineno) + ": not valid JSON");
        try {
            FeatureRow r;
            r.id = j.at("id").get<std::string>();
            auto v = j.at("features").get<std::vector<double>>();
            r.features = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
            rows.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw InvalidInput(file + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

void write_features_plnf(const std::string& file, std::span<const FeatureRow> rows) {
    if (rows.empty()) throw InvalidInput("write_features_plnf: no rows");
    const Eigen::Index f = rows[0].features.size();
    if (f % kFeatureBlocks != 0)
        throw InvalidInput("write_features_plnf: feature dim is not a block multiple");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file);
    out.write("PLNF", 4);
    const uint32_t d = static_cast<uint32_t>(f / kFeatureBlocks);
    const uint64_t n = rows.size();
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    for (const auto& r : rows) {
        if (r.features.size() != f) throw InvalidInput("write_features_plnf: ragged rows");
        out.write(reinterpret_cast<const char*>(r.features.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(f)));
    }
    if (!out) throw IoError("write failed: " + file);
}

std::vector<Eigen::VectorXd> read_features_plnf(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "PLNF", 4) != 0)
        throw InvalidInput(file + ": missing PLNF magic");
    uint32_t d = 0;
    uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&d), sizeof d);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || d == 0) throw InvalidInput(file + ": bad PLNF header");
    const size_t f = static_cast<size_t>(d) * kFeatureBlocks;
    std::vector<Eigen::VectorXd> rows;
    rows.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(f));
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(sizeof(double) * f));
        if (!in) throw InvalidInput(file + ": truncated PLNF payload");
        rows.push_back(std::move(v));
    }
    return rows;
}

}  // namespace pathroute
