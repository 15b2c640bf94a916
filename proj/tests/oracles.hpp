#pragma once

// Brute-force reference implementations, kept deliberately dumb: plain index
// loops over std::vector, no Eigen expressions, no shared code with the
// library. Production kernels are checked against these to tight tolerances.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracles {

inline double text_loss(const std::vector<double>& logp, const std::vector<double>& w) {
    double num = 0.0, den = 0.0;
    for (size_t t = 0; t < logp.size(); ++t) {
        num += w[t] * logp[t];
        den += w[t];
    }
    return -num / den;
}

struct Span {
    std::vector<double> pooled;
    std::vector<double> target;
};

inline double visual_loss(const std::vector<Span>& spans,
                          const std::vector<std::vector<double>>& weight,
                          const std::vector<double>& bias) {
    double total = 0.0;
    for (const auto& s : spans) {
        double sq = 0.0;
        for (size_t r = 0; r < weight.size(); ++r) {
            double y = bias[r];
            for (size_t c = 0; c < weight[r].size(); ++c) y += weight[r][c] * s.pooled[c];
            const double e = y - s.target[r];
            sq += e * e;
        }
        total += sq;
    }
    return total / static_cast<double>(spans.size());
}

struct Mlp {
    std::vector<std::vector<double>> w1, w2, w3;
    std::vector<double> b1, b2, b3;
};

inline std::vector<double> affine_relu(const std::vector<std::vector<double>>& w,
                                       const std::vector<double>& b,
                                       const std::vector<double>& x, bool relu) {
    std::vector<double> out(w.size(), 0.0);
    for (size_t r = 0; r < w.size(); ++r) {
        double acc = b[r];
        for (size_t c = 0; c < w[r].size(); ++c) acc += w[r][c] * x[c];
        out[r] = relu && acc < 0.0 ? 0.0 : acc;
    }
    return out;
}

inline std::vector<double> forward(const Mlp& m, const std::vector<double>& x) {
    auto a1 = affine_relu(m.w1, m.b1, x, true);
    auto a2 = affine_relu(m.w2, m.b2, a1, true);
    return affine_relu(m.w3, m.b3, a2, false);
}

struct Sample {
    std::vector<double> features;
    std::vector<int> outcomes;  // 5 entries
};

// Straight-loop evaluation of the weighted multi-label objective (data term).
inline double planner_loss(const Mlp& m, const std::vector<Sample>& batch) {
    double num = 0.0, omega_sum = 0.0;
    for (const auto& s : batch) {
        int npos = 0;
        for (int r : s.outcomes) npos += r;
        const double omega = npos == 1 ? 3.0 : npos == 2 ? 2.0 : 1.0;
        omega_sum += omega;
        const auto logits = forward(m, s.features);
        double inner = 0.0;
        for (size_t p = 0; p < logits.size(); ++p) {
            const double beta = (s.outcomes[p] == 1 && p != 0) ? 1.3 : 1.0;
            const double sig = 1.0 / (1.0 + std::exp(-logits[p]));
            const double bce = s.outcomes[p] == 1 ? -std::log(sig) : -std::log(1.0 - sig);
            inner += beta * bce;
        }
        num += omega * inner / static_cast<double>(logits.size());
    }
    return num / omega_sum;
}

}  // namespace oracles
