#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ndnf/error.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

enum class NodeKind { conjunctive, disjunctive };

// Conjunctions pull delta toward +1, disjunctions toward -1.
constexpr double delta_direction(NodeKind kind) noexcept {
    return kind == NodeKind::conjunctive ? 1.0 : -1.0;
}

inline const char* to_string(NodeKind kind) {
    return kind == NodeKind::conjunctive ? "conjunctive" : "disjunctive";
}

// A bank of semi-symbolic nodes sharing one delta. Weights are row-major,
// one row per node.
struct SemiSymbolicLayer {
    NodeKind kind = NodeKind::conjunctive;
    std::size_t out_nodes = 0;
    std::size_t in_features = 0;
    std::vector<double> weights;
    double delta = 1.0; // magnitude, sign comes from kind

    SemiSymbolicLayer() = default;
    SemiSymbolicLayer(NodeKind k, std::size_t out, std::size_t in, double d = 1.0)
        : kind(k), out_nodes(out), in_features(in), weights(out * in, 0.0), delta(d) {}

    std::span<const double> row(std::size_t node) const {
        return {weights.data() + node * in_features, in_features};
    }
    std::span<double> row(std::size_t node) { return {weights.data() + node * in_features, in_features}; }

    double& at(std::size_t node, std::size_t input) { return weights[node * in_features + input]; }
    double at(std::size_t node, std::size_t input) const { return weights[node * in_features + input]; }

    double signed_delta() const noexcept { return delta_direction(kind) * delta; }

    bool operator==(const SemiSymbolicLayer&) const = default;
};

struct Activation {
    double raw = 0.0; // pre-tanh f_w(x)
    double out = 0.0;
    bool bivalent = false; // out > 0; exactly 0 reads as false
};

// Lowest index attaining max |w|; 0 for an empty row.
inline std::size_t argmax_abs(std::span<const double> w) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < w.size(); ++i)
        if (std::abs(w[i]) > std::abs(w[best])) best = i;
    return best;
}

inline double max_abs(std::span<const double> w) {
    double m = 0.0;
    for (double v : w) m = std::max(m, std::abs(v));
    return m;
}

// delta * (max|w| - sum|w|); zero for an empty or all-zero row.
inline double bias(std::span<const double> w, double delta_signed) {
    double mx = 0.0, sum = 0.0;
    for (double v : w) {
        mx = std::max(mx, std::abs(v));
        sum += std::abs(v);
    }
    return delta_signed * (mx - sum);
}

inline double raw_output(std::span<const double> w, double delta_signed, std::span<const double> x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
    return acc + bias(w, delta_signed);
}

inline Activation activate(double raw) {
    double out = std::tanh(raw);
    return {raw, out, out > 0.0};
}

inline void check_input(const SemiSymbolicLayer& layer, std::span<const double> x) {
    if (x.size() != layer.in_features)
        throw shape_error("layer expects " + std::to_string(layer.in_features) + " inputs, got " +
                          std::to_string(x.size()));
    for (double v : x)
        if (!std::isfinite(v)) throw domain_error("non-finite layer input");
}

inline std::vector<Activation> forward(const SemiSymbolicLayer& layer, std::span<const double> x) {
    check_input(layer, x);
    for (double v : x)
        if (std::abs(v) > 1.0) throw domain_error("layer input outside [-1, 1]");
    std::vector<Activation> out(layer.out_nodes);
    const double d = layer.signed_delta();
    for (std::size_t n = 0; n < layer.out_nodes; ++n) out[n] = activate(raw_output(layer.row(n), d, x));
    return out;
}

struct LayerGradient {
    std::vector<double> weights; // same layout as SemiSymbolicLayer::weights
    std::vector<double> x;
};

// Gradient given dL/draw per node. d raw / d w_i = x_i + delta*(1[i == argmax]*sign(w_i) - sign(w_i)).
inline void accumulate_backward_raw(const SemiSymbolicLayer& layer, std::span<const double> x,
                                    std::span<const double> grad_raw, std::span<double> grad_weights,
                                    std::span<double> grad_x) {
    const double d = layer.signed_delta();
    for (std::size_t n = 0; n < layer.out_nodes; ++n) {
        const double g = grad_raw[n];
        if (g == 0.0) continue;
        auto w = layer.row(n);
        const std::size_t top = argmax_abs(w);
        double* gw = grad_weights.data() + n * layer.in_features;
        for (std::size_t i = 0; i < layer.in_features; ++i) {
            const double s = sign(w[i]);
            double local = x[i] - d * s;
            if (i == top) local += d * s;
            gw[i] += g * local;
            if (!grad_x.empty()) grad_x[i] += g * w[i];
        }
    }
}

inline LayerGradient backward_raw(const SemiSymbolicLayer& layer, std::span<const double> x,
                                  std::span<const double> grad_raw) {
    check_input(layer, x);
    if (grad_raw.size() != layer.out_nodes) throw shape_error("upstream gradient has wrong width");
    LayerGradient g{std::vector<double>(layer.weights.size(), 0.0), std::vector<double>(layer.in_features, 0.0)};
    accumulate_backward_raw(layer, x, grad_raw, g.weights, g.x);
    return g;
}

// Gradient given dL/dout per node; applies the tanh derivative first.
inline LayerGradient backward(const SemiSymbolicLayer& layer, std::span<const double> x,
                              std::span<const double> upstream_grad) {
    check_input(layer, x);
    if (upstream_grad.size() != layer.out_nodes) throw shape_error("upstream gradient has wrong width");
    std::vector<double> grad_raw(layer.out_nodes);
    const double d = layer.signed_delta();
    for (std::size_t n = 0; n < layer.out_nodes; ++n) {
        const double out = std::tanh(raw_output(layer.row(n), d, x));
        grad_raw[n] = upstream_grad[n] * (1.0 - out * out);
    }
    return backward_raw(layer, x, grad_raw);
}

struct MutexTanhOutput {
    std::vector<double> probs;
    std::vector<double> out; // 2 * probs - 1
};

inline MutexTanhOutput mutex_tanh_head(std::span<const double> raw) {
    if (raw.size() < 2) throw shape_error("mutex-tanh head needs at least two classes");
    const double top = *std::max_element(raw.begin(), raw.end());
    MutexTanhOutput r{std::vector<double>(raw.size()), std::vector<double>(raw.size())};
    double total = 0.0;
    for (std::size_t k = 0; k < raw.size(); ++k) total += r.probs[k] = std::exp(raw[k] - top);
    for (std::size_t k = 0; k < raw.size(); ++k) {
        r.probs[k] /= total;
        r.out[k] = 2.0 * r.probs[k] - 1.0;
    }
    return r;
}

// Piecewise-constant ramp of |delta| toward the cap.
struct DeltaSchedule {
    double initial = 0.1;
    double step_size = 0.1;
    std::size_t step_every = 10;
    double cap = 1.0;

    bool operator==(const DeltaSchedule&) const = default;
};

inline double step_delta(const DeltaSchedule& s, std::size_t epoch) {
    const std::size_t steps = s.step_every == 0 ? 0 : epoch / s.step_every;
    return std::min(s.cap, s.initial + static_cast<double>(steps) * s.step_size);
}

} // namespace ndnf
