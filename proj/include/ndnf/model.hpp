#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ndnf/error.hpp"
#include "ndnf/predicates.hpp"
#include "ndnf/semisym.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

enum class Head { tanh, mutex_tanh };

inline const char* to_string(Head h) { return h == Head::tanh ? "tanh" : "mutex_tanh"; }

// Conjunctive layer followed by a disjunctive layer. The conjunctive layer reads
// the invented predicates first, then the bivalent dataset columns in order.
struct NeuralDnfModel {
    std::size_t raw_features = 0;
    std::vector<std::size_t> bivalent_columns;
    std::optional<ThresholdPredicateBank> predicates;
    SemiSymbolicLayer conj{NodeKind::conjunctive, 0, 0};
    SemiSymbolicLayer disj{NodeKind::disjunctive, 0, 0};
    Head head = Head::tanh;

    std::size_t predicate_width() const { return predicates ? predicates->width() : 0; }
    std::size_t conj_input_width() const { return predicate_width() + bivalent_columns.size(); }
    std::size_t outputs() const { return disj.out_nodes; }

    bool operator==(const NeuralDnfModel&) const = default;
};

inline void validate(const NeuralDnfModel& m) {
    if (m.conj.kind != NodeKind::conjunctive || m.disj.kind != NodeKind::disjunctive)
        throw shape_error("model layers have the wrong node kinds");
    if (m.conj.in_features != m.conj_input_width())
        throw shape_error("conjunctive layer width does not match its inputs");
    if (m.conj.out_nodes != m.disj.in_features)
        throw shape_error("conjunctive node count differs from disjunctive fan-in");
    if (m.conj.weights.size() != m.conj.out_nodes * m.conj.in_features ||
        m.disj.weights.size() != m.disj.out_nodes * m.disj.in_features)
        throw shape_error("layer weight storage has the wrong size");
    if (m.head == Head::mutex_tanh && m.disj.out_nodes < 2)
        throw shape_error("mutex-tanh head needs at least two classes");
    for (auto c : m.bivalent_columns)
        if (c >= m.raw_features) throw shape_error("bivalent column out of range");
    if (m.predicates)
        for (auto c : m.predicates->features)
            if (c >= m.raw_features) throw shape_error("predicate feature out of range");
}

// Columns of a dataset row that the conjunctive layer reads directly.
inline std::vector<std::size_t> complement_columns(std::size_t width, std::span<const std::size_t> real) {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < width; ++c)
        if (std::find(real.begin(), real.end(), c) == real.end()) out.push_back(c);
    return out;
}

struct ModelShape {
    std::size_t raw_features = 0;
    std::vector<std::size_t> real_columns; // fed through predicates when non-empty
    std::size_t conj_nodes = 0;
    std::size_t outputs = 0;
    Head head = Head::tanh;
    std::size_t predicates_per_feature = 4;
};

// Weights uniform in [-1, 1]; thresholds are left at zero for the caller to place.
inline NeuralDnfModel make_model(const ModelShape& s, rng& gen, double initial_delta = 0.1) {
    NeuralDnfModel m;
    m.raw_features = s.raw_features;
    m.bivalent_columns = complement_columns(s.raw_features, s.real_columns);
    if (!s.real_columns.empty()) {
        ThresholdPredicateBank bank;
        bank.features = s.real_columns;
        bank.per_feature = s.predicates_per_feature;
        bank.thresholds.assign(bank.width(), 0.0);
        m.predicates = bank;
    }
    m.conj = SemiSymbolicLayer(NodeKind::conjunctive, s.conj_nodes, m.conj_input_width(), initial_delta);
    m.disj = SemiSymbolicLayer(NodeKind::disjunctive, s.outputs, s.conj_nodes, initial_delta);
    m.head = s.head;
    for (auto& w : m.conj.weights) w = gen.uniform(-1.0, 1.0);
    for (auto& w : m.disj.weights) w = gen.uniform(-1.0, 1.0);
    validate(m);
    return m;
}

inline std::vector<double> conj_input(const NeuralDnfModel& m, std::span<const double> x_raw) {
    if (x_raw.size() != m.raw_features)
        throw shape_error("model expects " + std::to_string(m.raw_features) + " features, got " +
                          std::to_string(x_raw.size()));
    std::vector<double> in;
    in.reserve(m.conj_input_width());
    if (m.predicates) in = invent(*m.predicates, x_raw);
    for (auto c : m.bivalent_columns) in.push_back(x_raw[c]);
    return in;
}

// +1 / -1 reading of the conjunctive inputs.
inline std::vector<int> conj_input_bivalent(const NeuralDnfModel& m, std::span<const double> x_raw) {
    if (x_raw.size() != m.raw_features) throw shape_error("model input has the wrong width");
    std::vector<int> in;
    in.reserve(m.conj_input_width());
    if (m.predicates)
        for (char b : invent_bivalent(*m.predicates, x_raw)) in.push_back(b ? 1 : -1);
    for (auto c : m.bivalent_columns) in.push_back(x_raw[c] > 0.0 ? 1 : -1);
    return in;
}

struct ForwardTrace {
    std::vector<double> conj_in;
    std::vector<double> conj_raw, conj_out;
    std::vector<double> disj_raw, disj_out;
    std::vector<double> probs; // mutex-tanh head only
};

inline ForwardTrace forward(const NeuralDnfModel& m, std::span<const double> x_raw) {
    ForwardTrace t;
    t.conj_in = conj_input(m, x_raw);
    const double dc = m.conj.signed_delta();
    t.conj_raw.resize(m.conj.out_nodes);
    t.conj_out.resize(m.conj.out_nodes);
    for (std::size_t n = 0; n < m.conj.out_nodes; ++n) {
        t.conj_raw[n] = raw_output(m.conj.row(n), dc, t.conj_in);
        t.conj_out[n] = std::tanh(t.conj_raw[n]);
    }
    const double dd = m.disj.signed_delta();
    t.disj_raw.resize(m.disj.out_nodes);
    t.disj_out.resize(m.disj.out_nodes);
    for (std::size_t n = 0; n < m.disj.out_nodes; ++n) t.disj_raw[n] = raw_output(m.disj.row(n), dd, t.conj_out);
    if (m.head == Head::mutex_tanh) {
        auto mt = mutex_tanh_head(t.disj_raw);
        t.probs = std::move(mt.probs);
        t.disj_out = std::move(mt.out);
    } else {
        for (std::size_t n = 0; n < m.disj.out_nodes; ++n) t.disj_out[n] = std::tanh(t.disj_raw[n]);
    }
    return t;
}

// Which conjunctive nodes are true when inputs and conjunctive outputs are read bivalently.
inline std::vector<char> conj_pattern(const NeuralDnfModel& m, std::span<const double> x_raw) {
    const auto in = conj_input_bivalent(m, x_raw);
    std::vector<double> xin(in.begin(), in.end());
    const double dc = m.conj.signed_delta();
    std::vector<char> active(m.conj.out_nodes);
    for (std::size_t n = 0; n < m.conj.out_nodes; ++n) active[n] = raw_output(m.conj.row(n), dc, xin) > 0.0;
    return active;
}

// Disjunctive raw outputs under +-1 conjunctive activations.
inline std::vector<double> disj_raw_from_pattern(const NeuralDnfModel& m, std::span<const char> pattern) {
    std::vector<double> c(pattern.size());
    for (std::size_t i = 0; i < pattern.size(); ++i) c[i] = pattern[i] ? 1.0 : -1.0;
    std::vector<double> raw(m.disj.out_nodes);
    const double dd = m.disj.signed_delta();
    for (std::size_t n = 0; n < m.disj.out_nodes; ++n) raw[n] = raw_output(m.disj.row(n), dd, c);
    return raw;
}

// Prediction as label values: one 0/1 per output for a tanh head, a single class index
// for a mutex-tanh head.
enum class PredictMode { neural, bivalent };

inline std::vector<int> predict(const NeuralDnfModel& m, std::span<const double> x_raw, PredictMode mode) {
    std::vector<double> raw;
    if (mode == PredictMode::neural) {
        raw = forward(m, x_raw).disj_raw;
    } else {
        raw = disj_raw_from_pattern(m, conj_pattern(m, x_raw));
    }
    if (m.head == Head::mutex_tanh) {
        const auto best = std::max_element(raw.begin(), raw.end()) - raw.begin();
        return {static_cast<int>(best)};
    }
    std::vector<int> out(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) out[k] = std::tanh(raw[k]) > 0.0;
    return out;
}

} // namespace ndnf
