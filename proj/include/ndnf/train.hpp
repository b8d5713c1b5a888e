#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ndnf/dataset.hpp"
#include "ndnf/error.hpp"
#include "ndnf/model.hpp"
#include "ndnf/predicates.hpp"
#include "ndnf/semisym.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

struct TrainConfig {
    std::size_t epochs = 300;
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::size_t batch_size = 32;
    double aux_weight_lambda = 0.1;
    double conj_pm1_lambda = 0.1;
    DeltaSchedule delta_schedule;
    TemperatureSchedule temperature_schedule;
    std::uint64_t seed = 0;

    bool operator==(const TrainConfig&) const = default;
};

inline void validate(const TrainConfig& c) {
    if (c.learning_rate < 0.0 || c.momentum < 0.0 || c.aux_weight_lambda < 0.0 || c.conj_pm1_lambda < 0.0)
        throw domain_error("training rates and weights must be non-negative");
    if (c.batch_size == 0) throw domain_error("batch size must be positive");
}

struct LossBreakdown {
    double task_loss = 0.0;
    double aux_weight = 0.0;
    double aux_conj_pm1 = 0.0;
    double total = 0.0;
};

// |w| |6 - |w|| pulls weights toward {-6, 0, 6}.
inline double aux_weight_term(double w) {
    const double a = std::abs(w);
    return a * std::abs(6.0 - a);
}

inline double aux_weight_term_grad(double w) {
    const double a = std::abs(w);
    const double d = std::abs(6.0 - a) - a * sign(6.0 - a);
    return d * sign(w);
}

// Mean over every conjunctive and disjunctive weight. Predicate thresholds are not included.
inline double aux_weight_loss(const NeuralDnfModel& m) {
    const std::size_t n = m.conj.weights.size() + m.disj.weights.size();
    if (n == 0) return 0.0;
    double s = 0.0;
    for (double w : m.conj.weights) s += aux_weight_term(w);
    for (double w : m.disj.weights) s += aux_weight_term(w);
    return s / static_cast<double>(n);
}

inline double aux_conj_pm1_loss(std::span<const double> conj_out) {
    if (conj_out.empty()) return 0.0;
    double s = 0.0;
    for (double o : conj_out) s += 1.0 - o * o;
    return s / static_cast<double>(conj_out.size());
}

struct Gradients {
    std::vector<double> conj, disj, thresholds;

    explicit Gradients(const NeuralDnfModel& m)
        : conj(m.conj.weights.size(), 0.0), disj(m.disj.weights.size(), 0.0),
          thresholds(m.predicates ? m.predicates->thresholds.size() : 0, 0.0) {}
};

inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Loss over the given rows, with its gradient accumulated into g when g is non-null.
// Tanh head: binary cross-entropy on (out + 1) / 2 = logistic(2 raw), averaged over
// rows and outputs. Mutex-tanh head: cross-entropy on the class probabilities.
inline LossBreakdown loss_and_grad(const NeuralDnfModel& m, const Dataset& d, std::span<const std::size_t> rows,
                                   const TrainConfig& cfg, Gradients* g) {
    LossBreakdown L;
    if (rows.empty()) return L;
    const double nr = static_cast<double>(rows.size());
    const std::size_t outs = m.outputs();
    const std::size_t nc = m.conj.out_nodes;
    const double pm1_scale = nc ? 1.0 / (nr * static_cast<double>(nc)) : 0.0;
    std::vector<double> grad_raw(outs), grad_conj_out(nc), grad_conj_raw(nc), grad_in(m.conj_input_width());
    double pm1_sum = 0.0;
    for (auto r : rows) {
        const auto t = forward(m, d.row(r));
        const auto y = d.label(r);
        if (m.head == Head::mutex_tanh) {
            const auto cls = static_cast<std::size_t>(y[0]);
            L.task_loss += -std::log(std::max(t.probs[cls], 1e-300)) / nr;
            for (std::size_t k = 0; k < outs; ++k) grad_raw[k] = (t.probs[k] - (k == cls ? 1.0 : 0.0)) / nr;
        } else {
            const double scale = 1.0 / (nr * static_cast<double>(outs));
            for (std::size_t k = 0; k < outs; ++k) {
                const double z = 2.0 * t.disj_raw[k];
                const double yk = y[k] != 0 ? 1.0 : 0.0;
                L.task_loss += (softplus(z) - yk * z) * scale;
                grad_raw[k] = 2.0 * (logistic(z) - yk) * scale;
            }
        }
        for (double o : t.conj_out) pm1_sum += 1.0 - o * o;
        if (!g) continue;
        std::fill(grad_conj_out.begin(), grad_conj_out.end(), 0.0);
        accumulate_backward_raw(m.disj, t.conj_out, grad_raw, g->disj, grad_conj_out);
        for (std::size_t n = 0; n < nc; ++n) {
            const double o = t.conj_out[n];
            const double go = grad_conj_out[n] + cfg.conj_pm1_lambda * (-2.0 * o) * pm1_scale;
            grad_conj_raw[n] = go * (1.0 - o * o);
        }
        std::fill(grad_in.begin(), grad_in.end(), 0.0);
        accumulate_backward_raw(m.conj, t.conj_in, grad_conj_raw, g->conj, grad_in);
        if (m.predicates) {
            const auto pw = m.predicate_width();
            accumulate_threshold_grad(*m.predicates, std::span<const double>(t.conj_in).first(pw),
                                      std::span<const double>(grad_in).first(pw), g->thresholds);
        }
    }
    L.aux_conj_pm1 = pm1_sum * pm1_scale;
    L.aux_weight = aux_weight_loss(m);
    if (g) {
        const double n = static_cast<double>(m.conj.weights.size() + m.disj.weights.size());
        if (n > 0) {
            for (std::size_t i = 0; i < g->conj.size(); ++i)
                g->conj[i] += cfg.aux_weight_lambda * aux_weight_term_grad(m.conj.weights[i]) / n;
            for (std::size_t i = 0; i < g->disj.size(); ++i)
                g->disj[i] += cfg.aux_weight_lambda * aux_weight_term_grad(m.disj.weights[i]) / n;
        }
    }
    L.total = L.task_loss + cfg.aux_weight_lambda * L.aux_weight + cfg.conj_pm1_lambda * L.aux_conj_pm1;
    return L;
}

struct OptimiserState {
    std::vector<double> v_conj, v_disj, v_thresholds;
    std::size_t epoch = 0; // next epoch to run

    bool operator==(const OptimiserState&) const = default;
};

struct EpochReport {
    std::size_t epoch = 0;
    LossBreakdown loss; // row-weighted mean over the epoch's batches
    double delta = 0.0;
    double temperature = 0.0;
};

// Sets delta and temperature for the given epoch.
inline void apply_schedules(NeuralDnfModel& m, const TrainConfig& cfg, std::size_t epoch) {
    const double delta = step_delta(cfg.delta_schedule, epoch);
    m.conj.delta = delta;
    m.disj.delta = delta;
    if (m.predicates) m.predicates->temperature = step_temperature(cfg.temperature_schedule, epoch);
}

inline std::vector<std::size_t> train_rows(const Dataset& d) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < d.rows(); ++r)
        if (d.splits[r] == SplitTag::train) rows.push_back(r);
    return rows;
}

// One pass of mini-batch SGD with momentum over the train rows, in an order fixed by seed and epoch.
inline EpochReport train_epoch(NeuralDnfModel& m, const Dataset& d, const TrainConfig& cfg, OptimiserState& st) {
    validate(cfg);
    const std::size_t epoch = st.epoch;
    apply_schedules(m, cfg, epoch);
    if (st.v_conj.size() != m.conj.weights.size()) st.v_conj.assign(m.conj.weights.size(), 0.0);
    if (st.v_disj.size() != m.disj.weights.size()) st.v_disj.assign(m.disj.weights.size(), 0.0);
    const std::size_t nt = m.predicates ? m.predicates->thresholds.size() : 0;
    if (st.v_thresholds.size() != nt) st.v_thresholds.assign(nt, 0.0);

    auto rows = train_rows(d);
    if (rows.empty()) throw domain_error("no training rows in dataset '" + d.name + "'");
    rng gen(cfg.seed ^ (0x9E3779B97F4A7C15ull * (epoch + 1)));
    gen.shuffle(rows);

    EpochReport rep;
    rep.epoch = epoch;
    rep.delta = m.conj.delta;
    rep.temperature = m.predicates ? m.predicates->temperature : 0.0;
    auto step = [&](std::vector<double>& w, std::vector<double>& v, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            v[i] = cfg.momentum * v[i] - cfg.learning_rate * grad[i];
            w[i] += v[i];
        }
    };
    for (std::size_t b = 0; b < rows.size(); b += cfg.batch_size) {
        const std::size_t e = std::min(rows.size(), b + cfg.batch_size);
        const std::span<const std::size_t> batch(rows.data() + b, e - b);
        Gradients g(m);
        const auto L = loss_and_grad(m, d, batch, cfg, &g);
        if (!std::isfinite(L.total))
            throw training_diverged("loss became non-finite in epoch " + std::to_string(epoch), epoch);
        const double frac = static_cast<double>(batch.size()) / static_cast<double>(rows.size());
        rep.loss.task_loss += L.task_loss * frac;
        rep.loss.aux_weight += L.aux_weight * frac;
        rep.loss.aux_conj_pm1 += L.aux_conj_pm1 * frac;
        rep.loss.total += L.total * frac;
        step(m.conj.weights, st.v_conj, g.conj);
        step(m.disj.weights, st.v_disj, g.disj);
        if (m.predicates) step(m.predicates->thresholds, st.v_thresholds, g.thresholds);
    }
    ++st.epoch;
    return rep;
}

struct TrainRun {
    NeuralDnfModel model;
    TrainConfig config;
    OptimiserState state;
    std::vector<EpochReport> history;
};

// Runs the remaining epochs; the final schedule values stay applied to the model.
inline TrainRun train(NeuralDnfModel model, const Dataset& d, const TrainConfig& cfg, OptimiserState state = {}) {
    TrainRun run{std::move(model), cfg, std::move(state), {}};
    while (run.state.epoch < cfg.epochs) run.history.push_back(train_epoch(run.model, d, cfg, run.state));
    apply_schedules(run.model, cfg, cfg.epochs == 0 ? 0 : cfg.epochs - 1);
    return run;
}

// Model sized for the dataset, weights from the seed, thresholds at training quantiles.
inline NeuralDnfModel init_model(const Dataset& d, std::size_t conj_nodes, Head head, std::size_t predicates_per_feature,
                                 std::uint64_t seed, double initial_delta) {
    if ((head == Head::mutex_tanh) != (d.task == Task::multiclass))
        throw shape_error("multiclass tasks use the mutex-tanh head, other tasks the tanh head");
    ModelShape s;
    s.raw_features = d.num_features;
    s.real_columns = d.real_columns;
    s.conj_nodes = conj_nodes;
    s.outputs = d.outputs();
    s.head = head;
    s.predicates_per_feature = predicates_per_feature;
    rng gen(seed);
    auto m = make_model(s, gen, initial_delta);
    if (m.predicates) {
        const Dataset tr = d.select(SplitTag::train);
        init_thresholds_from_quantiles(*m.predicates, tr.features, tr.num_features);
    }
    return m;
}

} // namespace ndnf
