#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ndnf/dataset.hpp"
#include "ndnf/error.hpp"
#include "ndnf/metrics.hpp"
#include "ndnf/model.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

// w_hat = 6 sign(w) 1(|w| > tau)
inline std::vector<double> threshold_weights(std::span<const double> w, double tau) {
    if (!(tau >= 0.0)) throw domain_error("threshold tau must be non-negative");
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = std::abs(w[i]) > tau ? 6.0 * sign(w[i]) : 0.0;
    return out;
}

// conjunctive_only is used for mutex-tanh models, whose disjunctive layer stays real-valued.
enum class ThresholdScope { whole_model, disjunctive_only, conjunctive_only };

inline const char* to_string(ThresholdScope s) {
    switch (s) {
    case ThresholdScope::whole_model: return "model";
    case ThresholdScope::disjunctive_only: return "disj";
    case ThresholdScope::conjunctive_only: return "conj";
    }
    return "?";
}

inline ThresholdScope parse_scope(std::string_view s) {
    if (s == "model") return ThresholdScope::whole_model;
    if (s == "disj") return ThresholdScope::disjunctive_only;
    if (s == "conj") return ThresholdScope::conjunctive_only;
    throw parse_error("unknown threshold scope '" + std::string(s) + "'");
}

inline bool scope_has_conj(ThresholdScope s) { return s != ThresholdScope::disjunctive_only; }
inline bool scope_has_disj(ThresholdScope s) { return s != ThresholdScope::conjunctive_only; }

// Thresholded layers are set to delta = 1 so they read as exact conjunctions / disjunctions.
inline void threshold_layer(SemiSymbolicLayer& layer, double tau) {
    layer.weights = threshold_weights(layer.weights, tau);
    layer.delta = 1.0;
}

inline NeuralDnfModel threshold_model(NeuralDnfModel m, double tau, ThresholdScope scope) {
    if (scope_has_conj(scope)) threshold_layer(m.conj, tau);
    if (scope_has_disj(scope)) threshold_layer(m.disj, tau);
    return m;
}

inline std::vector<int> predict_all(const NeuralDnfModel& m, const Dataset& d, PredictMode mode) {
    std::vector<int> out;
    out.reserve(d.labels.size());
    for (std::size_t r = 0; r < d.rows(); ++r) {
        auto y = predict(m, d.row(r), mode);
        out.insert(out.end(), y.begin(), y.end());
    }
    return out;
}

inline F1Report evaluate(const NeuralDnfModel& m, const Dataset& d, PredictMode mode) {
    return macro_f1(d, predict_all(m, d, mode));
}

struct ThresholdChoice {
    double tau = 0.0;
    ThresholdScope scope = ThresholdScope::whole_model;
    double metric = 0.0;                                 // macro-F1 on the selection split
    std::vector<std::pair<double, double>> candidates;   // (tau, metric) in ascending tau
};

// 0 plus midpoints between consecutive distinct |w| in scope.
inline std::vector<double> tau_candidates(const NeuralDnfModel& m, ThresholdScope scope) {
    std::vector<double> mags;
    if (scope_has_conj(scope))
        for (double w : m.conj.weights) mags.push_back(std::abs(w));
    if (scope_has_disj(scope))
        for (double w : m.disj.weights) mags.push_back(std::abs(w));
    std::sort(mags.begin(), mags.end());
    mags.erase(std::unique(mags.begin(), mags.end()), mags.end());
    std::vector<double> taus{0.0};
    for (std::size_t i = 1; i < mags.size(); ++i) {
        const double mid = mags[i - 1] + (mags[i] - mags[i - 1]) / 2.0;
        if (mid > 0.0) taus.push_back(mid);
    }
    return taus;
}

// Picks the shared tau with the best macro-F1 of the bivalent thresholded model;
// ties go to the smaller tau.
inline ThresholdChoice sweep_tau(const NeuralDnfModel& m, ThresholdScope scope, const Dataset& eval) {
    if (eval.rows() == 0) throw domain_error("tau sweep needs a non-empty evaluation split");
    ThresholdChoice c;
    c.scope = scope;
    const auto taus = tau_candidates(m, scope);
    std::vector<double> scores(taus.size());
    parallel_for(taus.size(), [&](std::size_t i) {
        scores[i] = evaluate(threshold_model(m, taus[i], scope), eval, PredictMode::bivalent).macro;
    });
    std::size_t best = 0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        c.candidates.emplace_back(taus[i], scores[i]);
        if (scores[i] > scores[best]) best = i;
    }
    c.tau = taus[best];
    c.metric = scores[best];
    return c;
}

} // namespace ndnf
