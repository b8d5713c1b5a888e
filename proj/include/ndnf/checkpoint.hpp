#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ndnf/error.hpp"
#include "ndnf/model.hpp"
#include "ndnf/train.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

inline constexpr int checkpoint_version = 1;

// Everything needed to resume or reuse a run. Doubles are stored as shortest
// round-trip decimal strings so load(save(x)) is bit-exact on any platform.
struct Checkpoint {
    NeuralDnfModel model;
    std::optional<TrainConfig> config;
    std::optional<OptimiserState> state;
    std::uint64_t seed = 0;

    bool operator==(const Checkpoint&) const = default;
};

namespace detail {

using json = nlohmann::ordered_json;

inline json doubles(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(format_double(x));
    return a;
}

inline std::vector<double> doubles(const json& a) {
    std::vector<double> v;
    for (const auto& s : a) v.push_back(parse_double(s.get<std::string>()));
    return v;
}

inline json layer_json(const SemiSymbolicLayer& l) {
    return json{{"kind", to_string(l.kind)},
                {"out_nodes", l.out_nodes},
                {"in_features", l.in_features},
                {"delta", format_double(l.delta)},
                {"weights", doubles(l.weights)}};
}

inline SemiSymbolicLayer layer_from(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    SemiSymbolicLayer l(kind == to_string(NodeKind::conjunctive) ? NodeKind::conjunctive : NodeKind::disjunctive,
                        j.at("out_nodes").get<std::size_t>(), j.at("in_features").get<std::size_t>(),
                        parse_double(j.at("delta").get<std::string>()));
    l.weights = doubles(j.at("weights"));
    if (l.weights.size() != l.out_nodes * l.in_features) throw parse_error("checkpoint layer has the wrong weight count");
    return l;
}

} // namespace detail

inline std::string to_json(const Checkpoint& c) {
    using detail::json;
    const auto& m = c.model;
    json model{{"raw_features", m.raw_features},
               {"bivalent_columns", m.bivalent_columns},
               {"head", to_string(m.head)},
               {"conj", detail::layer_json(m.conj)},
               {"disj", detail::layer_json(m.disj)}};
    if (m.predicates) {
        const auto& b = *m.predicates;
        model["predicates"] = json{{"features", b.features},
                                   {"per_feature", b.per_feature},
                                   {"thresholds", detail::doubles(b.thresholds)},
                                   {"temperature", format_double(b.temperature)}};
    }
    json j{{"format", "ndnf-checkpoint"}, {"version", checkpoint_version}, {"seed", c.seed}, {"model", model}};
    if (c.config) {
        const auto& t = *c.config;
        j["train"] = json{{"epochs", t.epochs},
                          {"learning_rate", format_double(t.learning_rate)},
                          {"momentum", format_double(t.momentum)},
                          {"batch_size", t.batch_size},
                          {"aux_weight_lambda", format_double(t.aux_weight_lambda)},
                          {"conj_pm1_lambda", format_double(t.conj_pm1_lambda)},
                          {"delta_initial", format_double(t.delta_schedule.initial)},
                          {"delta_step", format_double(t.delta_schedule.step_size)},
                          {"delta_every", t.delta_schedule.step_every},
                          {"delta_cap", format_double(t.delta_schedule.cap)},
                          {"temperature_start", format_double(t.temperature_schedule.start)},
                          {"temperature_end", format_double(t.temperature_schedule.end)},
                          {"temperature_epochs", t.temperature_schedule.decay_epochs},
                          {"seed", t.seed}};
    }
    if (c.state) {
        j["optimiser"] = json{{"epoch", c.state->epoch},
                              {"v_conj", detail::doubles(c.state->v_conj)},
                              {"v_disj", detail::doubles(c.state->v_disj)},
                              {"v_thresholds", detail::doubles(c.state->v_thresholds)}};
    }
    return j.dump(1) + "\n";
}

inline Checkpoint checkpoint_from_json(const std::string& text) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw parse_error(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("format", "") != "ndnf-checkpoint") throw parse_error("not an ndnf checkpoint");
        if (j.at("version").get<int>() != checkpoint_version)
            throw parse_error("unsupported checkpoint version " + std::to_string(j.at("version").get<int>()));
        Checkpoint c;
        c.seed = j.at("seed").get<std::uint64_t>();
        const auto& mj = j.at("model");
        auto& m = c.model;
        m.raw_features = mj.at("raw_features").get<std::size_t>();
        m.bivalent_columns = mj.at("bivalent_columns").get<std::vector<std::size_t>>();
        m.head = mj.at("head").get<std::string>() == "mutex_tanh" ? Head::mutex_tanh : Head::tanh;
        m.conj = detail::layer_from(mj.at("conj"));
        m.disj = detail::layer_from(mj.at("disj"));
        if (mj.contains("predicates")) {
            const auto& pj = mj.at("predicates");
            ThresholdPredicateBank b;
            b.features = pj.at("features").get<std::vector<std::size_t>>();
            b.per_feature = pj.at("per_feature").get<std::size_t>();
            b.thresholds = detail::doubles(pj.at("thresholds"));
            b.temperature = parse_double(pj.at("temperature").get<std::string>());
            m.predicates = b;
        }
        validate(m);
        if (j.contains("train")) {
            const auto& t = j.at("train");
            TrainConfig cfg;
            auto d = [&](const char* k) { return parse_double(t.at(k).get<std::string>()); };
            cfg.epochs = t.at("epochs").get<std::size_t>();
            cfg.learning_rate = d("learning_rate");
            cfg.momentum = d("momentum");
            cfg.batch_size = t.at("batch_size").get<std::size_t>();
            cfg.aux_weight_lambda = d("aux_weight_lambda");
            cfg.conj_pm1_lambda = d("conj_pm1_lambda");
            cfg.delta_schedule = {d("delta_initial"), d("delta_step"), t.at("delta_every").get<std::size_t>(),
                                  d("delta_cap")};
            cfg.temperature_schedule = {d("temperature_start"), d("temperature_end"),
                                        t.at("temperature_epochs").get<std::size_t>()};
            cfg.seed = t.at("seed").get<std::uint64_t>();
            c.config = cfg;
        }
        if (j.contains("optimiser")) {
            const auto& o = j.at("optimiser");
            OptimiserState st;
            st.epoch = o.at("epoch").get<std::size_t>();
            st.v_conj = detail::doubles(o.at("v_conj"));
            st.v_disj = detail::doubles(o.at("v_disj"));
            st.v_thresholds = detail::doubles(o.at("v_thresholds"));
            c.state = st;
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("malformed checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    out << to_json(c);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_json(ss.str());
}

} // namespace ndnf
