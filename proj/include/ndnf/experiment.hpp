#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ndnf/config.hpp"
#include "ndnf/dataset.hpp"
#include "ndnf/disentangle.hpp"
#include "ndnf/logic.hpp"
#include "ndnf/metrics.hpp"
#include "ndnf/threshold.hpp"
#include "ndnf/train.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys{
        "dataset.kind", "dataset.genes", "dataset.network_seed", "dataset.max_terms", "dataset.max_literals",
        "dataset.samples", "dataset.monk_train", "dataset.monk_test", "dataset.monk_seed", "dataset.monk_train_size",
        "dataset.csv_path", "dataset.csv_task", "dataset.csv_columns", "dataset.predicate_invention",
        "dataset.rows", "dataset.seed", "dataset.eval_split",
        "model.conj_nodes", "model.predicates_per_feature",
        "train.epochs", "train.learning_rate", "train.momentum", "train.batch_size", "train.aux_weight_lambda",
        "train.conj_pm1_lambda", "train.delta_initial", "train.delta_step", "train.delta_every", "train.delta_cap",
        "train.temperature_start", "train.temperature_end", "train.temperature_epochs",
        "experiment.seeds", "experiment.threshold_tau", "experiment.disj_tau", "experiment.budget_secs",
        "experiment.verify", "experiment.fan_in_cap", "experiment.select_split",
        "bench.fan_in_min", "bench.fan_in_max", "bench.trials", "bench.repetitions", "bench.budget_secs", "bench.seed"};
    return keys;
}

// Dataset named by the [dataset] section. The boolean network's ground truth is
// returned alongside when there is one.
struct LoadedDataset {
    Dataset data;
    std::optional<BooleanNetworkSpec> network;
    std::vector<std::string> warnings;
};

inline LoadedDataset load_dataset(const Config& c) {
    LoadedDataset out;
    const std::string kind = c.get("dataset.kind", "boolean_network");
    if (kind == "boolean_network") {
        const auto spec = random_boolean_network(c.get_uint("dataset.genes", 5), c.get_uint("dataset.network_seed", 7),
                                                 c.get_uint("dataset.max_terms", 3),
                                                 c.get_uint("dataset.max_literals", 3));
        std::optional<std::size_t> samples;
        if (c.has("dataset.samples")) samples = c.get_uint("dataset.samples", 0);
        out.data = generate_boolean_network(spec, c.get_uint("dataset.seed", 0), samples);
        out.network = spec;
    } else if (kind == "monk") {
        if (c.has("dataset.monk_train"))
            out.data = load_monk(c.require("dataset.monk_train"), c.require("dataset.monk_test"));
        else
            out.data = generate_monk1(c.get_uint("dataset.monk_seed", 0), c.get_uint("dataset.monk_train_size", 124));
    } else if (kind == "threshold_task") {
        out.data = generate_threshold_task(c.get_uint("dataset.seed", 0), c.get_uint("dataset.rows", 400));
    } else if (kind == "csv") {
        CsvSchema schema;
        schema.task = parse_task(c.get("dataset.csv_task", "binary"));
        schema.predicate_invention = c.get_bool("dataset.predicate_invention", true);
        for (const auto& col : c.get_list("dataset.csv_columns")) {
            const auto colon = col.rfind(':');
            if (colon == std::string::npos) throw parse_error("csv column '" + col + "' needs name:kind");
            schema.columns.emplace_back(col.substr(0, colon), parse_column_kind(col.substr(colon + 1)));
        }
        auto loaded = load_csv(c.require("dataset.csv_path"), schema);
        out.data = std::move(loaded.data);
        out.warnings = std::move(loaded.warnings);
    } else {
        throw parse_error("unknown dataset kind '" + kind + "'");
    }
    validate(out.data);
    return out;
}

inline SplitTag default_eval_split(const Dataset& d) {
    for (auto t : d.splits)
        if (t == SplitTag::test) return SplitTag::test;
    return SplitTag::train;
}

inline SplitTag eval_split(const Config& c, const Dataset& d) {
    return c.has("dataset.eval_split") ? parse_split(c.require("dataset.eval_split")) : default_eval_split(d);
}

inline TrainConfig train_config(const Config& c, std::uint64_t seed) {
    TrainConfig t;
    t.epochs = c.get_uint("train.epochs", 300);
    t.learning_rate = c.get_double("train.learning_rate", 0.1);
    t.momentum = c.get_double("train.momentum", 0.9);
    t.batch_size = c.get_uint("train.batch_size", 32);
    t.aux_weight_lambda = c.get_double("train.aux_weight_lambda", 0.1);
    t.conj_pm1_lambda = c.get_double("train.conj_pm1_lambda", 0.1);
    t.delta_schedule.initial = c.get_double("train.delta_initial", 0.1);
    t.delta_schedule.step_size = c.get_double("train.delta_step", 0.1);
    t.delta_schedule.step_every = c.get_uint("train.delta_every", 10);
    t.delta_schedule.cap = c.get_double("train.delta_cap", 1.0);
    t.temperature_schedule.start = c.get_double("train.temperature_start", 1.0);
    t.temperature_schedule.end = c.get_double("train.temperature_end", 0.1);
    t.temperature_schedule.decay_epochs = c.get_uint("train.temperature_epochs", t.epochs);
    t.seed = seed;
    validate(t);
    return t;
}

inline Head head_for(const Dataset& d) { return d.task == Task::multiclass ? Head::mutex_tanh : Head::tanh; }

inline NeuralDnfModel initial_model(const Config& c, const Dataset& d, const TrainConfig& t) {
    return init_model(d, c.get_uint("model.conj_nodes", 12), head_for(d), c.get_uint("model.predicates_per_feature", 4),
                      t.seed, t.delta_schedule.initial);
}

inline ThresholdScope threshold_scope_for(const NeuralDnfModel& m) {
    return m.head == Head::mutex_tanh ? ThresholdScope::conjunctive_only : ThresholdScope::whole_model;
}

inline DisjTau parse_disj_tau(const std::string& s) {
    if (s == "zero") return DisjTau::zero;
    if (s == "sweep") return DisjTau::sweep;
    throw parse_error("tau choice must be 'zero' or 'sweep', got '" + s + "'");
}

inline Verify parse_verify(const std::string& s) {
    if (s == "off") return Verify::off;
    if (s == "enumerable") return Verify::enumerable;
    throw parse_error("verify must be 'off' or 'enumerable', got '" + s + "'");
}

// Rule text for a discretised model; mutex-tanh programs carry one annotated
// disjunction per conjunction pattern seen on the given rows.
inline LogicProgram program_for(const NeuralDnfModel& m, const Dataset& d, const Dataset& patterns) {
    auto p = translate(m, d.task);
    if (m.head == Head::mutex_tanh) annotate_patterns(p, m, patterns);
    return p;
}

// ---------------------------------------------------------------------------

struct SeedResult {
    std::uint64_t seed = 0;
    std::string status = "ok";
    double f1_train = 0.0;  // trained model before discretisation, on the eval split
    double f1_thresh = 0.0;
    double f1_disent = 0.0;
    double f1_thresh_asp = 0.0;
    double f1_disent_asp = 0.0;
    double tau_thresh = 0.0;
    double tau_disj = 0.0;
    CompactnessReport rules_thresh, rules_disent;
    std::string thresh_lp, disent_lp, provenance;
};

struct ReportBundle {
    std::string dataset;
    std::string split;
    std::vector<SeedResult> seeds;
    std::string per_seed_csv;
    std::string summary_csv;
    std::string text;
};

inline SeedResult run_seed(const Config& c, const LoadedDataset& ld, std::uint64_t seed) {
    SeedResult r;
    r.seed = seed;
    const Dataset& d = ld.data;
    const Dataset eval = d.select(eval_split(c, d));
    if (eval.rows() == 0) throw domain_error("evaluation split is empty");
    // tau is chosen on the training rows unless configured otherwise, so the evaluation split stays unseen
    const Dataset select = d.select(parse_split(c.get("experiment.select_split", "train")));
    if (select.rows() == 0) throw domain_error("tau selection split is empty");
    const auto tcfg = train_config(c, seed);
    auto run = train(initial_model(c, d, tcfg), d, tcfg);
    const auto& m = run.model;
    r.f1_train = evaluate(m, eval, PredictMode::neural).macro;

    const auto scope = threshold_scope_for(m);
    if (parse_disj_tau(c.get("experiment.threshold_tau", "sweep")) == DisjTau::sweep)
        r.tau_thresh = sweep_tau(m, scope, select).tau;
    const auto thresh = threshold_model(m, r.tau_thresh, scope);
    r.f1_thresh = evaluate(thresh, eval, PredictMode::bivalent).macro;
    const auto pt = program_for(thresh, d, eval);
    r.f1_thresh_asp = evaluate(pt, eval).macro;
    r.rules_thresh = compactness(pt);
    r.thresh_lp = emit_asp(pt);

    DisentangleOptions opt;
    opt.budget.seconds = c.get_double("experiment.budget_secs", 180.0);
    opt.budget.fan_in_cap = c.get_uint("experiment.fan_in_cap", default_fan_in_cap);
    opt.verify = parse_verify(c.get("experiment.verify", "off"));
    opt.disj_tau = parse_disj_tau(c.get("experiment.disj_tau", "sweep"));
    opt.sweep_split = &select;
    const auto dis = disentangle_model(m, opt);
    if (dis.disj_choice) r.tau_disj = dis.disj_choice->tau;
    r.f1_disent = evaluate(dis.model, eval, PredictMode::bivalent).macro;
    const auto pd = program_for(dis.model, d, eval);
    r.f1_disent_asp = evaluate(pd, eval).macro;
    r.rules_disent = compactness(pd);
    r.disent_lp = emit_asp(pd);
    r.provenance = render_log(dis.log);
    return r;
}

inline std::string csv_number(double v) { return format_fixed(v, 6); }

// Seeds run in parallel; everything is written by seed order.
inline ReportBundle run_experiment(const Config& c, std::uint64_t base_seed = 0) {
    c.check_known(known_config_keys());
    const auto ld = load_dataset(c);
    const std::size_t n = c.get_uint("experiment.seeds", 5);
    ReportBundle b;
    b.dataset = ld.data.name;
    b.split = to_string(eval_split(c, ld.data));
    b.seeds.resize(n);
    parallel_for(n, [&](std::size_t i) {
        try {
            b.seeds[i] = run_seed(c, ld, base_seed + i);
        } catch (const std::exception& e) {
            b.seeds[i].seed = base_seed + i;
            b.seeds[i].status = std::string("failed: ") + e.what();
        }
    });

    b.per_seed_csv =
        "seed,status,f1_train,f1_thresh,f1_disent,f1_thresh_asp,f1_disent_asp,drop_thresh,drop_disent,tau_thresh,"
        "tau_disj,thresh_rules,thresh_max_len,thresh_avg_len,disent_rules,disent_max_len,disent_avg_len\n";
    std::vector<std::vector<double>> cols(14);
    for (const auto& s : b.seeds) {
        std::string status = s.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        b.per_seed_csv += std::to_string(s.seed) + "," + status;
        if (s.status != "ok") {
            b.per_seed_csv += std::string(15, ',') + "\n";
            continue;
        }
        const std::vector<double> v{s.f1_train,
                                    s.f1_thresh,
                                    s.f1_disent,
                                    s.f1_thresh_asp,
                                    s.f1_disent_asp,
                                    s.f1_train - s.f1_thresh,
                                    s.f1_train - s.f1_disent,
                                    static_cast<double>(s.rules_thresh.num_rules),
                                    static_cast<double>(s.rules_thresh.max_rule_length),
                                    s.rules_thresh.avg_rule_length,
                                    static_cast<double>(s.rules_disent.num_rules),
                                    static_cast<double>(s.rules_disent.max_rule_length),
                                    s.rules_disent.avg_rule_length,
                                    s.tau_thresh};
        for (std::size_t k = 0; k < v.size(); ++k) cols[k].push_back(v[k]);
        for (std::size_t k = 0; k < 7; ++k) b.per_seed_csv += "," + csv_number(v[k]);
        b.per_seed_csv += "," + csv_number(s.tau_thresh) + "," + csv_number(s.tau_disj);
        for (std::size_t k = 7; k < 13; ++k) b.per_seed_csv += "," + csv_number(v[k]);
        b.per_seed_csv += "\n";
    }

    static const char* names[] = {"f1_train",      "f1_thresh",        "f1_disent",          "f1_thresh_asp",
                                  "f1_disent_asp", "drop_thresh",      "drop_disent",        "thresh_rules",
                                  "thresh_max_len", "thresh_avg_len",  "disent_rules",       "disent_max_len",
                                  "disent_avg_len", "tau_thresh"};
    b.summary_csv = "metric,mean,ste,n\n";
    std::string table;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const auto ms = mean_ste(cols[k]);
        b.summary_csv += std::string(names[k]) + "," + csv_number(ms.mean) + "," + csv_number(ms.ste) + "," +
                         std::to_string(cols[k].size()) + "\n";
        std::string name = names[k];
        name.resize(16, ' ');
        table += "  " + name + format_fixed(ms.mean, 3) + " +- " + format_fixed(ms.ste, 3) + "\n";
    }
    std::size_t ok = cols[0].size();
    b.text = "dataset " + b.dataset + ", " + std::to_string(ok) + " of " + std::to_string(n) +
             " seeds completed, evaluated on the " + b.split + " split\n\n" + table + "\n";
    for (const auto& s : b.seeds)
        if (s.status != "ok") b.text += "seed " + std::to_string(s.seed) + " " + s.status + "\n";
    b.text += "values are mean +- ste over completed seeds, ste = sample standard deviation / sqrt(n).\n"
              "f1_train is the trained model before discretisation, scored on the evaluation split;\n"
              "drop_x = f1_train - f1_x. thresh: shared tau over the model; disent: split conjunctions,\n"
              "then threshold the disjunctive layer.\n";
    return b;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << s;
}

inline void write_bundle(const ReportBundle& b, const std::filesystem::path& dir) {
    write_text(dir / "experiment_seeds.csv", b.per_seed_csv);
    write_text(dir / "experiment_summary.csv", b.summary_csv);
    write_text(dir / "experiment_report.txt", b.text);
    for (const auto& s : b.seeds) {
        if (s.status != "ok") continue;
        const auto sub = dir / ("seed_" + std::to_string(s.seed));
        write_text(sub / "rules_threshold.lp", s.thresh_lp);
        write_text(sub / "rules_disentangled.lp", s.disent_lp);
        write_text(sub / "provenance.log", s.provenance);
    }
}

// ---------------------------------------------------------------------------
// Runtime of the exclusion-set search against fan-in.

struct BenchConfig {
    std::size_t fan_in_min = 2;
    std::size_t fan_in_max = 16;
    std::size_t trials = 15;
    std::size_t repetitions = 3;
    double budget_secs = 180.0;
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::size_t fan_in = 0;
    std::size_t trial = 0;
    double elapsed_ms = 0.0; // fastest repetition
    std::size_t splits = 0;
    bool censored = false; // hit the budget
};

// Node as training leaves it: one dominant weight, the rest small, random signs.
// Trial t uses the same draws at every fan-in (the first n weights), so larger
// fan-ins extend smaller ones.
inline std::vector<double> trained_like_node(std::uint64_t seed, std::size_t trial, std::size_t width) {
    rng gen(seed * 1000003u + trial);
    std::vector<double> w(width);
    for (std::size_t i = 0; i < width; ++i) {
        const double mag = i == 0 ? gen.uniform(4.0, 6.0) : gen.uniform(0.2, 1.5);
        w[i] = gen.uniform() < 0.5 ? -mag : mag;
    }
    return w;
}

inline std::vector<BenchRow> bench_disentangle(const BenchConfig& cfg) {
    std::vector<BenchRow> rows;
    for (std::size_t n = cfg.fan_in_min; n <= cfg.fan_in_max; ++n) {
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            const auto full = trained_like_node(cfg.seed, t, cfg.fan_in_max);
            const std::vector<double> w(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n));
            BenchRow row{n, t, INFINITY, 0, false};
            for (std::size_t r = 0; r < std::max<std::size_t>(1, cfg.repetitions); ++r) {
                const auto start = Clock::now();
                const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                                  std::chrono::duration<double>(cfg.budget_secs));
                try {
                    row.splits = search_exclusion_sets(w, deadline, t).size();
                } catch (const search_budget_exceeded& e) {
                    row.censored = true;
                    row.splits = e.partial().size();
                }
                const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
                row.elapsed_ms = std::min(row.elapsed_ms, ms);
                if (row.censored) break;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : (v[h - 1] + v[h]) / 2.0;
}

struct BenchSummary {
    std::size_t fan_in = 0;
    double median_ms = 0.0;
    double max_ms = 0.0;
    double median_splits = 0.0;
    std::size_t censored = 0;
};

inline std::vector<BenchSummary> summarise(const std::vector<BenchRow>& rows) {
    std::vector<BenchSummary> out;
    for (std::size_t i = 0; i < rows.size();) {
        BenchSummary s;
        s.fan_in = rows[i].fan_in;
        std::vector<double> ms, sp;
        for (; i < rows.size() && rows[i].fan_in == s.fan_in; ++i) {
            ms.push_back(rows[i].elapsed_ms);
            sp.push_back(static_cast<double>(rows[i].splits));
            s.max_ms = std::max(s.max_ms, rows[i].elapsed_ms);
            s.censored += rows[i].censored;
        }
        s.median_ms = median(ms);
        s.median_splits = median(sp);
        out.push_back(s);
    }
    return out;
}

// Columns are whitespace-free so the file also reads as a gnuplot data table.
inline std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string s = "fan_in,trial,elapsed_ms,splits,censored\n";
    for (const auto& r : rows)
        s += std::to_string(r.fan_in) + "," + std::to_string(r.trial) + "," + format_fixed(r.elapsed_ms, 4) + "," +
             std::to_string(r.splits) + "," + (r.censored ? "1" : "0") + "\n";
    return s;
}

inline std::string bench_summary_csv(const std::vector<BenchSummary>& rows) {
    std::string s = "fan_in,median_ms,max_ms,median_splits,censored\n";
    for (const auto& r : rows)
        s += std::to_string(r.fan_in) + "," + format_fixed(r.median_ms, 4) + "," + format_fixed(r.max_ms, 4) + "," +
             format_fixed(r.median_splits, 1) + "," + std::to_string(r.censored) + "\n";
    return s;
}

inline BenchConfig bench_config(const Config& c, std::uint64_t seed) {
    BenchConfig b;
    b.fan_in_min = c.get_uint("bench.fan_in_min", b.fan_in_min);
    b.fan_in_max = c.get_uint("bench.fan_in_max", b.fan_in_max);
    b.trials = c.get_uint("bench.trials", b.trials);
    b.repetitions = c.get_uint("bench.repetitions", b.repetitions);
    b.budget_secs = c.get_double("bench.budget_secs", b.budget_secs);
    b.seed = c.has("bench.seed") ? c.get_uint("bench.seed", 0) : seed;
    if (b.fan_in_min < 1 || b.fan_in_max < b.fan_in_min) throw domain_error("bench fan-in range is empty");
    return b;
}

} // namespace ndnf
