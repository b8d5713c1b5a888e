#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ndnf/checkpoint.hpp"
#include "ndnf/config.hpp"
#include "ndnf/disentangle.hpp"
#include "ndnf/experiment.hpp"
#include "ndnf/logic.hpp"
#include "ndnf/oracle.hpp"
#include "ndnf/threshold.hpp"
#include "ndnf/train.hpp"

namespace fs = std::filesystem;
using namespace ndnf;

namespace {

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "settings file (key = value, [section] headers)");
    app->add_option("--seed", c.seed, "seed for every random choice")->capture_default_str();
    app->add_option("--out-dir", c.out_dir, "directory for outputs")->capture_default_str();
    app->add_option("--set", c.overrides, "override a setting, e.g. --set train.epochs=50");
}

Config settings(const Common& c) {
    Config cfg = c.config.empty() ? Config{} : Config::load(c.config);
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw parse_error("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.check_known(known_config_keys());
    return cfg;
}

fs::path out_path(const Common& c, const std::string& name) { return fs::path(c.out_dir) / name; }

void emit(const Common& c, const std::string& name, const std::string& text, bool echo = false) {
    write_text(out_path(c, name), text);
    if (echo) std::cout << text;
}

SplitTag split_or_default(const std::string& s, const Config& cfg, const Dataset& d) {
    return s.empty() ? eval_split(cfg, d) : parse_split(s);
}

// Rows used to choose tau: --eval, else experiment.select_split, else train.
SplitTag select_split(const std::string& s, const Config& cfg) {
    return parse_split(s.empty() ? cfg.get("experiment.select_split", "train") : s);
}

std::string f1_csv(const F1Report& r, const std::string& split, const std::string& mode) {
    std::string s = "split,mode,macro_f1";
    for (std::size_t k = 0; k < r.per_class.size(); ++k) s += ",f1_" + std::to_string(k);
    s += "\n" + split + "," + mode + "," + csv_number(r.macro);
    for (double v : r.per_class) s += "," + csv_number(v);
    return s + "\n";
}

std::vector<double> parse_weights(const std::string& s) {
    std::vector<double> w;
    std::string cur;
    for (char ch : s + ",") {
        if (ch == ',') {
            if (!cur.empty()) w.push_back(parse_double(cur));
            cur.clear();
        } else if (ch != ' ' && ch != '[' && ch != ']') {
            cur.push_back(ch);
        }
    }
    return w;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neural DNF training, discretisation and rule extraction"};
    app.require_subcommand(1);

    Common train_c, eval_c, disc_c, dis_c, emit_c, tt_c, bench_c, exp_c;

    auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
    add_common(train_cmd, train_c);

    std::string eval_ckpt, eval_split_s, eval_mode = "neural";
    auto* eval_cmd = app.add_subcommand("eval", "macro-F1 of a checkpoint");
    add_common(eval_cmd, eval_c);
    eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
    eval_cmd->add_option("--split", eval_split_s, "train, val or test");
    eval_cmd->add_option("--mode", eval_mode, "neural or bivalent")->check(CLI::IsMember({"neural", "bivalent"}));

    std::string disc_ckpt, disc_method = "threshold", disc_scope, disc_split, disc_tau = "sweep";
    auto* disc_cmd = app.add_subcommand("discretise", "threshold a checkpoint onto {-6, 0, 6}");
    add_common(disc_cmd, disc_c);
    disc_cmd->add_option("--checkpoint", disc_ckpt)->required();
    disc_cmd->add_option("--method", disc_method)->check(CLI::IsMember({"threshold"}));
    disc_cmd->add_option("--scope", disc_scope, "model, disj or conj (default: model, conj for mutex-tanh)");
    disc_cmd->add_option("--eval", disc_split, "split used to pick tau (default train)");
    disc_cmd->add_option("--tau", disc_tau, "zero, sweep or a number");

    std::string dis_ckpt, dis_verify = "off", dis_disj_tau = "sweep", dis_split;
    double dis_budget = 180.0;
    std::size_t dis_cap = default_fan_in_cap;
    auto* dis_cmd = app.add_subcommand("disentangle", "split conjunctive nodes and threshold the disjunctive layer");
    add_common(dis_cmd, dis_c);
    dis_cmd->add_option("--checkpoint", dis_ckpt)->required();
    dis_cmd->add_option("--budget-secs", dis_budget)->capture_default_str();
    dis_cmd->add_option("--verify", dis_verify)->check(CLI::IsMember({"off", "enumerable"}));
    dis_cmd->add_option("--disj-tau", dis_disj_tau)->check(CLI::IsMember({"zero", "sweep"}));
    dis_cmd->add_option("--eval", dis_split, "split used for the disjunctive tau sweep (default train)");
    dis_cmd->add_option("--fan-in-cap", dis_cap)->capture_default_str();

    std::string emit_ckpt, emit_format = "asp";
    auto* emit_cmd = app.add_subcommand("emit-rules", "write the logic program of a discretised checkpoint");
    add_common(emit_cmd, emit_c);
    emit_cmd->add_option("--checkpoint", emit_ckpt)->required();
    emit_cmd->add_option("--format", emit_format)->check(CLI::IsMember({"asp", "csv-metrics"}));

    std::string tt_weights, tt_format = "text", tt_kind = "conj";
    double tt_delta = 1.0;
    std::size_t tt_cap = default_fan_in_cap;
    auto* tt_cmd = app.add_subcommand("truth-table", "soft-valued truth table of one node");
    add_common(tt_cmd, tt_c);
    tt_cmd->add_option("--weights", tt_weights, "comma-separated weights, e.g. -6,-2,-2,2,-6")->required();
    tt_cmd->add_option("--delta", tt_delta, "delta magnitude")->capture_default_str();
    tt_cmd->add_option("--kind", tt_kind)->check(CLI::IsMember({"conj", "disj"}));
    tt_cmd->add_option("--format", tt_format)->check(CLI::IsMember({"text", "csv"}));
    tt_cmd->add_option("--fan-in-cap", tt_cap)->capture_default_str();

    auto* bench_cmd = app.add_subcommand("bench", "time the exclusion-set search against fan-in");
    add_common(bench_cmd, bench_c);

    auto* exp_cmd = app.add_subcommand("experiment", "train, threshold and disentangle over several seeds");
    add_common(exp_cmd, exp_c);

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            const auto cfg = settings(train_c);
            const auto ld = load_dataset(cfg);
            for (const auto& w : ld.warnings) std::cerr << "warning: " << w << "\n";
            const auto tcfg = train_config(cfg, train_c.seed);
            auto run = train(initial_model(cfg, ld.data, tcfg), ld.data, tcfg);
            std::string log = "epoch,task_loss,aux_weight,aux_conj_pm1,total,delta,temperature\n";
            for (const auto& e : run.history)
                log += std::to_string(e.epoch) + "," + format_double(e.loss.task_loss) + "," +
                       format_double(e.loss.aux_weight) + "," + format_double(e.loss.aux_conj_pm1) + "," +
                       format_double(e.loss.total) + "," + format_double(e.delta) + "," +
                       format_double(e.temperature) + "\n";
            emit(train_c, "train_log.csv", log);
            emit(train_c, "model.json", to_json(Checkpoint{run.model, run.config, run.state, train_c.seed}));
            const auto split = eval_split(cfg, ld.data);
            const auto f1 = evaluate(run.model, ld.data.select(split), PredictMode::neural);
            std::cout << "trained " << run.history.size() << " epochs, " << to_string(split)
                      << " macro-F1 " << format_fixed(f1.macro, 4) << "\n";
        } else if (eval_cmd->parsed()) {
            const auto cfg = settings(eval_c);
            const auto ld = load_dataset(cfg);
            const auto ck = load_checkpoint(eval_ckpt);
            const auto split = split_or_default(eval_split_s, cfg, ld.data);
            const auto mode = eval_mode == "neural" ? PredictMode::neural : PredictMode::bivalent;
            const auto f1 = evaluate(ck.model, ld.data.select(split), mode);
            emit(eval_c, "eval.csv", f1_csv(f1, to_string(split), eval_mode), true);
        } else if (disc_cmd->parsed()) {
            const auto cfg = settings(disc_c);
            const auto ld = load_dataset(cfg);
            auto ck = load_checkpoint(disc_ckpt);
            const auto scope = disc_scope.empty() ? threshold_scope_for(ck.model) : parse_scope(disc_scope);
            if (ck.model.head == Head::mutex_tanh && scope_has_disj(scope))
                throw domain_error("the disjunctive layer of a mutex-tanh model is not thresholded");
            const Dataset select = ld.data.select(select_split(disc_split, cfg));
            const Dataset eval = ld.data.select(eval_split(cfg, ld.data));
            ThresholdChoice choice;
            choice.scope = scope;
            if (disc_tau == "sweep") {
                choice = sweep_tau(ck.model, scope, select);
            } else {
                choice.tau = disc_tau == "zero" ? 0.0 : parse_double(disc_tau);
                choice.metric = evaluate(threshold_model(ck.model, choice.tau, scope), select, PredictMode::bivalent).macro;
                choice.candidates = {{choice.tau, choice.metric}};
            }
            std::string sweep = "tau,macro_f1\n";
            for (const auto& [t, f] : choice.candidates) sweep += format_double(t) + "," + csv_number(f) + "\n";
            emit(disc_c, "tau_sweep.csv", sweep);
            ck.model = threshold_model(ck.model, choice.tau, scope);
            emit(disc_c, "discretised.json", to_json(ck));
            try {
                emit(disc_c, "rules.lp", emit_asp(program_for(ck.model, ld.data, eval)));
            } catch (const translation_error& e) {
                std::cerr << "no rule file: " << e.what() << "\n";
            }
            std::cout << "scope " << to_string(scope) << " tau " << format_double(choice.tau) << " selection macro-F1 "
                      << format_fixed(choice.metric, 4) << ", " << to_string(eval_split(cfg, ld.data)) << " macro-F1 "
                      << format_fixed(evaluate(ck.model, eval, PredictMode::bivalent).macro, 4) << "\n";
        } else if (dis_cmd->parsed()) {
            const auto cfg = settings(dis_c);
            const auto ld = load_dataset(cfg);
            auto ck = load_checkpoint(dis_ckpt);
            const Dataset select = ld.data.select(select_split(dis_split, cfg));
            const Dataset eval = ld.data.select(eval_split(cfg, ld.data));
            DisentangleOptions opt;
            opt.budget = {dis_budget, dis_cap};
            opt.verify = parse_verify(dis_verify);
            opt.disj_tau = parse_disj_tau(dis_disj_tau);
            opt.sweep_split = &select;
            const auto res = disentangle_model(ck.model, opt);
            ck.model = res.model;
            emit(dis_c, "disentangled.json", to_json(ck));
            emit(dis_c, "provenance.log", render_log(res.log));
            emit(dis_c, "rules.lp", emit_asp(program_for(ck.model, ld.data, eval)));
            const auto f1 = evaluate(ck.model, eval, PredictMode::bivalent);
            std::cout << ck.model.conj.out_nodes << " conjunctive nodes after splitting, macro-F1 "
                      << format_fixed(f1.macro, 4) << "\n";
        } else if (emit_cmd->parsed()) {
            const auto cfg = settings(emit_c);
            const auto ck = load_checkpoint(emit_ckpt);
            std::optional<LoadedDataset> ld;
            if (!emit_c.config.empty()) ld = load_dataset(cfg);
            LogicProgram p;
            if (ld) {
                p = program_for(ck.model, ld->data, ld->data.select(eval_split(cfg, ld->data)));
            } else {
                const Task task = ck.model.head == Head::mutex_tanh ? Task::multiclass
                                  : ck.model.outputs() == 1     ? Task::binary
                                                                : Task::multilabel;
                p = translate(ck.model, task);
            }
            if (emit_format == "asp") {
                emit(emit_c, "rules.lp", emit_asp(p), true);
            } else {
                const auto c = compactness(p);
                emit(emit_c, "rules_metrics.csv",
                     "num_rules,max_rule_length,avg_rule_length\n" + std::to_string(c.num_rules) + "," +
                         std::to_string(c.max_rule_length) + "," + csv_number(c.avg_rule_length) + "\n",
                     true);
            }
        } else if (tt_cmd->parsed()) {
            const auto w = parse_weights(tt_weights);
            const double d = (tt_kind == "conj" ? 1.0 : -1.0) * tt_delta;
            const auto t = enumerate_truth_table(w, d, tt_cap);
            std::string out;
            if (tt_format == "csv") {
                for (std::size_t i = 0; i < w.size(); ++i) out += "x" + std::to_string(i + 1) + ",";
                out += "activation,bivalent\n";
                for (std::size_t r = 0; r < t.size(); ++r) {
                    for (int v : t.input(r)) out += std::to_string(v) + ",";
                    out += format_fixed(t.activations[r], 3) + "," + (t.bivalent[r] ? "true" : "false") + "\n";
                }
                emit(tt_c, "truth_table.csv", out, true);
            } else {
                auto cell = [](std::string s, std::size_t width) {
                    return std::string(width > s.size() ? width - s.size() : 0, ' ') + s;
                };
                for (std::size_t i = 0; i < w.size(); ++i) out += cell("x" + std::to_string(i + 1), 4);
                out += cell("out", 8) + cell("value", 7) + "\n";
                for (std::size_t r = 0; r < t.size(); ++r) {
                    for (int v : t.input(r)) out += cell(std::to_string(v), 4);
                    out += cell(format_fixed(t.activations[r], 3), 8) + cell(t.bivalent[r] ? "T" : "F", 7) + "\n";
                }
                emit(tt_c, "truth_table.txt", out, true);
            }
        } else if (bench_cmd->parsed()) {
            const auto cfg = settings(bench_c);
            const auto rows = bench_disentangle(bench_config(cfg, bench_c.seed));
            emit(bench_c, "bench.csv", bench_csv(rows));
            emit(bench_c, "bench_summary.csv", bench_summary_csv(summarise(rows)), true);
        } else if (exp_cmd->parsed()) {
            const auto cfg = settings(exp_c);
            const auto b = run_experiment(cfg, exp_c.seed);
            write_bundle(b, exp_c.out_dir);
            std::cout << b.text;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
