#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ndnf/dataset.hpp"
#include "ndnf/error.hpp"
#include "ndnf/lattice.hpp"
#include "ndnf/metrics.hpp"
#include "ndnf/model.hpp"
#include "ndnf/predicates.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

struct Rule {
    std::string head;
    std::vector<std::string> pos_body;
    std::vector<std::string> neg_body;

    std::size_t length() const noexcept { return pos_body.size() + neg_body.size(); }
    bool is_fact() const noexcept { return pos_body.empty() && neg_body.empty(); }
    bool operator==(const Rule&) const = default;
};

// "p_0::class_0 ; p_1::class_1 :- conj_1, conj_16." for one active-conjunction pattern.
struct AnnotatedDisjunction {
    std::vector<double> probs;
    std::vector<std::string> classes;
    std::vector<std::string> body;
    bool operator==(const AnnotatedDisjunction&) const = default;
};

// Two-layer stratified program: input atoms, optional intermediate heads
// (conjunctions), output heads. Negation only ever applies to atoms of a lower layer.
struct LogicProgram {
    std::vector<PredicateDef> predicate_defs;                       // a_k true iff feature_i > t
    std::vector<std::pair<std::string, std::size_t>> input_columns; // a_k true iff column > 0
    std::vector<std::string> intermediates;                         // declared conjunction heads
    std::vector<std::string> heads;                                 // outputs in label / class order
    std::vector<Rule> rules;

    // Mutex-tanh models keep the disjunctive layer numeric over the intermediates.
    std::optional<SemiSymbolicLayer> mt_layer;
    std::vector<AnnotatedDisjunction> annotated;

    bool operator==(const LogicProgram&) const = default;
};

using AtomNamer = std::function<std::string(std::size_t)>;

inline std::string input_atom(std::size_t k) { return "a_" + std::to_string(k); }
inline std::string conj_atom(std::size_t k) { return "conj_" + std::to_string(k); }

// +6 reads as a positive literal, -6 as a negated one, 0 as absent.
inline Rule tensor_to_rule(std::span<const int> tensor, const std::string& head, const AtomNamer& namer = input_atom,
                           std::vector<std::string>* warnings = nullptr) {
    Rule r{head, {}, {}};
    for (std::size_t i = 0; i < tensor.size(); ++i) {
        if (tensor[i] == lattice_magnitude)
            r.pos_body.push_back(namer(i));
        else if (tensor[i] == -lattice_magnitude)
            r.neg_body.push_back(namer(i));
        else if (tensor[i] != 0)
            throw translation_error("weight " + std::to_string(tensor[i]) + " at index " + std::to_string(i) +
                                    " is not in {-6, 0, 6}");
    }
    if (r.is_fact() && warnings) warnings->push_back("rule for '" + head + "' has an empty body");
    return r;
}

inline LatticeTensor to_lattice(std::span<const double> w, std::size_t node) {
    LatticeTensor t(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 6.0 || w[i] == -6.0 || w[i] == 0.0) {
            t[i] = static_cast<int>(w[i]);
        } else {
            throw translation_error("node " + std::to_string(node) + " weight " + format_double(w[i]) + " at index " +
                                    std::to_string(i) + " is not in {-6, 0, 6}");
        }
    }
    return t;
}

inline std::vector<std::string> output_heads(Head head, Task task, std::size_t outputs) {
    std::vector<std::string> h;
    if (head == Head::mutex_tanh || task == Task::multiclass) {
        for (std::size_t k = 0; k < outputs; ++k) h.push_back("class_" + std::to_string(k));
    } else if (task == Task::binary && outputs == 1) {
        h.push_back("t");
    } else {
        for (std::size_t k = 0; k < outputs; ++k) h.push_back("l_" + std::to_string(k));
    }
    return h;
}

namespace detail {

inline bool body_subset(const Rule& a, const Rule& b) {
    auto sub = [](std::vector<std::string> x, std::vector<std::string> y) {
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        return std::includes(y.begin(), y.end(), x.begin(), x.end());
    };
    return sub(a.pos_body, b.pos_body) && sub(a.neg_body, b.neg_body);
}

inline void sort_body(Rule& r) {
    auto by_name = [](const std::string& a, const std::string& b) { return natural_less(a, b); };
    std::sort(r.pos_body.begin(), r.pos_body.end(), by_name);
    std::sort(r.neg_body.begin(), r.neg_body.end(), by_name);
}

// Body literals in atom order, each tagged with its polarity.
inline std::vector<std::pair<std::string, bool>> literals(const Rule& r) {
    std::vector<std::pair<std::string, bool>> lits;
    for (const auto& a : r.pos_body) lits.emplace_back(a, true);
    for (const auto& a : r.neg_body) lits.emplace_back(a, false);
    std::sort(lits.begin(), lits.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return natural_less(x.first, y.first);
        return x.second && !y.second;
    });
    return lits;
}

} // namespace detail

// Drops duplicate rules and rules whose body strictly contains another body for the same head.
inline void prune_subsumed_rules(std::vector<Rule>& rules) {
    for (auto& r : rules) detail::sort_body(r);
    std::vector<Rule> kept;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        bool drop = false;
        for (std::size_t j = 0; j < rules.size() && !drop; ++j) {
            if (i == j || rules[i].head != rules[j].head) continue;
            if (!detail::body_subset(rules[j], rules[i])) continue;
            // equal bodies: keep only the first occurrence
            drop = rules[j].length() < rules[i].length() || j < i;
        }
        if (!drop) kept.push_back(rules[i]);
    }
    rules = std::move(kept);
}

// Canonical order: intermediate heads before outputs, heads in natural order, bodies by literal sequence.
inline void canonicalise(LogicProgram& p) {
    for (auto& r : p.rules) detail::sort_body(r);
    std::set<std::string> inter(p.intermediates.begin(), p.intermediates.end());
    std::stable_sort(p.rules.begin(), p.rules.end(), [&](const Rule& a, const Rule& b) {
        const bool ia = inter.count(a.head) > 0, ib = inter.count(b.head) > 0;
        if (ia != ib) return ia;
        if (a.head != b.head) return natural_less(a.head, b.head);
        const auto la = detail::literals(a), lb = detail::literals(b);
        return std::lexicographical_compare(la.begin(), la.end(), lb.begin(), lb.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return natural_less(x.first, y.first);
            return x.second && !y.second;
        });
    });
    std::sort(p.predicate_defs.begin(), p.predicate_defs.end(),
              [](const PredicateDef& a, const PredicateDef& b) { return a.atom < b.atom; });
}

// Reads a discretised model as a program. Conjunctive rows must be on the lattice;
// the disjunctive layer must be too unless the head is mutex-tanh. Conjunctions used
// only positively are inlined into the output rules.
inline LogicProgram translate(const NeuralDnfModel& m, Task task, std::vector<std::string>* warnings = nullptr) {
    validate(m);
    LogicProgram p;
    if (m.predicates) {
        const auto& bank = *m.predicates;
        for (std::size_t i = 0; i < bank.features.size(); ++i)
            for (std::size_t j = 0; j < bank.per_feature; ++j) p.predicate_defs.push_back(interpret(bank, i, j));
    }
    for (std::size_t k = 0; k < m.bivalent_columns.size(); ++k)
        p.input_columns.emplace_back(input_atom(m.predicate_width() + k), m.bivalent_columns[k]);
    p.heads = output_heads(m.head, task, m.outputs());

    std::vector<std::vector<Rule>> conj_rules(m.conj.out_nodes);
    std::vector<char> dead(m.conj.out_nodes, 0);
    for (std::size_t k = 0; k < m.conj.out_nodes; ++k) {
        const auto t = to_lattice(m.conj.row(k), k);
        if (support_size(t) == 0) {
            dead[k] = 1; // raw output is exactly 0, always false
            continue;
        }
        conj_rules[k].push_back(tensor_to_rule(t, conj_atom(k), input_atom, warnings));
    }

    if (m.head == Head::mutex_tanh) {
        for (std::size_t k = 0; k < m.conj.out_nodes; ++k) {
            p.intermediates.push_back(conj_atom(k));
            for (auto& r : conj_rules[k]) p.rules.push_back(r);
        }
        p.mt_layer = m.disj;
        canonicalise(p);
        return p;
    }

    std::vector<char> negated(m.conj.out_nodes, 0);
    std::vector<Rule> out_rules;
    for (std::size_t d = 0; d < m.disj.out_nodes; ++d) {
        const auto t = to_lattice(m.disj.row(d), m.conj.out_nodes + d);
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k] > 0) {
                if (dead[k]) continue;
                for (const auto& r : conj_rules[k]) out_rules.push_back({p.heads[d], r.pos_body, r.neg_body});
            } else if (t[k] < 0) {
                if (dead[k]) {
                    out_rules.push_back({p.heads[d], {}, {}});
                } else {
                    negated[k] = 1;
                    out_rules.push_back({p.heads[d], {}, {conj_atom(k)}});
                }
            }
        }
    }
    prune_subsumed_rules(out_rules);
    // a conjunction whose negations were all pruned away needs no rule of its own
    std::fill(negated.begin(), negated.end(), 0);
    for (const auto& r : out_rules)
        for (std::size_t k = 0; k < m.conj.out_nodes; ++k)
            if (std::find(r.neg_body.begin(), r.neg_body.end(), conj_atom(k)) != r.neg_body.end()) negated[k] = 1;
    for (std::size_t k = 0; k < m.conj.out_nodes; ++k) {
        if (!negated[k]) continue;
        p.intermediates.push_back(conj_atom(k));
        for (auto& r : conj_rules[k]) p.rules.push_back(r);
    }
    p.rules.insert(p.rules.end(), out_rules.begin(), out_rules.end());
    canonicalise(p);
    return p;
}

// Compiled form for repeated evaluation: atoms become slots, heads are evaluated
// in dependency order.
class CompiledProgram {
public:
    explicit CompiledProgram(const LogicProgram& p) : program_(&p) {
        auto slot_of = [&](const std::string& a) {
            auto [it, inserted] = slots_.try_emplace(a, names_.size());
            if (inserted) names_.push_back(a);
            return it->second;
        };
        for (const auto& d : p.predicate_defs) input_slots_.push_back(slot_of(input_atom(d.atom)));
        for (const auto& [atom, col] : p.input_columns) input_slots_.push_back(slot_of(atom));
        std::set<std::size_t> derived;
        for (const auto& h : p.intermediates) derived.insert(slot_of(h));
        for (const auto& h : p.heads) derived.insert(slot_of(h));
        for (const auto& r : p.rules) derived.insert(slot_of(r.head));
        for (const auto& r : p.rules) {
            CRule c{slot_of(r.head), {}, {}};
            for (const auto& a : r.pos_body) c.pos.push_back(slot_of(a));
            for (const auto& a : r.neg_body) c.neg.push_back(slot_of(a));
            rules_.push_back(std::move(c));
        }
        std::set<std::size_t> inputs(input_slots_.begin(), input_slots_.end());
        for (const auto& c : rules_)
            for (auto lists : {&c.pos, &c.neg})
                for (auto s : *lists)
                    if (!inputs.count(s) && !derived.count(s)) unbound_.push_back(names_[s]);

        // order heads so every body head is computed first
        std::set<std::size_t> done(inputs.begin(), inputs.end());
        std::vector<std::size_t> pending(derived.begin(), derived.end());
        while (!pending.empty()) {
            std::vector<std::size_t> next;
            for (auto h : pending) {
                bool ready = true;
                for (const auto& c : rules_) {
                    if (c.head != h) continue;
                    for (auto lists : {&c.pos, &c.neg})
                        for (auto s : *lists)
                            if (derived.count(s) && !done.count(s)) ready = false;
                }
                if (ready)
                    order_.push_back(h);
                else
                    next.push_back(h);
            }
            if (next.size() == pending.size()) throw evaluation_error("program has a cyclic dependency");
            for (auto h : order_) done.insert(h);
            pending = std::move(next);
        }
        for (const auto& h : p.heads) head_slots_.push_back(slots_.at(h));
        for (const auto& h : p.intermediates) inter_slots_.push_back(slots_.at(h));
    }

    std::size_t input_count() const { return input_slots_.size(); }

    // Values of every atom given the inputs (predicate atoms first, then input columns).
    std::vector<char> run(std::span<const char> inputs) const {
        if (!unbound_.empty()) throw evaluation_error("atom '" + unbound_.front() + "' is never assigned");
        if (inputs.size() != input_slots_.size()) throw evaluation_error("wrong number of input atoms assigned");
        std::vector<char> v(names_.size(), 0);
        for (std::size_t i = 0; i < inputs.size(); ++i) v[input_slots_[i]] = inputs[i];
        for (auto h : order_) {
            for (const auto& c : rules_) {
                if (c.head != h || v[h]) continue;
                bool sat = true;
                for (auto s : c.pos) sat = sat && v[s];
                for (auto s : c.neg) sat = sat && !v[s];
                if (sat) v[h] = 1;
            }
        }
        return v;
    }

    std::vector<char> inputs_from_row(std::span<const double> x_raw) const {
        std::vector<char> in;
        for (const auto& d : program_->predicate_defs) {
            if (d.feature >= x_raw.size()) throw evaluation_error("predicate refers to a missing feature");
            in.push_back(x_raw[d.feature] > d.threshold);
        }
        for (const auto& [atom, col] : program_->input_columns) {
            if (col >= x_raw.size()) throw evaluation_error("input atom refers to a missing column");
            in.push_back(x_raw[col] > 0.0);
        }
        return in;
    }

    // Label values in dataset layout: 0/1 per head, or one class index for mutex-tanh programs.
    std::vector<int> predict(std::span<const double> x_raw) const {
        const auto v = run(inputs_from_row(x_raw));
        if (program_->mt_layer) {
            std::vector<char> pattern;
            for (auto s : inter_slots_) pattern.push_back(v[s]);
            const auto& layer = *program_->mt_layer;
            std::vector<double> c(pattern.size());
            for (std::size_t i = 0; i < pattern.size(); ++i) c[i] = pattern[i] ? 1.0 : -1.0;
            std::size_t best = 0;
            double best_raw = -INFINITY;
            for (std::size_t n = 0; n < layer.out_nodes; ++n) {
                const double r = raw_output(layer.row(n), layer.signed_delta(), c);
                if (r > best_raw) {
                    best_raw = r;
                    best = n;
                }
            }
            return {static_cast<int>(best)};
        }
        std::vector<int> out;
        for (auto s : head_slots_) out.push_back(v[s]);
        return out;
    }

    const std::string& name(std::size_t slot) const { return names_[slot]; }
    std::size_t slot(const std::string& atom) const { return slots_.at(atom); }

private:
    struct CRule {
        std::size_t head;
        std::vector<std::size_t> pos, neg;
    };
    const LogicProgram* program_;
    std::map<std::string, std::size_t> slots_;
    std::vector<std::string> names_;
    std::vector<std::size_t> input_slots_, head_slots_, inter_slots_, order_;
    std::vector<CRule> rules_;
    std::vector<std::string> unbound_;
};

// Truth value of every derived head given an assignment of the input atoms.
inline std::map<std::string, bool> eval_program(const LogicProgram& p, const std::map<std::string, bool>& assignment) {
    // treat every assigned atom as an input column so arbitrary atom names work
    LogicProgram q = p;
    q.predicate_defs.clear();
    q.input_columns.clear();
    for (const auto& [atom, v] : assignment) q.input_columns.emplace_back(atom, 0);
    CompiledProgram c(q);
    std::vector<char> in;
    for (const auto& [atom, v] : assignment) in.push_back(v);
    const auto vals = c.run(in);
    std::map<std::string, bool> out;
    for (const auto& h : q.heads) out[h] = vals[c.slot(h)];
    for (const auto& h : q.intermediates) out[h] = vals[c.slot(h)];
    for (const auto& r : q.rules) out[r.head] = vals[c.slot(r.head)];
    return out;
}

inline std::vector<int> predict_all(const LogicProgram& p, const Dataset& d) {
    CompiledProgram c(p);
    std::vector<int> out;
    out.reserve(d.labels.size());
    for (std::size_t r = 0; r < d.rows(); ++r) {
        auto y = c.predict(d.row(r));
        out.insert(out.end(), y.begin(), y.end());
    }
    return out;
}

inline F1Report evaluate(const LogicProgram& p, const Dataset& d) { return macro_f1(d, predict_all(p, d)); }

// ---------------------------------------------------------------------------
// Text emission

inline std::string render(const Rule& r) {
    std::string s = r.head;
    const auto lits = detail::literals(r);
    if (!lits.empty()) {
        s += " :- ";
        for (std::size_t i = 0; i < lits.size(); ++i) {
            if (i) s += ", ";
            if (!lits[i].second) s += "not ";
            s += lits[i].first;
        }
    }
    return s + ".";
}

// Thousandths assigned by largest remainder so the printed values sum to exactly 1.000.
inline std::vector<long> round_probabilities(std::span<const double> probs) {
    std::vector<long> milli(probs.size());
    std::vector<std::pair<double, std::size_t>> rem;
    long total = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        const double scaled = probs[k] * 1000.0;
        milli[k] = static_cast<long>(std::floor(scaled));
        total += milli[k];
        rem.emplace_back(scaled - std::floor(scaled), k);
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; total < 1000 && i < rem.size(); ++i, ++total) ++milli[rem[i].second];
    return milli;
}

inline std::string render(const AnnotatedDisjunction& a) {
    std::string s;
    for (std::size_t k = 0; k < a.probs.size(); ++k) {
        if (k) s += " ; ";
        s += format_fixed(a.probs[k], 3) + "::" + a.classes[k];
    }
    if (!a.body.empty()) {
        s += " :- ";
        for (std::size_t i = 0; i < a.body.size(); ++i) s += (i ? ", " : "") + a.body[i];
    }
    return s + ".";
}

// Annotated disjunction for one conjunctive activation pattern of a mutex-tanh model.
inline AnnotatedDisjunction mt_annotation(const NeuralDnfModel& m, std::span<const char> pattern) {
    if (m.head != Head::mutex_tanh) throw translation_error("annotated rules need a mutex-tanh head");
    if (pattern.size() != m.conj.out_nodes) throw shape_error("pattern width differs from the conjunctive layer");
    const auto raw = disj_raw_from_pattern(m, pattern);
    const auto mt = mutex_tanh_head(raw);
    const auto milli = round_probabilities(mt.probs);
    AnnotatedDisjunction a;
    for (std::size_t k = 0; k < milli.size(); ++k) {
        a.probs.push_back(static_cast<double>(milli[k]) / 1000.0);
        a.classes.push_back("class_" + std::to_string(k));
    }
    for (std::size_t i = 0; i < pattern.size(); ++i)
        if (pattern[i]) a.body.push_back(conj_atom(i));
    return a;
}

inline std::string emit_mt_annotated(const NeuralDnfModel& m, std::span<const char> pattern) {
    return render(mt_annotation(m, pattern));
}

// Annotations for every distinct conjunction pattern the dataset exercises, in pattern order.
inline void annotate_patterns(LogicProgram& p, const NeuralDnfModel& m, const Dataset& d) {
    std::set<std::vector<char>> seen;
    for (std::size_t r = 0; r < d.rows(); ++r) seen.insert(conj_pattern(m, d.row(r)));
    p.annotated.clear();
    for (const auto& pat : seen) p.annotated.push_back(mt_annotation(m, pat));
}

inline std::string emit_asp(const LogicProgram& program) {
    LogicProgram p = program;
    canonicalise(p);
    std::string s;
    for (const auto& d : p.predicate_defs) s += render(d) + "\n";
    if (!p.predicate_defs.empty() && (!p.rules.empty() || !p.annotated.empty())) s += "\n";
    for (const auto& r : p.rules) s += render(r) + "\n";
    if (!p.rules.empty() && !p.annotated.empty()) s += "\n";
    for (const auto& a : p.annotated) s += render(a) + "\n";
    return s;
}

// Reads the dialect emit_asp writes. Lines starting with '%' are comments.
inline LogicProgram parse_asp(std::string_view text) {
    LogicProgram p;
    std::set<std::string> heads;
    std::istringstream in{std::string(text)};
    std::string line;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    auto split_list = [&](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : s) {
            if (c == sep) {
                parts.push_back(trim(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!trim(cur).empty()) parts.push_back(trim(cur));
        return parts;
    };
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '%') continue;
        if (line.find(" = ") != std::string::npos && line.find(" > ") != std::string::npos) {
            p.predicate_defs.push_back(parse_predicate(line));
            continue;
        }
        if (line.back() != '.') throw parse_error("rule line must end with '.': '" + line + "'");
        line.pop_back();
        std::string head_part = line, body_part;
        if (auto pos = line.find(":-"); pos != std::string::npos) {
            head_part = trim(line.substr(0, pos));
            body_part = trim(line.substr(pos + 2));
        }
        std::vector<std::string> body = body_part.empty() ? std::vector<std::string>{} : split_list(body_part, ',');
        if (head_part.find("::") != std::string::npos) {
            AnnotatedDisjunction a;
            for (const auto& alt : split_list(head_part, ';')) {
                auto sep = alt.find("::");
                a.probs.push_back(parse_double(alt.substr(0, sep)));
                a.classes.push_back(trim(alt.substr(sep + 2)));
            }
            a.body = body;
            p.annotated.push_back(std::move(a));
            continue;
        }
        Rule r{head_part, {}, {}};
        for (const auto& lit : body) {
            if (lit.rfind("not ", 0) == 0)
                r.neg_body.push_back(trim(lit.substr(4)));
            else
                r.pos_body.push_back(lit);
        }
        heads.insert(r.head);
        p.rules.push_back(std::move(r));
    }
    // heads that appear negated in another body sit in the intermediate layer
    for (const auto& r : p.rules)
        for (const auto& a : r.neg_body)
            if (heads.count(a) && std::find(p.intermediates.begin(), p.intermediates.end(), a) == p.intermediates.end())
                p.intermediates.push_back(a);
    for (const auto& h : heads)
        if (std::find(p.intermediates.begin(), p.intermediates.end(), h) == p.intermediates.end()) {
            bool used = false;
            for (const auto& r : p.rules)
                used = used || std::find(r.pos_body.begin(), r.pos_body.end(), h) != r.pos_body.end();
            if (used)
                p.intermediates.push_back(h);
            else
                p.heads.push_back(h);
        }
    std::sort(p.heads.begin(), p.heads.end(), [](auto& a, auto& b) { return natural_less(a, b); });
    return p;
}

// ---------------------------------------------------------------------------

struct CompactnessReport {
    std::size_t max_rule_length = 0;
    double avg_rule_length = 0.0;
    std::size_t num_rules = 0;
};

// Over every rule, or over the conjunction rules only for a mutex-tanh program.
inline CompactnessReport compactness(const LogicProgram& p) {
    CompactnessReport c;
    std::size_t total = 0;
    std::set<std::string> inter(p.intermediates.begin(), p.intermediates.end());
    for (const auto& r : p.rules) {
        if (p.mt_layer && !inter.count(r.head)) continue;
        ++c.num_rules;
        total += r.length();
        c.max_rule_length = std::max(c.max_rule_length, r.length());
    }
    c.avg_rule_length = c.num_rules ? static_cast<double>(total) / static_cast<double>(c.num_rules) : 0.0;
    return c;
}

inline LogicProgram ground_truth_program(const BooleanNetworkSpec& spec) {
    LogicProgram p;
    for (std::size_t g = 0; g < spec.genes; ++g) {
        p.input_columns.emplace_back(input_atom(g), g);
        p.heads.push_back("l_" + std::to_string(g));
    }
    for (std::size_t g = 0; g < spec.genes; ++g)
        for (const auto& term : spec.next[g]) {
            Rule r{p.heads[g], {}, {}};
            for (const auto& lit : term) (lit.positive ? r.pos_body : r.neg_body).push_back(input_atom(lit.gene));
            p.rules.push_back(std::move(r));
        }
    canonicalise(p);
    return p;
}

} // namespace ndnf
