#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ndnf/dataset.hpp"
#include "ndnf/error.hpp"
#include "ndnf/lattice.hpp"
#include "ndnf/model.hpp"
#include "ndnf/oracle.hpp"
#include "ndnf/threshold.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

// J: nonzero weights. J-bar: those below half the largest magnitude, the only
// candidates for exclusion from a split rule.
struct RelevantSet {
    std::vector<std::size_t> indices;
    std::vector<std::size_t> small_indices;
    double half_max = 0.0;
};

inline RelevantSet relevant_set(std::span<const double> w) {
    RelevantSet r;
    r.half_max = max_abs(w) / 2.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] == 0.0) continue;
        r.indices.push_back(j);
        if (std::abs(w[j]) < r.half_max) r.small_indices.push_back(j);
    }
    return r;
}

struct ExclusionSet {
    std::vector<std::size_t> indices; // ascending
    double weight_sum = 0.0;

    bool operator==(const ExclusionSet&) const = default;
};

// Summed in ascending index order so every caller rounds the same way.
inline double exclusion_sum(std::span<const double> w, std::span<const std::size_t> sorted_indices) {
    double s = 0.0;
    for (auto j : sorted_indices) s += std::abs(w[j]);
    return s;
}

inline bool valid_exclusion(std::span<const double> w, std::span<const std::size_t> sorted_indices) {
    return exclusion_sum(w, sorted_indices) < max_abs(w) / 2.0;
}

// One tensor per positive example: 6 x_j where x_j agrees with sign(w_j), else 0.
inline SplitWeightSet split_positive_naive(std::span<const double> w, const std::vector<std::vector<int>>& positives,
                                           std::size_t node = 0) {
    SplitWeightSet s{{}, node, Polarity::positive};
    for (const auto& x : positives) {
        if (x.size() != w.size()) throw shape_error("example width differs from the node");
        LatticeTensor t(w.size(), 0);
        for (std::size_t j = 0; j < w.size(); ++j)
            if (sign(w[j]) != 0 && x[j] == sign(w[j])) t[j] = lattice_magnitude * x[j];
        s.tensors.push_back(std::move(t));
    }
    return s;
}

// One tensor per negative example: 6 x_j where x_j disagrees with sign(w_j), else 0.
inline SplitWeightSet split_negative_naive(std::span<const double> w, const std::vector<std::vector<int>>& negatives,
                                           std::size_t node = 0) {
    SplitWeightSet s{{}, node, Polarity::negative};
    for (const auto& x : negatives) {
        if (x.size() != w.size()) throw shape_error("example width differs from the node");
        LatticeTensor t(w.size(), 0);
        for (std::size_t j = 0; j < w.size(); ++j)
            if (sign(w[j]) != 0 && x[j] != sign(w[j])) t[j] = lattice_magnitude * x[j];
        s.tensors.push_back(std::move(t));
    }
    return s;
}

// m subsumes n: every literal of m appears in n with the same sign, and m has
// strictly fewer (but at least one) literals.
inline bool subsumes(std::span<const int> m, std::span<const int> n) {
    if (m.size() != n.size()) throw shape_error("subsumption between tensors of different width");
    std::size_t sm = 0, sn = 0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        if (m[j] != 0 && m[j] != n[j]) return false;
        sm += m[j] != 0;
        sn += n[j] != 0;
    }
    return sm > 0 && sm < sn;
}

// Both tensors are zero outside J, so only J needs checking.
inline bool subsumes(std::span<const int> m, std::span<const int> n, const RelevantSet& relevant) {
    std::size_t sm = 0, sn = 0;
    for (auto j : relevant.indices) {
        if (m[j] != 0 && m[j] != n[j]) return false;
        sm += m[j] != 0;
        sn += n[j] != 0;
    }
    return sm > 0 && sm < sn;
}

struct PruneResult {
    std::vector<LatticeTensor> kept;
    std::vector<std::size_t> kept_from;                      // input index of each kept tensor
    std::vector<std::pair<std::size_t, std::size_t>> pruned; // (input index, position in kept of a subsumer)
};

// Keeps the tensors no other tensor subsumes. Checking in order of support size
// against the kept tensors is enough: subsumption is transitive.
inline PruneResult prune_subsumed(const std::vector<LatticeTensor>& tensors) {
    PruneResult r;
    std::vector<std::size_t> order(tensors.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return support_size(tensors[a]) < support_size(tensors[b]); });
    for (auto i : order) {
        std::optional<std::size_t> by;
        for (std::size_t k = 0; k < r.kept.size() && !by; ++k) {
            if (subsumes(r.kept[k], tensors[i]) || r.kept[k] == tensors[i]) by = k;
        }
        if (by) {
            r.pruned.emplace_back(i, *by);
        } else {
            r.kept.push_back(tensors[i]);
            r.kept_from.push_back(i);
        }
    }
    // report kept tensors in input order
    std::vector<std::size_t> pos(r.kept.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
    std::sort(pos.begin(), pos.end(), [&](auto a, auto b) { return r.kept_from[a] < r.kept_from[b]; });
    std::vector<std::size_t> rank(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) rank[pos[i]] = i;
    PruneResult out;
    for (auto p : pos) {
        out.kept.push_back(r.kept[p]);
        out.kept_from.push_back(r.kept_from[p]);
    }
    for (auto [i, k] : r.pruned) out.pruned.emplace_back(i, rank[k]);
    std::sort(out.pruned.begin(), out.pruned.end());
    return out;
}

using Clock = std::chrono::steady_clock;

// Budget overrun during the search; carries the exclusion sets found so far.
class search_budget_exceeded : public budget_exceeded {
public:
    search_budget_exceeded(const std::string& what, std::size_t node, std::vector<ExclusionSet> partial)
        : budget_exceeded(what, node), partial_(std::move(partial)) {}
    const std::vector<ExclusionSet>& partial() const noexcept { return partial_; }

private:
    std::vector<ExclusionSet> partial_;
};

// Breadth-first search for the maximal valid exclusion sets of a positively used
// conjunctive node. Sets are extended only while they stay valid; a set with no
// valid extension is maximal. Visited sets are remembered after dequeue so no set
// is expanded twice.
inline std::vector<ExclusionSet> search_exclusion_sets(std::span<const double> w,
                                                       std::optional<Clock::time_point> deadline = std::nullopt,
                                                       std::size_t node = 0) {
    const RelevantSet rs = relevant_set(w);
    if (rs.indices.empty()) throw domain_error("exclusion-set search on an all-zero node " + std::to_string(node));
    if (rs.small_indices.empty()) return {ExclusionSet{}};

    using Key = std::vector<std::size_t>;
    struct Item {
        Key set;
        std::optional<Key> parent;
    };
    std::deque<Item> queue;
    std::set<Key> visited;
    std::set<Key> found;
    auto collect = [&] {
        std::vector<ExclusionSet> out;
        for (const auto& k : found) out.push_back({k, exclusion_sum(w, k)});
        return out;
    };

    for (auto j : rs.small_indices) {
        Key k{j};
        visited.insert(k);
        queue.push_back({k, std::nullopt});
    }
    std::size_t iter = 0;
    while (!queue.empty()) {
        if (deadline && (++iter & 255u) == 0 && Clock::now() > *deadline)
            throw search_budget_exceeded("exclusion-set search for node " + std::to_string(node) + " ran out of time",
                                         node, collect());
        Item item = std::move(queue.front());
        queue.pop_front();
        const bool valid = exclusion_sum(w, item.set) < rs.half_max;
        std::vector<Key> extensions;
        if (valid) {
            for (auto j : rs.small_indices) {
                if (std::binary_search(item.set.begin(), item.set.end(), j)) continue;
                Key bigger = item.set;
                bigger.insert(std::upper_bound(bigger.begin(), bigger.end(), j), j);
                if (exclusion_sum(w, bigger) < rs.half_max) extensions.push_back(std::move(bigger));
            }
        }
        if (!valid || extensions.empty()) {
            if (valid)
                found.insert(item.set);
            else if (item.parent)
                found.insert(*item.parent);
            continue;
        }
        for (auto& e : extensions)
            if (visited.insert(e).second) queue.push_back({std::move(e), item.set});
    }
    return collect();
}

// 6 sign(w_j) on J minus the exclusion set, 0 elsewhere.
inline LatticeTensor exclusion_to_tensor(std::span<const double> w, const ExclusionSet& e) {
    LatticeTensor t = sign_tensor(w);
    for (auto j : e.indices) {
        if (j >= t.size()) throw shape_error("exclusion index outside the node");
        t[j] = 0;
    }
    return t;
}

struct NodeBudget {
    double seconds = 180.0;
    std::size_t fan_in_cap = default_fan_in_cap;
};

struct NodeOutcome {
    SplitWeightSet splits;
    std::optional<std::size_t> examples; // |X+| or |X-| when the node was enumerated
    std::size_t exclusion_sets = 0;      // |E*| on the search path, minimal tensors otherwise
};

namespace detail {

// Minimal split tensors read straight off the truth table. The target rows are
// closed under adding (negative) or removing (positive) sign mismatches, so a
// row's tensor is subsumption-minimal iff flipping any one of its literals
// leaves the target set.
inline NodeOutcome minimal_splits_from_table(std::span<const double> w, double delta_signed, Polarity polarity,
                                             const NodeBudget& budget, std::optional<Clock::time_point> deadline,
                                             std::size_t node) {
    const SoftTruthTable table = enumerate_truth_table(w, delta_signed, budget.fan_in_cap, node);
    const std::size_t k = table.fan_in();
    const std::uint32_t full = k == 0 ? 0u : static_cast<std::uint32_t>((std::uint64_t{1} << k) - 1);
    std::uint32_t sign_mask = 0;
    for (std::size_t b = 0; b < k; ++b)
        if (w[table.relevant[b]] > 0.0) sign_mask |= 1u << b;

    std::vector<char> target(table.size());
    std::size_t count = 0;
    for (std::size_t r = 0; r < table.size(); ++r) {
        const bool t = polarity == Polarity::positive ? table.bivalent[r] != 0 : table.bivalent[r] == 0;
        target[table.masks[r]] = t;
        count += t;
    }
    NodeOutcome out;
    out.splits = {{}, node, polarity};
    out.examples = count;
    for (std::size_t r = 0; r < table.size(); ++r) {
        if (deadline && (r & 4095u) == 4095u && Clock::now() > *deadline)
            throw budget_exceeded("splitting node " + std::to_string(node) + " ran out of time", node);
        const std::uint32_t x = table.masks[r];
        if (!target[x]) continue;
        const std::uint32_t match = ~(x ^ sign_mask) & full;
        const std::uint32_t literals = polarity == Polarity::positive ? match : ~match & full;
        bool minimal = true;
        for (std::size_t b = 0; b < k && minimal; ++b)
            if ((literals >> b) & 1u) minimal = !target[x ^ (1u << b)];
        if (!minimal) continue;
        LatticeTensor t(w.size(), 0);
        for (std::size_t b = 0; b < k; ++b)
            if ((literals >> b) & 1u) t[table.relevant[b]] = (x >> b) & 1u ? lattice_magnitude : -lattice_magnitude;
        out.splits.tensors.push_back(std::move(t));
    }
    out.exclusion_sets = out.splits.size();
    return out;
}

} // namespace detail

// Positive polarity with delta = 1 runs the exclusion-set search; otherwise the
// node is enumerated and its naive splits reduced to the subsumption-minimal ones.
inline NodeOutcome disentangle_node_detailed(std::span<const double> w, Polarity polarity, const NodeBudget& budget,
                                             double delta_signed = 1.0, std::size_t node = 0) {
    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(budget.seconds));
    if (polarity == Polarity::positive && relevant_indices(w).empty()) {
        // raw is exactly 0, never true
        return {{{}, node, polarity}, std::size_t{0}, 0};
    }
    if (polarity == Polarity::positive && delta_signed == 1.0) {
        const auto sets = search_exclusion_sets(w, deadline, node);
        NodeOutcome out;
        out.splits = {{}, node, polarity};
        for (const auto& e : sets) out.splits.tensors.push_back(exclusion_to_tensor(w, e));
        out.exclusion_sets = sets.size();
        return out;
    }
    return detail::minimal_splits_from_table(w, delta_signed, polarity, budget, deadline, node);
}

inline SplitWeightSet disentangle_node(std::span<const double> w, Polarity polarity, const NodeBudget& budget = {},
                                       double delta_signed = 1.0, std::size_t node = 0) {
    return disentangle_node_detailed(w, polarity, budget, delta_signed, node).splits;
}

// ---------------------------------------------------------------------------
// Reconnection

// Replacement rows for one conjunctive node. Positive splits take the node's
// positive downstream weights; negative splits take the negated negative ones,
// so every split connects positively.
struct NodeReplacement {
    std::size_t node = 0;
    std::vector<SplitWeightSet> splits;
};

inline NeuralDnfModel reconnect(const NeuralDnfModel& m, const std::vector<NodeReplacement>& replacements) {
    validate(m);
    std::vector<const NodeReplacement*> by_node(m.conj.out_nodes, nullptr);
    for (const auto& r : replacements) {
        if (r.node >= m.conj.out_nodes) throw shape_error("replacement for a missing conjunctive node");
        by_node[r.node] = &r;
    }
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<double>> cols; // one per new conjunctive node, length disj.out_nodes
    bool all_lattice = true;
    for (std::size_t k = 0; k < m.conj.out_nodes; ++k) {
        std::vector<double> col(m.disj.out_nodes);
        for (std::size_t d = 0; d < m.disj.out_nodes; ++d) col[d] = m.disj.at(d, k);
        if (!by_node[k]) {
            auto row = m.conj.row(k);
            rows.emplace_back(row.begin(), row.end());
            cols.push_back(col);
            all_lattice = false;
            continue;
        }
        for (const auto& s : by_node[k]->splits) {
            std::vector<double> c(m.disj.out_nodes, 0.0);
            for (std::size_t d = 0; d < m.disj.out_nodes; ++d) {
                if (s.polarity == Polarity::positive && col[d] > 0.0) c[d] = col[d];
                if (s.polarity == Polarity::negative && col[d] < 0.0) c[d] = -col[d];
            }
            for (const auto& t : s.tensors) {
                if (t.size() != m.conj.in_features) throw shape_error("split tensor width differs from the layer");
                if (support_size(t) == 0 && !t.empty()) {
                    // An always-true split has no node of its own (raw 0 reads false),
                    // so it becomes the pair a_0 and not a_0.
                    for (double v : {6.0, -6.0}) {
                        rows.emplace_back(t.size(), 0.0);
                        rows.back()[0] = v;
                        cols.push_back(c);
                    }
                    continue;
                }
                rows.emplace_back(t.begin(), t.end());
                cols.push_back(c);
            }
        }
    }
    NeuralDnfModel out = m;
    out.conj = SemiSymbolicLayer(NodeKind::conjunctive, rows.size(), m.conj.in_features,
                                 all_lattice ? 1.0 : m.conj.delta);
    for (std::size_t n = 0; n < rows.size(); ++n) std::copy(rows[n].begin(), rows[n].end(), out.conj.row(n).begin());
    out.disj = SemiSymbolicLayer(NodeKind::disjunctive, m.disj.out_nodes, rows.size(), m.disj.delta);
    for (std::size_t d = 0; d < m.disj.out_nodes; ++d)
        for (std::size_t n = 0; n < rows.size(); ++n) out.disj.at(d, n) = cols[n][d];
    return out;
}

inline NeuralDnfModel reconnect(const NeuralDnfModel& m, std::size_t node, const SplitWeightSet& splits) {
    return reconnect(m, {NodeReplacement{node, {splits}}});
}

// ---------------------------------------------------------------------------
// Whole-model disentanglement

enum class DisjTau { zero, sweep };
enum class Verify { off, enumerable };

struct DisentangleOptions {
    NodeBudget budget;
    Verify verify = Verify::off;
    DisjTau disj_tau = DisjTau::zero;
    const Dataset* sweep_split = nullptr; // required for DisjTau::sweep
};

struct ProvenanceEntry {
    std::size_t node = 0;
    std::string polarity;                // "positive", "negative" or "-" for a dead node
    std::optional<std::size_t> examples; // |X+| or |X-|
    std::size_t exclusion_sets = 0;
    std::size_t splits = 0;
    double elapsed_ms = 0.0;
    std::string verdict; // ok, violations=N, unverified, dead, fallback-threshold, too-wide
};

struct DisentangleResult {
    NeuralDnfModel model;
    std::vector<ProvenanceEntry> log;
    std::optional<ThresholdChoice> disj_choice;
};

inline std::string render(const ProvenanceEntry& e) {
    return "node=" + std::to_string(e.node) + " polarity=" + e.polarity +
           " examples=" + (e.examples ? std::to_string(*e.examples) : std::string("-")) +
           " exclusion_sets=" + std::to_string(e.exclusion_sets) + " splits=" + std::to_string(e.splits) +
           " elapsed_ms=" + format_fixed(e.elapsed_ms, 3) + " verdict=" + e.verdict;
}

inline std::string render_log(const std::vector<ProvenanceEntry>& log) {
    std::string s;
    for (const auto& e : log) s += render(e) + "\n";
    return s;
}

// Splits of the node thresholded at tau = 0: the sign tensor itself, or for a
// negative use one single-literal tensor per relevant input (its negation).
inline SplitWeightSet threshold_fallback(std::span<const double> w, Polarity polarity, std::size_t node) {
    const LatticeTensor t = sign_tensor(w);
    SplitWeightSet s{{}, node, polarity};
    if (polarity == Polarity::positive) {
        s.tensors.push_back(t);
        return s;
    }
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (t[j] == 0) continue;
        LatticeTensor lit(t.size(), 0);
        lit[j] = -t[j];
        s.tensors.push_back(std::move(lit));
    }
    // an all-zero node never fires, so its negation is a fact
    if (s.tensors.empty()) s.tensors.emplace_back(t.size(), 0);
    return s;
}

// Splits every used conjunctive node under each sign it is used with, reconnects
// the splits, then thresholds the disjunctive layer unless the head is mutex-tanh.
// A node that overruns its budget is thresholded at tau = 0 instead.
inline DisentangleResult disentangle_model(const NeuralDnfModel& m, const DisentangleOptions& opt = {}) {
    validate(m);
    struct Task {
        std::size_t node;
        Polarity polarity;
    };
    std::vector<Task> tasks;
    std::vector<char> dead(m.conj.out_nodes, 0);
    for (std::size_t k = 0; k < m.conj.out_nodes; ++k) {
        bool pos = false, neg = false;
        for (std::size_t d = 0; d < m.disj.out_nodes; ++d) {
            pos = pos || m.disj.at(d, k) > 0.0;
            neg = neg || m.disj.at(d, k) < 0.0;
        }
        if (!pos && !neg) dead[k] = 1;
        if (pos) tasks.push_back({k, Polarity::positive});
        if (neg) tasks.push_back({k, Polarity::negative});
    }

    const double dc = m.conj.signed_delta();
    std::vector<SplitWeightSet> splits(tasks.size());
    std::vector<ProvenanceEntry> entries(tasks.size());
    parallel_for(tasks.size(), [&](std::size_t i) {
        const auto [k, pol] = tasks[i];
        const auto w = m.conj.row(k);
        ProvenanceEntry& e = entries[i];
        e.node = k;
        e.polarity = to_string(pol);
        const auto start = Clock::now();
        try {
            auto out = disentangle_node_detailed(w, pol, opt.budget, dc, k);
            splits[i] = std::move(out.splits);
            e.examples = out.examples;
            e.exclusion_sets = out.exclusion_sets;
            e.verdict = "unverified";
        } catch (const budget_exceeded&) {
            splits[i] = threshold_fallback(w, pol, k);
            e.verdict = "fallback-threshold";
        }
        e.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        e.splits = splits[i].size();
        if (opt.verify == Verify::enumerable && e.verdict == "unverified") {
            if (relevant_indices(w).size() > opt.budget.fan_in_cap) {
                e.verdict = "too-wide";
            } else {
                const auto rep = check_split_coverage(w, dc, splits[i], pol, opt.budget.fan_in_cap);
                e.verdict = rep.ok() ? "ok" : "violations=" + std::to_string(rep.violation_count);
                if (!e.examples) {
                    std::size_t n = 0;
                    const auto table = enumerate_truth_table(w, dc, opt.budget.fan_in_cap, k);
                    for (char b : table.bivalent) n += pol == Polarity::positive ? b != 0 : b == 0;
                    e.examples = n;
                }
            }
        }
    });

    std::vector<NodeReplacement> repl(m.conj.out_nodes);
    for (std::size_t k = 0; k < m.conj.out_nodes; ++k) repl[k].node = k;
    DisentangleResult res;
    for (std::size_t k = 0, next = 0; k < m.conj.out_nodes; ++k) {
        if (dead[k]) res.log.push_back({k, "-", std::nullopt, 0, 0, 0.0, "dead"});
        for (; next < tasks.size() && tasks[next].node == k; ++next) {
            res.log.push_back(entries[next]);
            repl[k].splits.push_back(std::move(splits[next]));
        }
    }
    res.model = reconnect(m, repl);
    if (m.head != Head::mutex_tanh) {
        if (opt.disj_tau == DisjTau::sweep) {
            if (!opt.sweep_split) throw domain_error("disjunctive tau sweep needs an evaluation split");
            res.disj_choice = sweep_tau(res.model, ThresholdScope::disjunctive_only, *opt.sweep_split);
            res.model = threshold_model(res.model, res.disj_choice->tau, ThresholdScope::disjunctive_only);
        } else {
            res.model = threshold_model(res.model, 0.0, ThresholdScope::disjunctive_only);
        }
    }
    return res;
}

} // namespace ndnf
