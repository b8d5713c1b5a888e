#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ndnf/error.hpp"
#include "ndnf/lattice.hpp"
#include "ndnf/semisym.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

inline constexpr std::size_t default_fan_in_cap = 20;

// Exhaustive table of a node's behaviour over all bivalent inputs. Only the
// relevant (nonzero-weight) positions are enumerated; the rest cannot change
// the output and are filled on expansion.
struct SoftTruthTable {
    std::size_t width = 0;
    std::vector<std::size_t> relevant;
    std::vector<std::uint32_t> masks; // bit k set: input at relevant[k] is +1
    std::vector<double> activations;
    std::vector<char> bivalent;

    std::size_t fan_in() const noexcept { return relevant.size(); }
    std::size_t size() const noexcept { return masks.size(); }

    std::vector<int> input(std::size_t row, int fill = -1) const {
        std::vector<int> x(width, fill);
        for (std::size_t k = 0; k < relevant.size(); ++k) x[relevant[k]] = (masks[row] >> k) & 1u ? 1 : -1;
        return x;
    }
};

inline std::vector<std::size_t> relevant_indices(std::span<const double> w) {
    std::vector<std::size_t> j;
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] != 0.0) j.push_back(i);
    return j;
}

// Rows run from all +1 down to all -1, in the order a truth table is usually printed.
inline SoftTruthTable enumerate_truth_table(std::span<const double> w, double delta_signed,
                                            std::size_t fan_in_cap = default_fan_in_cap, std::size_t node = 0) {
    for (double v : w)
        if (!std::isfinite(v)) throw domain_error("non-finite weight in node " + std::to_string(node));
    SoftTruthTable t;
    t.width = w.size();
    t.relevant = relevant_indices(w);
    const std::size_t k = t.relevant.size();
    if (k > fan_in_cap || k > 30)
        throw budget_exceeded("node " + std::to_string(node) + " has fan-in " + std::to_string(k) +
                                  ", above the enumeration cap " + std::to_string(fan_in_cap),
                              node);
    const std::size_t rows = std::size_t{1} << k;
    const std::uint32_t full = k == 32 ? ~0u : static_cast<std::uint32_t>(rows - 1);
    std::vector<double> rw(k);
    for (std::size_t i = 0; i < k; ++i) rw[i] = w[t.relevant[i]];
    const double beta = bias(rw, delta_signed);

    t.masks.resize(rows);
    t.activations.resize(rows);
    t.bivalent.resize(rows);
    constexpr std::size_t chunk = 4096;
    const std::size_t chunks = (rows + chunk - 1) / chunk;
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t end = std::min(rows, (c + 1) * chunk);
        for (std::size_t r = c * chunk; r < end; ++r) {
            // reverse the bit order so relevant[0] is the most significant column
            std::uint32_t neg = 0;
            for (std::size_t b = 0; b < k; ++b)
                if ((r >> (k - 1 - b)) & 1u) neg |= 1u << b;
            const std::uint32_t mask = ~neg & full;
            double acc = beta;
            for (std::size_t b = 0; b < k; ++b) acc += (mask >> b) & 1u ? rw[b] : -rw[b];
            t.masks[r] = mask;
            t.activations[r] = std::tanh(acc);
            t.bivalent[r] = t.activations[r] > 0.0;
        }
    });
    return t;
}

struct ExampleSets {
    std::vector<std::vector<int>> positives;
    std::vector<std::vector<int>> negatives;
};

inline ExampleSets split_examples(const SoftTruthTable& table) {
    ExampleSets s;
    for (std::size_t r = 0; r < table.size(); ++r)
        (table.bivalent[r] ? s.positives : s.negatives).push_back(table.input(r));
    return s;
}

struct CoverageViolation {
    enum class Kind {
        target_uncovered,   // an input the splits must fire on, and none does
        nontarget_covered,  // an input no split may fire on, and one does
        outside_relevant,   // a tensor has a nonzero entry at a zero-weight position
    };
    Kind kind;
    std::vector<int> input; // empty for outside_relevant
    std::size_t tensor = 0;
};

struct CoverageReport {
    static constexpr std::size_t max_retained = 100;

    std::size_t rows_checked = 0;
    std::size_t violation_count = 0;
    std::vector<CoverageViolation> violations; // first max_retained only

    bool ok() const noexcept { return violation_count == 0; }

    void add(CoverageViolation v) {
        ++violation_count;
        if (violations.size() < max_retained) violations.push_back(std::move(v));
    }
};

// For positive polarity the splits must fire on exactly the node's true rows;
// for negative polarity on exactly its false rows.
inline CoverageReport check_split_coverage(std::span<const double> w, double delta_signed,
                                           const SplitWeightSet& splits, Polarity polarity,
                                           std::size_t fan_in_cap = default_fan_in_cap) {
    const SoftTruthTable table = enumerate_truth_table(w, delta_signed, fan_in_cap, splits.source_node);
    CoverageReport report;
    const std::size_t k = table.fan_in();

    struct Literals {
        std::uint32_t pos = 0, neg = 0;
    };
    std::vector<Literals> lits(splits.size());
    for (std::size_t s = 0; s < splits.size(); ++s) {
        const auto& t = splits.tensors[s];
        if (t.size() != w.size()) throw shape_error("split tensor width differs from the node");
        std::vector<char> in_relevant(w.size(), 0);
        for (std::size_t b = 0; b < k; ++b) {
            in_relevant[table.relevant[b]] = 1;
            const int v = t[table.relevant[b]];
            if (v > 0) lits[s].pos |= 1u << b;
            if (v < 0) lits[s].neg |= 1u << b;
        }
        for (std::size_t i = 0; i < w.size(); ++i)
            if (t[i] != 0 && !in_relevant[i]) {
                report.add({CoverageViolation::Kind::outside_relevant, {}, s});
                break;
            }
    }

    for (std::size_t r = 0; r < table.size(); ++r) {
        ++report.rows_checked;
        const std::uint32_t x = table.masks[r];
        bool fires = false;
        std::size_t which = 0;
        for (std::size_t s = 0; s < lits.size() && !fires; ++s)
            if ((lits[s].pos & ~x) == 0 && (lits[s].neg & x) == 0) {
                fires = true;
                which = s;
            }
        const bool target = polarity == Polarity::positive ? table.bivalent[r] != 0 : table.bivalent[r] == 0;
        if (target && !fires) report.add({CoverageViolation::Kind::target_uncovered, table.input(r), 0});
        if (!target && fires) report.add({CoverageViolation::Kind::nontarget_covered, table.input(r), which});
    }
    return report;
}

} // namespace ndnf
