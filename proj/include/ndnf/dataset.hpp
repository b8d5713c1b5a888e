#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ndnf/error.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

enum class Task { binary, multiclass, multilabel };
enum class SplitTag : char { train, val, test };

inline const char* to_string(Task t) {
    switch (t) {
    case Task::binary: return "binary";
    case Task::multiclass: return "multiclass";
    default: return "multilabel";
    }
}

inline Task parse_task(std::string_view s) {
    if (s == "binary") return Task::binary;
    if (s == "multiclass") return Task::multiclass;
    if (s == "multilabel") return Task::multilabel;
    throw parse_error("unknown task '" + std::string(s) + "'");
}

inline const char* to_string(SplitTag t) {
    switch (t) {
    case SplitTag::train: return "train";
    case SplitTag::val: return "val";
    default: return "test";
    }
}

inline SplitTag parse_split(std::string_view s) {
    if (s == "train") return SplitTag::train;
    if (s == "val") return SplitTag::val;
    if (s == "test") return SplitTag::test;
    throw parse_error("unknown split '" + std::string(s) + "'");
}

// Features are row-major. Bivalent columns hold values in [-1, 1]; real_columns
// are passed through unscaled for predicate invention. Labels: one 0/1 for
// binary, one class index for multiclass, label_width 0/1 bits for multilabel.
struct Dataset {
    std::string name;
    Task task = Task::binary;
    std::size_t num_features = 0;
    std::vector<double> features;
    std::vector<std::size_t> real_columns;
    std::vector<std::string> feature_names;
    std::size_t label_width = 1;
    std::size_t num_classes = 2;
    std::vector<int> labels;
    std::vector<std::string> label_names;
    std::vector<SplitTag> splits;

    std::size_t rows() const noexcept { return splits.size(); }
    std::span<const double> row(std::size_t r) const { return {features.data() + r * num_features, num_features}; }
    std::span<const int> label(std::size_t r) const { return {labels.data() + r * label_width, label_width}; }

    // Width of the model's output layer for this task.
    std::size_t outputs() const { return task == Task::multiclass ? num_classes : label_width; }

    void push_row(std::span<const double> x, std::span<const int> y, SplitTag tag) {
        features.insert(features.end(), x.begin(), x.end());
        labels.insert(labels.end(), y.begin(), y.end());
        splits.push_back(tag);
    }

    Dataset select(SplitTag tag) const {
        Dataset d = *this;
        d.features.clear();
        d.labels.clear();
        d.splits.clear();
        for (std::size_t r = 0; r < rows(); ++r)
            if (splits[r] == tag) d.push_row(row(r), label(r), tag);
        return d;
    }
};

inline void validate(const Dataset& d) {
    if (d.features.size() != d.rows() * d.num_features) throw shape_error("dataset feature storage is ragged");
    if (d.labels.size() != d.rows() * d.label_width) throw shape_error("dataset label storage is ragged");
    if ((d.task == Task::binary || d.task == Task::multiclass) && d.label_width != 1)
        throw shape_error("binary and multiclass datasets carry one label per row");
    for (int y : d.labels) {
        const int hi = d.task == Task::multiclass ? static_cast<int>(d.num_classes) : 2;
        if (y < 0 || y >= hi) throw domain_error("label value out of range for the task");
    }
}

// ---------------------------------------------------------------------------
// CSV ingestion

enum class ColumnKind { categorical, real, bivalent, label, split, ignore };

inline ColumnKind parse_column_kind(std::string_view s) {
    if (s == "categorical") return ColumnKind::categorical;
    if (s == "real") return ColumnKind::real;
    if (s == "bivalent") return ColumnKind::bivalent;
    if (s == "label") return ColumnKind::label;
    if (s == "split") return ColumnKind::split;
    if (s == "ignore") return ColumnKind::ignore;
    throw parse_error("unknown column kind '" + std::string(s) + "'");
}

struct CsvSchema {
    Task task = Task::binary;
    std::vector<std::pair<std::string, ColumnKind>> columns; // by header name
    bool predicate_invention = true;                           // false: real columns min-max scaled to [-1, 1]
};

// Vocabularies and scaling fitted on one file so another can be encoded the same way.
struct CsvEncoding {
    std::map<std::string, std::vector<std::string>> categories;
    std::map<std::string, std::vector<std::string>> label_values;
    std::map<std::string, std::pair<double, double>> real_range;
};

struct LoadedCsv {
    Dataset data;
    CsvEncoding encoding;
    std::vector<std::string> warnings;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    for (auto& s : cells) {
        auto b = s.find_first_not_of(" \t");
        auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    }
    return cells;
}

namespace detail {

inline std::vector<std::string> sorted_levels(std::vector<std::string> v) {
    std::sort(v.begin(), v.end(), [](const std::string& a, const std::string& b) { return natural_less(a, b); });
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline int binary_label(const std::string& s, const std::vector<std::string>& levels) {
    if (s == "1" || s == "true" || s == "True") return 1;
    if (s == "0" || s == "-1" || s == "false" || s == "False") return 0;
    auto it = std::find(levels.begin(), levels.end(), s);
    if (it == levels.end()) throw parse_error("unknown label value '" + s + "'");
    return static_cast<int>(it - levels.begin());
}

} // namespace detail

inline LoadedCsv load_csv(const std::string& path, const CsvSchema& schema,
                          std::optional<CsvEncoding> fitted = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw parse_error("'" + path + "' is empty; a header row is required");
    const auto header = split_csv_line(line);

    std::vector<std::vector<std::string>> cells;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto row = split_csv_line(line);
        if (row.size() != header.size())
            throw parse_error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                              " cells, got " + std::to_string(row.size()));
        cells.push_back(std::move(row));
    }

    auto column_of = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw parse_error("column '" + name + "' missing from '" + path + "'");
        return static_cast<std::size_t>(it - header.begin());
    };

    LoadedCsv out;
    CsvEncoding enc = fitted.value_or(CsvEncoding{});
    const bool fit = !fitted.has_value();
    Dataset& d = out.data;
    d.task = schema.task;
    d.name = path;

    struct Plan {
        std::size_t col;
        std::string name;
        ColumnKind kind;
    };
    std::vector<Plan> plan;
    for (const auto& [name, kind] : schema.columns) plan.push_back({column_of(name), name, kind});

    // fit vocabularies and ranges
    for (const auto& p : plan) {
        if (!fit) break;
        std::vector<std::string> values;
        for (const auto& r : cells) values.push_back(r[p.col]);
        if (p.kind == ColumnKind::categorical) enc.categories[p.name] = detail::sorted_levels(values);
        if (p.kind == ColumnKind::label) {
            std::vector<std::string> nonempty;
            for (auto& v : values)
                if (!v.empty()) nonempty.push_back(v);
            enc.label_values[p.name] = detail::sorted_levels(nonempty);
        }
        if (p.kind == ColumnKind::real) {
            double lo = INFINITY, hi = -INFINITY;
            for (auto& v : values) {
                double x = parse_double(v);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            enc.real_range[p.name] = {lo, hi};
        }
    }

    std::size_t label_cols = 0;
    for (const auto& p : plan) {
        switch (p.kind) {
        case ColumnKind::categorical:
            for (const auto& level : enc.categories[p.name]) d.feature_names.push_back(p.name + "=" + level);
            break;
        case ColumnKind::real:
            if (schema.predicate_invention) d.real_columns.push_back(d.feature_names.size());
            d.feature_names.push_back(p.name);
            break;
        case ColumnKind::bivalent: d.feature_names.push_back(p.name); break;
        case ColumnKind::label:
            ++label_cols;
            d.label_names.push_back(p.name);
            break;
        default: break;
        }
    }
    d.num_features = d.feature_names.size();
    if (label_cols == 0) throw parse_error("schema declares no label column");
    if (d.task != Task::multilabel && label_cols != 1)
        throw parse_error("binary and multiclass tasks take exactly one label column");
    d.label_width = d.task == Task::multilabel ? label_cols : 1;
    if (d.task == Task::multiclass) {
        const auto& levels = enc.label_values[d.label_names.front()];
        d.num_classes = levels.size();
        d.label_names = levels;
    }

    std::size_t lineno2 = 1;
    for (const auto& r : cells) {
        ++lineno2;
        std::vector<double> x;
        std::vector<int> y;
        SplitTag tag = SplitTag::train;
        for (const auto& p : plan) {
            const std::string& v = r[p.col];
            switch (p.kind) {
            case ColumnKind::categorical: {
                const auto& levels = enc.categories[p.name];
                auto it = std::find(levels.begin(), levels.end(), v);
                if (it == levels.end())
                    out.warnings.push_back("line " + std::to_string(lineno2) + ": unknown category '" + v +
                                           "' in column '" + p.name + "'; encoded as all -1");
                for (const auto& level : levels) x.push_back(level == v ? 1.0 : -1.0);
                break;
            }
            case ColumnKind::real: {
                double value = parse_double(v);
                if (!schema.predicate_invention) {
                    auto [lo, hi] = enc.real_range[p.name];
                    value = hi > lo ? std::clamp(2.0 * (value - lo) / (hi - lo) - 1.0, -1.0, 1.0) : 0.0;
                }
                x.push_back(value);
                break;
            }
            case ColumnKind::bivalent: {
                double value = parse_double(v);
                if (std::abs(value) > 1.0) throw domain_error("bivalent column '" + p.name + "' outside [-1, 1]");
                x.push_back(value);
                break;
            }
            case ColumnKind::label: {
                if (v.empty()) throw parse_error("line " + std::to_string(lineno2) + ": missing label");
                const auto& levels = enc.label_values[p.name];
                if (d.task == Task::multiclass) {
                    auto it = std::find(levels.begin(), levels.end(), v);
                    if (it == levels.end()) throw parse_error("unknown class '" + v + "'");
                    y.push_back(static_cast<int>(it - levels.begin()));
                } else {
                    y.push_back(detail::binary_label(v, levels));
                }
                break;
            }
            case ColumnKind::split: tag = parse_split(v); break;
            case ColumnKind::ignore: break;
            }
        }
        d.push_row(x, y, tag);
    }
    out.encoding = std::move(enc);
    validate(d);
    return out;
}

// Writes features, labels and split tags; readable back with a schema that marks
// features bivalent/real and labels as label columns.
inline void write_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot write '" + path + "'");
    std::vector<std::string> label_header;
    if (d.task == Task::multilabel)
        label_header = d.label_names;
    else
        label_header = {"label"};
    for (std::size_t c = 0; c < d.num_features; ++c) out << d.feature_names[c] << ',';
    for (const auto& l : label_header) out << l << ',';
    out << "split\n";
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (double v : d.row(r)) out << format_double(v) << ',';
        for (int y : d.label(r)) {
            if (d.task == Task::multiclass)
                out << d.label_names[static_cast<std::size_t>(y)] << ',';
            else
                out << y << ',';
        }
        out << to_string(d.splits[r]) << '\n';
    }
}

// Schema that reads back a file produced by write_csv.
inline CsvSchema schema_for(const Dataset& d) {
    CsvSchema s;
    s.task = d.task;
    for (std::size_t c = 0; c < d.num_features; ++c) {
        bool real = std::find(d.real_columns.begin(), d.real_columns.end(), c) != d.real_columns.end();
        s.columns.emplace_back(d.feature_names[c], real ? ColumnKind::real : ColumnKind::bivalent);
    }
    if (d.task == Task::multilabel)
        for (const auto& l : d.label_names) s.columns.emplace_back(l, ColumnKind::label);
    else
        s.columns.emplace_back("label", ColumnKind::label);
    s.columns.emplace_back("split", ColumnKind::split);
    return s;
}

// ---------------------------------------------------------------------------
// Boolean networks: next state of each gene is a DNF over the current states.

struct GeneLiteral {
    std::size_t gene = 0;
    bool positive = true;
    bool operator==(const GeneLiteral&) const = default;
};
using GeneTerm = std::vector<GeneLiteral>;

struct BooleanNetworkSpec {
    std::size_t genes = 0;
    std::vector<std::vector<GeneTerm>> next; // empty DNF is constant false; an empty term is true

    bool operator==(const BooleanNetworkSpec&) const = default;
};

inline bool next_state(const BooleanNetworkSpec& spec, std::size_t gene, std::span<const int> state) {
    for (const auto& term : spec.next.at(gene)) {
        bool sat = true;
        for (const auto& lit : term)
            if ((state[lit.gene] > 0) != lit.positive) {
                sat = false;
                break;
            }
        if (sat) return true;
    }
    return false;
}

// Full enumeration when samples is empty (genes <= 24), otherwise seeded sampling with replacement.
inline Dataset generate_boolean_network(const BooleanNetworkSpec& spec, std::uint64_t seed,
                                        std::optional<std::size_t> samples = std::nullopt) {
    if (spec.next.size() != spec.genes) throw shape_error("boolean network needs one DNF per gene");
    for (const auto& dnf : spec.next)
        for (const auto& t : dnf)
            for (const auto& l : t)
                if (l.gene >= spec.genes) throw shape_error("literal refers to a gene outside the network");
    Dataset d;
    d.name = "boolean_network";
    d.task = Task::multilabel;
    d.num_features = spec.genes;
    d.label_width = spec.genes;
    for (std::size_t g = 0; g < spec.genes; ++g) {
        d.feature_names.push_back("a_" + std::to_string(g));
        d.label_names.push_back("l_" + std::to_string(g));
    }
    auto emit = [&](std::uint64_t s) {
        std::vector<int> state(spec.genes);
        std::vector<double> x(spec.genes);
        for (std::size_t g = 0; g < spec.genes; ++g) {
            state[g] = (s >> g) & 1u ? 1 : -1;
            x[g] = state[g];
        }
        std::vector<int> y(spec.genes);
        for (std::size_t g = 0; g < spec.genes; ++g) y[g] = next_state(spec, g, state);
        d.push_row(x, y, SplitTag::train);
    };
    if (!samples) {
        if (spec.genes > 24) throw budget_exceeded("too many genes to enumerate every state", 0);
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << spec.genes); ++s) emit(s);
    } else {
        rng gen(seed);
        for (std::size_t i = 0; i < *samples; ++i) {
            std::uint64_t s = 0;
            for (std::size_t g = 0; g < spec.genes; ++g)
                if (gen.uniform() < 0.5) s |= std::uint64_t{1} << g;
            emit(s);
        }
    }
    return d;
}

// Random network: each gene gets 1..max_terms terms of 1..max_literals distinct literals.
inline BooleanNetworkSpec random_boolean_network(std::size_t genes, std::uint64_t seed, std::size_t max_terms = 3,
                                                 std::size_t max_literals = 3) {
    rng gen(seed);
    BooleanNetworkSpec spec;
    spec.genes = genes;
    spec.next.resize(genes);
    for (std::size_t g = 0; g < genes; ++g) {
        const std::size_t terms = 1 + gen.below(max_terms);
        for (std::size_t t = 0; t < terms; ++t) {
            std::vector<std::size_t> pool(genes);
            for (std::size_t i = 0; i < genes; ++i) pool[i] = i;
            gen.shuffle(pool);
            const std::size_t lits = 1 + gen.below(std::min(max_literals, genes));
            GeneTerm term;
            for (std::size_t i = 0; i < lits; ++i) term.push_back({pool[i], gen.uniform() < 0.5});
            std::sort(term.begin(), term.end(), [](auto& a, auto& b) { return a.gene < b.gene; });
            spec.next[g].push_back(term);
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------
// MONK's problem 1: six attributes, target (a1 == a2) or (a5 == 1).

inline constexpr std::size_t monk_levels[6] = {3, 3, 2, 3, 4, 2};

inline std::vector<double> monk_one_hot(const std::size_t (&a)[6]) {
    std::vector<double> x;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t v = 1; v <= monk_levels[i]; ++v) x.push_back(a[i] == v ? 1.0 : -1.0);
    return x;
}

inline Dataset monk_frame() {
    Dataset d;
    d.name = "monk1";
    d.task = Task::binary;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t v = 1; v <= monk_levels[i]; ++v)
            d.feature_names.push_back("a" + std::to_string(i + 1) + "=" + std::to_string(v));
    d.num_features = d.feature_names.size();
    d.label_names = {"class"};
    return d;
}

// The test split is the full 432-instance space; the train split is a seeded
// sample of train_size distinct instances.
inline Dataset generate_monk1(std::uint64_t seed, std::size_t train_size = 124) {
    std::vector<std::array<std::size_t, 6>> space;
    for (std::size_t a1 = 1; a1 <= 3; ++a1)
        for (std::size_t a2 = 1; a2 <= 3; ++a2)
            for (std::size_t a3 = 1; a3 <= 2; ++a3)
                for (std::size_t a4 = 1; a4 <= 3; ++a4)
                    for (std::size_t a5 = 1; a5 <= 4; ++a5)
                        for (std::size_t a6 = 1; a6 <= 2; ++a6) space.push_back({a1, a2, a3, a4, a5, a6});
    Dataset d = monk_frame();
    auto add = [&](const std::array<std::size_t, 6>& inst, SplitTag tag) {
        std::size_t a[6];
        std::copy(inst.begin(), inst.end(), a);
        const int y = (a[0] == a[1]) || (a[4] == 1);
        d.push_row(monk_one_hot(a), std::vector<int>{y}, tag);
    };
    std::vector<std::size_t> order(space.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng gen(seed);
    gen.shuffle(order);
    order.resize(std::min(train_size, order.size()));
    std::sort(order.begin(), order.end());
    for (auto i : order) add(space[i], SplitTag::train);
    for (const auto& inst : space) add(inst, SplitTag::test);
    return d;
}

// UCI MONK's file layout: "class a1 a2 a3 a4 a5 a6 id" per line.
inline void append_monk_file(Dataset& d, const std::string& path, SplitTag tag) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        int y;
        std::size_t a[6];
        if (!(ss >> y)) continue;
        for (auto& v : a)
            if (!(ss >> v)) throw parse_error("malformed MONK's line in '" + path + "'");
        for (std::size_t i = 0; i < 6; ++i)
            if (a[i] < 1 || a[i] > monk_levels[i]) throw parse_error("MONK's attribute out of range in '" + path + "'");
        d.push_row(monk_one_hot(a), std::vector<int>{y ? 1 : 0}, tag);
    }
}

inline Dataset load_monk(const std::string& train_path, const std::string& test_path) {
    Dataset d = monk_frame();
    append_monk_file(d, train_path, SplitTag::train);
    append_monk_file(d, test_path, SplitTag::test);
    validate(d);
    return d;
}

// ---------------------------------------------------------------------------
// Small real-valued binary task for threshold predicates:
// y = (x0 > 6 and x1 < 0) or x2 > 0.8, first 80% of rows train, rest test.

inline Dataset generate_threshold_task(std::uint64_t seed, std::size_t rows = 400) {
    Dataset d;
    d.name = "threshold_task";
    d.task = Task::binary;
    d.num_features = 3;
    d.real_columns = {0, 1, 2};
    d.feature_names = {"feature_0", "feature_1", "feature_2"};
    d.label_names = {"class"};
    rng gen(seed);
    const std::size_t train = rows * 4 / 5;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::vector<double> x{gen.uniform(0.0, 10.0), gen.uniform(-5.0, 5.0), gen.uniform(0.0, 1.0)};
        const int y = (x[0] > 6.0 && x[1] < 0.0) || x[2] > 0.8;
        d.push_row(x, std::vector<int>{y}, r < train ? SplitTag::train : SplitTag::test);
    }
    return d;
}

} // namespace ndnf
