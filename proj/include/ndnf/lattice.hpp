#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ndnf/error.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

// A discretised weight row, every entry in {-6, 0, 6}.
using LatticeTensor = std::vector<int>;

inline constexpr int lattice_magnitude = 6;

// Sign of the downstream weight that connects a conjunctive node to a disjunctive one.
enum class Polarity { positive, negative };

inline const char* to_string(Polarity p) { return p == Polarity::positive ? "positive" : "negative"; }

struct SplitWeightSet {
    std::vector<LatticeTensor> tensors;
    std::size_t source_node = 0;
    Polarity polarity = Polarity::positive;

    std::size_t size() const noexcept { return tensors.size(); }
    bool empty() const noexcept { return tensors.empty(); }
};

inline bool is_lattice(std::span<const int> t) {
    for (int v : t)
        if (v != 0 && v != lattice_magnitude && v != -lattice_magnitude) return false;
    return true;
}

inline std::size_t support_size(std::span<const int> t) {
    std::size_t n = 0;
    for (int v : t) n += v != 0;
    return n;
}

// Raw conjunctive output of a lattice tensor with delta = 1, evaluated exactly in integers.
inline int lattice_raw(std::span<const int> t, std::span<const int> x) {
    int acc = 0, mx = 0, sum = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        acc += t[i] * x[i];
        const int a = t[i] < 0 ? -t[i] : t[i];
        mx = a > mx ? a : mx;
        sum += a;
    }
    return acc + mx - sum;
}

// Rule reading of a lattice tensor: every literal satisfied. An all-zero tensor is a
// fact and always fires, which differs from lattice_raw (raw 0) only in that case.
inline bool tensor_fires(std::span<const int> t, std::span<const int> x) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] != 0 && (t[i] > 0) != (x[i] > 0)) return false;
    return true;
}

inline LatticeTensor sign_tensor(std::span<const double> w) {
    LatticeTensor t(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) t[i] = lattice_magnitude * sign(w[i]);
    return t;
}

} // namespace ndnf
