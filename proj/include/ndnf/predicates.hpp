#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ndnf/error.hpp"
#include "ndnf/util.hpp"

namespace ndnf {

inline constexpr double min_temperature = 0.1;
inline constexpr double max_temperature = 1.0;

// Learned inequality predicates p = tanh((x_i - t_ij) / T) over real-valued columns.
struct ThresholdPredicateBank {
    std::vector<std::size_t> features; // raw column index of each real feature
    std::size_t per_feature = 4;
    std::vector<double> thresholds;    // feature-major, features.size() * per_feature
    double temperature = max_temperature;

    std::size_t width() const noexcept { return features.size() * per_feature; }
    double threshold(std::size_t i, std::size_t j) const { return thresholds[i * per_feature + j]; }

    bool operator==(const ThresholdPredicateBank&) const = default;
};

// Linear decay from start to end over decay_epochs, then held at end.
struct TemperatureSchedule {
    double start = max_temperature;
    double end = min_temperature;
    std::size_t decay_epochs = 100;

    bool operator==(const TemperatureSchedule&) const = default;
};

inline double step_temperature(const TemperatureSchedule& s, std::size_t epoch) {
    double frac = s.decay_epochs == 0 ? 1.0
                                      : std::min(1.0, static_cast<double>(epoch) / static_cast<double>(s.decay_epochs));
    double t = s.start + (s.end - s.start) * frac;
    return std::clamp(t, min_temperature, max_temperature);
}

inline void check_temperature(const ThresholdPredicateBank& bank) {
    if (!(bank.temperature >= min_temperature && bank.temperature <= max_temperature))
        throw domain_error("predicate temperature " + format_double(bank.temperature) + " outside [0.1, 1]");
}

// x_raw is a full dataset row; only the bank's columns are read.
inline std::vector<double> invent(const ThresholdPredicateBank& bank, std::span<const double> x_raw) {
    check_temperature(bank);
    std::vector<double> p(bank.width());
    for (std::size_t i = 0; i < bank.features.size(); ++i) {
        const double x = x_raw[bank.features[i]];
        for (std::size_t j = 0; j < bank.per_feature; ++j)
            p[i * bank.per_feature + j] = std::tanh((x - bank.threshold(i, j)) / bank.temperature);
    }
    return p;
}

// Bivalent reading x > t, independent of the temperature.
inline std::vector<char> invent_bivalent(const ThresholdPredicateBank& bank, std::span<const double> x_raw) {
    std::vector<char> p(bank.width());
    for (std::size_t i = 0; i < bank.features.size(); ++i) {
        const double x = x_raw[bank.features[i]];
        for (std::size_t j = 0; j < bank.per_feature; ++j) p[i * bank.per_feature + j] = x > bank.threshold(i, j);
    }
    return p;
}

// dp/dt = -(1 - p^2) / T, accumulated into grad_t given dL/dp.
inline void accumulate_threshold_grad(const ThresholdPredicateBank& bank, std::span<const double> p,
                                      std::span<const double> grad_p, std::span<double> grad_t) {
    for (std::size_t k = 0; k < bank.width(); ++k)
        grad_t[k] += grad_p[k] * (-(1.0 - p[k] * p[k]) / bank.temperature);
}

// Thresholds at evenly spaced quantiles (k+1)/(m+1) of each column.
inline void init_thresholds_from_quantiles(ThresholdPredicateBank& bank, std::span<const double> features,
                                           std::size_t row_width) {
    const std::size_t rows = row_width == 0 ? 0 : features.size() / row_width;
    bank.thresholds.assign(bank.width(), 0.0);
    for (std::size_t i = 0; i < bank.features.size(); ++i) {
        std::vector<double> col(rows);
        for (std::size_t r = 0; r < rows; ++r) col[r] = features[r * row_width + bank.features[i]];
        std::sort(col.begin(), col.end());
        for (std::size_t j = 0; j < bank.per_feature; ++j) {
            if (col.empty()) continue;
            const double q = static_cast<double>(j + 1) / static_cast<double>(bank.per_feature + 1);
            const double pos = q * static_cast<double>(col.size() - 1);
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            const auto hi = std::min(col.size() - 1, lo + 1);
            bank.thresholds[i * bank.per_feature + j] = col[lo] + (col[hi] - col[lo]) * (pos - static_cast<double>(lo));
        }
    }
}

// One line of a rule file's predicate header: "a_3 = feature_0 > 186.82131958007812".
struct PredicateDef {
    std::size_t atom = 0;
    std::size_t feature = 0;
    double threshold = 0.0;

    bool operator==(const PredicateDef&) const = default;
};

inline PredicateDef interpret(const ThresholdPredicateBank& bank, std::size_t i, std::size_t j,
                              std::size_t atom_offset = 0) {
    return {atom_offset + i * bank.per_feature + j, bank.features.at(i), bank.threshold(i, j)};
}

inline std::string render(const PredicateDef& d) {
    return "a_" + std::to_string(d.atom) + " = feature_" + std::to_string(d.feature) + " > " +
           format_double(d.threshold);
}

inline PredicateDef parse_predicate(std::string_view line) {
    auto fail = [&] { return parse_error("malformed predicate line: '" + std::string(line) + "'"); };
    auto take_index = [&](std::string_view& s, std::string_view prefix) {
        if (s.substr(0, prefix.size()) != prefix) throw fail();
        s.remove_prefix(prefix.size());
        std::size_t n = 0, used = 0;
        while (used < s.size() && std::isdigit(static_cast<unsigned char>(s[used]))) n = n * 10 + (s[used++] - '0');
        if (used == 0) throw fail();
        s.remove_prefix(used);
        return n;
    };
    auto skip = [&](std::string_view& s, std::string_view token) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        if (s.substr(0, token.size()) != token) throw fail();
        s.remove_prefix(token.size());
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    };
    std::string_view s = line;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    PredicateDef d;
    d.atom = take_index(s, "a_");
    skip(s, "=");
    d.feature = take_index(s, "feature_");
    skip(s, ">");
    d.threshold = parse_double(s);
    return d;
}

} // namespace ndnf
