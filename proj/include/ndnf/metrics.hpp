#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ndnf/dataset.hpp"
#include "ndnf/error.hpp"

namespace ndnf {

struct F1Report {
    double macro = 0.0;
    std::vector<double> per_class;
};

struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0;

    // A class that is neither present nor predicted is matched perfectly.
    double f1() const {
        const std::size_t denom = 2 * tp + fp + fn;
        return denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    }
};

// Binary: mean F1 of the negative and positive classes. Multiclass: mean over
// classes. Multilabel: mean over labels of the positive-class F1.
// predictions is row-major with the same layout as Dataset::labels.
inline F1Report macro_f1(Task task, std::size_t label_width, std::size_t num_classes, std::span<const int> truth,
                         std::span<const int> predictions) {
    if (truth.empty()) throw domain_error("F1 on an empty dataset");
    if (truth.size() != predictions.size()) throw shape_error("prediction count differs from label count");
    const std::size_t rows = truth.size() / label_width;
    std::vector<Confusion> c;
    switch (task) {
    case Task::binary:
    case Task::multiclass: {
        c.resize(task == Task::binary ? 2 : num_classes);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto t = static_cast<std::size_t>(truth[r]);
            const auto p = static_cast<std::size_t>(predictions[r]);
            if (t == p) {
                ++c[t].tp;
            } else {
                ++c[p].fp;
                ++c[t].fn;
            }
        }
        break;
    }
    case Task::multilabel: {
        c.resize(label_width);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < label_width; ++k) {
                const bool t = truth[r * label_width + k] != 0;
                const bool p = predictions[r * label_width + k] != 0;
                c[k].tp += t && p;
                c[k].fp += !t && p;
                c[k].fn += t && !p;
            }
        break;
    }
    }
    F1Report rep;
    for (const auto& cc : c) rep.per_class.push_back(cc.f1());
    double sum = 0.0;
    for (double v : rep.per_class) sum += v;
    rep.macro = sum / static_cast<double>(rep.per_class.size());
    return rep;
}

inline F1Report macro_f1(const Dataset& d, std::span<const int> predictions) {
    return macro_f1(d.task, d.label_width, d.num_classes, d.labels, predictions);
}

struct MeanSte {
    double mean = 0.0;
    double ste = 0.0; // sample sd / sqrt(n); 0 for n < 2
};

inline MeanSte mean_ste(std::span<const double> v) {
    MeanSte r;
    if (v.empty()) return r;
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    if (v.size() < 2) return r;
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    r.ste = sd / std::sqrt(static_cast<double>(v.size()));
    return r;
}

} // namespace ndnf
