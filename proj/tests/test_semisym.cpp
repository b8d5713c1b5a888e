#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ndnf/semisym.hpp"
#include "ndnf/util.hpp"

using namespace ndnf;

namespace {

const std::vector<double> example1{-6, -2, -2, 2, -6};

SemiSymbolicLayer single(std::vector<double> w, NodeKind kind = NodeKind::conjunctive, double delta = 1.0) {
    SemiSymbolicLayer l(kind, 1, w.size(), delta);
    l.weights = std::move(w);
    return l;
}

} // namespace

TEST(Forward, Example1Rows) {
    const auto l = single(example1);
    auto a = forward(l, std::vector<double>{-1, 1, -1, 1, -1});
    EXPECT_DOUBLE_EQ(a[0].raw, 2.0);
    EXPECT_NEAR(a[0].out, 0.964, 5e-4);
    EXPECT_TRUE(a[0].bivalent);

    a = forward(l, std::vector<double>{1, 1, 1, 1, 1});
    EXPECT_NEAR(a[0].out, -1.0, 5e-4);
    EXPECT_FALSE(a[0].bivalent);

    a = forward(l, std::vector<double>{-1, -1, -1, 1, -1});
    EXPECT_DOUBLE_EQ(a[0].raw, 6.0);
    EXPECT_NEAR(a[0].out, 1.0, 5e-4);
}

TEST(Forward, AllZeroRowIsFalse) {
    const auto a = forward(single({0, 0, 0}), std::vector<double>{1, -1, 1});
    EXPECT_EQ(a[0].raw, 0.0);
    EXPECT_EQ(a[0].out, 0.0);
    EXPECT_FALSE(a[0].bivalent);
}

TEST(Forward, RejectsBadInput) {
    const auto l = single(example1);
    EXPECT_THROW(forward(l, std::vector<double>{1, 1}), shape_error);
    EXPECT_THROW(forward(l, std::vector<double>{1, 1, NAN, 1, 1}), domain_error);
}

TEST(Bias, Values) {
    EXPECT_DOUBLE_EQ(bias(example1, 1.0), -12.0);
    EXPECT_DOUBLE_EQ(bias(std::vector<double>{6}, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(bias(std::vector<double>{4, -4}, 1.0), -4.0);
    EXPECT_DOUBLE_EQ(bias(std::vector<double>{}, 1.0), 0.0);
}

TEST(Forward, OutputsStrictlyInsideUnitInterval) {
    rng gen(1);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> w(6), x(6);
        for (auto& v : w) v = gen.uniform(-6, 6);
        for (auto& v : x) v = gen.uniform(-1, 1);
        const auto a = forward(single(w), x);
        // tanh rounds to exactly 1 in double precision once |raw| passes about 19
        EXPECT_LE(std::abs(a[0].out), 1.0);
        if (std::abs(a[0].raw) < 18.0) {
            EXPECT_LT(std::abs(a[0].out), 1.0);
        }
    }
}

// Remark 1: for bivalent x and delta = 1, raw = max|w| - 2 * sum of |w_j| over mismatches.
TEST(Forward, MismatchIdentity) {
    rng gen(2);
    for (int t = 0; t < 300; ++t) {
        std::vector<double> w(7), x(7);
        for (auto& v : w) v = gen.uniform() < 0.2 ? 0.0 : gen.uniform(-6, 6);
        for (auto& v : x) v = gen.uniform() < 0.5 ? 1.0 : -1.0;
        double mx = 0, mism = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            mx = std::max(mx, std::abs(w[i]));
            if (w[i] != 0 && sign(w[i]) != x[i]) mism += std::abs(w[i]);
        }
        EXPECT_NEAR(raw_output(w, 1.0, x), mx - 2 * mism, 1e-9);
    }
}

TEST(Forward, SaturationAndMismatchCost) {
    const std::vector<double> w{3, -5, 1.5};
    std::vector<double> x{1, -1, 1};
    EXPECT_DOUBLE_EQ(raw_output(w, 1.0, x), 5.0);
    x[2] = -1;
    EXPECT_DOUBLE_EQ(raw_output(w, 1.0, x), 5.0 - 2 * 1.5);
}

TEST(Backward, LinearTermAndZeroRow) {
    auto g = backward_raw(single({4, -4}), std::vector<double>{1, 1}, std::vector<double>{1.0});
    EXPECT_DOUBLE_EQ(g.x[0], 4.0);
    EXPECT_DOUBLE_EQ(g.x[1], -4.0);
    g = backward_raw(single({0, 0, 0}), std::vector<double>{1, -1, 1}, std::vector<double>{1.0});
    for (double v : g.weights) EXPECT_TRUE(std::isfinite(v));
    EXPECT_DOUBLE_EQ(g.weights[1], -1.0);
}

// Central differences of out = tanh(raw) with h = 1e-4.
TEST(Backward, MatchesFiniteDifferences) {
    rng gen(3);
    int checked = 0;
    while (checked < 100) {
        std::vector<double> w(8), x(8);
        for (auto& v : w) v = gen.uniform(-6, 6);
        for (auto& v : x) v = gen.uniform(-1, 1);
        // stay away from ties in max|w| and from sign changes
        std::vector<double> a(8);
        for (int i = 0; i < 8; ++i) a[i] = std::abs(w[i]);
        std::sort(a.begin(), a.end());
        if (a[7] - a[6] < 1e-2 || a[0] < 1e-2) continue;
        const double delta = gen.uniform(0.1, 1.0);
        const NodeKind kind = checked % 2 ? NodeKind::conjunctive : NodeKind::disjunctive;
        auto l = single(w, kind, delta);
        const auto g = backward(l, x, std::vector<double>{1.0});
        const double h = 1e-4;
        for (int i = 0; i < 8; ++i) {
            auto lp = l, lm = l;
            lp.weights[i] += h;
            lm.weights[i] -= h;
            const double fd = (forward(lp, x)[0].out - forward(lm, x)[0].out) / (2 * h);
            EXPECT_NEAR(g.weights[i], fd, 1e-5 * std::max(1.0, std::abs(fd)));
            auto xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fdx = (std::tanh(raw_output(w, l.signed_delta(), xp)) -
                                std::tanh(raw_output(w, l.signed_delta(), xm))) / (2 * h);
            EXPECT_NEAR(g.x[i], fdx, 1e-5 * std::max(1.0, std::abs(fdx)));
        }
        ++checked;
    }
}

TEST(MutexTanh, Values) {
    auto r = mutex_tanh_head(std::vector<double>{0, 0, 0});
    for (double p : r.probs) EXPECT_NEAR(p, 1.0 / 3, 1e-15);
    r = mutex_tanh_head(std::vector<double>{1, 2});
    EXPECT_NEAR(r.probs[0], 0.2689, 5e-5);
    EXPECT_NEAR(r.probs[1], 0.7311, 5e-5);
    EXPECT_NEAR(r.out[1], 2 * r.probs[1] - 1, 1e-15);
    const auto s = mutex_tanh_head(std::vector<double>{101, 102});
    EXPECT_NEAR(s.probs[0], r.probs[0], 1e-12);
    EXPECT_THROW(mutex_tanh_head(std::vector<double>{1}), shape_error);
}

TEST(MutexTanh, SimplexAndOverflow) {
    rng gen(4);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> raw(4);
        for (auto& v : raw) v = gen.uniform(-800, 800);
        const auto r = mutex_tanh_head(raw);
        double sum = 0;
        for (double p : r.probs) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    const auto r = mutex_tanh_head(std::vector<double>{0.5, -0.3, 1.2});
    for (double p : r.probs) {
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
    }
}

TEST(DeltaSchedule, Steps) {
    DeltaSchedule s;
    EXPECT_DOUBLE_EQ(step_delta(s, 0), 0.1);
    EXPECT_NEAR(step_delta(s, 35), 0.4, 1e-12);
    EXPECT_DOUBLE_EQ(step_delta(s, 1000), 1.0);
    double prev = 0;
    for (std::size_t e = 0; e < 200; ++e) {
        const double d = step_delta(s, e);
        EXPECT_GE(d, prev);
        EXPECT_LE(d, 1.0);
        prev = d;
    }
}
