#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ndnf/predicates.hpp"

using namespace ndnf;

namespace {

ThresholdPredicateBank bank_of(std::vector<double> thresholds, double temperature = 1.0) {
    ThresholdPredicateBank b;
    b.features = {0};
    b.per_feature = thresholds.size();
    b.thresholds = std::move(thresholds);
    b.temperature = temperature;
    return b;
}

} // namespace

TEST(Invent, Values) {
    const auto b = bank_of({3.0});
    EXPECT_NEAR(invent(b, std::vector<double>{5.0})[0], 0.964, 5e-4);
    EXPECT_DOUBLE_EQ(invent(b, std::vector<double>{3.0})[0], 0.0);
    EXPECT_NEAR(invent(b, std::vector<double>{1.0})[0], -0.964, 5e-4);
    const auto cold = bank_of({3.0}, 0.1);
    EXPECT_GT(invent(cold, std::vector<double>{4.0})[0], 1.0 - 1e-8);
}

TEST(Invent, ReadsOnlyBankColumns) {
    ThresholdPredicateBank b;
    b.features = {2, 0};
    b.per_feature = 2;
    b.thresholds = {0.0, 1.0, 10.0, 20.0};
    const auto p = invent(b, std::vector<double>{15.0, 99.0, 0.5});
    ASSERT_EQ(p.size(), 4u);
    EXPECT_NEAR(p[0], std::tanh(0.5), 1e-12);
    EXPECT_NEAR(p[1], std::tanh(-0.5), 1e-12);
    EXPECT_NEAR(p[2], std::tanh(5.0), 1e-12);
    EXPECT_NEAR(p[3], std::tanh(-5.0), 1e-12);
}

TEST(Invent, TemperatureOutOfRangeThrows) {
    EXPECT_THROW(invent(bank_of({0.0}, 0.05), std::vector<double>{1.0}), domain_error);
    EXPECT_THROW(invent(bank_of({0.0}, 1.5), std::vector<double>{1.0}), domain_error);
}

TEST(Invent, BivalentReadingIgnoresTemperature) {
    for (double x : {-3.0, -0.01, 0.0, 0.01, 2.0}) {
        for (double T : {1.0, 0.55, 0.1}) {
            const auto b = bank_of({0.0}, T);
            const bool soft = invent(b, std::vector<double>{x})[0] > 0.0;
            EXPECT_EQ(invent_bivalent(b, std::vector<double>{x})[0] != 0, soft) << x << " " << T;
            EXPECT_EQ(soft, x > 0.0);
        }
    }
}

TEST(Temperature, Schedule) {
    const TemperatureSchedule s{1.0, 0.1, 100};
    EXPECT_DOUBLE_EQ(step_temperature(s, 0), 1.0);
    EXPECT_NEAR(step_temperature(s, 50), 0.55, 1e-12);
    EXPECT_NEAR(step_temperature(s, 100), 0.1, 1e-12);
    EXPECT_NEAR(step_temperature(s, 500), 0.1, 1e-12);
    double prev = 2.0;
    for (std::size_t e = 0; e < 150; ++e) {
        const double t = step_temperature(s, e);
        EXPECT_LE(t, prev);
        EXPECT_GE(t, min_temperature);
        prev = t;
    }
    EXPECT_NEAR(step_temperature({2.0, 0.01, 10}, 0), 1.0, 1e-12);
    EXPECT_NEAR(step_temperature({2.0, 0.01, 10}, 10), 0.1, 1e-12);
}

TEST(Threshold, GradientMatchesFiniteDifference) {
    // loss = sum_k c_k p_k with arbitrary coefficients
    ThresholdPredicateBank b;
    b.features = {0, 1};
    b.per_feature = 2;
    b.thresholds = {0.3, -0.7, 1.2, 0.1};
    b.temperature = 0.55;
    const std::vector<double> x{0.5, 0.9};
    const std::vector<double> c{1.0, -2.0, 0.5, 3.0};
    auto loss = [&](const ThresholdPredicateBank& bb) {
        const auto p = invent(bb, x);
        double s = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) s += c[k] * p[k];
        return s;
    };
    std::vector<double> g(4, 0.0);
    accumulate_threshold_grad(b, invent(b, x), c, g);
    const double h = 1e-6;
    for (std::size_t k = 0; k < 4; ++k) {
        auto up = b, dn = b;
        up.thresholds[k] += h;
        dn.thresholds[k] -= h;
        EXPECT_NEAR(g[k], (loss(up) - loss(dn)) / (2 * h), 1e-6);
    }
}

TEST(Quantiles, EvenlySpaced) {
    ThresholdPredicateBank b;
    b.features = {1};
    b.per_feature = 3;
    // column 1 holds 0..4, column 0 is noise
    const std::vector<double> rows{9, 0, 9, 1, 9, 2, 9, 3, 9, 4};
    init_thresholds_from_quantiles(b, rows, 2);
    ASSERT_EQ(b.thresholds.size(), 3u);
    EXPECT_DOUBLE_EQ(b.thresholds[0], 1.0);
    EXPECT_DOUBLE_EQ(b.thresholds[1], 2.0);
    EXPECT_DOUBLE_EQ(b.thresholds[2], 3.0);
}

TEST(Interpret, RenderAndParse) {
    ThresholdPredicateBank b;
    b.features = {0};
    b.per_feature = 4;
    b.thresholds = {1.0, 2.0, 3.0, 186.82131958007812};
    const auto d = interpret(b, 0, 3);
    EXPECT_EQ(render(d), "a_3 = feature_0 > 186.82131958007812");
    EXPECT_EQ(parse_predicate("a_3 = feature_0 > 186.82131958007812"), d);
    EXPECT_EQ(parse_predicate(render(d)).threshold, 186.82131958007812);

    const PredicateDef odd{12, 7, -0.1};
    EXPECT_EQ(parse_predicate(render(odd)), odd);
    EXPECT_THROW(parse_predicate("a_3 = feature_0 < 1"), parse_error);
    EXPECT_THROW(parse_predicate("b_3 = feature_0 > 1"), parse_error);
    EXPECT_THROW(parse_predicate("a_3 = feature_0 > x"), parse_error);
}
