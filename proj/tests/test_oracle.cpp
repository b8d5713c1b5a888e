#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "ndnf/oracle.hpp"

using namespace ndnf;

namespace {

const std::vector<double> example1{-6, -2, -2, 2, -6};

// The three rules the node is equivalent to: each drops one of the small-weight inputs.
SplitWeightSet example1_rules() {
    return {{{-6, 0, -6, 6, -6}, {-6, -6, 0, 6, -6}, {-6, -6, -6, 0, -6}}, 0, Polarity::positive};
}

} // namespace

TEST(TruthTable, Example1) {
    const auto t = enumerate_truth_table(example1, 1.0);
    ASSERT_EQ(t.size(), 32u);
    std::set<std::vector<int>> inputs;
    bool found = false;
    std::size_t positives = 0;
    for (std::size_t r = 0; r < t.size(); ++r) {
        inputs.insert(t.input(r));
        EXPECT_EQ(t.bivalent[r] != 0, t.activations[r] > 0);
        positives += t.bivalent[r];
        if (t.input(r) == std::vector<int>{-1, -1, 1, 1, -1}) {
            EXPECT_NEAR(t.activations[r], 0.964, 5e-4);
            EXPECT_TRUE(t.bivalent[r]);
            found = true;
        }
    }
    EXPECT_TRUE(found);
    EXPECT_EQ(inputs.size(), 32u);
    // enumeration is the oracle: exactly four true rows
    EXPECT_EQ(positives, 4u);
    EXPECT_EQ(t.input(0), std::vector<int>(5, 1));
    EXPECT_NEAR(t.activations[0], -1.0, 5e-4);
}

TEST(TruthTable, SingleWeight) {
    const auto t = enumerate_truth_table(std::vector<double>{6}, 1.0);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.input(0), std::vector<int>{1});
    EXPECT_TRUE(t.bivalent[0]);
    EXPECT_FALSE(t.bivalent[1]);
}

TEST(TruthTable, OnlyRelevantInputsEnumerated) {
    const auto t = enumerate_truth_table(std::vector<double>{0, 3, 0, -1}, 1.0);
    EXPECT_EQ(t.size(), 4u);
    EXPECT_EQ(t.relevant, (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(t.input(0, 0)[0], 0);
}

TEST(TruthTable, CapAndIdempotence) {
    std::vector<double> w(21, 1.0);
    try {
        enumerate_truth_table(w, 1.0, 20, 7);
        FAIL() << "expected budget_exceeded";
    } catch (const budget_exceeded& e) {
        EXPECT_EQ(e.node(), 7u);
    }
    const auto a = enumerate_truth_table(example1, 1.0);
    const auto b = enumerate_truth_table(example1, 1.0);
    EXPECT_EQ(a.masks, b.masks);
    EXPECT_EQ(a.activations, b.activations);
}

TEST(SplitExamples, Partition) {
    const auto s = split_examples(enumerate_truth_table(example1, 1.0));
    EXPECT_EQ(s.positives.size() + s.negatives.size(), 32u);
    for (const auto& x : s.positives) EXPECT_EQ(x[0], -1);
    std::size_t with_x1 = 0;
    for (const auto& x : s.negatives) with_x1 += x[0] == 1;
    EXPECT_EQ(with_x1, 16u);

    EXPECT_TRUE(split_examples(enumerate_truth_table(std::vector<double>{0, 0}, 1.0)).positives.empty());
    const auto one = split_examples(enumerate_truth_table(std::vector<double>{6}, 1.0));
    ASSERT_EQ(one.positives.size(), 1u);
    EXPECT_EQ(one.positives[0], std::vector<int>{1});
}

TEST(Coverage, Example1RuleSetIsExact) {
    const auto rep = check_split_coverage(example1, 1.0, example1_rules(), Polarity::positive);
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(rep.rows_checked, 32u);
}

TEST(Coverage, ThresholdedNodeMissesAPositive) {
    const SplitWeightSet single{{{-6, -6, -6, 6, -6}}, 0, Polarity::positive};
    const auto rep = check_split_coverage(example1, 1.0, single, Polarity::positive);
    EXPECT_FALSE(rep.ok());
    bool x4_false_row = false;
    for (const auto& v : rep.violations)
        if (v.kind == CoverageViolation::Kind::target_uncovered && v.input[3] == -1) x4_false_row = true;
    EXPECT_TRUE(x4_false_row);
}

TEST(Coverage, EmptySplitsForNeverTrueNode) {
    const SplitWeightSet none{{}, 0, Polarity::positive};
    EXPECT_TRUE(check_split_coverage(std::vector<double>{0, 0, 0}, 1.0, none, Polarity::positive).ok());
}

TEST(Coverage, NegativePolarityRoles) {
    // not(a1): fires exactly on the false rows of w = [6]
    const SplitWeightSet neg{{{-6}}, 0, Polarity::negative};
    EXPECT_TRUE(check_split_coverage(std::vector<double>{6}, 1.0, neg, Polarity::negative).ok());
    EXPECT_FALSE(check_split_coverage(std::vector<double>{6}, 1.0, neg, Polarity::positive).ok());
}

TEST(Coverage, TensorOutsideRelevantSetIsReported) {
    const SplitWeightSet bad{{{6, 6}}, 0, Polarity::positive};
    const auto rep = check_split_coverage(std::vector<double>{6, 0}, 1.0, bad, Polarity::positive);
    ASSERT_FALSE(rep.ok());
    EXPECT_EQ(rep.violations[0].kind, CoverageViolation::Kind::outside_relevant);
}

TEST(Coverage, RetainsAtMostOneHundredViolations) {
    std::vector<double> w(10, 1.0);
    const SplitWeightSet none{{}, 0, Polarity::negative};
    const auto rep = check_split_coverage(w, 1.0, none, Polarity::negative);
    EXPECT_GT(rep.violation_count, 100u);
    EXPECT_EQ(rep.violations.size(), 100u);
}
