#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "randcheck/nagfactor.hpp"
#include "randcheck/smoothing.hpp"
#include "test_support.hpp"

using namespace randcheck;

TEST(NagFactor, GroupModesHandExample) {
    const std::vector<int> inf{0, 0, 1, 0, 1, 0};
    EXPECT_EQ(group_modes(inf, 3), (std::vector<int>{0, 0}));
    EXPECT_EQ(group_modes(std::vector<int>{2, 1, 1, 2}, 2), (std::vector<int>{1, 1}));
    EXPECT_EQ(group_modes(std::vector<int>{0, 1, 1, 0, 1}, 2), (std::vector<int>{0, 0}));
}

TEST(NagFactor, GroupSizeEdgeCases) {
    const std::vector<int> inf{3, 1, 1, 2, 1, 3, 3, 3};
    EXPECT_EQ(group_modes(inf, static_cast<int>(inf.size())), (std::vector<int>{3}));
    auto singles = group_mode_predictions(inf, 1, StreamSeed{4});
    std::vector<int> a = singles, b = inf;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
    EXPECT_THROW(group_modes(inf, 0), std::invalid_argument);
    EXPECT_THROW(group_modes(inf, 9), std::invalid_argument);
    EXPECT_EQ(group_modes(inf, 3).size(), 2u);
}

TEST(NagFactor, EstimateP) {
    EXPECT_EQ(estimate_p(std::vector<int>{0, 0, 0, 0}, 0), 1.0);
    EXPECT_EQ(estimate_p(std::vector<int>{0, 1, 0, 1}, 0), 0.5);
    EXPECT_THROW(estimate_p(std::vector<int>{}, 0), std::invalid_argument);
}

TEST(NagFactor, BernoulliEstimateRecoversP) {
    StreamSeed s{5};
    std::vector<int> inf(10000);
    for (int& v : inf) v = next_uniform(s) < 0.9 ? 0 : 1;
    EXPECT_NEAR(estimate_p(group_mode_predictions(inf, 1, StreamSeed{6}), 0), 0.9, 0.01);
}

TEST(NagFactor, CurveArithmetic) {
    const NagCurve single = nag_curve({{0, 0.99}}, {1, 100});
    EXPECT_NEAR(single.robust_accuracy[1], std::pow(0.99, 100), 1e-15);
    EXPECT_NEAR(single.robust_accuracy[1], 0.3660, 1e-4);

    const NagCurve flat = nag_curve({{0, 1.0}, {1, 0.0}, {2, 1.0}}, {1, 10, 100, 1000});
    for (double a : flat.robust_accuracy) EXPECT_DOUBLE_EQ(a, 2.0 / 3.0);

    const NagCurve one = nag_curve({{0, 1.0}, {1, 1.0}}, {1, 1000});
    EXPECT_EQ(one.robust_accuracy, (std::vector<double>{1.0, 1.0}));
    EXPECT_EQ(one.ci95_halfwidth, (std::vector<double>{0.0, 0.0}));
}

TEST(NagFactor, CurveConfidenceBand) {
    const NagCurve c = nag_curve({{0, 0.5}, {1, 0.5}, {2, 0.5}, {3, 0.5}}, {1});
    EXPECT_NEAR(c.ci95_halfwidth[0], 1.96 * std::sqrt(0.25 / 4), 1e-15);
}

TEST(NagFactor, CurveIsNonIncreasingAndDominated) {
    StreamSeed s{8};
    std::vector<std::pair<int, double>> pts;
    for (int i = 0; i < 50; ++i) pts.emplace_back(i, next_uniform(s));
    const NagCurve c = nag_curve(pts, {1, 2, 5, 10, 100, 1000});
    for (std::size_t i = 1; i < c.robust_accuracy.size(); ++i) {
        EXPECT_LT(c.robust_accuracy[i], c.robust_accuracy[i - 1]);
    }
}

TEST(NagFactor, CurveValidation) {
    EXPECT_THROW(nag_curve({{0, 1.2}}, {1}), std::invalid_argument);
    EXPECT_THROW(nag_curve({{0, 0.5}}, {0}), std::invalid_argument);
}

TEST(NagFactor, SimulateRepeatsDeterministicClassifier) {
    auto right = [](const Eigen::VectorXd&, std::uint64_t) { return 2; };
    auto wrong = [](const Eigen::VectorXd&, std::uint64_t) { return 1; };
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
    EXPECT_TRUE(simulate_repeats(right, x, 2, 1000));
    EXPECT_FALSE(simulate_repeats(wrong, x, 2, 1));
}

TEST(NagFactor, SimulateRepeatsUsesConsecutiveCalls) {
    std::vector<std::uint64_t> calls;
    auto rec = [&](const Eigen::VectorXd&, std::uint64_t c) {
        calls.push_back(c);
        return c == 13 ? 1 : 0;
    };
    EXPECT_FALSE(simulate_repeats(rec, Eigen::VectorXd::Zero(1), 0, 10, 10));
    EXPECT_EQ(calls, (std::vector<std::uint64_t>{10, 11, 12, 13}));
}

TEST(NagFactor, SimulationMatchesExponentLaw) {
    const double p = 0.9;
    auto clf = [&](const Eigen::VectorXd&, std::uint64_t call) {
        StreamSeed s = child(StreamSeed{99}, "call", call);
        return next_uniform(s) < p ? 0 : 1;
    };
    const int runs = 10000, n = 10;
    int survived = 0;
    for (int r = 0; r < runs; ++r) survived += simulate_repeats(clf, Eigen::VectorXd::Zero(1), 0, n, r * 1000ULL);
    EXPECT_NEAR(survived / static_cast<double>(runs), std::pow(p, n), 0.02);
}

TEST(NagFactor, BaseInferencesAreSingleCorruptionVotes) {
    const Network net = randcheck::testing::random_network({4, 8, 3}, Activation::relu(), 2);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 0.5);
    const auto labels = base_inferences(net, 0.3, x, 20, StreamSeed{7});
    SmoothingConfig cfg;
    cfg.n = 1;
    cfg.sigma = 0.3;
    cfg.mode = SmoothingMode::Random;
    for (int j = 0; j < 20; ++j) EXPECT_EQ(labels[j], smoothed_predict(net, cfg, x, j, StreamSeed{7}).label);
}
