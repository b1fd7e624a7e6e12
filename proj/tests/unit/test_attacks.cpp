#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "randcheck/attacks.hpp"
#include "randcheck/errors.hpp"
#include "test_support.hpp"

using namespace randcheck;
using randcheck::testing::linear_two_class;
using randcheck::testing::random_network;

namespace {

Eigen::VectorXd vec2(double a, double b) { return (Eigen::VectorXd(2) << a, b).finished(); }

PgdConfig l2_config(double eps, int restarts = 1) {
    PgdConfig c;
    c.epsilon = eps;
    c.norm = Norm::L2;
    c.restarts = restarts;
    return c;
}

}  // namespace

TEST(Attacks, MethodNames) {
    EXPECT_EQ(to_string(MethodKey::grid()), "grid");
    EXPECT_EQ(to_string(MethodKey::random()), "random");
    EXPECT_EQ(to_string(MethodKey::pgd(20)), "pgd20");
    EXPECT_EQ(parse_method("pgd10"), MethodKey::pgd(10));
    EXPECT_EQ(parse_method("grid"), MethodKey::grid());
    EXPECT_THROW(parse_method("pgd0"), ConfigError);
    EXPECT_THROW(parse_method("fgsm"), ConfigError);
}

TEST(Attacks, ConfigDefaultsAndValidation) {
    PgdConfig c;
    EXPECT_EQ(c.steps, 40);
    EXPECT_DOUBLE_EQ(c.alpha(), 2.5 * 0.5 / 40);
    EXPECT_NO_THROW(c.validate());
    c.step_size = 1.01;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.step_size.reset();
    c.restarts = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Attacks, LinearPgdFindsWithinMargin) {
    const Eigen::VectorXd w = vec2(1.0, 0.0);
    const Network net = linear_two_class(w, -0.2);
    const NetworkClassifier clf(net);
    const AttackTarget t = make_target(clf);
    const SearchOutcome o = pgd_attack(t.predict, t.gradient, vec2(0.5, 0.5), 0, l2_config(0.5), StreamSeed{1});
    ASSERT_TRUE(o.found);
    EXPECT_FALSE(o.clean_error);
    EXPECT_GE(*o.distance, 0.3 - 1e-12);
    EXPECT_LE(*o.distance, 0.5 + 1e-9);
    EXPECT_NE(predict_label(net, *o.adversarial_point), 0);
}

TEST(Attacks, LinearPgdFailsBeyondMargin) {
    const Network net = linear_two_class(vec2(1.0, 0.0), -0.0);
    const NetworkClassifier clf(net);
    const AttackTarget t = make_target(clf);
    PgdConfig cfg = l2_config(0.5, 5);
    const SearchOutcome o = pgd_attack(t.predict, t.gradient, vec2(0.8, 0.5), 0, cfg, StreamSeed{1});
    EXPECT_FALSE(o.found);
    EXPECT_FALSE(o.adversarial_point.has_value());
    EXPECT_EQ(o.queries, 1 + 5 * (1 + cfg.steps));
}

TEST(Attacks, CleanErrorShortCircuits) {
    const Network net = linear_two_class(vec2(1.0, 0.0), 0.0);
    const NetworkClassifier clf(net);
    const AttackTarget t = make_target(clf);
    const SearchOutcome o = pgd_attack(t.predict, t.gradient, vec2(0.3, 0.5), 1, l2_config(0.5), StreamSeed{1});
    EXPECT_TRUE(o.found);
    EXPECT_TRUE(o.clean_error);
    EXPECT_EQ(*o.distance, 0.0);
    EXPECT_EQ(o.queries, 1);
}

TEST(Attacks, LinearOracleAgreesOverRandomPoints) {
    StreamSeed s{17};
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::VectorXd w = gaussian_vector(s, 4, 1.0);
        const Eigen::VectorXd x = randcheck::testing::uniform_vector(s, 4, 0.3, 0.7);
        const double b = -w.dot(Eigen::VectorXd::Constant(4, 0.5));
        const Network net = linear_two_class(w, b);
        const int y = predict_label(net, x);
        const double dist = std::abs(randcheck::testing::hyperplane_distance(w, b, x));
        if (std::abs(dist - 0.2) < 0.02) continue;
        const NetworkClassifier clf(net);
        const AttackTarget t = make_target(clf);
        PgdConfig cfg = l2_config(0.2);
        const SearchOutcome o = pgd_attack(t.predict, t.gradient, x, y, cfg, child(s, "pgd", trial));
        // interior anchor, ball radius 0.2: clamping never binds
        EXPECT_EQ(o.found, dist <= 0.2) << "trial " << trial << " dist " << dist;
    }
}

TEST(Attacks, LinfStepsStayInBox) {
    const Network net = random_network({5, 10, 3}, Activation::relu(), 2);
    const NetworkClassifier clf(net);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(5, 0.95);
    std::vector<Eigen::VectorXd> seen;
    auto predict = [&](const Eigen::VectorXd& p) {
        seen.push_back(p);
        return predict_label(net, x);  // never fooled: visit every iterate
    };
    auto grad = [&](const Eigen::VectorXd& p, int y) { return input_gradient(net, p, y); };
    PgdConfig cfg;
    cfg.epsilon = 0.1;
    cfg.norm = Norm::Linf;
    cfg.restarts = 3;
    pgd_attack(predict, grad, x, predict_label(net, x), cfg, StreamSeed{3});
    ASSERT_EQ(seen.size(), 1u + 3u * 41u);
    for (const auto& p : seen) {
        EXPECT_LE((p - x).cwiseAbs().maxCoeff(), 0.1 + 1e-12);
        EXPECT_GE(p.minCoeff(), 0.0);
        EXPECT_LE(p.maxCoeff(), 1.0);
    }
}

TEST(Attacks, IteratesAreFeasibleAndQueriesCounted) {
    for (int trial = 0; trial < 10; ++trial) {
        const Network net = random_network({6, 16, 4}, Activation::kwta(0.25), 30 + trial);
        StreamSeed s = derive_stream(trial, {});
        const Eigen::VectorXd x = randcheck::testing::uniform_vector(s, 6);
        const int y = (predict_label(net, x) + (trial % 3 == 0 ? 1 : 0)) % 4;
        std::int64_t calls = 0;
        bool feasible = true;
        auto predict = [&](const Eigen::VectorXd& p) {
            ++calls;
            feasible = feasible && (p - x).norm() <= 0.3 + 1e-9 && p.minCoeff() >= 0.0 && p.maxCoeff() <= 1.0;
            return predict_label(net, p);
        };
        auto grad = [&](const Eigen::VectorXd& p, int label) { return input_gradient(net, p, label); };
        PgdConfig cfg = l2_config(0.3, 4);
        const SearchOutcome o = pgd_attack(predict, grad, x, y, cfg, StreamSeed{5});
        EXPECT_TRUE(feasible);
        EXPECT_EQ(o.queries, calls);
        if (o.found) {
            EXPECT_NE(predict_label(net, *o.adversarial_point), y);
            EXPECT_LE(*o.distance, 0.3 + 1e-9);
        }
    }
}

TEST(Attacks, CountingClassifierMatchesReportedQueries) {
    const Network net = random_network({6, 16, 3}, Activation::relu(), 4);
    const NetworkClassifier base(net);
    const randcheck::testing::CountingClassifier counted(base);
    const AttackTarget t = make_target(counted);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(6, 0.5);
    const SearchOutcome o = pgd_attack(t.predict, t.gradient, x, predict_label(net, x), l2_config(0.2, 3), StreamSeed{2});
    EXPECT_EQ(o.queries, counted.predicts);
}

TEST(Attacks, PgdIsDeterministic) {
    const Network net = random_network({6, 16, 3}, Activation::kwta(0.2), 5);
    const NetworkClassifier clf(net);
    const AttackTarget t = make_target(clf);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(6, 0.4);
    const int y = predict_label(net, x);
    const SearchOutcome a = pgd_attack(t.predict, t.gradient, x, y, l2_config(1.0, 3), StreamSeed{8});
    const SearchOutcome b = pgd_attack(t.predict, t.gradient, x, y, l2_config(1.0, 3), StreamSeed{8});
    EXPECT_EQ(a.found, b.found);
    EXPECT_EQ(a.queries, b.queries);
    EXPECT_EQ(a.adversarial_point, b.adversarial_point);
}

TEST(Attacks, NonFiniteGradientIsReported) {
    auto predict = [](const Eigen::VectorXd&) { return 0; };
    auto grad = [](const Eigen::VectorXd& p, int) {
        return Eigen::VectorXd::Constant(p.size(), std::numeric_limits<double>::quiet_NaN());
    };
    EXPECT_THROW(pgd_attack(predict, grad, Eigen::VectorXd::Constant(3, 0.5), 0, l2_config(0.5), StreamSeed{1}),
                 NumericError);
}

TEST(Attacks, IdentitySubspaceMatchesFullSpace) {
    const Network net = random_network({5, 12, 3}, Activation::relu(), 6);
    const NetworkClassifier clf(net);
    const Subspace identity{Eigen::MatrixXd::Identity(5, 5)};
    StreamSeed s{9};
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = randcheck::testing::uniform_vector(s, 5, 0.4, 0.6);
        const int y = predict_label(net, x);
        std::vector<Eigen::VectorXd> full_path, sub_path;
        auto rec_full = [&](const Eigen::VectorXd& p) {
            full_path.push_back(p);
            return predict_label(net, p);
        };
        auto rec_sub = [&](const Eigen::VectorXd& p) {
            sub_path.push_back(p);
            return predict_label(net, p);
        };
        auto grad = [&](const Eigen::VectorXd& p, int label) { return input_gradient(net, p, label); };
        const PgdConfig cfg = l2_config(0.1, 2);  // no clamping inside [0.3, 0.7]
        const SearchOutcome a = pgd_attack(rec_full, grad, x, y, cfg, child(s, "p", trial));
        const SearchOutcome b = subspace_pgd(rec_sub, grad, identity, x, y, cfg, child(s, "p", trial));
        ASSERT_EQ(full_path.size(), sub_path.size());
        for (std::size_t i = 0; i < full_path.size(); ++i) EXPECT_LT((full_path[i] - sub_path[i]).norm(), 1e-9);
        EXPECT_EQ(a.found, b.found);
        EXPECT_EQ(a.queries, b.queries);
    }
}

TEST(Attacks, AlignedOneDimensionalSubspaceFollowsOracle) {
    const Eigen::VectorXd w = (Eigen::VectorXd(3) << 0.6, 0.8, 0.0).finished();
    Subspace line{Eigen::MatrixXd(1, 3)};
    line.basis.row(0) = w.transpose();
    for (double margin : {0.1, 0.3, 0.45, 0.55, 0.8}) {
        const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.5);
        const double b = margin - w.dot(x);  // w.x + b = margin, |w| = 1
        const Network net = linear_two_class(w, b);
        const NetworkClassifier clf(net);
        const AttackTarget t = make_target(clf);
        Eigen::VectorXd anchor = x;
        const SearchOutcome o = subspace_pgd(t.predict, t.gradient, line, anchor, 0, l2_config(0.5), StreamSeed{2});
        // moving 0.5 along w from 0.5 reaches at most 0.9 per axis: no clamping
        EXPECT_EQ(o.found, margin <= 0.5) << "margin " << margin;
    }
}

TEST(Attacks, OrthogonalSubspaceNeverFinds) {
    const Eigen::VectorXd w = (Eigen::VectorXd(3) << 1.0, 0.0, 0.0).finished();
    Subspace line{Eigen::MatrixXd(1, 3)};
    line.basis << 0.0, 1.0, 0.0;
    const Network net = linear_two_class(w, -0.45);
    const NetworkClassifier clf(net);
    const AttackTarget t = make_target(clf);
    const SearchOutcome o = subspace_pgd(t.predict, t.gradient, line, Eigen::VectorXd::Constant(3, 0.5), 0,
                                         l2_config(0.5, 20), StreamSeed{4});
    EXPECT_FALSE(o.found);
}

TEST(Attacks, RestartBudgetsAreMonotone) {
    StreamSeed s{23};
    int found1 = 0, found20 = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const Network net = random_network({6, 16, 4}, Activation::kwta(0.2), 400 + trial);
        const NetworkClassifier clf(net);
        const Eigen::VectorXd x = randcheck::testing::uniform_vector(s, 6);
        const int y = predict_label(net, x);
        const Subspace sub = make_basis(child(s, "b", trial), 2, 6);
        bool prev = false;
        for (int r : {1, 10, 20}) {
            const AttackTarget t = make_target(clf);
            const bool found =
                subspace_pgd(t.predict, t.gradient, sub, x, y, l2_config(0.15, r), child(s, "pgd", trial)).found;
            EXPECT_TRUE(!prev || found) << "trial " << trial << " restarts " << r;
            prev = found;
            if (r == 1) found1 += found;
            if (r == 20) found20 += found;
        }
    }
    EXPECT_GE(found20, found1);
}

TEST(Attacks, TargetCallIndicesAdvance) {
    struct Recorder final : Classifier {
        int input_dim() const override { return 1; }
        int num_classes() const override { return 2; }
        int predict(const Eigen::VectorXd&, std::uint64_t c) const override {
            calls.push_back(c);
            return 0;
        }
        Eigen::VectorXd loss_gradient(const Eigen::VectorXd&, int, std::uint64_t c) const override {
            calls.push_back(c);
            return Eigen::VectorXd::Ones(1);
        }
        bool stochastic() const override { return true; }
        mutable std::vector<std::uint64_t> calls;
    } rec;
    const AttackTarget t = make_target(rec, 5);
    t.predict(Eigen::VectorXd::Zero(1));
    t.gradient(Eigen::VectorXd::Zero(1), 0);
    t.predict(Eigen::VectorXd::Zero(1));
    EXPECT_EQ(rec.calls, (std::vector<std::uint64_t>{5, 6, 7}));
}
