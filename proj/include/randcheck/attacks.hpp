#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "randcheck/classifier.hpp"
#include "randcheck/rng.hpp"
#include "randcheck/subspace.hpp"

namespace randcheck {

struct PgdConfig {
    double epsilon = 0.5;
    Norm norm = Norm::L2;
    int steps = 40;
    std::optional<double> step_size;  // default 2.5 * epsilon / steps
    int restarts = 1;
    bool random_start = true;

    double alpha() const { return step_size ? *step_size : 2.5 * epsilon / steps; }
    void validate() const;
};

enum class SearchMethod { Grid, Random, Pgd };

struct MethodKey {
    SearchMethod method = SearchMethod::Grid;
    int restarts = 0;  // only for Pgd

    static MethodKey grid() { return {SearchMethod::Grid, 0}; }
    static MethodKey random() { return {SearchMethod::Random, 0}; }
    static MethodKey pgd(int restarts) { return {SearchMethod::Pgd, restarts}; }

    friend auto operator<=>(const MethodKey&, const MethodKey&) = default;
};

// "grid", "random", "pgd1", "pgd10", ...
std::string to_string(MethodKey key);
MethodKey parse_method(const std::string& text);

struct SearchOutcome {
    int datapoint_id = -1;
    MethodKey method;
    bool found = false;
    bool clean_error = false;  // x itself was misclassified
    std::optional<Eigen::VectorXd> adversarial_point;
    std::optional<double> distance;
    std::int64_t queries = 0;  // predict_fn evaluations
};

using PredictFn = std::function<int(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)>;

// Adapts a classifier to predict/grad functions that consume consecutive
// call indices starting at first_call, shared by both functions.
struct AttackTarget {
    PredictFn predict;
    GradientFn gradient;
};
AttackTarget make_target(const Classifier& clf, std::uint64_t first_call = 0);

//---------------------------------------------------------------------------//
/*!
 * \brief Untargeted PGD in the full input space.
 *
 * x itself is queried first; a clean error is reported as found at distance
 * 0. Restart r draws its random start from child(stream, "restart", r), so
 * the first R restarts are identical for any larger restart budget. Each step
 * moves by alpha along sign(g) (Linf) or g/|g| (L2), projects the
 * perturbation onto the eps-ball and the point onto [0,1]^D, then queries.
 * Throws NumericError on a non-finite gradient.
 */
SearchOutcome pgd_attack(const PredictFn& predict, const GradientFn& grad, const Eigen::VectorXd& x, int label,
                         const PgdConfig& cfg, StreamSeed stream);

// PGD over subspace coordinates c: the gradient is M * grad_x at lift(c),
// projection is project_coords, every query is at lift(c).
SearchOutcome subspace_pgd(const PredictFn& predict, const GradientFn& grad, const Subspace& sub,
                           const Eigen::VectorXd& anchor, int label, const PgdConfig& cfg, StreamSeed stream);

}  // namespace randcheck
