#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "randcheck/model.hpp"
#include "randcheck/rng.hpp"

namespace randcheck {

// Robust accuracy under the repeated-query threat: a point survives N
// attempts with probability p^N.
struct NagCurve {
    std::vector<std::pair<int, double>> per_point_p;  // (datapoint id, p-hat)
    std::vector<int> trial_counts;
    std::vector<double> robust_accuracy;
    std::vector<double> ci95_halfwidth;
};

// Mode of each consecutive group of n labels (lower label on ties); a
// trailing partial group is dropped.
std::vector<int> group_modes(std::span<const int> inferences, int n);

// Fisher-Yates shuffle with the stream, then group_modes.
std::vector<int> group_mode_predictions(std::span<const int> inferences, int n, StreamSeed stream);

double estimate_p(std::span<const int> predictions, int true_label);

/*!
 * robust_accuracy(N) = mean of p^N over points. The 95% band is the normal
 * approximation for a binomial proportion over the datapoints:
 * 1.96 * sqrt(a (1 - a) / m).
 */
NagCurve nag_curve(std::vector<std::pair<int, double>> per_point_p, std::vector<int> trial_counts);

using RepeatClassifier = std::function<int(const Eigen::VectorXd&, std::uint64_t call_index)>;

// Queries call indices first_call, first_call+1, ... and reports whether all
// n_trials predictions equal the label. Stops at the first miss.
bool simulate_repeats(const RepeatClassifier& classifier, const Eigen::VectorXd& x, int label, int n_trials,
                      std::uint64_t first_call = 0);

// Labels of `count` single-corruption inferences of the base classifier;
// inference j uses the corruption stream of call j.
std::vector<int> base_inferences(const Network& net, double sigma, const Eigen::VectorXd& x, int count,
                                 StreamSeed stream_base);

}  // namespace randcheck
