#include "randcheck/nagfactor.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "randcheck/smoothing.hpp"

namespace randcheck {

std::vector<int> group_modes(std::span<const int> inferences, int n) {
    if (n < 1 || static_cast<std::size_t>(n) > inferences.size()) {
        throw std::invalid_argument("group size must lie in [1, number of inferences]");
    }
    const std::size_t groups = inferences.size() / static_cast<std::size_t>(n);
    std::vector<int> out;
    out.reserve(groups);
    std::map<int, int> counts;
    for (std::size_t g = 0; g < groups; ++g) {
        counts.clear();
        for (int i = 0; i < n; ++i) ++counts[inferences[g * n + i]];
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it) {
            if (it->second > best->second) best = it;
        }
        out.push_back(best->first);
    }
    return out;
}

std::vector<int> group_mode_predictions(std::span<const int> inferences, int n, StreamSeed stream) {
    std::vector<int> shuffled(inferences.begin(), inferences.end());
    shuffle_in_place(std::span<int>(shuffled), stream);
    return group_modes(shuffled, n);
}

double estimate_p(std::span<const int> predictions, int true_label) {
    if (predictions.empty()) throw std::invalid_argument("estimate_p needs at least one prediction");
    std::size_t hits = 0;
    for (int p : predictions) hits += p == true_label;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

NagCurve nag_curve(std::vector<std::pair<int, double>> per_point_p, std::vector<int> trial_counts) {
    if (per_point_p.empty()) throw std::invalid_argument("nag_curve needs at least one datapoint");
    for (const auto& [id, p] : per_point_p) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p-hat must lie in [0,1]");
    }
    for (int n : trial_counts) {
        if (n < 1) throw std::invalid_argument("trial counts must be >= 1");
    }
    NagCurve curve;
    curve.per_point_p = std::move(per_point_p);
    curve.trial_counts = std::move(trial_counts);
    const double m = static_cast<double>(curve.per_point_p.size());
    for (int n : curve.trial_counts) {
        double sum = 0.0;
        for (const auto& [id, p] : curve.per_point_p) sum += std::pow(p, n);
        const double acc = sum / m;
        curve.robust_accuracy.push_back(acc);
        curve.ci95_halfwidth.push_back(1.96 * std::sqrt(acc * (1.0 - acc) / m));
    }
    return curve;
}

bool simulate_repeats(const RepeatClassifier& classifier, const Eigen::VectorXd& x, int label, int n_trials,
                      std::uint64_t first_call) {
    if (n_trials < 1) throw std::invalid_argument("simulate_repeats needs at least one trial");
    for (int t = 0; t < n_trials; ++t) {
        if (classifier(x, first_call + static_cast<std::uint64_t>(t)) != label) return false;
    }
    return true;
}

std::vector<int> base_inferences(const Network& net, double sigma, const Eigen::VectorXd& x, int count,
                                 StreamSeed stream_base) {
    if (count < 1) throw std::invalid_argument("base inference count must be positive");
    SmoothingConfig single{1, sigma, SmoothingMode::Random, 1, std::nullopt};
    std::vector<int> labels;
    labels.reserve(count);
    for (int j = 0; j < count; ++j) {
        labels.push_back(smoothed_predict(net, single, x, static_cast<std::uint64_t>(j), stream_base).label);
    }
    return labels;
}

}  // namespace randcheck
