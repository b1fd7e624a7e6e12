#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "randcheck/classifier.hpp"
#include "randcheck/model.hpp"
#include "randcheck/rng.hpp"

namespace randcheck {

enum class SmoothingMode { Random, Fixed, Cycle };

SmoothingMode parse_smoothing_mode(std::string_view text);
std::string to_string(SmoothingMode mode);

/*!
 * \brief Majority-vote smoothing over Gaussian corruptions.
 *
 * Random draws a new corruption set on every call, Fixed reuses the call-0
 * set forever, Cycle rotates through the sets of calls 0..cycle_k-1.
 */
struct SmoothingConfig {
    int n = 100;
    double sigma = 0.25;
    SmoothingMode mode = SmoothingMode::Fixed;
    int cycle_k = 1;
    std::optional<double> abstain_threshold;

    void validate() const;
};

inline constexpr int kAbstain = -1;

struct SmoothedPrediction {
    int label = kAbstain;
    std::vector<int> counts;  // per class, sums to n
};

// Call-index tag the given mode uses for this call.
std::uint64_t corruption_tag(const SmoothingConfig& cfg, std::uint64_t call_index);

std::vector<Eigen::VectorXd> corruption_set(const SmoothingConfig& cfg, std::uint64_t call_index, int d,
                                            StreamSeed stream_base);

// Majority label of the counts, lower class on ties, or kAbstain if the
// winning share is below the abstain threshold.
int vote(const std::vector<int>& counts, int n, std::optional<double> abstain_threshold);

SmoothedPrediction smoothed_predict(const Network& net, const SmoothingConfig& cfg, const Eigen::VectorXd& x,
                                    std::uint64_t call_index, StreamSeed stream_base);

// Mean cross-entropy gradient over the corruption set; gradient components
// where the corrupted copy was clamped to the domain are zeroed.
Eigen::VectorXd smoothed_loss_gradient(const Network& net, const SmoothingConfig& cfg, const Eigen::VectorXd& x,
                                       int label, std::uint64_t call_index, StreamSeed stream_base);

class SmoothedClassifier final : public Classifier {
  public:
    SmoothedClassifier(const Network& net, SmoothingConfig cfg, StreamSeed stream_base);

    int input_dim() const override { return net_.input_dim(); }
    int num_classes() const override { return net_.num_classes(); }
    // Abstentions are returned as kAbstain, which never equals a true label.
    int predict(const Eigen::VectorXd& x, std::uint64_t call_index) const override;
    Eigen::VectorXd loss_gradient(const Eigen::VectorXd& x, int label, std::uint64_t call_index) const override;
    bool stochastic() const override;

    const SmoothingConfig& config() const { return cfg_; }

  private:
    const Network& net_;
    SmoothingConfig cfg_;
    StreamSeed base_;
};

}  // namespace randcheck
