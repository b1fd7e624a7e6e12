#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "randcheck/model.hpp"

namespace randcheck {

// A hard-label classifier with a loss gradient. Stochastic classifiers draw
// their randomness from call_index; deterministic ones ignore it.
class Classifier {
  public:
    virtual ~Classifier() = default;

    virtual int input_dim() const = 0;
    virtual int num_classes() const = 0;
    virtual int predict(const Eigen::VectorXd& x, std::uint64_t call_index) const = 0;
    virtual Eigen::VectorXd loss_gradient(const Eigen::VectorXd& x, int label, std::uint64_t call_index) const = 0;
    virtual bool stochastic() const = 0;
};

class NetworkClassifier final : public Classifier {
  public:
    explicit NetworkClassifier(const Network& net) : net_(net) {}

    int input_dim() const override { return net_.input_dim(); }
    int num_classes() const override { return net_.num_classes(); }
    int predict(const Eigen::VectorXd& x, std::uint64_t) const override { return predict_label(net_, x); }
    Eigen::VectorXd loss_gradient(const Eigen::VectorXd& x, int label, std::uint64_t) const override {
        return input_gradient(net_, x, label);
    }
    bool stochastic() const override { return false; }

  private:
    const Network& net_;
};

}  // namespace randcheck
