#include "randcheck/smoothing.hpp"

#include <stdexcept>

#include "randcheck/errors.hpp"

namespace randcheck {

SmoothingMode parse_smoothing_mode(std::string_view text) {
    if (text == "random") return SmoothingMode::Random;
    if (text == "fixed") return SmoothingMode::Fixed;
    if (text == "cycle") return SmoothingMode::Cycle;
    throw ConfigError("unknown smoothing mode '" + std::string(text) + "'");
}

std::string to_string(SmoothingMode mode) {
    switch (mode) {
        case SmoothingMode::Random: return "random";
        case SmoothingMode::Fixed: return "fixed";
        case SmoothingMode::Cycle: return "cycle";
    }
    return "?";
}

void SmoothingConfig::validate() const {
    if (n < 1) throw std::invalid_argument("smoothing needs at least one corruption");
    if (!(sigma > 0.0)) throw std::invalid_argument("smoothing sigma must be positive");
    if (mode == SmoothingMode::Cycle && cycle_k < 1) throw std::invalid_argument("seed cycle length must be >= 1");
    if (abstain_threshold && !(*abstain_threshold >= 0.0 && *abstain_threshold <= 1.0)) {
        throw std::invalid_argument("abstain threshold must lie in [0,1]");
    }
}

std::uint64_t corruption_tag(const SmoothingConfig& cfg, std::uint64_t call_index) {
    switch (cfg.mode) {
        case SmoothingMode::Random: return call_index;
        case SmoothingMode::Fixed: return 0;
        case SmoothingMode::Cycle: return call_index % static_cast<std::uint64_t>(cfg.cycle_k);
    }
    return 0;
}

std::vector<Eigen::VectorXd> corruption_set(const SmoothingConfig& cfg, std::uint64_t call_index, int d,
                                            StreamSeed stream_base) {
    cfg.validate();
    if (d < 1) throw std::invalid_argument("corruption dimension must be positive");
    StreamSeed s = child(stream_base, "call", corruption_tag(cfg, call_index));
    std::vector<Eigen::VectorXd> out;
    out.reserve(cfg.n);
    for (int i = 0; i < cfg.n; ++i) out.push_back(gaussian_vector(s, d, cfg.sigma));
    return out;
}

int vote(const std::vector<int>& counts, int n, std::optional<double> abstain_threshold) {
    int best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[best]) best = static_cast<int>(c);
    }
    if (abstain_threshold && static_cast<double>(counts[best]) / n < *abstain_threshold) return kAbstain;
    return best;
}

SmoothedPrediction smoothed_predict(const Network& net, const SmoothingConfig& cfg, const Eigen::VectorXd& x,
                                    std::uint64_t call_index, StreamSeed stream_base) {
    SmoothedPrediction out;
    out.counts.assign(net.num_classes(), 0);
    for (const Eigen::VectorXd& delta : corruption_set(cfg, call_index, net.input_dim(), stream_base)) {
        ++out.counts[predict_label(net, (x + delta).cwiseMax(0.0).cwiseMin(1.0))];
    }
    out.label = vote(out.counts, cfg.n, cfg.abstain_threshold);
    return out;
}

Eigen::VectorXd smoothed_loss_gradient(const Network& net, const SmoothingConfig& cfg, const Eigen::VectorXd& x,
                                       int label, std::uint64_t call_index, StreamSeed stream_base) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(x.size());
    for (const Eigen::VectorXd& delta : corruption_set(cfg, call_index, net.input_dim(), stream_base)) {
        const Eigen::VectorXd raw = x + delta;
        Eigen::VectorXd g = input_gradient(net, raw.cwiseMax(0.0).cwiseMin(1.0), label);
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            if (raw[i] < 0.0 || raw[i] > 1.0) g[i] = 0.0;
        }
        total += g;
    }
    return total / cfg.n;
}

SmoothedClassifier::SmoothedClassifier(const Network& net, SmoothingConfig cfg, StreamSeed stream_base)
    : net_(net), cfg_(cfg), base_(stream_base) {
    cfg_.validate();
}

int SmoothedClassifier::predict(const Eigen::VectorXd& x, std::uint64_t call_index) const {
    return smoothed_predict(net_, cfg_, x, call_index, base_).label;
}

Eigen::VectorXd SmoothedClassifier::loss_gradient(const Eigen::VectorXd& x, int label,
                                                  std::uint64_t call_index) const {
    return smoothed_loss_gradient(net_, cfg_, x, label, call_index, base_);
}

bool SmoothedClassifier::stochastic() const {
    return cfg_.mode == SmoothingMode::Random || (cfg_.mode == SmoothingMode::Cycle && cfg_.cycle_k > 1);
}

}  // namespace randcheck
