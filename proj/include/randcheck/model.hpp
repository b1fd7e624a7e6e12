#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "randcheck/rng.hpp"

namespace randcheck {

struct Activation {
    enum class Kind { ReLU, KWTA };
    Kind kind = Kind::ReLU;
    double gamma = 1.0;  // kWTA keep fraction, in (0, 1]

    static Activation relu() { return {}; }
    static Activation kwta(double gamma) { return {Kind::KWTA, gamma}; }

    friend bool operator==(const Activation&, const Activation&) = default;
};

std::string to_string(const Activation& act);

//---------------------------------------------------------------------------//
/*!
 * \brief Fully connected classifier: affine + activation on every hidden
 * layer, affine logits on the last.
 *
 * layer_dims = {D, h1, ..., C}. weights[l] is layer_dims[l+1] x layer_dims[l].
 */
struct Network {
    std::vector<int> layer_dims;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Activation activation;

    int input_dim() const { return layer_dims.front(); }
    int num_classes() const { return layer_dims.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }

    // Zero-valued parameters of the given shape.
    static Network zeros(std::vector<int> layer_dims, Activation act);

    void validate() const;
    bool all_finite() const;

    friend bool operator==(const Network& a, const Network& b);
};

// Keeps the ceil(gamma*m) largest entries (lower index wins ties), zeroes the rest.
Eigen::VectorXd kwta_activate(const Eigen::VectorXd& v, double gamma);

// Number of winners kept for a layer of width m.
int kwta_winners(int m, double gamma);

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x);

int predict_label(const Network& net, const Eigen::VectorXd& x);

// Index of the largest entry, lower index on ties.
int argmax_lower(const Eigen::VectorXd& v);

double cross_entropy(const Eigen::VectorXd& logits, int label);

// d CE(softmax(forward(x)), y) / dx by reverse mode. kWTA layers pass gradient
// only through the kept units.
Eigen::VectorXd input_gradient(const Network& net, const Eigen::VectorXd& x, int label);

struct Dataset {
    enum class Split { Train, Test };
    Eigen::MatrixXd points;  // N x D, rows in [0,1]^D
    std::vector<int> labels;
    int num_classes = 0;
    Split split = Split::Train;

    int size() const { return static_cast<int>(labels.size()); }
    int dim() const { return static_cast<int>(points.cols()); }
    void validate() const;
};

struct DatasetSpec {
    enum class Kind { Blobs, Rings };
    Kind kind = Kind::Blobs;
    int d = 32;
    int classes = 4;
    int n_per_class = 100;
    double noise = 0.1;
    double spread = 1.0;  // blobs: centers at 0.5 + spread * (c - 0.5), c uniform in [0.2, 0.8]^d
};

DatasetSpec::Kind parse_dataset_kind(const std::string& text);

// Centers depend only on the seed; the split selects the sample substream.
Dataset gen_dataset(const DatasetSpec& spec, StreamSeed seed, Dataset::Split split = Dataset::Split::Train);

struct TrainParams {
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 0.05;
    double momentum = 0.9;
    double augment_sigma = 0.0;  // Gaussian input noise during training, 0 = off
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double train_acc = 0.0;
    std::optional<double> test_acc;
};

struct TrainResult {
    Network net;
    std::vector<EpochStats> history;
};

// Gaussian init with sigma = 1/sqrt(fan_in), zero biases.
Network init_network(const std::vector<int>& layer_dims, Activation act, StreamSeed stream);

/*!
 * \brief Minibatch SGD with momentum on mean cross-entropy.
 *
 * Initialization uses child(seed, "init", 0); epoch e shuffles with
 * child(seed, "shuffle", e) and augments with child(seed, "augment", e).
 * Throws NumericError if the loss becomes non-finite.
 */
TrainResult train(const std::vector<int>& layer_dims, Activation act, const Dataset& data,
                  const TrainParams& hp, StreamSeed seed, const Dataset* test = nullptr);

double accuracy(const Network& net, const Dataset& data);

// Model container; see docs/model_format.md.
void save_network(std::ostream& os, const Network& net, const std::string& metadata = {});
Network load_network(std::istream& is, std::string* metadata = nullptr);
void save_network(const std::filesystem::path& path, const Network& net, const std::string& metadata = {});
Network load_network(const std::filesystem::path& path, std::string* metadata = nullptr);

// CSV with header label,f0,...,f{D-1}. Lines starting with '#' are skipped.
void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is, int num_classes = 0);
Dataset read_dataset_csv(const std::filesystem::path& path, int num_classes = 0);

}  // namespace randcheck
