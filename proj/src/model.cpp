#include "randcheck/model.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "randcheck/errors.hpp"

namespace randcheck {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

std::string to_string(const Activation& act) {
    if (act.kind == Activation::Kind::ReLU) return "relu";
    char buf[64];
    std::snprintf(buf, sizeof buf, "kwta(%.17g)", act.gamma);
    return buf;
}

Network Network::zeros(std::vector<int> layer_dims, Activation act) {
    Network net;
    net.layer_dims = std::move(layer_dims);
    net.activation = act;
    net.validate();
    for (std::size_t l = 0; l + 1 < net.layer_dims.size(); ++l) {
        net.weights.push_back(Eigen::MatrixXd::Zero(net.layer_dims[l + 1], net.layer_dims[l]));
        net.biases.push_back(Eigen::VectorXd::Zero(net.layer_dims[l + 1]));
    }
    return net;
}

void Network::validate() const {
    if (layer_dims.size() < 2) throw std::invalid_argument("network needs at least input and output dims");
    for (int d : layer_dims) {
        if (d < 1) throw std::invalid_argument("layer dimensions must be positive");
    }
    if (activation.kind == Activation::Kind::KWTA && !(activation.gamma > 0.0 && activation.gamma <= 1.0)) {
        throw std::invalid_argument("kWTA gamma must lie in (0, 1]");
    }
    if (!weights.empty() || !biases.empty()) {
        if (weights.size() + 1 != layer_dims.size() || biases.size() != weights.size()) {
            throw std::invalid_argument("network parameter count does not match layer dims");
        }
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] ||
                biases[l].size() != layer_dims[l + 1]) {
                throw std::invalid_argument("layer " + std::to_string(l) + " shape is not conformable");
            }
        }
    }
}

bool Network::all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    }
    return true;
}

bool operator==(const Network& a, const Network& b) {
    if (a.layer_dims != b.layer_dims || !(a.activation == b.activation)) return false;
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
    }
    return true;
}

int kwta_winners(int m, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("kWTA gamma must lie in (0, 1]");
    // guard against products like 0.4 * 5 landing a hair above an integer
    const int k = static_cast<int>(std::ceil(gamma * m - 1e-9));
    return std::clamp(k, 1, m);
}

namespace {

// Kept-unit mask for kWTA: order by value descending, index ascending.
std::vector<char> kwta_mask(const Eigen::VectorXd& v, double gamma) {
    const int m = static_cast<int>(v.size());
    const int k = kwta_winners(m, gamma);
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::nth_element(order.begin(), order.begin() + (k - 1), order.end(), [&](int a, int b) {
        return v[a] > v[b] || (v[a] == v[b] && a < b);
    });
    std::vector<char> mask(m, 0);
    for (int i = 0; i < k; ++i) mask[order[i]] = 1;
    return mask;
}

struct ForwardTrace {
    std::vector<Eigen::VectorXd> inputs;  // input to each layer
    std::vector<std::vector<char>> masks; // per hidden layer
    Eigen::VectorXd logits;
};

ForwardTrace trace_forward(const Network& net, const Eigen::VectorXd& x) {
    if (x.size() != net.input_dim()) {
        throw std::invalid_argument("input has dimension " + std::to_string(x.size()) + ", network expects " +
                                    std::to_string(net.input_dim()));
    }
    ForwardTrace t;
    Eigen::VectorXd h = x;
    const int last = net.num_layers() - 1;
    for (int l = 0; l < last; ++l) {
        t.inputs.push_back(h);
        Eigen::VectorXd z = net.weights[l] * h + net.biases[l];
        std::vector<char> mask;
        if (net.activation.kind == Activation::Kind::ReLU) {
            mask.resize(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) mask[i] = z[i] > 0.0;
        } else {
            mask = kwta_mask(z, net.activation.gamma);
        }
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            if (!mask[i]) z[i] = 0.0;
        }
        t.masks.push_back(std::move(mask));
        h = std::move(z);
    }
    t.inputs.push_back(h);
    t.logits = net.weights[last] * h + net.biases[last];
    return t;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double mx = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - mx).exp().matrix();
    return e / e.sum();
}

// Gradient of CE w.r.t. each layer's pre-activation, back to front.
// Calls on_layer(l, g) with g = dL/dz_l, and returns dL/dx.
template <typename OnLayer>
Eigen::VectorXd backward(const Network& net, const ForwardTrace& t, int label, OnLayer&& on_layer) {
    Eigen::VectorXd g = softmax(t.logits);
    g[label] -= 1.0;
    for (int l = net.num_layers() - 1; l >= 0; --l) {
        on_layer(l, g);
        Eigen::VectorXd gh = net.weights[l].transpose() * g;
        if (l > 0) {
            const auto& mask = t.masks[l - 1];
            for (Eigen::Index i = 0; i < gh.size(); ++i) {
                if (!mask[i]) gh[i] = 0.0;
            }
        }
        g = std::move(gh);
    }
    return g;
}

}  // namespace

Eigen::VectorXd kwta_activate(const Eigen::VectorXd& v, double gamma) {
    if (v.size() < 1) throw std::invalid_argument("kwta_activate on empty vector");
    const auto mask = kwta_mask(v, gamma);
    Eigen::VectorXd out = v;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!mask[i]) out[i] = 0.0;
    }
    return out;
}

Eigen::VectorXd forward(const Network& net, const Eigen::VectorXd& x) { return trace_forward(net, x).logits; }

int argmax_lower(const Eigen::VectorXd& v) {
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

int predict_label(const Network& net, const Eigen::VectorXd& x) { return argmax_lower(forward(net, x)); }

double cross_entropy(const Eigen::VectorXd& logits, int label) {
    const double mx = logits.maxCoeff();
    return std::log((logits.array() - mx).exp().sum()) + mx - logits[label];
}

Eigen::VectorXd input_gradient(const Network& net, const Eigen::VectorXd& x, int label) {
    if (label < 0 || label >= net.num_classes()) throw std::invalid_argument("label out of range");
    const ForwardTrace t = trace_forward(net, x);
    return backward(net, t, label, [](int, const Eigen::VectorXd&) {});
}

//---------------------------------------------------------------------------//
// Datasets
//---------------------------------------------------------------------------//

void Dataset::validate() const {
    if (points.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw ConfigError("dataset point and label counts differ");
    }
    if (points.size() > 0 && (points.minCoeff() < 0.0 || points.maxCoeff() > 1.0)) {
        throw ConfigError("dataset features must lie in [0,1]");
    }
    for (int y : labels) {
        if (y < 0 || y >= num_classes) throw ConfigError("dataset label out of range");
    }
}

DatasetSpec::Kind parse_dataset_kind(const std::string& text) {
    if (text == "blobs") return DatasetSpec::Kind::Blobs;
    if (text == "rings") return DatasetSpec::Kind::Rings;
    throw ConfigError("unknown dataset kind '" + text + "'");
}

namespace {
double spread_scale(double spread, double c) { return spread * (c - 0.5); }
}  // namespace

Dataset gen_dataset(const DatasetSpec& spec, StreamSeed seed, Dataset::Split split) {
    if (spec.d < 2) throw std::invalid_argument("dataset dimension must be at least 2");
    if (spec.classes < 2) throw std::invalid_argument("dataset needs at least 2 classes");
    if (spec.n_per_class < 1) throw std::invalid_argument("dataset must not be empty");
    if (!(spec.noise >= 0.0)) throw std::invalid_argument("dataset noise must be non-negative");
    if (!(spec.spread >= 0.0 && spec.spread <= 1.0)) throw std::invalid_argument("blob spread must lie in [0,1]");

    Dataset data;
    data.num_classes = spec.classes;
    data.split = split;
    data.points.resize(static_cast<Eigen::Index>(spec.classes) * spec.n_per_class, spec.d);
    data.labels.reserve(data.points.rows());
    const char* split_label = split == Dataset::Split::Train ? "train" : "test";

    Eigen::Index row = 0;
    for (int c = 0; c < spec.classes; ++c) {
        StreamSeed samples = child(seed, split_label, static_cast<std::uint64_t>(c));
        if (spec.kind == DatasetSpec::Kind::Blobs) {
            StreamSeed cs = child(seed, "center", static_cast<std::uint64_t>(c));
            Eigen::VectorXd center(spec.d);
            for (int j = 0; j < spec.d; ++j) center[j] = 0.5 + spread_scale(spec.spread, 0.2 + 0.6 * next_uniform(cs));
            for (int i = 0; i < spec.n_per_class; ++i, ++row) {
                Eigen::VectorXd p = center;
                if (spec.noise > 0.0) p += gaussian_vector(samples, spec.d, spec.noise);
                data.points.row(row) = p.cwiseMax(0.0).cwiseMin(1.0).transpose();
                data.labels.push_back(c);
            }
        } else {
            const double band = 0.45 / spec.classes;
            const double mid = band * (c + 0.5);
            for (int i = 0; i < spec.n_per_class; ++i, ++row) {
                double jitter = spec.noise > 0.0 ? next_gaussian(samples, spec.noise) : 0.0;
                jitter = std::clamp(jitter, -0.4 * band, 0.4 * band);
                const double theta = 2.0 * std::numbers::pi * next_uniform(samples);
                Eigen::VectorXd p(spec.d);
                p[0] = 0.5 + (mid + jitter) * std::cos(theta);
                p[1] = 0.5 + (mid + jitter) * std::sin(theta);
                for (int j = 2; j < spec.d; ++j) p[j] = next_uniform(samples);
                data.points.row(row) = p.cwiseMax(0.0).cwiseMin(1.0).transpose();
                data.labels.push_back(c);
            }
        }
    }
    return data;
}

//---------------------------------------------------------------------------//
// Training
//---------------------------------------------------------------------------//

Network init_network(const std::vector<int>& layer_dims, Activation act, StreamSeed stream) {
    Network net = Network::zeros(layer_dims, act);
    for (int l = 0; l < net.num_layers(); ++l) {
        const double sigma = 1.0 / std::sqrt(static_cast<double>(layer_dims[l]));
        Eigen::MatrixXd& w = net.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = next_gaussian(stream, sigma);
        }
    }
    return net;
}

double accuracy(const Network& net, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    int correct = 0;
    for (int i = 0; i < data.size(); ++i) {
        correct += predict_label(net, data.points.row(i).transpose()) == data.labels[i];
    }
    return static_cast<double>(correct) / data.size();
}

TrainResult train(const std::vector<int>& layer_dims, Activation act, const Dataset& data, const TrainParams& hp,
                  StreamSeed seed, const Dataset* test) {
    if (data.size() == 0) throw std::invalid_argument("training set is empty");
    if (hp.epochs < 0 || hp.batch_size < 1 || !(hp.learning_rate > 0.0) || hp.momentum < 0.0 ||
        hp.augment_sigma < 0.0) {
        throw std::invalid_argument("invalid training hyperparameters");
    }
    if (data.dim() != layer_dims.front()) throw std::invalid_argument("dataset dimension does not match network");

    TrainResult result{init_network(layer_dims, act, child(seed, "init", 0)), {}};
    Network& net = result.net;
    std::vector<Eigen::MatrixXd> vel_w, grad_w;
    std::vector<Eigen::VectorXd> vel_b, grad_b;
    for (int l = 0; l < net.num_layers(); ++l) {
        vel_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        vel_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    grad_w = vel_w;
    grad_b = vel_b;

    std::vector<int> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        StreamSeed shuffle = child(seed, "shuffle", static_cast<std::uint64_t>(epoch));
        StreamSeed augment = child(seed, "augment", static_cast<std::uint64_t>(epoch));
        shuffle_in_place(std::span<int>(order), shuffle);

        double loss_sum = 0.0;
        int correct = 0;
        for (int start = 0; start < data.size(); start += hp.batch_size) {
            const int stop = std::min(data.size(), start + hp.batch_size);
            for (int l = 0; l < net.num_layers(); ++l) {
                grad_w[l].setZero();
                grad_b[l].setZero();
            }
            for (int i = start; i < stop; ++i) {
                const int idx = order[i];
                Eigen::VectorXd x = data.points.row(idx).transpose();
                if (hp.augment_sigma > 0.0) {
                    x = (x + gaussian_vector(augment, data.dim(), hp.augment_sigma)).cwiseMax(0.0).cwiseMin(1.0);
                }
                const int y = data.labels[idx];
                const ForwardTrace t = trace_forward(net, x);
                loss_sum += cross_entropy(t.logits, y);
                correct += argmax_lower(t.logits) == y;
                backward(net, t, y, [&](int l, const Eigen::VectorXd& g) {
                    grad_w[l].noalias() += g * t.inputs[l].transpose();
                    grad_b[l] += g;
                });
            }
            const double scale = 1.0 / (stop - start);
            for (int l = 0; l < net.num_layers(); ++l) {
                vel_w[l] = hp.momentum * vel_w[l] + scale * grad_w[l];
                vel_b[l] = hp.momentum * vel_b[l] + scale * grad_b[l];
                net.weights[l] -= hp.learning_rate * vel_w[l];
                net.biases[l] -= hp.learning_rate * vel_b[l];
            }
        }
        const double mean_loss = loss_sum / data.size();
        if (!std::isfinite(mean_loss) || !net.all_finite()) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch));
        }
        EpochStats stats{epoch, mean_loss, static_cast<double>(correct) / data.size(), std::nullopt};
        if (test != nullptr) stats.test_acc = accuracy(net, *test);
        result.history.push_back(stats);
    }
    return result;
}

//---------------------------------------------------------------------------//
// Model container
//---------------------------------------------------------------------------//

namespace {
constexpr char kMagic[8] = {'R', 'C', 'H', 'K', 'N', 'E', 'T', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T value{};
    if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ConfigError("model file is truncated");
    return value;
}
}  // namespace

void save_network(std::ostream& os, const Network& net, const std::string& metadata) {
    net.validate();
    os.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(os, kFormatVersion);
    put<std::uint32_t>(os, net.activation.kind == Activation::Kind::ReLU ? 0U : 1U);
    put<double>(os, net.activation.gamma);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(net.layer_dims.size()));
    for (int d : net.layer_dims) put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    put<std::uint64_t>(os, metadata.size());
    os.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
    for (int l = 0; l < net.num_layers(); ++l) {
        const Eigen::MatrixXd& w = net.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) put<double>(os, w(r, c));
        }
        for (Eigen::Index r = 0; r < net.biases[l].size(); ++r) put<double>(os, net.biases[l][r]);
    }
}

Network load_network(std::istream& is, std::string* metadata) {
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw ConfigError("not a randcheck model file");
    }
    const auto version = get<std::uint32_t>(is);
    if (version != kFormatVersion) throw ConfigError("unsupported model format version " + std::to_string(version));
    const auto kind = get<std::uint32_t>(is);
    const auto gamma = get<double>(is);
    if (kind > 1) throw ConfigError("unknown activation code in model file");
    const auto ndims = get<std::uint32_t>(is);
    if (ndims < 2 || ndims > 64) throw ConfigError("implausible layer count in model file");
    std::vector<int> dims;
    for (std::uint32_t i = 0; i < ndims; ++i) {
        const auto d = get<std::uint32_t>(is);
        if (d == 0 || d > (1U << 24)) throw ConfigError("implausible layer width in model file");
        dims.push_back(static_cast<int>(d));
    }
    const auto meta_len = get<std::uint64_t>(is);
    if (meta_len > (1ULL << 30)) throw ConfigError("implausible metadata length in model file");
    std::string meta(meta_len, '\0');
    if (meta_len > 0 && !is.read(meta.data(), static_cast<std::streamsize>(meta_len))) {
        throw ConfigError("model file is truncated");
    }
    Activation act = kind == 0 ? Activation::relu() : Activation::kwta(gamma);
    act.gamma = gamma;
    Network net = Network::zeros(dims, act);
    for (int l = 0; l < net.num_layers(); ++l) {
        Eigen::MatrixXd& w = net.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = get<double>(is);
        }
        for (Eigen::Index r = 0; r < net.biases[l].size(); ++r) net.biases[l][r] = get<double>(is);
    }
    if (metadata != nullptr) *metadata = std::move(meta);
    return net;
}

void save_network(const std::filesystem::path& path, const Network& net, const std::string& metadata) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write model file " + path.string());
    save_network(os, net, metadata);
}

Network load_network(const std::filesystem::path& path, std::string* metadata) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open model file " + path.string());
    Network net = load_network(is, metadata);
    if (is.peek() != std::char_traits<char>::eof()) throw ConfigError("trailing data in model file " + path.string());
    return net;
}

//---------------------------------------------------------------------------//
// Dataset CSV
//---------------------------------------------------------------------------//

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    os << "label";
    for (int j = 0; j < data.dim(); ++j) os << ",f" << j;
    os << '\n';
    char buf[32];
    for (int i = 0; i < data.size(); ++i) {
        os << data.labels[i];
        for (int j = 0; j < data.dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data.points(i, j));
            os << ',' << buf;
        }
        os << '\n';
    }
}

Dataset read_dataset_csv(std::istream& is, int num_classes) {
    std::string line;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    int dim = -1;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (!header_seen) {
            if (fields.empty() || fields[0] != "label") throw ConfigError("dataset CSV must start with a 'label' header");
            dim = static_cast<int>(fields.size()) - 1;
            for (int j = 0; j < dim; ++j) {
                if (fields[j + 1] != "f" + std::to_string(j)) throw ConfigError("unexpected dataset CSV header column");
            }
            header_seen = true;
            continue;
        }
        if (static_cast<int>(fields.size()) != dim + 1) {
            throw ConfigError("dataset CSV line " + std::to_string(line_no) + " has the wrong field count");
        }
        int label = 0;
        auto [lp, lec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), label);
        if (lec != std::errc{} || lp != fields[0].data() + fields[0].size()) {
            throw ConfigError("bad label on dataset CSV line " + std::to_string(line_no));
        }
        std::vector<double> row(dim);
        for (int j = 0; j < dim; ++j) {
            const auto f = fields[j + 1];
            auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), row[j]);
            if (ec != std::errc{} || p != f.data() + f.size()) {
                throw ConfigError("bad feature on dataset CSV line " + std::to_string(line_no));
            }
        }
        labels.push_back(label);
        rows.push_back(std::move(row));
    }
    if (!header_seen || dim < 1) throw ConfigError("dataset CSV has no header");
    if (rows.empty()) throw ConfigError("dataset CSV has no rows");
    Dataset data;
    data.points.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < dim; ++j) data.points(static_cast<Eigen::Index>(i), j) = rows[i][j];
    }
    data.labels = std::move(labels);
    data.num_classes = num_classes > 0 ? num_classes : *std::max_element(data.labels.begin(), data.labels.end()) + 1;
    data.validate();
    return data;
}

Dataset read_dataset_csv(const std::filesystem::path& path, int num_classes) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open dataset " + path.string());
    return read_dataset_csv(is, num_classes);
}

}  // namespace randcheck
