#include "randcheck/rng.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "randcheck/errors.hpp"

namespace randcheck {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

constexpr std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t x) { return finalize(x + kGolden); }

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

StreamSeed child(StreamSeed parent, std::string_view label, std::uint64_t index) {
    if (label.size() > 16) {
        throw std::invalid_argument("stream tag label longer than 16 bytes: " + std::string(label));
    }
    return StreamSeed{splitmix64_mix(parent.state ^ fnv1a64(label) ^ index)};
}

StreamSeed derive_stream(std::uint64_t global_seed, std::span<const Tag> tags) {
    StreamSeed s{splitmix64_mix(global_seed)};
    for (const Tag& t : tags) {
        s = child(s, t.label, t.index);
    }
    return s;
}

StreamSeed derive_stream(std::uint64_t global_seed, std::initializer_list<Tag> tags) {
    return derive_stream(global_seed, std::span<const Tag>(tags.begin(), tags.size()));
}

double next_uniform(StreamSeed& stream) {
    stream.state += kGolden;
    return static_cast<double>(finalize(stream.state) >> 11) * kTwoPow53Inv;
}

double box_muller(double u1, double u2, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("gaussian sigma must be positive");
    }
    if (u1 <= 0.0) {
        u1 = kTwoPow53Inv;
    }
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double next_gaussian(StreamSeed& stream, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("gaussian sigma must be positive");
    }
    const double u1 = next_uniform(stream);
    const double u2 = next_uniform(stream);
    return box_muller(u1, u2, sigma);
}

Eigen::VectorXd gaussian_vector(StreamSeed& stream, int dim, double sigma) {
    if (dim < 1) {
        throw std::invalid_argument("gaussian_vector dimension must be positive");
    }
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) {
        v[i] = next_gaussian(stream, sigma);
    }
    return v;
}

std::uint64_t parse_seed(std::string_view text) {
    int base = 10;
    if (text.starts_with("0x") || text.starts_with("0X")) {
        text.remove_prefix(2);
        base = 16;
    }
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("invalid seed '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace randcheck
