#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <utility>

#include <Eigen/Core>

namespace randcheck {

//---------------------------------------------------------------------------//
/*!
 * \brief State of one SplitMix64 substream.
 *
 * Every stochastic quantity in the toolkit is drawn from a StreamSeed derived
 * from the global seed and a path of (label, index) tags, so results never
 * depend on scheduling. A StreamSeed is plain data: copy it to fork, pass it
 * by reference to consume it.
 */
struct StreamSeed {
    std::uint64_t state = 0;

    friend bool operator==(StreamSeed, StreamSeed) = default;
};

struct Tag {
    std::string_view label;  // ASCII, at most 16 bytes
    std::uint64_t index = 0;
};

// SplitMix64 output function applied to a single state: (x + golden) mixed.
std::uint64_t splitmix64_mix(std::uint64_t x);

std::uint64_t fnv1a64(std::string_view bytes);

// One derivation step below an existing stream.
StreamSeed child(StreamSeed parent, std::string_view label, std::uint64_t index);

// mix(global_seed), then one child() step per tag.
StreamSeed derive_stream(std::uint64_t global_seed, std::span<const Tag> tags);
StreamSeed derive_stream(std::uint64_t global_seed, std::initializer_list<Tag> tags);

// Uniform in [0, 1) with 53 bits of resolution.
double next_uniform(StreamSeed& stream);

// Box-Muller from exactly two uniforms (u1 first, then u2). Throws on sigma <= 0.
double next_gaussian(StreamSeed& stream, double sigma);

// The Box-Muller map itself; u1 == 0 is treated as 2^-53.
double box_muller(double u1, double u2, double sigma);

Eigen::VectorXd gaussian_vector(StreamSeed& stream, int dim, double sigma);

// Fisher-Yates, last index first; j = floor(u * (i + 1)).
template <typename T>
void shuffle_in_place(std::span<T> items, StreamSeed& stream) {
    for (std::size_t i = items.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(next_uniform(stream) * static_cast<double>(i));
        if (j >= i) j = i - 1;
        std::swap(items[i - 1], items[j]);
    }
}

// Parses a 64-bit seed written in decimal or 0x-prefixed hex.
std::uint64_t parse_seed(std::string_view text);

}  // namespace randcheck
