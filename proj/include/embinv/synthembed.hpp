#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "embinv/core.hpp"

namespace embinv::synth {

/// Synthetic embedders with known leakage, used as ground truth for the
/// attack engine.
///   random          content-independent Gaussian rows
///   leaky_linear    W * flatten(one_hot) + noise; every position recoverable
///   endpoint_leaky  only the one-hot rows at leak_positions are projected
///   pooled          projection of the mean one-hot row; composition only
enum class Mode : std::uint8_t { random, leaky_linear, endpoint_leaky, pooled };

std::string mode_name(Mode m);
/// Accepts "random", "leaky", "endpoint", "pooled" and the long names.
Mode parse_mode(std::string_view name);

struct EmbedderSpec {
  Mode mode = Mode::leaky_linear;
  std::size_t dim = 768;
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;
  std::set<int> leak_positions{1, 20};  // endpoint_leaky only, 1-based

  void validate() const;
};

using OneHot = std::array<std::array<std::uint8_t, kNumNucleotides>, kWindowLength>;

/// Row i is the indicator of the nucleotide at position i+1 (A=0 .. T=3).
OneHot one_hot(const LabeledWindow& window);

/// Deterministic: every value is keyed by (seed, stream, row, column) so the
/// result does not depend on evaluation order.
EmbeddingMatrix embed(const EmbedderSpec& spec, const std::vector<LabeledWindow>& windows);

enum class Leakage : std::uint8_t { none, partial, full };

std::array<Leakage, kWindowLength> expected_leakage(const EmbedderSpec& spec);

}  // namespace embinv::synth
