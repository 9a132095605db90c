#include "embinv/synthembed.hpp"

#include <cmath>

#include "embinv/rng.hpp"

namespace embinv::synth {

namespace {

// Key streams.
constexpr std::uint64_t kProjection = 1;
constexpr std::uint64_t kNoise = 2;
constexpr std::uint64_t kRandomRow = 3;

double projection_entry(const EmbedderSpec& spec, std::size_t out, std::size_t in) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.dim));
  return scale * rng::keyed_gaussian(rng::hash_key({spec.seed, kProjection, out, in}));
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::random: return "random";
    case Mode::leaky_linear: return "leaky";
    case Mode::endpoint_leaky: return "endpoint";
    case Mode::pooled: return "pooled";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  if (name == "random") return Mode::random;
  if (name == "leaky" || name == "leaky_linear") return Mode::leaky_linear;
  if (name == "endpoint" || name == "endpoint_leaky") return Mode::endpoint_leaky;
  if (name == "pooled") return Mode::pooled;
  throw UsageError("UnknownMode", "synthetic mode '" + std::string(name) + "'");
}

void EmbedderSpec::validate() const {
  if (dim < 8) {
    throw UsageError("InvalidSpec", "synthetic dim must be >= 8");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw UsageError("InvalidSpec", "noise sigma must be finite and >= 0");
  }
  for (int p : leak_positions) {
    if (p < 1 || p > static_cast<int>(kWindowLength)) {
      throw UsageError("InvalidSpec", "leak position " + std::to_string(p) + " not in [1, 20]");
    }
  }
}

OneHot one_hot(const LabeledWindow& window) {
  OneHot out{};
  for (std::size_t i = 0; i < kWindowLength; ++i) {
    out[i][class_index(window.sequence[i])] = 1;
  }
  return out;
}

EmbeddingMatrix embed(const EmbedderSpec& spec, const std::vector<LabeledWindow>& windows) {
  spec.validate();
  if (windows.empty()) {
    throw DataError("EmptyInput", "no windows to embed");
  }
  const std::size_t d = spec.dim;
  std::vector<float> data(windows.size() * d);

  // Projection input columns: leaky uses all 80 one-hot cells, endpoint the
  // cells of the leaked positions (in position order), pooled the 4 means.
  std::vector<std::size_t> leaked;
  for (int p : spec.leak_positions) leaked.push_back(static_cast<std::size_t>(p - 1));

  std::vector<double> features;
  for (std::size_t row = 0; row < windows.size(); ++row) {
    const auto& w = windows[row];
    features.clear();
    switch (spec.mode) {
      case Mode::random:
        break;
      case Mode::leaky_linear:
        features.assign(kWindowLength * kNumNucleotides, 0.0);
        for (std::size_t i = 0; i < kWindowLength; ++i) {
          features[i * kNumNucleotides + class_index(w.sequence[i])] = 1.0;
        }
        break;
      case Mode::endpoint_leaky:
        features.assign(leaked.size() * kNumNucleotides, 0.0);
        for (std::size_t k = 0; k < leaked.size(); ++k) {
          features[k * kNumNucleotides + class_index(w.sequence[leaked[k]])] = 1.0;
        }
        break;
      case Mode::pooled:
        features.assign(kNumNucleotides, 0.0);
        for (Nucleotide n : w.sequence) {
          features[class_index(n)] += 1.0 / static_cast<double>(kWindowLength);
        }
        break;
    }

    for (std::size_t out = 0; out < d; ++out) {
      double value = 0.0;
      if (spec.mode == Mode::random) {
        value = rng::keyed_gaussian(rng::hash_key({spec.seed, kRandomRow, row, out}));
      } else {
        for (std::size_t in = 0; in < features.size(); ++in) {
          if (features[in] != 0.0) value += projection_entry(spec, out, in) * features[in];
        }
        if (spec.noise_sigma > 0.0) {
          value += spec.noise_sigma *
                   rng::keyed_gaussian(rng::hash_key({spec.seed, kNoise, row, out}));
        }
      }
      data[row * d + out] = static_cast<float>(value);
    }
  }
  return EmbeddingMatrix(windows.size(), d, std::move(data), "synthetic:" + mode_name(spec.mode));
}

std::array<Leakage, kWindowLength> expected_leakage(const EmbedderSpec& spec) {
  std::array<Leakage, kWindowLength> out{};
  switch (spec.mode) {
    case Mode::random: out.fill(Leakage::none); break;
    case Mode::leaky_linear: out.fill(Leakage::full); break;
    case Mode::pooled: out.fill(Leakage::partial); break;
    case Mode::endpoint_leaky:
      out.fill(Leakage::none);
      for (int p : spec.leak_positions) out[static_cast<std::size_t>(p - 1)] = Leakage::full;
      break;
  }
  return out;
}

}  // namespace embinv::synth
