#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "embinv/core.hpp"
#include "embinv/rng.hpp"

namespace embinv::testing {

/// Kind of the embinv::Error thrown by `f`, or "<none>".
template <class F>
std::string error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return "<none>";
}

std::string random_bases(rng::SplitMix64& gen, std::size_t n);
std::vector<LabeledWindow> random_windows(std::size_t n, std::uint64_t seed);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& stem);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Central finite differences (h = 1e-3) against backward() for every scalar
/// parameter of a small MLP (input 8, 20 samples, train-mode batch norm).
struct GradientReport {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_abs = 0.0;
  double worst_rel = 0.0;
};
GradientReport check_mlp_gradients(std::uint64_t seed, double rel_tol = 1e-4,
                                   double abs_tol = 1e-6);

/// Customized one-token-per-nucleotide property over three families plus the
/// fixed fixtures. Returns failure descriptions (empty on success).
std::vector<std::string> tokenizer_conformance(std::size_t trials, std::uint64_t seed);

/// EMB1 and TSV write/read round trips over randomized inputs. Returns
/// failure descriptions (empty on success).
std::vector<std::string> format_round_trips(std::size_t trials, std::uint64_t seed,
                                            const std::filesystem::path& dir);

}  // namespace embinv::testing
