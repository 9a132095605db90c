#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embinv/core.hpp"

namespace embinv::posenc {

/// `shifted` uses exponent (2k+1)/d on the cosine slots; `standard` reuses 2k/d.
enum class Convention : std::uint8_t { shifted, standard };

std::string convention_name(Convention c);
Convention parse_convention(std::string_view name);

struct Options {
  Convention convention = Convention::shifted;
  /// Value fed into the formula for position 1. 1 by default; 0 shifts every
  /// position down by one.
  int position_base = 1;
};

/// Component 2k = sin(i / 10000^(2k/d)), component 2k+1 = cos(i / 10000^(e/d))
/// with e = 2k+1 (shifted) or 2k (standard). Requires d >= 2.
std::vector<double> positional_embedding(PositionIndex pos, std::size_t d, const Options& opts = {});

/// 20 rows, position,c0,...,c{d-1}; 17 significant digits.
std::string positional_table_csv(std::size_t d, const Options& opts = {});

}  // namespace embinv::posenc
