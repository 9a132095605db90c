#include "embinv/posenc.hpp"

#include <cmath>
#include <cstdio>

namespace embinv::posenc {

std::string convention_name(Convention c) {
  return c == Convention::shifted ? "shifted" : "standard";
}

Convention parse_convention(std::string_view name) {
  if (name == "shifted") return Convention::shifted;
  if (name == "standard") return Convention::standard;
  throw UsageError("UnknownConvention", "positional convention '" + std::string(name) + "'");
}

std::vector<double> positional_embedding(PositionIndex pos, std::size_t d, const Options& opts) {
  if (d < 2) {
    throw UsageError("InvalidDim", "positional embedding needs d >= 2");
  }
  if (opts.position_base != 0 && opts.position_base != 1) {
    throw UsageError("InvalidBase", "position base must be 0 or 1");
  }
  const double i = static_cast<double>(pos.value() - 1 + opts.position_base);
  const double dd = static_cast<double>(d);
  std::vector<double> out(d);
  for (std::size_t c = 0; c < d; ++c) {
    const std::size_t even = c - c % 2;
    if (c % 2 == 0) {
      out[c] = std::sin(i / std::pow(10000.0, static_cast<double>(even) / dd));
    } else {
      const double exponent = opts.convention == Convention::shifted ? static_cast<double>(c)
                                                                    : static_cast<double>(even);
      out[c] = std::cos(i / std::pow(10000.0, exponent / dd));
    }
  }
  return out;
}

std::string positional_table_csv(std::size_t d, const Options& opts) {
  std::string out = "position";
  for (std::size_t c = 0; c < d; ++c) out += ",c" + std::to_string(c);
  out += '\n';
  char buf[40];
  for (auto pos : all_positions()) {
    out += std::to_string(pos.value());
    for (double v : positional_embedding(pos, d, opts)) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace embinv::posenc
