#pragma once

#include <string>
#include <vector>

namespace sybillab {

/// Per-node Sybil score in [0, 1]; higher means more Sybil-like.
struct ScoreVector {
  std::vector<double> values;
  std::string detector;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

}  // namespace sybillab
