#pragma once

// Single-file weight container: a small JSON shape manifest followed by the
// raw float64 payload, so fixtures are reproducible byte for byte.

#include <cstdint>
#include <string>

#include "rnnt/cells.hpp"

namespace rnnt {

struct WeightsFile {
  std::uint64_t seed = 0;
  ModelWeights weights;
};

void save_weights(const std::string& path, const ModelWeights& weights,
                  std::uint64_t seed);

// Throws Error(WEIGHT_SHAPE_MISMATCH) on a malformed or truncated file.
WeightsFile load_weights(const std::string& path);

// Shape-checks loaded weights against a validated spec.
void check_model_weights(const ValidatedSpec& vs, const ModelWeights& mw);

}  // namespace rnnt
