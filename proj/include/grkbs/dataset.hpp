#pragma once

#include <string>

#include "grkbs/solver.hpp"

namespace grkbs {

/// CSV reader with header row "x1,...,xn,y1,...,ym". Errors name the
/// offending line or header column.
TrainingSet load_dataset(const std::string& path, std::size_t input_dim, std::size_t output_dim);

/// Writer matching load_dataset (17 significant digits, value round trip).
void write_dataset(const std::string& path, const TrainingSet& data);

}  // namespace grkbs
