#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrsl/eval.hpp"

namespace mrsl {

/// Parsed experiment file. Keys before the first [cell] header set defaults
/// for every cell; each [cell] section then overrides them. A value holding
/// commas expands into one cell per entry (cartesian product over keys).
///
///   trials = 50
///   seed = 1
///   instance = lower_bound
///   [cell]
///   n = 1000, 4000
///   epsilon = 0.4
struct ExperimentPlan {
  std::vector<ExperimentCell> cells;
  std::size_t trials = 20;
  std::uint64_t seed = 1;
};

ExperimentPlan parse_experiment_config(const std::string& text);

/// Applies one key=value pair to a cell; throws InvalidArgument for unknown
/// keys or malformed values.
void apply_cell_key(ExperimentCell& cell, const std::string& key, const std::string& value);

}  // namespace mrsl
