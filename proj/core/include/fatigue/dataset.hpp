#pragma once

#include <string>
#include <vector>

#include "fatigue/poisson_model.hpp"

namespace fatigue {

/// Reads a fatigue dataset CSV with the exact header
/// `specimen_id,s_max_ksi,ratio_r,cycles,failed` (failed in {0,1}).
/// Throws ValidationError on malformed input, naming the offending line.
std::vector<Experiment> read_dataset_csv(const std::string& path);

/// Writes the dataset with the canonical header; output is byte-stable for
/// identical inputs.
void write_dataset_csv(const std::vector<Experiment>& data, const std::string& path);

}  // namespace fatigue
