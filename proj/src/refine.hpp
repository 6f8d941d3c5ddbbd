#pragma once

#include <string>
#include <vector>

#include "oam/estimation.hpp"

namespace oam::detail {

// Model-based refinement of the user positions from the raw training
// features, seeded with the FFT range of each user.
std::vector<UserEstimate> refine_positions(const SystemConfig& config,
                                           const TrainingObservation& obs,
                                           const std::vector<double>& initial_ranges,
                                           const EstimationOptions& options,
                                           std::vector<std::string>& diagnostics);

}  // namespace oam::detail
