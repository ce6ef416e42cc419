#pragma once

// End-to-end training: weight the collection, pool it, select regions over
// the cover tree, and build the coordinate model.

#include "cder/core.hpp"
#include "cder/entropy.hpp"
#include "cder/gaussian.hpp"

namespace cder {

struct TrainConfig {
    double theta = 0.5;
    bool parsimonious = true;
    RootPolicy root_policy = RootPolicy::NearestToCentroid;
    std::optional<int> max_level;
};

struct TrainOutput {
    CderModel model;
    std::vector<LevelTrace> trace;
    int stop_level = 0;
};

TrainOutput train_detailed(const CloudCollection& collection, const TrainConfig& config = {});
CderModel train(const CloudCollection& collection, const TrainConfig& config = {});

} // namespace cder
