#include "cder/train.hpp"

namespace cder {

TrainOutput train_detailed(const CloudCollection& collection, const TrainConfig& config) {
    const CloudCollection weighted = assign_weights(collection);
    PooledPoints pooled = pool(weighted);

    SelectConfig select;
    select.theta = config.theta;
    select.parsimonious = config.parsimonious;
    select.root_policy = config.root_policy;
    select.max_level = config.max_level;

    SelectionResult selection = select_regions(std::move(pooled), select);

    TrainOutput out{build_model(selection.tree.pooled(), collection.labels, selection.events,
                                config.theta),
                    std::move(selection.trace), selection.stop_level};
    return out;
}

CderModel train(const CloudCollection& collection, const TrainConfig& config) {
    return train_detailed(collection, config).model;
}

} // namespace cder
