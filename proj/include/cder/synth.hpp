#pragma once

// Seeded synthetic cloud collections used by the examples and tests. The
// same (experiment, seed) pair always produces the same collection; every
// cloud draws from its own RNG stream keyed by (seed, experiment, cloud
// index), so per-cloud output does not depend on generation order.

#include "cder/core.hpp"
#include "cder/rng.hpp"

#include <cstdint>
#include <string_view>
#include <utility>

namespace cder {

enum class Experiment { Blobs, Blocks, DeepField, ThreeLabels };

Experiment experiment_from_name(std::string_view name);  // throws InputError
const char* experiment_name(Experiment experiment);

struct BlobsParams {
    int clouds_per_label = 25;
    int core_points = 100;
    int satellite_points = 2;  // per satellite site, 4 sites per label
};

/// Two labels in the plane. Every cloud has a shared standard-normal core
/// plus a few tight satellites on the x-axis whose sites differ by label:
/// magenta at 4, 5, -3, -6 and green at -4, -5, 3, 6 (sigma 0.2).
CloudCollection gen_blobs(std::uint64_t seed, const BlobsParams& params = {});

struct BlocksParams {
    int clouds_per_label = 100;
    int background_points = 30;
    int square_points = 2;  // per 0.1 x 0.1 square, 2 squares per label
};

/// Two labels on the unit square: uniform background noise plus two points
/// in each of two small squares, one shared at (1/2,1/2) and one
/// label-specific at (1/4,1/4) vs (3/4,3/4).
CloudCollection gen_blocks(std::uint64_t seed, const BlocksParams& params = {});

struct DeepFieldParams {
    int components = 50;
    int min_clouds = 20;
    int max_clouds = 40;
    int min_points = 50;
    int max_points = 500;
};

struct DeepFieldComponent {
    int label = 0;
    Vector mean;          // on the 10 x 10 square
    double sigma1 = 0.0;  // principal standard deviations, (0, 0.5]
    double sigma2 = 0.0;
    double angle = 0.0;
    double amplification = 0.0;  // sampling mass, uniform in [50, 5000]

    Matrix covariance() const;
    double max_sigma() const { return std::max(sigma1, sigma2); }
};

struct DeepFieldTruth {
    std::vector<DeepFieldComponent> components;
};

/// Random two-label Gaussian mixture ("deep field"): each component gets a
/// fair-coin label, and clouds sample components with probability
/// proportional to amplification. The ground-truth mixture is returned for
/// comparison.
std::pair<CloudCollection, DeepFieldTruth> gen_deepfield(std::uint64_t seed,
                                                         const DeepFieldParams& params = {});

/// One draw from a label's mixture; `component` (if given) receives the
/// index into truth.components that produced the point.
Vector sample_deepfield_point(const DeepFieldTruth& truth, int label, Rng& rng,
                              int* component = nullptr);

struct ThreeLabelsParams {
    int clouds_per_label = 25;
    int points_per_cloud = 90;  // equal thirds per component
};

/// Three labels, each a triple of unit normals; every pair of labels shares
/// two of its three component means and all three share the origin.
CloudCollection gen_threelabels(std::uint64_t seed, const ThreeLabelsParams& params = {});

/// Dispatch by experiment with default parameters.
CloudCollection generate(Experiment experiment, std::uint64_t seed);

} // namespace cder
