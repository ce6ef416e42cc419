#pragma once

// Label prediction and the cross-validation harness.
//
// A cloud is scored per label by the Euclidean norm of that label's
// coordinate evaluations; the largest norm wins. Cross-validation retrains
// the whole pipeline on stratified 80/20 resamples of the clouds (never of
// the points), five times by default.

#include "cder/core.hpp"
#include "cder/gaussian.hpp"
#include "cder/train.hpp"

#include <cstdint>

namespace cder {

struct Prediction {
    int label = 0;
    Vector per_label_norms;
    /// Set when the top norm is tied (including the all-zero case), in
    /// which case the lowest label index was chosen.
    bool low_confidence = false;
};

Prediction predict(const CderModel& model, const Matrix& points,
                   const std::optional<Vector>& weights = std::nullopt);
Prediction predict(const CderModel& model, const PointCloud& cloud);

struct CrossvalConfig {
    int folds = 5;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    /// Classical disjoint partition instead of independent resamples.
    bool disjoint_folds = false;
    TrainConfig train;
};

struct CvReport {
    int folds = 0;
    std::vector<double> per_fold_accuracy;
    double mean_accuracy = 0.0;
    Eigen::MatrixXi confusion;  ///< rows = true label, cols = predicted
};

/// Stratified by label; deterministic for a fixed seed. Throws InputError
/// when any label has fewer than two clouds.
CvReport cross_validate(const CloudCollection& collection, const CrossvalConfig& config = {});

} // namespace cder
