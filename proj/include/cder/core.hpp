#pragma once

// Labeled, weighted point cloud collections and the pooling step that turns
// a collection into one flat weighted point set.
//
// Weighting convention: the training set carries total weight 1, every label
// carries total weight 1/L, every cloud carries an equal share of its
// label's weight, and every point an equal share of its cloud's weight:
//     w(x) = 1 / (L * N_i * |X_i|)
// where N_i counts the clouds sharing cloud i's label. Pre-supplied weights
// are kept as relative per-point emphasis but are rescaled so each cloud
// still receives exactly 1 / (L * N_i).

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace cder {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct PointCloud {
    std::string id;
    int label = 0;                   ///< index into CloudCollection::labels
    Matrix points;                   ///< one row per point
    std::optional<Vector> weights;   ///< aligned with rows, all positive

    int size() const { return static_cast<int>(points.rows()); }
    int dimension() const { return static_cast<int>(points.cols()); }
};

struct CloudCollection {
    std::vector<std::string> labels; ///< label names in first-appearance order
    std::vector<PointCloud> clouds;

    int num_labels() const { return static_cast<int>(labels.size()); }
    int num_clouds() const { return static_cast<int>(clouds.size()); }
    int dimension() const;

    /// Index of `name`, creating it if unseen.
    int label_index(const std::string& name);

    bool fully_weighted() const;

    /// Throws InputError if any structural invariant is violated.
    void validate() const;
};

/// The union of all clouds: one row per point, with weight, label, and
/// cloud of origin carried alongside.
struct PooledPoints {
    Matrix coords;          ///< n x D
    Vector weight;          ///< n, positive, sums to 1
    Eigen::VectorXi label;  ///< n
    Eigen::VectorXi cloud;  ///< n, index of the source cloud
    int num_labels = 0;

    int size() const { return static_cast<int>(coords.rows()); }
    int dimension() const { return static_cast<int>(coords.cols()); }
};

/// Returns a copy of `collection` with per-point weights set as described
/// above. Existing weights are kept as relative emphasis unless `overwrite`
/// is set, in which case they are replaced by the uniform scheme.
CloudCollection assign_weights(const CloudCollection& collection, bool overwrite = false);

/// Flattens a weighted collection, preserving cloud order then point order.
PooledPoints pool(const CloudCollection& collection);

/// Per-label weight sums of an arbitrary subset of pooled rows.
Vector region_label_weights(const PooledPoints& pooled, const std::vector<int>& rows);

} // namespace cder
