#pragma once

// Gaussian distributional coordinates and the trained model.
//
// A coordinate is a unit-mass Gaussian fitted to the points of one dominant
// label inside a selected region, amplified by
//     m = w_label * (1 - delta_entropy) * radius^D
// so that heavier, purer, and more remote regions count for more. Evaluating
// a coordinate on a weighted cloud X gives m * sum_j w_j g(x_j); a model is
// an ordered list of coordinates (coarse to fine) and featurize maps a
// cloud to the vector of those evaluations.

#include "cder/core.hpp"
#include "cder/entropy.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cder {

struct GaussianFit {
    Vector mean;
    Matrix covariance;
};

/// Weighted mean and second central moment, eigenvalue-floored at
/// `eps_floor` so the covariance stays positive definite for degenerate
/// regions (single points, collinear sets).
GaussianFit fit_gaussian(const Matrix& points, const Vector& weights, double eps_floor);

/// Eigenvalue floor used when fitting a region found at radius `radius`.
inline double covariance_floor(double radius) {
    return std::max(1e-12, 1e-6 * radius * radius);
}

struct Provenance {
    int adult = -1;
    int level = 0;
    double radius = 0.0;
    double delta_entropy = 0.0;
    double label_weight = 0.0;
};

class GaussianCoordinate {
public:
    GaussianCoordinate(int label, Vector mean, Matrix covariance, double coefficient,
                       Provenance provenance);

    int label() const { return label_; }
    const Vector& mean() const { return mean_; }
    const Matrix& covariance() const { return covariance_; }
    double coefficient() const { return coefficient_; }
    const Provenance& provenance() const { return provenance_; }
    int dimension() const { return static_cast<int>(mean_.size()); }

    /// Unit-mass Gaussian density at x.
    double density(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

    /// coefficient * sum_j weights[j] * density(points[j]).
    double evaluate(const Matrix& points, const Vector& weights) const;

private:
    int label_;
    Vector mean_;
    Matrix covariance_;
    double coefficient_;
    Provenance provenance_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double norm_const_ = 0.0;
};

/// Fits the coordinate for one dominant label of a build event. Throws
/// InputError if the label is not dominant in the event.
GaussianCoordinate build_coordinate(const PooledPoints& pooled, const BuildEvent& event,
                                    int label);

struct CderModel {
    int version = 1;
    int dimension = 0;
    double theta = 0.5;
    std::vector<std::string> labels;
    std::vector<GaussianCoordinate> coordinates;

    int num_labels() const { return static_cast<int>(labels.size()); }
    int num_coordinates() const { return static_cast<int>(coordinates.size()); }
};

/// Builds every coordinate of every event (heaviest dominant label first
/// within an event), then drops coordinates whose coefficient falls below
/// 1e-15 of the largest.
CderModel build_model(const PooledPoints& pooled, const std::vector<std::string>& labels,
                      const std::vector<BuildEvent>& events, double theta);

/// Per-coordinate evaluations of a cloud, in model order. Uniform weights
/// 1/|X| are used when no weights are given. Throws InputError on an empty
/// model or a dimension mismatch.
Vector featurize(const CderModel& model, const Matrix& points,
                 const std::optional<Vector>& weights = std::nullopt);
Vector featurize(const CderModel& model, const PointCloud& cloud);

// --- serialization ---------------------------------------------------------

nlohmann::ordered_json model_to_json(const CderModel& model);
CderModel model_from_json(const nlohmann::ordered_json& doc);
void save_model(const CderModel& model, const std::string& path);
CderModel load_model(const std::string& path);

/// Plot-ready description of every coordinate: ellipse axes (eigenvectors
/// scaled by sqrt of eigenvalues, largest first), coefficient, certainty
/// 1 - delta_entropy, level, and radius, in model (coarse-to-fine) order.
nlohmann::ordered_json export_regions_json(const CderModel& model);

} // namespace cder
