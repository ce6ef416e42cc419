#include "cder/gaussian.hpp"

#include "cder/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cder {

namespace {

constexpr double kTwoPi = 6.283185307179586476925;
constexpr double kCoefficientFloor = 1e-15;  // relative to the largest coefficient

} // namespace

GaussianFit fit_gaussian(const Matrix& points, const Vector& weights, double eps_floor) {
    const int n = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    if (n < 1) throw InputError("cannot fit a Gaussian to an empty point set");
    if (weights.size() != n) throw InputError("weight vector does not match point count");
    if (!(weights.array() > 0.0).all()) throw InputError("weights must be positive");

    const double total = weights.sum();
    GaussianFit fit;
    fit.mean = (weights.transpose() * points).transpose() / total;

    Matrix centered = points.rowwise() - fit.mean.transpose();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i)
        cov += weights[i] * (centered.row(i).transpose() * centered.row(i));
    cov /= total;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");
    Eigen::VectorXd values = eig.eigenvalues().cwiseMax(eps_floor);
    Eigen::MatrixXd floored =
        eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    fit.covariance = 0.5 * (floored + floored.transpose());  // exact symmetry
    return fit;
}

GaussianCoordinate::GaussianCoordinate(int label, Vector mean, Matrix covariance,
                                       double coefficient, Provenance provenance)
    : label_(label),
      mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      coefficient_(coefficient),
      provenance_(provenance) {
    const int d = dimension();
    if (covariance_.rows() != d || covariance_.cols() != d)
        throw InputError("covariance shape does not match the mean");
    llt_.compute(covariance_);
    if (llt_.info() != Eigen::Success)
        throw NumericError("covariance is not positive definite");
    const double sqrt_det = llt_.matrixL().determinant();
    norm_const_ = std::pow(kTwoPi, -0.5 * d) / sqrt_det;
    if (!std::isfinite(norm_const_))
        throw NumericError("degenerate covariance normalization");
}

double GaussianCoordinate::density(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    Eigen::VectorXd diff = x.transpose() - mean_;
    const double quad = diff.dot(llt_.solve(diff));
    return norm_const_ * std::exp(-0.5 * quad);
}

double GaussianCoordinate::evaluate(const Matrix& points, const Vector& weights) const {
    if (points.cols() != dimension())
        throw InputError("cloud dimension " + std::to_string(points.cols()) +
                         " does not match coordinate dimension " + std::to_string(dimension()));
    if (weights.size() != points.rows())
        throw InputError("weight vector does not match point count");
    double acc = 0.0;
    for (int i = 0; i < points.rows(); ++i) acc += weights[i] * density(points.row(i));
    return coefficient_ * acc;
}

GaussianCoordinate build_coordinate(const PooledPoints& pooled, const BuildEvent& event,
                                    int label) {
    if (std::find(event.dominant_labels.begin(), event.dominant_labels.end(), label) ==
        event.dominant_labels.end())
        throw InputError("label " + std::to_string(label) + " is not dominant in this region");

    std::vector<int> rows;
    for (int r : event.region)
        if (pooled.label[r] == label) rows.push_back(r);

    Matrix points(static_cast<Eigen::Index>(rows.size()), pooled.dimension());
    Vector weights(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        points.row(static_cast<Eigen::Index>(i)) = pooled.coords.row(rows[i]);
        weights[static_cast<Eigen::Index>(i)] = pooled.weight[rows[i]];
    }

    const GaussianFit fit = fit_gaussian(points, weights, covariance_floor(event.radius));
    const double label_weight = event.label_weights[label];
    const double coefficient = label_weight * (1.0 - event.delta_entropy) *
                               std::pow(event.radius, pooled.dimension());
    return GaussianCoordinate(label, fit.mean, fit.covariance, coefficient,
                              Provenance{event.adult, event.level, event.radius,
                                         event.delta_entropy, label_weight});
}

CderModel build_model(const PooledPoints& pooled, const std::vector<std::string>& labels,
                      const std::vector<BuildEvent>& events, double theta) {
    CderModel model;
    model.dimension = pooled.dimension();
    model.theta = theta;
    model.labels = labels;

    std::vector<GaussianCoordinate> raw;
    for (const BuildEvent& event : events)
        for (int label : event.dominant_labels)
            raw.push_back(build_coordinate(pooled, event, label));

    double max_coeff = 0.0;
    for (const GaussianCoordinate& c : raw) max_coeff = std::max(max_coeff, c.coefficient());
    for (GaussianCoordinate& c : raw)
        if (c.coefficient() > 0.0 && c.coefficient() >= kCoefficientFloor * max_coeff)
            model.coordinates.push_back(std::move(c));
    return model;
}

Vector featurize(const CderModel& model, const Matrix& points,
                 const std::optional<Vector>& weights) {
    if (model.coordinates.empty()) throw InputError("untrained model");
    if (points.rows() < 1) throw InputError("empty cloud");
    if (points.cols() != model.dimension)
        throw InputError("cloud dimension " + std::to_string(points.cols()) +
                         " does not match model dimension " + std::to_string(model.dimension));
    const Vector w = weights ? *weights
                             : Vector::Constant(points.rows(), 1.0 / static_cast<double>(points.rows()));
    Vector features(model.num_coordinates());
    for (int i = 0; i < model.num_coordinates(); ++i)
        features[i] = model.coordinates[i].evaluate(points, w);
    return features;
}

Vector featurize(const CderModel& model, const PointCloud& cloud) {
    return featurize(model, cloud.points, cloud.weights);
}

// --- serialization ---------------------------------------------------------

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json vector_to_json(const Vector& v) {
    ordered_json arr = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

ordered_json matrix_to_json_row_major(const Matrix& m) {
    ordered_json arr = ordered_json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
}

} // namespace

ordered_json model_to_json(const CderModel& model) {
    ordered_json doc;
    doc["version"] = model.version;
    doc["dimension"] = model.dimension;
    doc["theta"] = model.theta;
    doc["labels"] = model.labels;
    doc["coordinates"] = ordered_json::array();
    for (const GaussianCoordinate& c : model.coordinates) {
        ordered_json jc;
        jc["label"] = c.label();
        jc["mean"] = vector_to_json(c.mean());
        jc["covariance"] = matrix_to_json_row_major(c.covariance());
        jc["coefficient"] = c.coefficient();
        jc["level"] = c.provenance().level;
        jc["radius"] = c.provenance().radius;
        jc["delta_entropy"] = c.provenance().delta_entropy;
        jc["weight"] = c.provenance().label_weight;
        doc["coordinates"].push_back(std::move(jc));
    }
    return doc;
}

CderModel model_from_json(const ordered_json& doc) {
    try {
        CderModel model;
        model.version = doc.at("version").get<int>();
        if (model.version != 1)
            throw InputError("unsupported model version " + std::to_string(model.version));
        model.dimension = doc.at("dimension").get<int>();
        model.theta = doc.at("theta").get<double>();
        for (const auto& name : doc.at("labels")) model.labels.push_back(name.get<std::string>());

        const int d = model.dimension;
        for (const auto& jc : doc.at("coordinates")) {
            Vector mean(d);
            const auto& jmean = jc.at("mean");
            if (static_cast<int>(jmean.size()) != d)
                throw InputError("coordinate mean has wrong dimension");
            for (int i = 0; i < d; ++i) mean[i] = jmean[i].get<double>();

            const auto& jcov = jc.at("covariance");
            if (static_cast<int>(jcov.size()) != d * d)
                throw InputError("coordinate covariance has wrong shape");
            Matrix cov(d, d);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) cov(r, c) = jcov[r * d + c].get<double>();

            Provenance prov;
            prov.level = jc.at("level").get<int>();
            prov.radius = jc.at("radius").get<double>();
            prov.delta_entropy = jc.at("delta_entropy").get<double>();
            prov.label_weight = jc.at("weight").get<double>();

            model.coordinates.emplace_back(jc.at("label").get<int>(), std::move(mean),
                                           std::move(cov), jc.at("coefficient").get<double>(),
                                           prov);
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad model file: ") + e.what());
    }
}

void save_model(const CderModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    out << model_to_json(model).dump(2) << "\n";
}

CderModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    return model_from_json(doc);
}

ordered_json export_regions_json(const CderModel& model) {
    ordered_json doc;
    doc["labels"] = model.labels;
    doc["regions"] = ordered_json::array();
    for (const GaussianCoordinate& c : model.coordinates) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.covariance());
        if (eig.info() != Eigen::Success)
            throw NumericError("covariance eigendecomposition failed");

        ordered_json axes = ordered_json::array();
        const int d = c.dimension();
        for (int i = d - 1; i >= 0; --i) {  // largest eigenvalue first
            Eigen::VectorXd axis = eig.eigenvectors().col(i) * std::sqrt(eig.eigenvalues()[i]);
            // Deterministic sign: first nonzero component positive.
            for (int k = 0; k < d; ++k) {
                if (axis[k] != 0.0) {
                    if (axis[k] < 0.0) axis = -axis;
                    break;
                }
            }
            axes.push_back(vector_to_json(axis));
        }

        ordered_json jr;
        jr["label"] = c.label();
        jr["mean"] = vector_to_json(c.mean());
        jr["axes"] = std::move(axes);
        jr["coefficient"] = c.coefficient();
        jr["certainty"] = 1.0 - c.provenance().delta_entropy;
        jr["level"] = c.provenance().level;
        jr["radius"] = c.provenance().radius;
        doc["regions"].push_back(std::move(jr));
    }
    return doc;
}

} // namespace cder
