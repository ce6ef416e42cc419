#include "cder/errors.hpp"
#include "cder/gaussian.hpp"
#include "cder/rng.hpp"
#include "cder/synth.hpp"
#include "cder/train.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cder;

namespace {

constexpr double kTwoPi = 6.283185307179586476925;

GaussianCoordinate unit_coordinate(int label, double x, double y, double coeff = 1.0) {
    Vector mean(2);
    mean << x, y;
    Matrix cov = Matrix::Identity(2, 2);
    return GaussianCoordinate(label, mean, cov, coeff, Provenance{});
}

BuildEvent event_over(const PooledPoints& pooled, std::vector<int> region,
                      std::vector<int> dominant, int level, double radius, double delta) {
    BuildEvent e;
    e.adult = 0;
    e.level = level;
    e.radius = radius;
    e.dominant_labels = std::move(dominant);
    e.region = std::move(region);
    e.delta_entropy = delta;
    e.label_weights = region_label_weights(pooled, e.region);
    return e;
}

} // namespace

TEST_CASE("fit_gaussian: single point floors to eps * I") {
    Matrix pts(1, 2);
    pts << 3.0, -1.0;
    const GaussianFit fit = fit_gaussian(pts, Vector::Constant(1, 0.7), 1e-6);
    CHECK(fit.mean[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(fit.mean[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(fit.covariance(0, 0) == doctest::Approx(1e-6));
    CHECK(fit.covariance(1, 1) == doctest::Approx(1e-6));
    CHECK(fit.covariance(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("fit_gaussian: two symmetric points") {
    Matrix pts(2, 2);
    pts << 1.0, 0.0, -1.0, 0.0;
    const GaussianFit fit = fit_gaussian(pts, Vector::Constant(2, 0.5), 1e-9);
    CHECK(fit.mean.norm() == doctest::Approx(0.0));
    CHECK(fit.covariance(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.covariance(1, 1) == doctest::Approx(1e-9));  // floored flat direction
}

TEST_CASE("fit_gaussian: recovers a sampled Gaussian within 5 percent") {
    Rng rng(1234, 0);
    Vector mean(2);
    mean << 2.0, -1.0;
    // covariance [[1.0, 0.6], [0.6, 0.9]] via its Cholesky factor
    const double l11 = 1.0;
    const double l21 = 0.6;
    const double l22 = std::sqrt(0.9 - 0.36);
    const int n = 10000;
    Matrix pts(n, 2);
    for (int i = 0; i < n; ++i) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        pts(i, 0) = mean[0] + l11 * z1;
        pts(i, 1) = mean[1] + l21 * z1 + l22 * z2;
    }
    const GaussianFit fit = fit_gaussian(pts, Vector::Constant(n, 1.0 / n), 1e-12);
    CHECK(fit.mean[0] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(fit.mean[1] == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(fit.covariance(0, 0) == doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit.covariance(0, 1) == doctest::Approx(0.6).epsilon(0.05));
    CHECK(fit.covariance(1, 1) == doctest::Approx(0.9).epsilon(0.05));
}

TEST_CASE("fit_gaussian: rejects empty or mismatched input") {
    Matrix none(0, 2);
    CHECK_THROWS_AS(fit_gaussian(none, Vector(), 1e-9), InputError);
    Matrix one(1, 2);
    one << 0, 0;
    CHECK_THROWS_AS(fit_gaussian(one, Vector::Constant(2, 0.5), 1e-9), InputError);
    CHECK_THROWS_AS(fit_gaussian(one, Vector::Constant(1, -1.0), 1e-9), InputError);
}

TEST_CASE("density: value at the mode and in the tail") {
    const GaussianCoordinate g = unit_coordinate(0, 0.0, 0.0, 2.0);
    Matrix at_mode(1, 2);
    at_mode << 0.0, 0.0;
    // m * (2 pi)^(-D/2) * det(Sigma)^(-1/2)
    CHECK(g.evaluate(at_mode, Vector::Constant(1, 1.0)) ==
          doctest::Approx(2.0 / kTwoPi).epsilon(1e-12));

    Matrix far(1, 2);
    far << 11.0, 0.0;  // beyond ten sigma
    CHECK(g.evaluate(far, Vector::Constant(1, 1.0)) < 1e-20 * g.coefficient());
}

TEST_CASE("density: unit mass under grid quadrature") {
    SUBCASE("one dimension") {
        Vector mean(1);
        mean << 0.5;
        Matrix cov(1, 1);
        cov << 0.64;
        const GaussianCoordinate g(0, mean, cov, 1.0, Provenance{});
        const double sigma = 0.8;
        const int steps = 4000;
        const double lo = 0.5 - 6 * sigma;
        const double h = 12 * sigma / steps;
        double mass = 0.0;
        for (int i = 0; i < steps; ++i) {
            Eigen::RowVectorXd x(1);
            x << lo + (i + 0.5) * h;
            mass += g.density(x) * h;
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("two dimensions with correlation") {
        Vector mean(2);
        mean << 0.0, 0.0;
        Matrix cov(2, 2);
        cov << 1.0, 0.4, 0.4, 0.5;
        const GaussianCoordinate g(0, mean, cov, 1.0, Provenance{});
        const int steps = 240;
        const double span = 6.0;  // six sigma of the widest direction
        const double h = 2 * span / steps;
        double mass = 0.0;
        for (int i = 0; i < steps; ++i)
            for (int j = 0; j < steps; ++j) {
                Eigen::RowVectorXd x(2);
                x << -span + (i + 0.5) * h, -span + (j + 0.5) * h;
                mass += g.density(x) * h * h;
            }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("evaluate: linear in the weighted points") {
    const GaussianCoordinate g = unit_coordinate(0, 0.3, -0.2, 1.7);
    Rng rng(9, 9);
    Matrix a(4, 2);
    Matrix b(3, 2);
    for (int i = 0; i < 4; ++i) {
        a(i, 0) = rng.normal();
        a(i, 1) = rng.normal();
    }
    for (int i = 0; i < 3; ++i) {
        b(i, 0) = rng.normal();
        b(i, 1) = rng.normal();
    }
    const Vector wa = Vector::Constant(4, 0.25);
    const Vector wb = Vector::Constant(3, 1.0 / 3);
    Matrix both(7, 2);
    both << a, b;
    Vector w_both(7);
    w_both << 0.5 * wa, 0.5 * wb;
    const double joint = g.evaluate(both, w_both);
    const double split = 0.5 * g.evaluate(a, wa) + 0.5 * g.evaluate(b, wb);
    CHECK(joint == doctest::Approx(split).epsilon(1e-12));
}

TEST_CASE("evaluate: dimension mismatch rejected") {
    const GaussianCoordinate g = unit_coordinate(0, 0.0, 0.0);
    Matrix pts(1, 3);
    pts << 0, 0, 0;
    CHECK_THROWS_AS(g.evaluate(pts, Vector::Constant(1, 1.0)), InputError);
}

TEST_CASE("build_coordinate: coefficient formula and label filtering") {
    PooledPoints pooled;
    pooled.coords.resize(5, 2);
    pooled.coords << 0, 0, 1, 0, 0, 1, 5, 5, 6, 5;
    pooled.weight.resize(5);
    pooled.weight << 0.2, 0.2, 0.1, 0.25, 0.25;
    pooled.label.resize(5);
    pooled.label << 0, 0, 0, 1, 1;
    pooled.cloud = Eigen::VectorXi::Zero(5);
    pooled.num_labels = 2;

    SUBCASE("pure region: m = w * r^D") {
        const BuildEvent e = event_over(pooled, {0, 1, 2}, {0}, 3, 0.8, 0.0);
        const GaussianCoordinate g = build_coordinate(pooled, e, 0);
        CHECK(g.coefficient() == doctest::Approx(0.5 * 0.64).epsilon(1e-12));
        CHECK(g.label() == 0);
        // the fit saw only label-0 points
        CHECK(g.mean()[0] == doctest::Approx((0.2 * 0 + 0.2 * 1 + 0.1 * 0) / 0.5));
    }
    SUBCASE("erasing labels scales the coefficient by 1 - delta") {
        const BuildEvent e = event_over(pooled, {0, 1, 2, 3, 4}, {1}, 2, 1.0, 0.25);
        const GaussianCoordinate g = build_coordinate(pooled, e, 1);
        CHECK(g.coefficient() == doctest::Approx(0.5 * 0.75).epsilon(1e-12));
    }
    SUBCASE("non-dominant label rejected") {
        const BuildEvent e = event_over(pooled, {0, 1, 2, 3, 4}, {1}, 2, 1.0, 0.25);
        CHECK_THROWS_AS(build_coordinate(pooled, e, 0), InputError);
    }
    SUBCASE("same region at a later level is attenuated by theta^(dD)") {
        const BuildEvent coarse = event_over(pooled, {3, 4}, {1}, 2, 1.0, 0.0);
        const BuildEvent fine = event_over(pooled, {3, 4}, {1}, 5, 0.125, 0.0);
        const GaussianCoordinate gc = build_coordinate(pooled, coarse, 1);
        const GaussianCoordinate gf = build_coordinate(pooled, fine, 1);
        // three levels deeper at theta = 1/2 in the plane: (1/2)^(3*2)
        CHECK(gf.coefficient() / gc.coefficient() ==
              doctest::Approx(std::pow(0.5, 6)).epsilon(1e-12));
    }
}

TEST_CASE("featurize: order, weights, and errors") {
    CderModel model;
    model.dimension = 2;
    model.labels = {"a", "b"};
    model.coordinates.push_back(unit_coordinate(0, 0.0, 0.0, 1.0));
    model.coordinates.push_back(unit_coordinate(1, 4.0, 0.0, 2.0));

    Matrix cloud(3, 2);
    cloud << 0.1, 0.0, 3.9, 0.1, 1.5, -0.4;

    const Vector v = featurize(model, cloud);
    REQUIRE(v.size() == 2);

    // permutation of the points leaves the features unchanged
    Matrix shuffled(3, 2);
    shuffled << cloud.row(2), cloud.row(0), cloud.row(1);
    const Vector v2 = featurize(model, shuffled);
    CHECK(v2[0] == doctest::Approx(v[0]).epsilon(1e-12));
    CHECK(v2[1] == doctest::Approx(v[1]).epsilon(1e-12));

    // explicit uniform weights match the default
    const Vector v3 = featurize(model, cloud, Vector::Constant(3, 1.0 / 3));
    CHECK(v3[0] == doctest::Approx(v[0]).epsilon(1e-12));

    CderModel untrained;
    untrained.dimension = 2;
    untrained.labels = {"a", "b"};
    CHECK_THROWS_WITH_AS(featurize(untrained, cloud), "untrained model", InputError);
}

TEST_CASE("model: build drops only negligible coefficients") {
    const CloudCollection collection = gen_blobs(3);
    const CderModel model = train(collection);
    REQUIRE(model.num_coordinates() > 0);
    double max_coeff = 0.0;
    for (const auto& c : model.coordinates) max_coeff = std::max(max_coeff, c.coefficient());
    for (const auto& c : model.coordinates) {
        CHECK(c.coefficient() > 0.0);
        CHECK(c.coefficient() >= 1e-15 * max_coeff);
    }
}

TEST_CASE("model serialization: coefficient recomputes from provenance") {
    const CderModel model = train(gen_blobs(7, BlobsParams{5, 40, 2}));
    for (const auto& c : model.coordinates) {
        const double recomputed = c.provenance().label_weight *
                                  (1.0 - c.provenance().delta_entropy) *
                                  std::pow(c.provenance().radius, 2);
        CHECK(recomputed == doctest::Approx(c.coefficient()).epsilon(1e-12));
    }
}

TEST_CASE("model serialization: json round trip is byte identical") {
    const CderModel model = train(gen_blobs(5, BlobsParams{5, 40, 2}));
    const std::string once = model_to_json(model).dump(2);
    const CderModel loaded = model_from_json(nlohmann::ordered_json::parse(once));
    const std::string twice = model_to_json(loaded).dump(2);
    CHECK(once == twice);
    REQUIRE(loaded.num_coordinates() == model.num_coordinates());
    CHECK(loaded.labels == model.labels);
    CHECK(loaded.theta == model.theta);
    // loaded coordinates evaluate identically
    Matrix probe(1, 2);
    probe << 1.0, 2.0;
    const Vector w = Vector::Constant(1, 1.0);
    for (int i = 0; i < model.num_coordinates(); ++i)
        CHECK(loaded.coordinates[i].evaluate(probe, w) ==
              model.coordinates[i].evaluate(probe, w));
}

TEST_CASE("model serialization: bad documents rejected") {
    CHECK_THROWS_AS(model_from_json(nlohmann::ordered_json::parse("{}")), InputError);
    CHECK_THROWS_AS(
        model_from_json(nlohmann::ordered_json::parse(R"({"version": 9, "dimension": 2,
            "theta": 0.5, "labels": [], "coordinates": []})")),
        InputError);
}

TEST_CASE("export regions: ellipse axes reconstruct the covariance") {
    const CderModel model = train(gen_blobs(9, BlobsParams{5, 40, 2}));
    const nlohmann::ordered_json doc = export_regions_json(model);
    REQUIRE(doc.at("regions").size() == static_cast<size_t>(model.num_coordinates()));
    int last_level = 0;
    for (size_t i = 0; i < doc.at("regions").size(); ++i) {
        const auto& region = doc.at("regions")[i];
        const double certainty = region.at("certainty").get<double>();
        CHECK(certainty >= 0.0);
        CHECK(certainty <= 1.0);
        CHECK(region.at("level").get<int>() >= last_level);
        last_level = region.at("level").get<int>();

        Matrix sum = Matrix::Zero(2, 2);
        for (const auto& jaxis : region.at("axes")) {
            Vector axis(2);
            axis << jaxis[0].get<double>(), jaxis[1].get<double>();
            sum += axis * axis.transpose();
        }
        const Matrix& cov = model.coordinates[i].covariance();
        CHECK((sum - cov).cwiseAbs().maxCoeff() < 1e-9);
    }
}
