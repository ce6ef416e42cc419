#include "cder/core.hpp"
#include "cder/errors.hpp"
#include "cder/io.hpp"
#include "cder/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace cder;

namespace {

// Regularized upper incomplete gamma Q(a, x), series + continued fraction.
// Test-side oracle for chi-square p-values.
double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return std::nan("");
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // lower series
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-14) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    // continued fraction
    double b = x + 1.0 - a;
    double c = 1e300;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-290) d = 1e-290;
        c = b + an / c;
        if (std::abs(c) < 1e-290) c = 1e-290;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-14) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

std::string collection_fingerprint(const CloudCollection& c) {
    std::ostringstream os;
    write_collection_csv(c, os);
    return os.str();
}

} // namespace

TEST_CASE("gamma_q sanity: chi-square tail values") {
    // q(1 dof at x = 3.841) ~ 0.05, q(4 dof at 13.277) ~ 0.01
    CHECK(gamma_q(0.5, 3.841 / 2) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(gamma_q(2.0, 13.277 / 2) == doctest::Approx(0.01).epsilon(0.02));
}

TEST_CASE("blobs: counts, dimension, determinism") {
    const CloudCollection c = gen_blobs(7);
    CHECK(c.num_clouds() == 50);
    CHECK(c.labels == std::vector<std::string>{"magenta", "green"});
    for (const PointCloud& cloud : c.clouds) {
        CHECK(cloud.size() == 108);
        CHECK(cloud.dimension() == 2);
    }
    CHECK(collection_fingerprint(c) == collection_fingerprint(gen_blobs(7)));
    CHECK(collection_fingerprint(c) != collection_fingerprint(gen_blobs(8)));
}

TEST_CASE("blobs: per-label pooled weight is one half") {
    const PooledPoints pooled = pool(assign_weights(gen_blobs(3)));
    CHECK(region_label_weights(pooled, [&] {
              std::vector<int> all(pooled.size());
              for (int i = 0; i < pooled.size(); ++i) all[i] = i;
              return all;
          }())[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("blobs: satellites sit where they should") {
    const CloudCollection c = gen_blobs(5, BlobsParams{3, 0, 50});
    // with no core points, every point comes from a satellite site
    const double magenta_sites[4] = {4, 5, -3, -6};
    const double green_sites[4] = {-4, -5, 3, 6};
    for (const PointCloud& cloud : c.clouds) {
        const double* sites = cloud.label == 0 ? magenta_sites : green_sites;
        for (int i = 0; i < cloud.size(); ++i) {
            double best = 1e9;
            for (int s = 0; s < 4; ++s)
                best = std::min(best, std::abs(cloud.points(i, 0) - sites[s]));
            CHECK(best < 1.5);              // within ~7 sigma of its site
            CHECK(std::abs(cloud.points(i, 1)) < 1.5);
        }
    }
}

TEST_CASE("blocks: counts and geometry bound") {
    const CloudCollection c = gen_blocks(9);
    CHECK(c.num_clouds() == 200);
    for (const PointCloud& cloud : c.clouds) {
        CHECK(cloud.size() == 34);
        for (int i = 0; i < cloud.size(); ++i) {
            CHECK(cloud.points(i, 0) >= -0.05);
            CHECK(cloud.points(i, 0) <= 1.05);
            CHECK(cloud.points(i, 1) >= -0.05);
            CHECK(cloud.points(i, 1) <= 1.05);
        }
    }
    CHECK(collection_fingerprint(c) == collection_fingerprint(gen_blocks(9)));
}

TEST_CASE("deepfield: structural ranges") {
    const auto [c, truth] = gen_deepfield(2);
    CHECK(truth.components.size() == 50);
    int per_label_clouds[2] = {0, 0};
    for (const PointCloud& cloud : c.clouds) {
        CHECK(cloud.size() >= 50);
        CHECK(cloud.size() <= 500);
        per_label_clouds[cloud.label]++;
    }
    for (int lab = 0; lab < 2; ++lab) {
        CHECK(per_label_clouds[lab] >= 20);
        CHECK(per_label_clouds[lab] <= 40);
    }
    for (const DeepFieldComponent& comp : truth.components) {
        CHECK(comp.mean[0] >= 0.0);
        CHECK(comp.mean[0] <= 10.0);
        CHECK(comp.sigma1 > 0.0);
        CHECK(comp.sigma1 <= 0.5);
        CHECK(comp.amplification >= 50.0);
        CHECK(comp.amplification <= 5000.0);
        // covariance reconstructs the principal sigmas
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(comp.covariance());
        const double lo = std::min(comp.sigma1, comp.sigma2);
        const double hi = std::max(comp.sigma1, comp.sigma2);
        CHECK(std::sqrt(eig.eigenvalues()[0]) == doctest::Approx(lo).epsilon(1e-9));
        CHECK(std::sqrt(eig.eigenvalues()[1]) == doctest::Approx(hi).epsilon(1e-9));
    }
}

TEST_CASE("deepfield: sampler occupancy matches the mixture (chi-square)") {
    const auto [c, truth] = gen_deepfield(4);
    for (int label = 0; label < 2; ++label) {
        std::vector<int> comp_ids;
        double total_amp = 0.0;
        for (size_t i = 0; i < truth.components.size(); ++i)
            if (truth.components[i].label == label) {
                comp_ids.push_back(static_cast<int>(i));
                total_amp += truth.components[i].amplification;
            }
        REQUIRE(comp_ids.size() >= 2);

        std::vector<int> counts(truth.components.size(), 0);
        Rng rng(4242, 17, label);
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) {
            int comp = -1;
            sample_deepfield_point(truth, label, rng, &comp);
            counts[comp]++;
        }
        double chi2 = 0.0;
        for (int id : comp_ids) {
            const double expected = draws * truth.components[id].amplification / total_amp;
            const double diff = counts[id] - expected;
            chi2 += diff * diff / expected;
        }
        const double dof = static_cast<double>(comp_ids.size() - 1);
        const double p = gamma_q(dof / 2.0, chi2 / 2.0);
        CHECK(p > 0.01);
    }
}

TEST_CASE("threelabels: shared component structure") {
    const CloudCollection c = gen_threelabels(1);
    CHECK(c.num_clouds() == 75);
    CHECK(c.labels == std::vector<std::string>{"magenta", "green", "orange"});
    for (const PointCloud& cloud : c.clouds) CHECK(cloud.size() == 90);

    // frozen site table: every pair of labels shares exactly two means and
    // all three share the origin
    const double root3 = std::sqrt(3.0);
    const double sites[3][3][2] = {
        {{0, 0}, {4, 0}, {-2, 2 * root3}},
        {{0, 0}, {-2, 2 * root3}, {-2, -2 * root3}},
        {{0, 0}, {-2, -2 * root3}, {4, 0}},
    };
    for (int a = 0; a < 3; ++a) {
        bool has_origin = false;
        for (int i = 0; i < 3; ++i) has_origin |= sites[a][i][0] == 0 && sites[a][i][1] == 0;
        CHECK(has_origin);
        for (int b = 0; b < a; ++b) {
            int shared = 0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    shared += sites[a][i][0] == sites[b][j][0] && sites[a][i][1] == sites[b][j][1];
            CHECK(shared == 2);
        }
    }

    // empirical component means of the generated clouds match the table
    for (int label = 0; label < 3; ++label) {
        Eigen::RowVector2d sum[3] = {{0, 0}, {0, 0}, {0, 0}};
        int n[3] = {0, 0, 0};
        for (const PointCloud& cloud : c.clouds) {
            if (cloud.label != label) continue;
            for (int i = 0; i < cloud.size(); ++i) {
                sum[i % 3] += cloud.points.row(i);
                n[i % 3]++;
            }
        }
        for (int comp = 0; comp < 3; ++comp) {
            const Eigen::RowVector2d mean = sum[comp] / n[comp];
            CHECK(mean[0] == doctest::Approx(sites[label][comp][0]).epsilon(0.15));
            CHECK(std::abs(mean[1] - sites[label][comp][1]) < 0.15);
        }
    }
}

TEST_CASE("threelabels: label weight totals are thirds") {
    const PooledPoints pooled = pool(assign_weights(gen_threelabels(6)));
    std::vector<int> all(pooled.size());
    for (int i = 0; i < pooled.size(); ++i) all[i] = i;
    const Vector w = region_label_weights(pooled, all);
    for (int lab = 0; lab < 3; ++lab)
        CHECK(w[lab] == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("generate dispatch and experiment names") {
    CHECK(experiment_from_name("blobs") == Experiment::Blobs);
    CHECK(experiment_from_name("deepfield") == Experiment::DeepField);
    CHECK_THROWS_AS(experiment_from_name("nope"), InputError);
    for (Experiment e : {Experiment::Blobs, Experiment::Blocks, Experiment::DeepField,
                         Experiment::ThreeLabels})
        CHECK(experiment_from_name(experiment_name(e)) == e);
    const CloudCollection c = generate(Experiment::ThreeLabels, 3);
    CHECK(c.num_labels() == 3);
}

TEST_CASE("generators validate cleanly") {
    gen_blobs(1, BlobsParams{2, 5, 1}).validate();
    gen_blocks(1, BlocksParams{2, 5, 1}).validate();
    gen_threelabels(1, ThreeLabelsParams{2, 9}).validate();
    gen_deepfield(1).first.validate();
}
