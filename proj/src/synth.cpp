#include "cder/synth.hpp"

#include "cder/errors.hpp"

#include <cmath>
#include <string>

namespace cder {

namespace {

// Stream tags so the experiments never share RNG streams.
constexpr std::uint64_t kBlobsTag = 1;
constexpr std::uint64_t kBlocksTag = 2;
constexpr std::uint64_t kDeepFieldTag = 3;
constexpr std::uint64_t kThreeLabelsTag = 4;

std::string cloud_id(const std::string& label, int index) {
    std::string num = std::to_string(index);
    if (num.size() < 2) num.insert(num.begin(), '0');
    return label + "-" + num;
}

} // namespace

Experiment experiment_from_name(std::string_view name) {
    if (name == "blobs") return Experiment::Blobs;
    if (name == "blocks") return Experiment::Blocks;
    if (name == "deepfield") return Experiment::DeepField;
    if (name == "threelabels") return Experiment::ThreeLabels;
    throw InputError("unknown experiment '" + std::string(name) +
                     "' (expected blobs, blocks, deepfield, or threelabels)");
}

const char* experiment_name(Experiment experiment) {
    switch (experiment) {
        case Experiment::Blobs: return "blobs";
        case Experiment::Blocks: return "blocks";
        case Experiment::DeepField: return "deepfield";
        case Experiment::ThreeLabels: return "threelabels";
    }
    return "?";
}

CloudCollection gen_blobs(std::uint64_t seed, const BlobsParams& params) {
    // Satellite sites per label; sigma 0.2, isotropic.
    const double magenta_sites[4] = {4.0, 5.0, -3.0, -6.0};
    const double green_sites[4] = {-4.0, -5.0, 3.0, 6.0};

    CloudCollection collection;
    collection.labels = {"magenta", "green"};
    const int points = params.core_points + 4 * params.satellite_points;

    for (int label = 0; label < 2; ++label) {
        const double* sites = label == 0 ? magenta_sites : green_sites;
        for (int ci = 0; ci < params.clouds_per_label; ++ci) {
            Rng rng(seed, kBlobsTag, static_cast<std::uint64_t>(label) * params.clouds_per_label + ci);
            PointCloud cloud;
            cloud.id = cloud_id(collection.labels[label], ci);
            cloud.label = label;
            cloud.points.resize(points, 2);
            int row = 0;
            for (int i = 0; i < params.core_points; ++i, ++row) {
                cloud.points(row, 0) = rng.normal();
                cloud.points(row, 1) = rng.normal();
            }
            for (int site = 0; site < 4; ++site) {
                for (int i = 0; i < params.satellite_points; ++i, ++row) {
                    cloud.points(row, 0) = rng.normal(sites[site], 0.2);
                    cloud.points(row, 1) = rng.normal(0.0, 0.2);
                }
            }
            collection.clouds.push_back(std::move(cloud));
        }
    }
    return collection;
}

CloudCollection gen_blocks(std::uint64_t seed, const BlocksParams& params) {
    // 0.1 x 0.1 squares centered at the label-specific and shared sites.
    const double magenta_sites[2][2] = {{0.25, 0.25}, {0.5, 0.5}};
    const double green_sites[2][2] = {{0.75, 0.75}, {0.5, 0.5}};

    CloudCollection collection;
    collection.labels = {"magenta", "green"};
    const int points = params.background_points + 2 * params.square_points;

    for (int label = 0; label < 2; ++label) {
        const auto& sites = label == 0 ? magenta_sites : green_sites;
        for (int ci = 0; ci < params.clouds_per_label; ++ci) {
            Rng rng(seed, kBlocksTag, static_cast<std::uint64_t>(label) * params.clouds_per_label + ci);
            PointCloud cloud;
            cloud.id = cloud_id(collection.labels[label], ci);
            cloud.label = label;
            cloud.points.resize(points, 2);
            int row = 0;
            for (int i = 0; i < params.background_points; ++i, ++row) {
                cloud.points(row, 0) = rng.uniform();
                cloud.points(row, 1) = rng.uniform();
            }
            for (int site = 0; site < 2; ++site) {
                for (int i = 0; i < params.square_points; ++i, ++row) {
                    cloud.points(row, 0) = rng.uniform(sites[site][0] - 0.05, sites[site][0] + 0.05);
                    cloud.points(row, 1) = rng.uniform(sites[site][1] - 0.05, sites[site][1] + 0.05);
                }
            }
            collection.clouds.push_back(std::move(cloud));
        }
    }
    return collection;
}

Matrix DeepFieldComponent::covariance() const {
    Matrix rot(2, 2);
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = sigma1 * sigma1;
    diag(1, 1) = sigma2 * sigma2;
    return rot * diag * rot.transpose();
}

Vector sample_deepfield_point(const DeepFieldTruth& truth, int label, Rng& rng, int* component) {
    double total = 0.0;
    for (const DeepFieldComponent& c : truth.components)
        if (c.label == label) total += c.amplification;
    if (total <= 0.0) throw InputError("label has no mixture components");

    const double pick = rng.uniform(0.0, total);
    double acc = 0.0;
    int chosen = -1;
    for (size_t i = 0; i < truth.components.size(); ++i) {
        if (truth.components[i].label != label) continue;
        acc += truth.components[i].amplification;
        chosen = static_cast<int>(i);
        if (pick < acc) break;
    }
    if (component) *component = chosen;

    const DeepFieldComponent& c = truth.components[static_cast<size_t>(chosen)];
    const double z1 = rng.normal() * c.sigma1;
    const double z2 = rng.normal() * c.sigma2;
    Vector point(2);
    point[0] = c.mean[0] + std::cos(c.angle) * z1 - std::sin(c.angle) * z2;
    point[1] = c.mean[1] + std::sin(c.angle) * z1 + std::cos(c.angle) * z2;
    return point;
}

std::pair<CloudCollection, DeepFieldTruth> gen_deepfield(std::uint64_t seed,
                                                         const DeepFieldParams& params) {
    DeepFieldTruth truth;
    Rng mixture_rng(seed, kDeepFieldTag, 0);
    for (bool valid = false; !valid;) {
        truth.components.clear();
        for (int i = 0; i < params.components; ++i) {
            DeepFieldComponent c;
            c.label = static_cast<int>(mixture_rng.uniform_int(0, 1));
            c.mean = Vector(2);
            c.mean[0] = mixture_rng.uniform(0.0, 10.0);
            c.mean[1] = mixture_rng.uniform(0.0, 10.0);
            // (0, 0.5]: flip the [0, 0.5) draw so zero sigma is excluded.
            c.sigma1 = 0.5 - mixture_rng.uniform(0.0, 0.5);
            c.sigma2 = 0.5 - mixture_rng.uniform(0.0, 0.5);
            c.angle = mixture_rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            c.amplification = mixture_rng.uniform(50.0, 5000.0);
            truth.components.push_back(std::move(c));
        }
        valid = true;
        for (int label = 0; label < 2; ++label) {
            bool seen = false;
            for (const DeepFieldComponent& c : truth.components) seen |= c.label == label;
            valid &= seen;
        }
    }

    CloudCollection collection;
    collection.labels = {"magenta", "green"};
    for (int label = 0; label < 2; ++label) {
        Rng count_rng(seed, kDeepFieldTag, 1 + label);
        const int clouds = static_cast<int>(count_rng.uniform_int(params.min_clouds, params.max_clouds));
        for (int ci = 0; ci < clouds; ++ci) {
            Rng rng(seed, kDeepFieldTag, 16 + static_cast<std::uint64_t>(label) * 4096 + ci);
            const int points = static_cast<int>(rng.uniform_int(params.min_points, params.max_points));
            PointCloud cloud;
            cloud.id = cloud_id(collection.labels[label], ci);
            cloud.label = label;
            cloud.points.resize(points, 2);
            for (int i = 0; i < points; ++i)
                cloud.points.row(i) = sample_deepfield_point(truth, label, rng).transpose();
            collection.clouds.push_back(std::move(cloud));
        }
    }
    return {std::move(collection), std::move(truth)};
}

CloudCollection gen_threelabels(std::uint64_t seed, const ThreeLabelsParams& params) {
    const double root3 = std::sqrt(3.0);
    // Component means per label; every pair of labels shares two of them.
    const double sites[3][3][2] = {
        {{0.0, 0.0}, {4.0, 0.0}, {-2.0, 2.0 * root3}},
        {{0.0, 0.0}, {-2.0, 2.0 * root3}, {-2.0, -2.0 * root3}},
        {{0.0, 0.0}, {-2.0, -2.0 * root3}, {4.0, 0.0}},
    };

    CloudCollection collection;
    collection.labels = {"magenta", "green", "orange"};

    for (int label = 0; label < 3; ++label) {
        for (int ci = 0; ci < params.clouds_per_label; ++ci) {
            Rng rng(seed, kThreeLabelsTag,
                    static_cast<std::uint64_t>(label) * params.clouds_per_label + ci);
            PointCloud cloud;
            cloud.id = cloud_id(collection.labels[label], ci);
            cloud.label = label;
            cloud.points.resize(params.points_per_cloud, 2);
            for (int i = 0; i < params.points_per_cloud; ++i) {
                const int comp = i % 3;
                cloud.points(i, 0) = rng.normal(sites[label][comp][0], 1.0);
                cloud.points(i, 1) = rng.normal(sites[label][comp][1], 1.0);
            }
            collection.clouds.push_back(std::move(cloud));
        }
    }
    return collection;
}

CloudCollection generate(Experiment experiment, std::uint64_t seed) {
    switch (experiment) {
        case Experiment::Blobs: return gen_blobs(seed);
        case Experiment::Blocks: return gen_blocks(seed);
        case Experiment::DeepField: return gen_deepfield(seed).first;
        case Experiment::ThreeLabels: return gen_threelabels(seed);
    }
    throw InputError("unknown experiment");
}

} // namespace cder
