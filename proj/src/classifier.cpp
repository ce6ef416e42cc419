#include "cder/classifier.hpp"

#include "cder/errors.hpp"
#include "cder/rng.hpp"

#include <algorithm>
#include <cmath>

namespace cder {

Prediction predict(const CderModel& model, const Matrix& points,
                   const std::optional<Vector>& weights) {
    const Vector features = featurize(model, points, weights);

    Prediction p;
    p.per_label_norms = Vector::Zero(model.num_labels());
    for (int i = 0; i < model.num_coordinates(); ++i)
        p.per_label_norms[model.coordinates[i].label()] += features[i] * features[i];
    p.per_label_norms = p.per_label_norms.cwiseSqrt();

    p.label = 0;
    for (int lab = 1; lab < model.num_labels(); ++lab)
        if (p.per_label_norms[lab] > p.per_label_norms[p.label]) p.label = lab;
    int top_count = 0;
    for (int lab = 0; lab < model.num_labels(); ++lab)
        if (p.per_label_norms[lab] == p.per_label_norms[p.label]) ++top_count;
    p.low_confidence = top_count > 1;
    return p;
}

Prediction predict(const CderModel& model, const PointCloud& cloud) {
    return predict(model, cloud.points, cloud.weights);
}

namespace {

void shuffle(std::vector<int>& items, Rng& rng) {
    for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(0, i));
        std::swap(items[i], items[j]);
    }
}

CloudCollection subset(const CloudCollection& collection, const std::vector<int>& cloud_ids) {
    CloudCollection out;
    out.labels = collection.labels;
    for (int id : cloud_ids) out.clouds.push_back(collection.clouds[id]);
    return out;
}

} // namespace

CvReport cross_validate(const CloudCollection& collection, const CrossvalConfig& config) {
    collection.validate();
    const int l = collection.num_labels();
    if (config.folds < 1) throw InputError("folds must be >= 1");
    if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0))
        throw InputError("train fraction must lie in (0,1)");

    std::vector<std::vector<int>> by_label(l);
    for (int ci = 0; ci < collection.num_clouds(); ++ci)
        by_label[collection.clouds[ci].label].push_back(ci);
    for (int lab = 0; lab < l; ++lab)
        if (by_label[lab].size() < 2)
            throw InputError("cannot stratify: label '" + collection.labels[lab] +
                             "' has fewer than 2 clouds");

    CvReport report;
    report.folds = config.folds;
    report.confusion = Eigen::MatrixXi::Zero(l, l);

    Rng rng(config.seed, 0x63726f7373ull);  // "cross" stream

    // Disjoint mode shuffles once and partitions; resample mode reshuffles
    // per fold and takes a fresh stratified train/test cut each time.
    std::vector<std::vector<int>> disjoint_order = by_label;
    if (config.disjoint_folds)
        for (int lab = 0; lab < l; ++lab) shuffle(disjoint_order[lab], rng);

    for (int fold = 0; fold < config.folds; ++fold) {
        std::vector<int> train_ids;
        std::vector<int> test_ids;
        for (int lab = 0; lab < l; ++lab) {
            const int count = static_cast<int>(by_label[lab].size());
            if (config.disjoint_folds) {
                const auto& order = disjoint_order[lab];
                for (int i = 0; i < count; ++i) {
                    // chunk f = [f*count/folds, (f+1)*count/folds)
                    const bool in_test = i * config.folds >= fold * count &&
                                         i * config.folds < (fold + 1) * count;
                    (in_test ? test_ids : train_ids).push_back(order[i]);
                }
            } else {
                std::vector<int> order = by_label[lab];
                shuffle(order, rng);
                int n_train = static_cast<int>(std::llround(config.train_fraction * count));
                n_train = std::clamp(n_train, 1, count - 1);
                for (int i = 0; i < count; ++i)
                    (i < n_train ? train_ids : test_ids).push_back(order[i]);
            }
        }
        if (test_ids.empty()) throw InputError("cannot stratify: empty test fold");

        const CderModel model = train(subset(collection, train_ids), config.train);

        int correct = 0;
        for (int id : test_ids) {
            const PointCloud& cloud = collection.clouds[id];
            const Prediction p = predict(model, cloud);
            if (p.label == cloud.label) ++correct;
            report.confusion(cloud.label, p.label)++;
        }
        report.per_fold_accuracy.push_back(static_cast<double>(correct) /
                                           static_cast<double>(test_ids.size()));
    }

    report.mean_accuracy = 0.0;
    for (double acc : report.per_fold_accuracy) report.mean_accuracy += acc;
    report.mean_accuracy /= static_cast<double>(config.folds);
    return report;
}

} // namespace cder
