#include "cder/core.hpp"

#include "cder/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cder {

int CloudCollection::dimension() const {
    if (clouds.empty()) throw InputError("no clouds");
    return clouds.front().dimension();
}

int CloudCollection::label_index(const std::string& name) {
    auto it = std::find(labels.begin(), labels.end(), name);
    if (it != labels.end()) return static_cast<int>(it - labels.begin());
    labels.push_back(name);
    return static_cast<int>(labels.size()) - 1;
}

bool CloudCollection::fully_weighted() const {
    return std::all_of(clouds.begin(), clouds.end(),
                       [](const PointCloud& c) { return c.weights.has_value(); });
}

void CloudCollection::validate() const {
    if (clouds.empty()) throw InputError("no clouds");
    const int l = num_labels();
    const int d = clouds.front().dimension();
    if (d < 1) throw InputError("points must have dimension >= 1");

    std::vector<int> label_use(l, 0);
    for (const PointCloud& c : clouds) {
        if (c.size() < 1) throw InputError("cloud '" + c.id + "' is empty");
        if (c.dimension() != d)
            throw InputError("cloud '" + c.id + "' has dimension " +
                             std::to_string(c.dimension()) + ", expected " + std::to_string(d));
        if (c.label < 0 || c.label >= l)
            throw InputError("cloud '" + c.id + "' has label index outside the label set");
        label_use[c.label]++;
        if (!c.points.allFinite())
            throw InputError("cloud '" + c.id + "' contains non-finite coordinates");
        if (c.weights) {
            if (c.weights->size() != c.size())
                throw InputError("cloud '" + c.id + "' has " + std::to_string(c.weights->size()) +
                                 " weights for " + std::to_string(c.size()) + " points");
            if (!(c.weights->array() > 0.0).all() || !c.weights->allFinite())
                throw InputError("cloud '" + c.id + "' has non-positive weights");
        }
    }
    for (int i = 0; i < l; ++i)
        if (label_use[i] == 0)
            throw InputError("label '" + labels[i] + "' appears on no cloud");
}

CloudCollection assign_weights(const CloudCollection& collection, bool overwrite) {
    collection.validate();
    CloudCollection out = collection;
    const int l = out.num_labels();

    std::vector<int> clouds_with_label(l, 0);
    for (const PointCloud& c : out.clouds) clouds_with_label[c.label]++;

    for (PointCloud& c : out.clouds) {
        const double cloud_share = 1.0 / (static_cast<double>(l) * clouds_with_label[c.label]);
        if (!c.weights || overwrite) {
            c.weights = Vector::Constant(c.size(), cloud_share / c.size());
        } else {
            // Keep relative per-point emphasis, rescale the cloud total.
            const double total = c.weights->sum();
            c.weights = (*c.weights) * (cloud_share / total);
        }
    }
    return out;
}

PooledPoints pool(const CloudCollection& collection) {
    collection.validate();
    if (!collection.fully_weighted())
        throw InputError("collection is unweighted; assign weights first");

    int n = 0;
    for (const PointCloud& c : collection.clouds) n += c.size();
    const int d = collection.dimension();

    PooledPoints out;
    out.coords.resize(n, d);
    out.weight.resize(n);
    out.label.resize(n);
    out.cloud.resize(n);
    out.num_labels = collection.num_labels();

    int row = 0;
    for (int ci = 0; ci < collection.num_clouds(); ++ci) {
        const PointCloud& c = collection.clouds[ci];
        for (int j = 0; j < c.size(); ++j, ++row) {
            out.coords.row(row) = c.points.row(j);
            out.weight[row] = (*c.weights)[j];
            out.label[row] = c.label;
            out.cloud[row] = ci;
        }
    }
    return out;
}

Vector region_label_weights(const PooledPoints& pooled, const std::vector<int>& rows) {
    Vector w = Vector::Zero(pooled.num_labels);
    for (int r : rows) w[pooled.label[r]] += pooled.weight[r];
    return w;
}

} // namespace cder
