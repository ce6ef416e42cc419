#include "cder/classifier.hpp"
#include "cder/entropy.hpp"
#include "cder/errors.hpp"
#include "cder/io.hpp"
#include "cder/synth.hpp"
#include "cder/train.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

cder::Matrix to_matrix(const DoubleArray& array) {
    if (array.ndim() != 2) throw cder::InputError("points must be a 2-d array");
    const auto rows = static_cast<Eigen::Index>(array.shape(0));
    const auto cols = static_cast<Eigen::Index>(array.shape(1));
    cder::Matrix m(rows, cols);
    auto view = array.unchecked<2>();
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = view(r, c);
    return m;
}

std::optional<cder::Vector> to_weights(const std::optional<DoubleArray>& array) {
    if (!array) return std::nullopt;
    if (array->ndim() != 1) throw cder::InputError("weights must be a 1-d array");
    cder::Vector w(static_cast<Eigen::Index>(array->shape(0)));
    auto view = array->unchecked<1>();
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = view(i);
    return w;
}

py::array_t<double> from_matrix(const cder::Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    auto view = out.mutable_unchecked<2>();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) view(r, c) = m(r, c);
    return out;
}

py::array_t<double> from_vector(const cder::Vector& v) {
    py::array_t<double> out(v.size());
    auto view = out.mutable_unchecked<1>();
    for (Eigen::Index i = 0; i < v.size(); ++i) view(i) = v[i];
    return out;
}

cder::TrainConfig make_train_config(double theta, bool parsimonious) {
    cder::TrainConfig config;
    config.theta = theta;
    config.parsimonious = parsimonious;
    return config;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Entropy-guided cover-tree feature extraction for labeled point clouds";

    py::register_exception<cder::InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<cder::NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<cder::CloudCollection>(m, "Collection")
        .def(py::init([](const std::vector<std::string>& labels) {
                 cder::CloudCollection c;
                 c.labels = labels;
                 return c;
             }),
             py::arg("labels"))
        .def_property_readonly("labels",
                               [](const cder::CloudCollection& c) { return c.labels; })
        .def_property_readonly("num_clouds", &cder::CloudCollection::num_clouds)
        .def("add_cloud",
             [](cder::CloudCollection& c, const std::string& id, const std::string& label,
                const DoubleArray& points, const std::optional<DoubleArray>& weights) {
                 cder::PointCloud cloud;
                 cloud.id = id;
                 cloud.label = c.label_index(label);
                 cloud.points = to_matrix(points);
                 cloud.weights = to_weights(weights);
                 c.clouds.push_back(std::move(cloud));
             },
             py::arg("id"), py::arg("label"), py::arg("points"),
             py::arg("weights") = std::nullopt)
        .def("cloud_ids",
             [](const cder::CloudCollection& c) {
                 std::vector<std::string> ids;
                 for (const auto& cloud : c.clouds) ids.push_back(cloud.id);
                 return ids;
             })
        .def("cloud_label",
             [](const cder::CloudCollection& c, int index) {
                 return c.labels.at(static_cast<size_t>(c.clouds.at(static_cast<size_t>(index)).label));
             },
             py::arg("index"))
        .def("cloud_points",
             [](const cder::CloudCollection& c, int index) {
                 return from_matrix(c.clouds.at(static_cast<size_t>(index)).points);
             },
             py::arg("index"));

    py::class_<cder::CderModel>(m, "Model")
        .def_property_readonly("dimension", [](const cder::CderModel& m_) { return m_.dimension; })
        .def_property_readonly("theta", [](const cder::CderModel& m_) { return m_.theta; })
        .def_property_readonly("labels", [](const cder::CderModel& m_) { return m_.labels; })
        .def_property_readonly("num_coordinates", &cder::CderModel::num_coordinates)
        .def("featurize",
             [](const cder::CderModel& model, const DoubleArray& points,
                const std::optional<DoubleArray>& weights) {
                 return from_vector(cder::featurize(model, to_matrix(points), to_weights(weights)));
             },
             py::arg("points"), py::arg("weights") = std::nullopt)
        .def("predict",
             [](const cder::CderModel& model, const DoubleArray& points,
                const std::optional<DoubleArray>& weights) {
                 const cder::Prediction p =
                     cder::predict(model, to_matrix(points), to_weights(weights));
                 return py::make_tuple(model.labels.at(static_cast<size_t>(p.label)),
                                       from_vector(p.per_label_norms));
             },
             py::arg("points"), py::arg("weights") = std::nullopt)
        .def("save", &cder::save_model, py::arg("path"))
        .def_static("load", &cder::load_model, py::arg("path"));

    m.def("entropy",
          [](const std::vector<double>& weights) {
              cder::Vector w(static_cast<Eigen::Index>(weights.size()));
              for (size_t i = 0; i < weights.size(); ++i) w[static_cast<Eigen::Index>(i)] = weights[i];
              return cder::entropy(w);
          },
          py::arg("label_weights"), "Normalized label entropy of a weight vector, in [0,1].");

    m.def("generate",
          [](const std::string& experiment, std::uint64_t seed) {
              return cder::generate(cder::experiment_from_name(experiment), seed);
          },
          py::arg("experiment"), py::arg("seed") = 0,
          "Seeded synthetic collection: blobs, blocks, deepfield, or threelabels.");

    m.def("train",
          [](const cder::CloudCollection& collection, double theta, bool parsimonious) {
              return cder::train(collection, make_train_config(theta, parsimonious));
          },
          py::arg("collection"), py::arg("theta") = 0.5, py::arg("parsimonious") = true);

    m.def("cross_validate",
          [](const cder::CloudCollection& collection, int folds, std::uint64_t seed, double theta,
             bool parsimonious, bool disjoint_folds) {
              cder::CrossvalConfig config;
              config.folds = folds;
              config.seed = seed;
              config.disjoint_folds = disjoint_folds;
              config.train = make_train_config(theta, parsimonious);
              const cder::CvReport report = cder::cross_validate(collection, config);
              py::dict out;
              out["folds"] = report.folds;
              out["per_fold_accuracy"] = report.per_fold_accuracy;
              out["mean_accuracy"] = report.mean_accuracy;
              py::list confusion;
              for (int r = 0; r < report.confusion.rows(); ++r) {
                  py::list row;
                  for (int c = 0; c < report.confusion.cols(); ++c)
                      row.append(report.confusion(r, c));
                  confusion.append(row);
              }
              out["confusion"] = confusion;
              return out;
          },
          py::arg("collection"), py::arg("folds") = 5, py::arg("seed") = 0,
          py::arg("theta") = 0.5, py::arg("parsimonious") = true,
          py::arg("disjoint_folds") = false);

    m.def("read_collection", &cder::read_collection, py::arg("path"));
    m.def("write_collection", &cder::write_collection, py::arg("collection"), py::arg("path"));
}
