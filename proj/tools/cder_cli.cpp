// cder: entropy-guided feature extraction and classification for labeled
// point clouds.
//
// Subcommands: generate, train, predict, crossval, inspect, export-regions.
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include "cder/classifier.hpp"
#include "cder/errors.hpp"
#include "cder/io.hpp"
#include "cder/synth.hpp"
#include "cder/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using cder::format_double;
using ordered_json = nlohmann::ordered_json;

struct GlobalOptions {
    double theta = 0.5;
    std::uint64_t seed = 0;
    bool non_parsimonious = false;
    bool json = false;
};

cder::TrainConfig train_config(const GlobalOptions& opts) {
    cder::TrainConfig config;
    config.theta = opts.theta;
    config.parsimonious = !opts.non_parsimonious;
    return config;
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw cder::InputError("cannot open '" + path + "' for writing");
    out << body;
}

int cmd_generate(const GlobalOptions& opts, const std::string& experiment,
                 const std::string& out_path, const std::string& truth_path,
                 int clouds_override, int points_override) {
    const cder::Experiment exp = cder::experiment_from_name(experiment);

    cder::CloudCollection collection;
    cder::DeepFieldTruth truth;
    switch (exp) {
        case cder::Experiment::Blobs: {
            cder::BlobsParams params;
            if (clouds_override > 0) params.clouds_per_label = clouds_override;
            if (points_override > 0) params.core_points = points_override;
            collection = cder::gen_blobs(opts.seed, params);
            break;
        }
        case cder::Experiment::Blocks: {
            cder::BlocksParams params;
            if (clouds_override > 0) params.clouds_per_label = clouds_override;
            if (points_override > 0) params.background_points = points_override;
            collection = cder::gen_blocks(opts.seed, params);
            break;
        }
        case cder::Experiment::DeepField: {
            auto [c, t] = cder::gen_deepfield(opts.seed);
            collection = std::move(c);
            truth = std::move(t);
            break;
        }
        case cder::Experiment::ThreeLabels: {
            cder::ThreeLabelsParams params;
            if (clouds_override > 0) params.clouds_per_label = clouds_override;
            if (points_override > 0) params.points_per_cloud = points_override;
            collection = cder::gen_threelabels(opts.seed, params);
            break;
        }
    }

    cder::write_collection(collection, out_path);
    if (!truth_path.empty()) {
        ordered_json doc;
        doc["components"] = ordered_json::array();
        for (const cder::DeepFieldComponent& c : truth.components) {
            ordered_json jc;
            jc["label"] = c.label;
            jc["mean"] = {c.mean[0], c.mean[1]};
            jc["sigma"] = {c.sigma1, c.sigma2};
            jc["angle"] = c.angle;
            jc["amplification"] = c.amplification;
            doc["components"].push_back(std::move(jc));
        }
        write_text_file(truth_path, doc.dump(2) + "\n");
    }

    std::cout << "wrote " << collection.num_clouds() << " clouds ("
              << collection.num_labels() << " labels) to " << out_path << "\n";
    return 0;
}

int cmd_train(const GlobalOptions& opts, const std::string& data_path,
              const std::string& model_path) {
    const cder::CloudCollection collection = cder::read_collection(data_path);
    const cder::TrainOutput out = cder::train_detailed(collection, train_config(opts));
    cder::save_model(out.model, model_path);

    double min_coeff = 0.0;
    double max_coeff = 0.0;
    if (out.model.num_coordinates() > 0) {
        min_coeff = max_coeff = out.model.coordinates.front().coefficient();
        for (const auto& c : out.model.coordinates) {
            min_coeff = std::min(min_coeff, c.coefficient());
            max_coeff = std::max(max_coeff, c.coefficient());
        }
    }
    std::cout << "trained on " << collection.num_clouds() << " clouds; stopped at level "
              << out.stop_level << "; " << out.model.num_coordinates()
              << " coordinates; coefficients in [" << format_double(min_coeff) << ", "
              << format_double(max_coeff) << "]\n";
    return 0;
}

int cmd_predict(const GlobalOptions& opts, const std::string& model_path,
                const std::string& data_path, const std::string& out_path) {
    const cder::CderModel model = cder::load_model(model_path);
    const cder::CloudCollection collection = cder::read_collection(data_path);
    if (collection.dimension() != model.dimension)
        throw cder::InputError("data dimension " + std::to_string(collection.dimension()) +
                               " does not match model dimension " +
                               std::to_string(model.dimension));

    std::vector<cder::Prediction> predictions;
    predictions.reserve(collection.clouds.size());
    for (const cder::PointCloud& cloud : collection.clouds)
        predictions.push_back(cder::predict(model, cloud));

    std::string body;
    if (opts.json) {
        ordered_json doc = ordered_json::array();
        for (size_t i = 0; i < predictions.size(); ++i) {
            ordered_json row;
            row["id"] = collection.clouds[i].id;
            row["label"] = model.labels[predictions[i].label];
            ordered_json norms = ordered_json::array();
            for (int lab = 0; lab < model.num_labels(); ++lab)
                norms.push_back(predictions[i].per_label_norms[lab]);
            row["norms"] = std::move(norms);
            doc.push_back(std::move(row));
        }
        body = doc.dump(2) + "\n";
    } else {
        body = "cloud_id,label";
        for (const std::string& name : model.labels) body += ",norm_" + name;
        body += "\n";
        for (size_t i = 0; i < predictions.size(); ++i) {
            body += collection.clouds[i].id + "," + model.labels[predictions[i].label];
            for (int lab = 0; lab < model.num_labels(); ++lab)
                body += "," + format_double(predictions[i].per_label_norms[lab]);
            body += "\n";
        }
    }

    if (out_path.empty())
        std::cout << body;
    else
        write_text_file(out_path, body);
    return 0;
}

int cmd_crossval(const GlobalOptions& opts, const std::string& data_path, int folds,
                 bool disjoint) {
    const cder::CloudCollection collection = cder::read_collection(data_path);
    cder::CrossvalConfig config;
    config.folds = folds;
    config.seed = opts.seed;
    config.disjoint_folds = disjoint;
    config.train = train_config(opts);
    const cder::CvReport report = cder::cross_validate(collection, config);

    if (opts.json) {
        ordered_json doc;
        doc["folds"] = report.folds;
        doc["per_fold_accuracy"] = report.per_fold_accuracy;
        doc["mean_accuracy"] = report.mean_accuracy;
        ordered_json confusion = ordered_json::array();
        for (int r = 0; r < report.confusion.rows(); ++r) {
            ordered_json row = ordered_json::array();
            for (int c = 0; c < report.confusion.cols(); ++c) row.push_back(report.confusion(r, c));
            confusion.push_back(std::move(row));
        }
        doc["confusion"] = std::move(confusion);
        doc["labels"] = collection.labels;
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "fold,accuracy\n";
        for (size_t i = 0; i < report.per_fold_accuracy.size(); ++i)
            std::cout << i << "," << format_double(report.per_fold_accuracy[i]) << "\n";
        std::cout << "mean," << format_double(report.mean_accuracy) << "\n\n";
        std::cout << "confusion (rows = true, cols = predicted):\n";
        for (int r = 0; r < report.confusion.rows(); ++r) {
            std::cout << collection.labels[r];
            for (int c = 0; c < report.confusion.cols(); ++c)
                std::cout << "\t" << report.confusion(r, c);
            std::cout << "\n";
        }
    }
    return 0;
}

int cmd_inspect(const GlobalOptions& opts, const std::string& data_path) {
    const cder::CloudCollection collection = cder::read_collection(data_path);
    const cder::CloudCollection weighted = cder::assign_weights(collection);
    cder::PooledPoints pooled = cder::pool(weighted);

    cder::SelectConfig config;
    config.theta = opts.theta;
    config.parsimonious = !opts.non_parsimonious;
    const cder::SelectionResult selection = cder::select_regions(std::move(pooled), config);

    if (opts.json) {
        ordered_json doc;
        doc["stop_level"] = selection.stop_level;
        doc["levels"] = ordered_json::array();
        for (const cder::LevelTrace& row : selection.trace) {
            const cder::CoverTreeLevel& lv = selection.tree.level(row.level);
            ordered_json jl;
            jl["level"] = row.level;
            jl["radius"] = row.radius;
            jl["adults"] = row.adults;
            jl["candidates"] = row.candidates;
            jl["new_coordinates"] = row.coordinates;
            ordered_json adults = ordered_json::array();
            for (int a = 0; a < lv.adult_count; ++a) {
                ordered_json ja;
                ja["adult"] = a;
                ja["point"] = selection.tree.adults()[a].point;
                ja["cohort"] = selection.tree.adults()[a].cohort;
                ordered_json w = ordered_json::array();
                for (int lab = 0; lab < selection.tree.num_labels(); ++lab)
                    w.push_back(lv.label_weights(a, lab));
                ja["label_weights"] = std::move(w);
                adults.push_back(std::move(ja));
            }
            jl["adults_detail"] = std::move(adults);
            doc["levels"].push_back(std::move(jl));
        }
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "level\tadults\tcandidates\tnew_coords\n";
        for (const cder::LevelTrace& row : selection.trace)
            std::cout << row.level << "\t" << row.adults << "\t" << row.candidates << "\t+"
                      << row.coordinates << "\n";
        std::cout << "stopped at level " << selection.stop_level << "\n";
    }
    return 0;
}

int cmd_export_regions(const std::string& model_path, const std::string& out_path) {
    const cder::CderModel model = cder::load_model(model_path);
    const std::string body = cder::export_regions_json(model).dump(2) + "\n";
    if (out_path.empty())
        std::cout << body;
    else
        write_text_file(out_path, body);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy-guided feature extraction and classification for labeled point clouds"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions opts;
    app.add_option("--theta", opts.theta, "shrinkage ratio in (0,1)")->capture_default_str();
    app.add_option("--seed", opts.seed, "random seed")->capture_default_str();
    app.add_flag("--non-parsimonious", opts.non_parsimonious,
                 "explore every region instead of discarding useless ones");
    app.add_flag("--json", opts.json, "emit JSON instead of text/CSV");

    auto* generate = app.add_subcommand("generate", "write a synthetic cloud collection");
    std::string experiment;
    std::string gen_out;
    std::string truth_out;
    int clouds_override = 0;
    int points_override = 0;
    generate->add_option("--experiment", experiment, "blobs, blocks, deepfield, or threelabels")
        ->required();
    generate->add_option("--out", gen_out, "output path (.csv or .json)")->required();
    generate->add_option("--ground-truth", truth_out, "mixture ground truth (deepfield only)");
    generate->add_option("--clouds", clouds_override, "override clouds per label");
    generate->add_option("--points", points_override, "override base points per cloud");

    auto* train = app.add_subcommand("train", "fit a model to a labeled collection");
    std::string train_data;
    std::string train_model;
    train->add_option("--data", train_data, "input collection (.csv or .json)")->required();
    train->add_option("--out", train_model, "model output path")->required();

    auto* predict = app.add_subcommand("predict", "label clouds with a trained model");
    std::string predict_model;
    std::string predict_data;
    std::string predict_out;
    predict->add_option("--model", predict_model, "model path")->required();
    predict->add_option("--data", predict_data, "input collection")->required();
    predict->add_option("--out", predict_out, "output path (stdout when omitted)");

    auto* crossval = app.add_subcommand("crossval", "cross-validate on a labeled collection");
    std::string crossval_data;
    int folds = 5;
    bool disjoint = false;
    crossval->add_option("--data", crossval_data, "input collection")->required();
    crossval->add_option("--folds", folds, "number of folds")->capture_default_str();
    crossval->add_flag("--disjoint-folds", disjoint, "classical disjoint partition");

    auto* inspect = app.add_subcommand("inspect", "per-level selection table for a collection");
    std::string inspect_data;
    inspect->add_option("--data", inspect_data, "input collection")->required();

    auto* export_regions = app.add_subcommand("export-regions", "plot data for a trained model");
    std::string export_model;
    std::string export_out;
    export_regions->add_option("--model", export_model, "model path")->required();
    export_regions->add_option("--out", export_out, "output path (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed())
            return cmd_generate(opts, experiment, gen_out, truth_out, clouds_override,
                                points_override);
        if (train->parsed()) return cmd_train(opts, train_data, train_model);
        if (predict->parsed()) return cmd_predict(opts, predict_model, predict_data, predict_out);
        if (crossval->parsed()) return cmd_crossval(opts, crossval_data, folds, disjoint);
        if (inspect->parsed()) return cmd_inspect(opts, inspect_data);
        if (export_regions->parsed()) return cmd_export_regions(export_model, export_out);
    } catch (const cder::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cder::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
