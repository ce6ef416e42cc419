#include "cder/io.hpp"

#include "cder/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace cder {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double_field(const std::string& text, const std::string& source, int line_no) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw InputError(source + ":" + std::to_string(line_no) + ": bad numeric field '" + text + "'");
    return value;
}

struct CloudDraft {
    std::string id;
    int label = 0;
    std::vector<double> coords;
    std::vector<double> weights;
    int points = 0;
};

} // namespace

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

CloudCollection read_collection_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line))
        throw InputError(source_name + ": empty file");

    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "cloud_id" || header[1] != "label")
        throw InputError(source_name + ":1: header must start with 'cloud_id,label,x0,...'");
    const bool has_weight = header.back() == "weight";
    const int dim = static_cast<int>(header.size()) - 2 - (has_weight ? 1 : 0);
    if (dim < 1)
        throw InputError(source_name + ":1: no coordinate columns");
    for (int d = 0; d < dim; ++d) {
        if (header[2 + d] != "x" + std::to_string(d))
            throw InputError(source_name + ":1: expected column 'x" + std::to_string(d) +
                             "', found '" + header[2 + d] + "'");
    }

    CloudCollection collection;
    std::vector<CloudDraft> drafts;
    std::map<std::string, int> draft_of_id;

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != 2 + dim + (has_weight ? 1 : 0))
            throw InputError(source_name + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(2 + dim + (has_weight ? 1 : 0)) + " fields, found " +
                             std::to_string(fields.size()));

        const std::string& id = fields[0];
        const int label = collection.label_index(fields[1]);
        auto [it, inserted] = draft_of_id.try_emplace(id, static_cast<int>(drafts.size()));
        if (inserted) {
            drafts.push_back(CloudDraft{id, label, {}, {}, 0});
        } else if (drafts[it->second].label != label) {
            throw InputError(source_name + ":" + std::to_string(line_no) + ": cloud '" + id +
                             "' has conflicting labels");
        }
        CloudDraft& draft = drafts[it->second];
        for (int d = 0; d < dim; ++d)
            draft.coords.push_back(parse_double_field(fields[2 + d], source_name, line_no));
        if (has_weight)
            draft.weights.push_back(parse_double_field(fields[2 + dim], source_name, line_no));
        draft.points++;
    }

    if (drafts.empty())
        throw InputError(source_name + ": no data rows");

    for (CloudDraft& draft : drafts) {
        PointCloud cloud;
        cloud.id = std::move(draft.id);
        cloud.label = draft.label;
        cloud.points = Eigen::Map<const Matrix>(draft.coords.data(), draft.points, dim);
        if (has_weight)
            cloud.weights = Eigen::Map<const Vector>(draft.weights.data(), draft.points);
        collection.clouds.push_back(std::move(cloud));
    }
    collection.validate();
    return collection;
}

CloudCollection read_collection_json(std::istream& in, const std::string& source_name) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(source_name + ": " + e.what());
    }

    try {
        CloudCollection collection;
        for (const auto& name : doc.at("labels"))
            collection.labels.push_back(name.get<std::string>());

        for (const auto& jc : doc.at("clouds")) {
            PointCloud cloud;
            cloud.id = jc.at("id").is_string() ? jc.at("id").get<std::string>()
                                               : jc.at("id").dump();
            const auto& jlabel = jc.at("label");
            if (jlabel.is_number_integer()) {
                cloud.label = jlabel.get<int>();
            } else {
                const std::string name = jlabel.get<std::string>();
                auto it = std::find(collection.labels.begin(), collection.labels.end(), name);
                if (it == collection.labels.end())
                    throw InputError(source_name + ": cloud '" + cloud.id +
                                     "' uses unknown label '" + name + "'");
                cloud.label = static_cast<int>(it - collection.labels.begin());
            }

            const auto& jpoints = jc.at("points");
            const int rows = static_cast<int>(jpoints.size());
            if (rows == 0) throw InputError(source_name + ": cloud '" + cloud.id + "' is empty");
            const int dim = static_cast<int>(jpoints.front().size());
            cloud.points.resize(rows, dim);
            for (int r = 0; r < rows; ++r) {
                if (static_cast<int>(jpoints[r].size()) != dim)
                    throw InputError(source_name + ": cloud '" + cloud.id + "' point " +
                                     std::to_string(r) + " has dimension " +
                                     std::to_string(jpoints[r].size()) + ", expected " +
                                     std::to_string(dim));
                for (int c = 0; c < dim; ++c) cloud.points(r, c) = jpoints[r][c].get<double>();
            }
            if (jc.contains("weights")) {
                const auto& jw = jc.at("weights");
                Vector w(static_cast<int>(jw.size()));
                for (int r = 0; r < w.size(); ++r) w[r] = jw[r].get<double>();
                cloud.weights = std::move(w);
            }
            collection.clouds.push_back(std::move(cloud));
        }
        collection.validate();
        return collection;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(source_name + ": " + e.what());
    }
}

CloudCollection read_collection(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        return read_collection_json(in, path);
    return read_collection_csv(in, path);
}

void write_collection_csv(const CloudCollection& collection, std::ostream& out) {
    collection.validate();
    const int dim = collection.dimension();
    const bool weighted = collection.fully_weighted();

    out << "cloud_id,label";
    for (int d = 0; d < dim; ++d) out << ",x" << d;
    if (weighted) out << ",weight";
    out << "\n";

    for (const PointCloud& cloud : collection.clouds) {
        for (int r = 0; r < cloud.size(); ++r) {
            out << cloud.id << ',' << collection.labels[cloud.label];
            for (int c = 0; c < dim; ++c) out << ',' << format_double(cloud.points(r, c));
            if (weighted) out << ',' << format_double((*cloud.weights)[r]);
            out << "\n";
        }
    }
}

void write_collection_json(const CloudCollection& collection, std::ostream& out) {
    collection.validate();
    ordered_json doc;
    doc["labels"] = collection.labels;
    doc["clouds"] = ordered_json::array();
    for (const PointCloud& cloud : collection.clouds) {
        ordered_json jc;
        jc["id"] = cloud.id;
        jc["label"] = collection.labels[cloud.label];
        ordered_json pts = ordered_json::array();
        for (int r = 0; r < cloud.size(); ++r) {
            ordered_json row = ordered_json::array();
            for (int c = 0; c < cloud.dimension(); ++c) row.push_back(cloud.points(r, c));
            pts.push_back(std::move(row));
        }
        jc["points"] = std::move(pts);
        if (cloud.weights) {
            ordered_json w = ordered_json::array();
            for (int r = 0; r < cloud.size(); ++r) w.push_back((*cloud.weights)[r]);
            jc["weights"] = std::move(w);
        }
        doc["clouds"].push_back(std::move(jc));
    }
    out << doc.dump(2) << "\n";
}

void write_collection(const CloudCollection& collection, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
        write_collection_json(collection, out);
    else
        write_collection_csv(collection, out);
}

} // namespace cder
