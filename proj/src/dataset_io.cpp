#include "skewer/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "skewer/errors.hpp"

namespace skewer {

using nlohmann::json;

namespace {

std::string at_line(const std::string& path, int line) {
    return path + ":" + std::to_string(line) + ": ";
}

json parse_line(const std::string& path, int line_no, const std::string& line) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw IoError(at_line(path, line_no) + "malformed JSON: " + e.what());
    }
}

std::vector<double> number_array(const json& node) {
    if (!node.is_array()) throw std::runtime_error("expected an array of numbers");
    std::vector<double> values;
    values.reserve(node.size());
    for (const auto& v : node) {
        if (!v.is_number()) throw std::runtime_error("expected an array of numbers");
        values.push_back(v.get<double>());
    }
    return values;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        fn(line_no, line);
    }
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

}  // namespace

std::vector<LoggedExample> parse_dataset(const std::string& path) {
    std::vector<LoggedExample> dataset;
    std::size_t dim = 0;
    for_each_line(path, [&](int line_no, const std::string& line) {
        const json obj = parse_line(path, line_no, line);
        LoggedExample ex;
        try {
            ex.item_id = obj.at("item_id").get<std::string>();
            ex.class_label = obj.at("class_label").get<std::string>();
            ex.features = number_array(obj.at("features"));
            ex.logged_action = ActionId{obj.at("action").get<int>()};
            ex.loss = obj.at("loss").get<double>();
            ex.propensity = obj.at("propensity").get<double>();
        } catch (const std::exception& e) {
            throw IoError(at_line(path, line_no) + e.what());
        }
        for (double f : ex.features) {
            if (!std::isfinite(f)) {
                throw IoError(at_line(path, line_no) + "non-finite feature value");
            }
        }
        if (ex.loss != 0.0 && ex.loss != 1.0) {
            throw IoError(at_line(path, line_no) + "loss must be 0 or 1");
        }
        if (!(ex.propensity > 0.0 && ex.propensity <= 1.0)) {
            throw IoError(at_line(path, line_no) + "propensity must be in (0,1]");
        }
        if (ex.logged_action.index < 0) {
            throw IoError(at_line(path, line_no) + "action must be >= 0");
        }
        if (dataset.empty()) {
            dim = ex.features.size();
            if (dim == 0) throw IoError(at_line(path, line_no) + "features must be non-empty");
        } else if (ex.features.size() != dim) {
            throw IoError(at_line(path, line_no) + "feature dimension " +
                          std::to_string(ex.features.size()) + " differs from first line's " +
                          std::to_string(dim));
        }
        dataset.push_back(std::move(ex));
    });
    return dataset;
}

void write_dataset(const std::vector<LoggedExample>& dataset, const std::string& path) {
    auto out = open_for_write(path);
    for (const auto& ex : dataset) {
        json obj;
        obj["item_id"] = ex.item_id;
        obj["class_label"] = ex.class_label;
        obj["features"] = ex.features;
        obj["action"] = ex.logged_action.index;
        obj["loss"] = static_cast<int>(ex.loss);
        obj["propensity"] = ex.propensity;
        out << obj.dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

std::vector<ImputedContext> parse_pool(const std::string& path) {
    std::vector<ImputedContext> pool;
    std::size_t dim = 0, k = 0;
    for_each_line(path, [&](int line_no, const std::string& line) {
        const json obj = parse_line(path, line_no, line);
        ImputedContext entry;
        try {
            entry.context.item_id = obj.at("item_id").get<std::string>();
            entry.context.class_label = obj.at("class_label").get<std::string>();
            entry.context.features = number_array(obj.at("features"));
            entry.dr_losses = number_array(obj.at("dr_losses"));
            for (const auto& v : obj.at("best_set")) entry.best_set.push_back(v.get<int>());
        } catch (const std::exception& e) {
            throw IoError(at_line(path, line_no) + e.what());
        }
        if (pool.empty()) {
            dim = entry.context.features.size();
            k = entry.dr_losses.size();
        } else if (entry.context.features.size() != dim || entry.dr_losses.size() != k) {
            throw IoError(at_line(path, line_no) + "inconsistent dimensions in pool");
        }
        pool.push_back(std::move(entry));
    });
    return pool;
}

void write_pool(const std::vector<ImputedContext>& pool, const std::string& path) {
    auto out = open_for_write(path);
    for (const auto& entry : pool) {
        json obj;
        obj["item_id"] = entry.context.item_id;
        obj["class_label"] = entry.context.class_label;
        obj["features"] = entry.context.features;
        obj["dr_losses"] = entry.dr_losses;
        obj["best_set"] = entry.best_set;
        out << obj.dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace skewer
