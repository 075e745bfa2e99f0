#include "ksvm/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace ksvm {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows, Eigen::Index cols_hint = -1) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    Eigen::Index c = cols_hint;
    if (r > 0) c = static_cast<Eigen::Index>(rows[0].size());
    if (c < 0) c = 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != c)
            throw ModelFormatError("ragged matrix in model file");
        for (Eigen::Index j = 0; j < c; ++j)
            m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

constexpr int kModelVersion = 1;

}  // namespace

std::string model_to_json(const TrainedModel& model) {
    json j;
    j["version"] = kModelVersion;
    j["alpha"] = vec_to_json(model.alpha);
    j["bias"] = model.bias;
    j["labels"] = vec_to_json(model.y);
    j["train_points"] = mat_to_json(model.train_points);
    j["dual_feasibility"] = model.dual_feasibility;

    json kw;
    kw["windows"] = model.kernel.windowing.windows;
    kw["weights"] = model.kernel.windowing.weights;
    kw["length_scales"] = model.kernel.windowing.length_scales;
    kw["mi_scores"] = model.kernel.windowing.mi_scores;
    j["kernel"] = std::move(kw);

    json norm = json::array();
    for (const auto& s : model.normalization)
        norm.push_back(json{{"mean", s.mean}, {"stddev", s.stddev}});
    j["normalization"] = std::move(norm);

    json fs;
    fs["bandwidth"] = model.fastsum.bandwidth;
    fs["window_cutoff"] = model.fastsum.window_cutoff;
    fs["oversampling"] = model.fastsum.oversampling;
    fs["torus_radius"] = model.fastsum.torus_radius;
    j["fastsum"] = std::move(fs);

    json sv = json::array();
    for (auto i : model.support_indices) sv.push_back(i);
    j["support_indices"] = std::move(sv);

    return j.dump(2) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelFormatError(std::string("model parse error: ") + e.what());
    }
    try {
        if (j.at("version").get<int>() != kModelVersion)
            throw ModelFormatError("unsupported model version");
        TrainedModel m;
        m.alpha = vec_from_json(j.at("alpha"));
        m.bias = j.at("bias").get<double>();
        m.y = vec_from_json(j.at("labels"));
        m.train_points = mat_from_json(j.at("train_points"));
        m.dual_feasibility = j.at("dual_feasibility").get<double>();

        const auto& kw = j.at("kernel");
        m.kernel.windowing.windows =
            kw.at("windows").get<std::vector<std::vector<int>>>();
        m.kernel.windowing.weights = kw.at("weights").get<std::vector<double>>();
        m.kernel.windowing.length_scales =
            kw.at("length_scales").get<std::vector<double>>();
        m.kernel.windowing.mi_scores =
            kw.at("mi_scores").get<std::vector<double>>();

        for (const auto& s : j.at("normalization"))
            m.normalization.push_back(
                {s.at("mean").get<double>(), s.at("stddev").get<double>()});

        const auto& fs = j.at("fastsum");
        m.fastsum.bandwidth = fs.at("bandwidth").get<int>();
        m.fastsum.window_cutoff = fs.at("window_cutoff").get<int>();
        m.fastsum.oversampling = fs.at("oversampling").get<int>();
        m.fastsum.torus_radius = fs.at("torus_radius").get<double>();

        for (const auto& i : j.at("support_indices"))
            m.support_indices.push_back(i.get<Eigen::Index>());
        return m;
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("model field error: ") + e.what());
    }
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelFormatError("cannot write model file: " + path);
    out << model_to_json(model);
    if (!out) throw ModelFormatError("write failed: " + path);
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFormatError("cannot read model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace ksvm
