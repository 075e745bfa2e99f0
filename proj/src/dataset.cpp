#include "ksvm/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace ksvm {

namespace {

double map_label(double raw, const std::string& where) {
    if (raw == -1.0 || raw == 1.0) return raw;
    if (raw == 0.0) return -1.0;
    throw DataError("label outside {-1, 0, +1} at " + where);
}

bool parse_double(std::string_view s, double& out) {
    // from_chars rejects an explicit plus sign, but "+1" labels are the norm
    // in LIBSVM files.
    if (s.size() > 1 && s.front() == '+' && s[1] != '-') s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace

Dataset load_libsvm(const std::string& path, int dim_override) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::vector<double> labels;
    std::vector<std::vector<std::pair<int, double>>> rows;
    int max_index = 0;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;  // blank line
        const std::string where = path + ":" + std::to_string(lineno);
        double raw_label;
        if (!parse_double(tok, raw_label))
            throw DataError("malformed label '" + tok + "' at " + where);
        labels.push_back(map_label(raw_label, where));

        std::vector<std::pair<int, double>> row;
        int prev_index = 0;
        while (ls >> tok) {
            auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw DataError("malformed feature '" + tok + "' at " + where);
            int idx;
            double val;
            auto ires = std::from_chars(tok.data(), tok.data() + colon, idx);
            if (ires.ec != std::errc{} || ires.ptr != tok.data() + colon || idx < 1)
                throw DataError("bad feature index in '" + tok + "' at " + where);
            if (idx <= prev_index)
                throw DataError("feature indices not strictly increasing at " + where);
            if (!parse_double(std::string_view(tok).substr(colon + 1), val))
                throw DataError("bad feature value in '" + tok + "' at " + where);
            prev_index = idx;
            max_index = std::max(max_index, idx);
            row.emplace_back(idx, val);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("empty file: " + path);

    int d = dim_override > 0 ? dim_override : max_index;
    if (max_index > d)
        throw DataError("feature index " + std::to_string(max_index) +
                        " exceeds forced dimension " + std::to_string(d));

    Dataset data;
    data.points = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), d);
    data.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        data.labels[static_cast<Eigen::Index>(i)] = labels[i];
        for (auto [idx, val] : rows[i])
            data.points(static_cast<Eigen::Index>(i), idx - 1) = val;
    }
    return data;
}

namespace {

// RFC-4180 field splitting for a single record.
std::vector<std::string> split_csv_record(const std::string& line,
                                          const std::string& where) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c == '\r' && i + 1 == line.size()) {
            // trailing CR from CRLF input
        } else {
            cur += c;
        }
    }
    if (quoted) throw DataError("unterminated quote at " + where);
    fields.push_back(cur);
    return fields;
}

bool looks_numeric(const std::string& s) {
    double v;
    return parse_double(s, v);
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 bool has_header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::vector<std::string> header;
    std::vector<std::vector<std::string>> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto fields = split_csv_record(line, path + ":" + std::to_string(lineno));
        if (lineno == 1 && has_header) {
            header = std::move(fields);
        } else {
            if (!records.empty() && fields.size() != records.front().size())
                throw DataError("inconsistent column count at " + path + ":" +
                                std::to_string(lineno));
            records.push_back(std::move(fields));
        }
    }
    if (records.empty()) throw DataError("no data rows in " + path);
    const int ncols = static_cast<int>(records.front().size());
    if (has_header && static_cast<int>(header.size()) != ncols)
        throw DataError("header/data column count mismatch in " + path);

    int label_idx = -1;
    if (!label_column.empty()) {
        if (has_header) {
            auto it = std::find(header.begin(), header.end(), label_column);
            if (it != header.end())
                label_idx = static_cast<int>(it - header.begin());
        }
        if (label_idx < 0) {
            int idx;
            auto res = std::from_chars(label_column.data(),
                                       label_column.data() + label_column.size(), idx);
            if (res.ec == std::errc{} &&
                res.ptr == label_column.data() + label_column.size() && idx >= 0 &&
                idx < ncols)
                label_idx = idx;
            else
                throw DataError("label column '" + label_column + "' not found in " + path);
        }
    }

    const int d = label_idx >= 0 ? ncols - 1 : ncols;
    if (d < 1) throw DataError("no feature columns in " + path);

    Dataset data;
    data.has_labels = label_idx >= 0;
    data.points.resize(static_cast<Eigen::Index>(records.size()), d);
    data.labels = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) {
        int fj = 0;
        for (int j = 0; j < ncols; ++j) {
            const std::string& cell = records[i][static_cast<std::size_t>(j)];
            const std::string where = path + ", row " + std::to_string(i + 1) +
                                      ", column " + std::to_string(j + 1);
            double v;
            if (!parse_double(cell, v))
                throw DataError("non-numeric cell '" + cell + "' at " + where);
            if (j == label_idx)
                data.labels[static_cast<Eigen::Index>(i)] = map_label(v, where);
            else
                data.points(static_cast<Eigen::Index>(i), fj++) = v;
        }
    }
    if (has_header) {
        for (int j = 0; j < ncols; ++j)
            if (j != label_idx) data.feature_names.push_back(header[static_cast<std::size_t>(j)]);
    }
    return data;
}

std::pair<Dataset, Dataset> balance_and_split(const Dataset& data,
                                              double train_fraction,
                                              std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DataError("train_fraction must lie in (0, 1)");
    const Eigen::Index n = data.n();
    Eigen::Index npos = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (data.labels[i] > 0) ++npos;
    if (npos == 0 || npos == n)
        throw DataError("both classes must be present before splitting");

    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    const auto n_train = static_cast<Eigen::Index>(
        std::floor(train_fraction * static_cast<double>(n)));
    std::vector<Eigen::Index> train_idx(perm.begin(), perm.begin() + n_train);
    std::vector<Eigen::Index> test_idx(perm.begin() + n_train, perm.end());

    // Balance the training part by down-sampling the majority class.
    std::vector<Eigen::Index> tr_pos, tr_neg;
    for (auto i : train_idx)
        (data.labels[i] > 0 ? tr_pos : tr_neg).push_back(i);
    auto& majority = tr_pos.size() > tr_neg.size() ? tr_pos : tr_neg;
    const std::size_t keep = std::min(tr_pos.size(), tr_neg.size());
    std::shuffle(majority.begin(), majority.end(), rng);
    majority.resize(keep);
    if (keep == 0 || tr_pos.size() + tr_neg.size() < 2)
        throw DataError("balancing leaves fewer than 2 training points");

    std::vector<Eigen::Index> balanced;
    balanced.reserve(tr_pos.size() + tr_neg.size());
    balanced.insert(balanced.end(), tr_pos.begin(), tr_pos.end());
    balanced.insert(balanced.end(), tr_neg.begin(), tr_neg.end());
    std::sort(balanced.begin(), balanced.end());

    auto take = [&](const std::vector<Eigen::Index>& idx) {
        Dataset out;
        out.has_labels = data.has_labels;
        out.feature_names = data.feature_names;
        out.points.resize(static_cast<Eigen::Index>(idx.size()), data.dim());
        out.labels.resize(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            out.points.row(static_cast<Eigen::Index>(i)) = data.points.row(idx[i]);
            out.labels[static_cast<Eigen::Index>(i)] = data.labels[idx[i]];
        }
        return out;
    };
    return {take(balanced), take(test_idx)};
}

void zscore_fit_transform(Dataset& train, Dataset& test) {
    if (train.n() == 0) throw DataError("empty training split");
    const Eigen::Index d = train.dim();
    std::vector<FeatureStats> stats(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
        const double mean = train.points.col(j).mean();
        const double var =
            (train.points.col(j).array() - mean).square().mean();
        double sd = std::sqrt(var);
        if (sd < 1e-300) sd = 1.0;  // constant column maps to zeros
        stats[static_cast<std::size_t>(j)] = {mean, sd};
        train.points.col(j) = (train.points.col(j).array() - mean) / sd;
        if (test.n() > 0)
            test.points.col(j) = (test.points.col(j).array() - mean) / sd;
    }
    train.normalization = stats;
    test.normalization = stats;
}

Eigen::MatrixXd apply_normalization(const Eigen::MatrixXd& points,
                                    const std::vector<FeatureStats>& stats) {
    if (points.cols() != static_cast<Eigen::Index>(stats.size()))
        throw DataError("dimension mismatch in normalization");
    Eigen::MatrixXd out = points;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const auto& s = stats[static_cast<std::size_t>(j)];
        out.col(j) = (out.col(j).array() - s.mean) / s.stddev;
    }
    return out;
}

}  // namespace ksvm
