#ifndef KSVM_DATASET_HPP
#define KSVM_DATASET_HPP

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksvm {

/// Raised for malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-feature statistics recorded by z-score normalization.
struct FeatureStats {
    double mean = 0.0;
    double stddev = 1.0;
};

/// Dense labeled point set. Labels are always in {-1, +1}.
struct Dataset {
    Eigen::MatrixXd points;                          // n x d, row per sample
    Eigen::VectorXd labels;                          // n, entries in {-1, +1}
    bool has_labels = true;
    std::vector<std::string> feature_names;          // optional, size d or empty
    std::optional<std::vector<FeatureStats>> normalization;

    Eigen::Index n() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

/// Parse a LIBSVM-format text file (1-based sparse indices) into a dense
/// Dataset. The dimension is the maximum index seen unless dim_override > 0.
/// Labels 0/1 are mapped to -1/+1.
Dataset load_libsvm(const std::string& path, int dim_override = 0);

/// Parse a CSV file. label_column selects by header name or 0-based index
/// ("" means unlabeled data). Fields follow RFC-4180 quoting.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 bool has_header = true);

/// Random train/test split followed by majority-class down-sampling of the
/// training part. The test split is left untouched.
std::pair<Dataset, Dataset> balance_and_split(const Dataset& data,
                                              double train_fraction,
                                              std::uint64_t seed);

/// Z-score both splits with statistics computed on the training split only.
/// Constant columns keep stddev 1 and map to zero.
void zscore_fit_transform(Dataset& train, Dataset& test);

/// Apply previously fitted statistics to raw points.
Eigen::MatrixXd apply_normalization(const Eigen::MatrixXd& points,
                                    const std::vector<FeatureStats>& stats);

}  // namespace ksvm

#endif
