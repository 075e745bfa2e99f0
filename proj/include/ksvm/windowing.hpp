#ifndef KSVM_WINDOWING_HPP
#define KSVM_WINDOWING_HPP

#include <Eigen/Dense>
#include <vector>

#include "ksvm/dataset.hpp"

namespace ksvm {

/// Disjoint groups of at most three features, each with a convex weight and
/// its own Gaussian length scale. Windows are built from the mutual
/// information ranking of the features against the label.
struct FeatureWindowing {
    std::vector<std::vector<int>> windows;  // P index sets, 0-based, size 1..3
    std::vector<double> weights;            // eta_l > 0
    std::vector<double> length_scales;      // ell_l > 0
    std::vector<double> mi_scores;          // per-feature MI used for ranking

    int num_windows() const { return static_cast<int>(windows.size()); }
};

/// Histogram plug-in estimate of MI(feature_j; label) in nats. Expects
/// z-scored data; each column is binned equal-width over [-5, 5].
std::vector<double> mutual_information_scores(const Dataset& data, int bins = 10);

/// Group features into consecutive blocks of the descending MI ranking.
/// Default weights are 1/P and default length scales are 1.
FeatureWindowing build_windows(const std::vector<double>& mi_scores, int d,
                               int window_size = 3);

/// Validate window structure against a feature dimension d.
void check_windowing(const FeatureWindowing& w, int d);

}  // namespace ksvm

#endif
