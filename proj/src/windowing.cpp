#include "ksvm/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ksvm {

std::vector<double> mutual_information_scores(const Dataset& data, int bins) {
    if (bins < 2) throw DataError("bins must be >= 2");
    const Eigen::Index n = data.n();
    if (n < bins)
        throw DataError("fewer samples than histogram bins; reduce bins");

    const double lo = -5.0, hi = 5.0;
    const double width = (hi - lo) / bins;
    std::vector<double> scores(static_cast<std::size_t>(data.dim()), 0.0);

    Eigen::Index npos = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (data.labels[i] > 0) ++npos;
    const double ppos = static_cast<double>(npos) / static_cast<double>(n);
    const double pneg = 1.0 - ppos;

    for (Eigen::Index j = 0; j < data.dim(); ++j) {
        std::vector<double> cpos(static_cast<std::size_t>(bins), 0.0);
        std::vector<double> cneg(static_cast<std::size_t>(bins), 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = std::clamp(data.points(i, j), lo, hi);
            int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
            (data.labels[i] > 0 ? cpos : cneg)[static_cast<std::size_t>(b)] += 1.0;
        }
        double mi = 0.0;
        for (int b = 0; b < bins; ++b) {
            const double pb =
                (cpos[static_cast<std::size_t>(b)] + cneg[static_cast<std::size_t>(b)]) /
                static_cast<double>(n);
            if (pb <= 0.0) continue;
            for (int cls = 0; cls < 2; ++cls) {
                const double pxy =
                    (cls ? cpos : cneg)[static_cast<std::size_t>(b)] /
                    static_cast<double>(n);
                const double py = cls ? ppos : pneg;
                if (pxy > 0.0 && py > 0.0)
                    mi += pxy * std::log(pxy / (pb * py));
            }
        }
        scores[static_cast<std::size_t>(j)] = std::max(mi, 0.0);
    }
    return scores;
}

FeatureWindowing build_windows(const std::vector<double>& mi_scores, int d,
                               int window_size) {
    if (window_size < 1 || window_size > 3)
        throw std::invalid_argument("window_size must be 1, 2, or 3");
    if (static_cast<int>(mi_scores.size()) != d)
        throw std::invalid_argument("mi_scores size does not match d");

    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return mi_scores[static_cast<std::size_t>(a)] >
               mi_scores[static_cast<std::size_t>(b)];
    });

    FeatureWindowing w;
    w.mi_scores = mi_scores;
    for (int start = 0; start < d; start += window_size) {
        const int end = std::min(start + window_size, d);
        w.windows.emplace_back(order.begin() + start, order.begin() + end);
    }
    const int P = w.num_windows();
    w.weights.assign(static_cast<std::size_t>(P), 1.0 / P);
    w.length_scales.assign(static_cast<std::size_t>(P), 1.0);
    return w;
}

void check_windowing(const FeatureWindowing& w, int d) {
    const int P = w.num_windows();
    if (P == 0) throw std::invalid_argument("windowing has no windows");
    if (static_cast<int>(w.weights.size()) != P ||
        static_cast<int>(w.length_scales.size()) != P)
        throw std::invalid_argument("weights/length_scales size mismatch");
    std::vector<bool> seen(static_cast<std::size_t>(d), false);
    for (const auto& win : w.windows) {
        if (win.empty() || win.size() > 3)
            throw std::invalid_argument("window size must be 1..3");
        for (int f : win) {
            if (f < 0 || f >= d)
                throw std::invalid_argument("window feature index out of range");
            if (seen[static_cast<std::size_t>(f)])
                throw std::invalid_argument("feature appears in two windows");
            seen[static_cast<std::size_t>(f)] = true;
        }
    }
    for (int l = 0; l < P; ++l) {
        if (!(w.weights[static_cast<std::size_t>(l)] > 0.0))
            throw std::invalid_argument("window weights must be positive");
        if (!(w.length_scales[static_cast<std::size_t>(l)] > 0.0))
            throw std::invalid_argument("length scales must be positive");
    }
}

}  // namespace ksvm
