#include "ksvm/kernel.hpp"

#include <cmath>

namespace ksvm {

double gaussian_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                     const GaussianKernelSpec& spec) {
    if (x.size() != x2.size())
        throw std::invalid_argument("gaussian_eval: dimension mismatch");
    const double d2 = (x - x2).squaredNorm();
    return std::exp(-d2 / (spec.length_scale * spec.length_scale));
}

double anova_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                  const AnovaKernelSpec& spec) {
    const auto& w = spec.windowing;
    double sum = 0.0;
    for (int l = 0; l < w.num_windows(); ++l) {
        const double ell = w.length_scales[static_cast<std::size_t>(l)];
        double d2 = 0.0;
        for (int f : w.windows[static_cast<std::size_t>(l)]) {
            const double diff = x[f] - x2[f];
            d2 += diff * diff;
        }
        sum += w.weights[static_cast<std::size_t>(l)] * std::exp(-d2 / (ell * ell));
    }
    return sum;
}

namespace {

double anova_entry(const Eigen::MatrixXd& pts, Eigen::Index i, Eigen::Index j,
                   const AnovaKernelSpec& spec) {
    const auto& w = spec.windowing;
    double sum = 0.0;
    for (int l = 0; l < w.num_windows(); ++l) {
        const double ell = w.length_scales[static_cast<std::size_t>(l)];
        double d2 = 0.0;
        for (int f : w.windows[static_cast<std::size_t>(l)]) {
            const double diff = pts(i, f) - pts(j, f);
            d2 += diff * diff;
        }
        sum += w.weights[static_cast<std::size_t>(l)] * std::exp(-d2 / (ell * ell));
    }
    return sum;
}

class ExactOperator final : public KernelOperator {
public:
    ExactOperator(const Dataset& data, const AnovaKernelSpec& spec,
                  Eigen::Index guard)
        : points_(data.points), spec_(spec), K_(dense_kernel_matrix(data, spec, guard)) {}

    Eigen::Index size() const override { return K_.rows(); }
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const override {
        return K_ * v;
    }
    double entry(Eigen::Index i, Eigen::Index j) const override {
        return anova_entry(points_, i, j, spec_);
    }

private:
    Eigen::MatrixXd points_;
    AnovaKernelSpec spec_;
    Eigen::MatrixXd K_;
};

}  // namespace

Eigen::MatrixXd dense_kernel_matrix(const Dataset& data,
                                    const AnovaKernelSpec& spec,
                                    Eigen::Index guard) {
    check_windowing(spec.windowing, static_cast<int>(data.dim()));
    const Eigen::Index n = data.n();
    if (n > guard)
        throw std::invalid_argument(
            "dense kernel matrix guard exceeded: n = " + std::to_string(n));
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = anova_entry(data.points, i, i, spec);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = anova_entry(data.points, i, j, spec);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

std::unique_ptr<KernelOperator> exact_operator(const Dataset& data,
                                               const AnovaKernelSpec& spec,
                                               Eigen::Index guard) {
    return std::make_unique<ExactOperator>(data, spec, guard);
}

}  // namespace ksvm
