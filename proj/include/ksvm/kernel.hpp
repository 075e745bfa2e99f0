#ifndef KSVM_KERNEL_HPP
#define KSVM_KERNEL_HPP

#include <Eigen/Dense>
#include <memory>

#include "ksvm/windowing.hpp"

namespace ksvm {

struct GaussianKernelSpec {
    double length_scale = 1.0;  // ell > 0
};

/// Sum of per-window Gaussian kernels: kappa = sum_l eta_l * kappa_l, where
/// kappa_l acts on the window's coordinates with length scale ell_l.
struct AnovaKernelSpec {
    FeatureWindowing windowing;
};

/// exp(-||x - x2||^2 / ell^2)
double gaussian_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                     const GaussianKernelSpec& spec);

double anova_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                  const AnovaKernelSpec& spec);

/// Symmetric PSD operator abstraction. apply() is the black-box matvec;
/// entry() serves the pivoted factorizations, which need individual entries.
/// Implementations must be immutable after construction so that concurrent
/// apply() calls are safe.
class KernelOperator {
public:
    virtual ~KernelOperator() = default;
    virtual Eigen::Index size() const = 0;
    virtual Eigen::VectorXd apply(const Eigen::VectorXd& v) const = 0;
    virtual double entry(Eigen::Index i, Eigen::Index j) const = 0;
};

inline constexpr Eigen::Index kDenseGuardDefault = 20000;

/// Assemble the full n x n kernel matrix. Guarded against accidental
/// large-n use; raises std::invalid_argument past the guard.
Eigen::MatrixXd dense_kernel_matrix(const Dataset& data,
                                    const AnovaKernelSpec& spec,
                                    Eigen::Index guard = kDenseGuardDefault);

/// Exact dense-backed operator, the oracle against which the fast backend
/// is checked.
std::unique_ptr<KernelOperator> exact_operator(
    const Dataset& data, const AnovaKernelSpec& spec,
    Eigen::Index guard = kDenseGuardDefault);

}  // namespace ksvm

#endif
