#ifndef KSVM_FASTSUM_HPP
#define KSVM_FASTSUM_HPP

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "ksvm/kernel.hpp"

namespace ksvm {

/// Parameters of the trigonometric-polynomial fast summation.
struct FastsumConfig {
    int bandwidth = 32;        // N, even, per dimension
    int window_cutoff = 4;     // m, spreading half-width
    int oversampling = 2;      // sigma_os, oversampled grid is sigma_os*N
    double torus_radius = 0.25;  // data scaled into the l2 ball of this radius

    void validate() const;
};

/// Per-window plan: source nodes mapped into the torus, Fourier coefficients
/// of the rescaled Gaussian, and the affine scaling map. Immutable after
/// construction; concurrent applies share one plan.
class FastsumPlan {
public:
    ~FastsumPlan();
    FastsumPlan(FastsumPlan&&) noexcept;
    FastsumPlan& operator=(FastsumPlan&&) noexcept;

    Eigen::Index num_sources() const;
    int dim() const;
    double scaled_length() const;  // ell after the affine map

    /// Map raw window coordinates with the plan's affine scaling.
    Eigen::MatrixXd scale_points(const Eigen::MatrixXd& pts) const;

    /// Sum of all Fourier coefficients = trig approximant at distance zero.
    double coefficient_sum() const;

    struct Impl;

private:
    FastsumPlan();
    std::unique_ptr<Impl> impl_;

    friend FastsumPlan plan_fastsum(const Eigen::MatrixXd&,
                                    const GaussianKernelSpec&,
                                    const FastsumConfig&, double);
    friend Eigen::VectorXd apply_fastsum(const FastsumPlan&,
                                         const Eigen::VectorXd&);
    friend Eigen::VectorXd apply_fastsum_cross(const FastsumPlan&,
                                               const Eigen::MatrixXd&,
                                               const Eigen::VectorXd&);
};

/// Build a plan for window-restricted points (n x d_l, d_l <= 3).
/// fit_fraction < 1 leaves torus margin for later out-of-sample targets:
/// sources are mapped into radius fit_fraction * torus_radius.
FastsumPlan plan_fastsum(const Eigen::MatrixXd& points,
                         const GaussianKernelSpec& spec,
                         const FastsumConfig& cfg, double fit_fraction = 1.0);

/// Approximate K v for the plan's node set.
Eigen::VectorXd apply_fastsum(const FastsumPlan& plan, const Eigen::VectorXd& v);

/// Approximate the t x n cross-kernel times v. Targets are raw window
/// coordinates; they are scaled with the plan's map and must land inside
/// the torus ball, otherwise DomainError is raised.
Eigen::VectorXd apply_fastsum_cross(const FastsumPlan& plan,
                                    const Eigen::MatrixXd& targets,
                                    const Eigen::VectorXd& v);

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// ANOVA kernel operator whose apply sums per-window fast applies weighted
/// by eta_l. entry() evaluates the kernel directly.
std::unique_ptr<KernelOperator> anova_fast_operator(const Dataset& data,
                                                    const AnovaKernelSpec& spec,
                                                    const FastsumConfig& cfg,
                                                    double fit_fraction = 1.0);

}  // namespace ksvm

#endif
