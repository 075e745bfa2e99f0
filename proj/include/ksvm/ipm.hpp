#ifndef KSVM_IPM_HPP
#define KSVM_IPM_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ksvm/fastsum.hpp"
#include "ksvm/kernel.hpp"
#include "ksvm/low_rank.hpp"
#include "ksvm/saddle.hpp"

namespace ksvm {

struct IpmConfig {
    double C = 0.5;
    double sigma = 0.6;        // barrier reduction factor
    double gamma0 = 0.99995;   // fraction-to-boundary
    double tol_ip = 1e-1;
    int max_ip_iters = 50;
    double tol_gmres = 1e-3;
    int max_gmres_iters = 100;
    double mu0 = 1.0;

    void validate() const;
};

enum class IpmStatus { kConverged, kMaxIterations, kStalled };

struct IpmIterationLog {
    int it = 0;
    double mu = 0.0;
    double xi_alpha_rel = 0.0;
    double xi_lambda_rel = 0.0;
    double step_alpha = 0.0;
    GmresStats gmres;
};

struct IpmResult {
    Eigen::VectorXd alpha;
    double lambda = 0.0;
    double mu_final = 0.0;
    double xi_alpha_rel = 0.0;
    double xi_lambda_rel = 0.0;
    IpmStatus status = IpmStatus::kConverged;
    std::vector<IpmIterationLog> iterations;

    double mean_gmres_iters() const;
};

enum class PredictBackend { kExact, kFast };

struct TrainedModel {
    Eigen::VectorXd alpha;
    double bias = 0.0;
    Eigen::VectorXd y;
    Eigen::MatrixXd train_points;  // normalized coordinates
    AnovaKernelSpec kernel;
    std::vector<FeatureStats> normalization;
    FastsumConfig fastsum;
    std::vector<Eigen::Index> support_indices;  // alpha_j > eps_sv
    double dual_feasibility = 0.0;              // |y^T alpha| at training end

    /// Decision values f(x) for raw (unnormalized) test points.
    Eigen::VectorXd decision_values(const Eigen::MatrixXd& test_points,
                                    PredictBackend backend) const;
    /// sign(f(x)), with sign(0) = +1.
    Eigen::VectorXd predict(const Eigen::MatrixXd& test_points,
                            PredictBackend backend) const;
};

/// Newton right-hand side of the barrier subproblem at the current iterate.
/// yky_alpha is the precomputed Y K Y alpha product.
Eigen::VectorXd assemble_newton_rhs(const Eigen::VectorXd& alpha, double lambda,
                                    const Eigen::VectorXd& yky_alpha,
                                    const Eigen::VectorXd& y, double C,
                                    double mu);

/// Fraction-to-boundary ratio test. s_alpha keeps alpha + s*dalpha strictly
/// inside (0, C); lambda is unconstrained so s_lambda = gamma0.
std::pair<double, double> step_lengths(const Eigen::VectorXd& alpha,
                                       const Eigen::VectorXd& dalpha,
                                       double gamma0, double C);

/// Interior point training loop. The operator and the stacked factor must be
/// built over the same training data and kernel spec. factor == nullptr runs
/// unpreconditioned.
IpmResult ipm_train(const KernelOperator& op, const Eigen::VectorXd& y,
                    const StackedFactor* factor, const IpmConfig& cfg);

/// Bias from free support vectors (KKT conditions); falls back to the median
/// over all support vectors, then to zero.
double compute_bias(const Eigen::VectorXd& alpha, const Eigen::VectorXd& y,
                    const KernelOperator& op, double C, double eps_sv);

/// Package an IPM solution into a predictor.
TrainedModel make_model(const IpmResult& result, const Dataset& train,
                        const AnovaKernelSpec& spec, const FastsumConfig& fs,
                        const KernelOperator& op, double C);

}  // namespace ksvm

#endif
