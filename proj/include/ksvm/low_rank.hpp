#ifndef KSVM_LOW_RANK_HPP
#define KSVM_LOW_RANK_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ksvm/kernel.hpp"

namespace ksvm {

enum class LowRankMethod {
    kCholeskyGreedy,
    kCholeskyRandom,
    kNystromColumns,
    kNystromGaussian,
    kRandomFourier,
};

std::string to_string(LowRankMethod m);

/// K ~= Z^T Z with Z of shape k x n. achieved_rank may fall short of the
/// request when a Cholesky variant terminates early.
struct LowRankFactor {
    Eigen::MatrixXd Z;
    LowRankMethod method = LowRankMethod::kCholeskyGreedy;
    int achieved_rank = 0;
    double trace_residual = 0.0;
};

/// Greedy pivoted Cholesky: pivot on the largest residual diagonal entry,
/// ties broken by smallest index. Touches O(rank * n) kernel entries.
LowRankFactor pivoted_cholesky_greedy(const KernelOperator& op, int rank,
                                      double err_tol = 1e-5);

/// Pivots sampled proportionally to the residual diagonal. Exits early with
/// achieved_rank < rank once the residual trace is numerically exhausted.
LowRankFactor pivoted_cholesky_random(const KernelOperator& op, int rank,
                                      std::uint64_t seed);

enum class NystromMode { kColumns, kGaussian };

/// K ~= (KQ)(Q^T K Q)^{-1} (KQ)^T with the inner matrix factored as LDL^T;
/// diagonal entries below ldl_threshold are clamped in magnitude.
LowRankFactor nystrom(const KernelOperator& op, int rank, NystromMode mode,
                      std::uint64_t seed, double ldl_threshold = 1e-8);

/// Feature map row i: sqrt(2/k) * cos(w_i^T x_j + b_i) with w drawn from the
/// Gaussian kernel's spectral density and uniform phases.
LowRankFactor random_fourier_features(const Eigen::MatrixXd& window_points,
                                      const GaussianKernelSpec& spec, int rank,
                                      std::uint64_t seed);

/// Vertically stacked per-window factors with sqrt(eta_l) folded in, so
/// that Z^T Z = sum_l eta_l Z_l^T Z_l.
struct StackedFactor {
    Eigen::MatrixXd Z;                 // (sum k_l) x n
    std::vector<int> block_ranks;

    Eigen::Index rank() const { return Z.rows(); }
    Eigen::Index n() const { return Z.cols(); }
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
        return Z.transpose() * (Z * v);
    }
};

StackedFactor stack_anova_factors(const std::vector<LowRankFactor>& factors,
                                  const std::vector<double>& weights);

}  // namespace ksvm

#endif
