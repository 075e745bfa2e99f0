#ifndef KSVM_SADDLE_HPP
#define KSVM_SADDLE_HPP

#include <Eigen/Dense>
#include <vector>

#include "ksvm/kernel.hpp"
#include "ksvm/low_rank.hpp"

namespace ksvm {

/// Action of the Newton saddle matrix
///   [ YKY + Theta   -y ]
///   [ -y^T            0 ]
/// on a length-(n+1) vector, with K applied through the kernel operator.
class SaddleOperator {
public:
    SaddleOperator(const KernelOperator& op, Eigen::VectorXd y,
                   Eigen::VectorXd theta);

    Eigen::Index size() const { return y_.size() + 1; }
    Eigen::VectorXd apply(const Eigen::VectorXd& vw) const;

    const Eigen::VectorXd& y() const { return y_; }
    const Eigen::VectorXd& theta() const { return theta_; }
    void set_theta(Eigen::VectorXd theta);

private:
    const KernelOperator& op_;
    Eigen::VectorXd y_;
    Eigen::VectorXd theta_;
};

/// Block-triangular saddle preconditioner with A-hat = Theta + Y Z^T Z Y,
/// inverted through the Sherman-Morrison-Woodbury identity. The k x k
/// capacitance matrix I + Z Theta^{-1} Z^T is LU-factored on refresh,
/// once per interior point iteration.
class SaddlePreconditioner {
public:
    /// factor == nullptr gives the identity preconditioner (unpreconditioned
    /// GMRES through the same code path).
    SaddlePreconditioner(const StackedFactor* factor, Eigen::VectorXd y);

    /// Rebuild the capacitance LU for a new barrier diagonal. Falls back to
    /// the diagonal-only preconditioner if the LU is numerically singular.
    void refresh(const Eigen::VectorXd& theta);

    Eigen::VectorXd apply(const Eigen::VectorXd& g) const;

    bool identity() const { return identity_; }
    bool diagonal_fallback() const { return fallback_; }

private:
    const StackedFactor* factor_;
    Eigen::VectorXd y_;
    Eigen::VectorXd theta_;
    Eigen::PartialPivLU<Eigen::MatrixXd> capacitance_lu_;
    bool identity_ = false;
    bool fallback_ = false;
    bool fresh_ = false;
};

struct GmresStats {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    bool breakdown = false;
    std::vector<double> residual_history;  // estimates per iteration
};

/// Right-preconditioned full GMRES (no restarts) with modified Gram-Schmidt
/// and one reorthogonalization pass. Stops on the true relative residual of
/// the unpreconditioned system. Hitting max_iter returns the best iterate
/// with converged = false; the IPM proceeds inexactly.
std::pair<Eigen::VectorXd, GmresStats> gmres_solve(
    const SaddleOperator& op, const SaddlePreconditioner& precond,
    const Eigen::VectorXd& rhs, double tol, int max_iter);

}  // namespace ksvm

#endif
