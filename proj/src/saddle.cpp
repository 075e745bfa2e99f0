#include "ksvm/saddle.hpp"

#include <cmath>

namespace ksvm {

SaddleOperator::SaddleOperator(const KernelOperator& op, Eigen::VectorXd y,
                               Eigen::VectorXd theta)
    : op_(op), y_(std::move(y)), theta_(std::move(theta)) {
    if (y_.size() != op_.size() || theta_.size() != op_.size())
        throw std::invalid_argument("SaddleOperator: size mismatch");
    if ((theta_.array() <= 0.0).any())
        throw std::invalid_argument("SaddleOperator: Theta must be positive");
}

void SaddleOperator::set_theta(Eigen::VectorXd theta) {
    if (theta.size() != y_.size() || (theta.array() <= 0.0).any())
        throw std::invalid_argument("SaddleOperator: bad Theta");
    theta_ = std::move(theta);
}

Eigen::VectorXd SaddleOperator::apply(const Eigen::VectorXd& vw) const {
    const Eigen::Index n = y_.size();
    if (vw.size() != n + 1)
        throw std::invalid_argument("SaddleOperator: vector length mismatch");
    const auto v = vw.head(n);
    const double w = vw[n];
    Eigen::VectorXd out(n + 1);
    const Eigen::VectorXd kv = op_.apply(y_.cwiseProduct(v));
    out.head(n) = y_.cwiseProduct(kv) + theta_.cwiseProduct(v) - w * y_;
    out[n] = -y_.dot(v);
    return out;
}

SaddlePreconditioner::SaddlePreconditioner(const StackedFactor* factor,
                                           Eigen::VectorXd y)
    : factor_(factor), y_(std::move(y)) {
    identity_ = factor_ == nullptr;
}

void SaddlePreconditioner::refresh(const Eigen::VectorXd& theta) {
    if (theta.size() != y_.size() || (theta.array() <= 0.0).any())
        throw std::invalid_argument("SaddlePreconditioner: bad Theta");
    theta_ = theta;
    fallback_ = false;
    fresh_ = true;
    if (identity_ || factor_->rank() == 0) return;

    // Capacitance I_k + Z D^{-1} Z^T with D = Y^{-1} Theta Y^{-1} = Theta
    // (labels are +-1, so the Y factors cancel on the diagonal).
    const auto& Z = factor_->Z;
    const Eigen::Index k = Z.rows();
    Eigen::MatrixXd cap =
        Eigen::MatrixXd::Identity(k, k) +
        Z * theta_.cwiseInverse().asDiagonal() * Z.transpose();
    if (!cap.allFinite()) {
        fallback_ = true;
        return;
    }
    capacitance_lu_.compute(cap);
    const double rcond = capacitance_lu_.rcond();
    if (!std::isfinite(rcond) || rcond < 1e-15) fallback_ = true;
}

Eigen::VectorXd SaddlePreconditioner::apply(const Eigen::VectorXd& g) const {
    const Eigen::Index n = y_.size();
    if (g.size() != n + 1)
        throw std::invalid_argument("SaddlePreconditioner: vector length mismatch");
    if (identity_) return g;
    if (!fresh_)
        throw std::logic_error("SaddlePreconditioner: refresh() before apply()");

    const auto g1 = g.head(n);
    Eigen::VectorXd x1;
    if (fallback_ || factor_->rank() == 0) {
        x1 = g1.cwiseQuotient(theta_);
    } else {
        // SMW: A-hat^{-1} = Theta^{-1}
        //   - Theta^{-1} Y Z^T (I_k + Z Theta^{-1} Z^T)^{-1} Z Y Theta^{-1}.
        const auto& Z = factor_->Z;
        const Eigen::VectorXd t = y_.cwiseProduct(g1).cwiseQuotient(theta_);
        const Eigen::VectorXd inner = capacitance_lu_.solve(Z * t);
        x1 = g1.cwiseQuotient(theta_) -
             y_.cwiseProduct(Z.transpose() * inner).cwiseQuotient(theta_);
    }
    Eigen::VectorXd out(n + 1);
    out.head(n) = x1;
    out[n] = -y_.dot(x1) - g[n];
    return out;
}

std::pair<Eigen::VectorXd, GmresStats> gmres_solve(
    const SaddleOperator& op, const SaddlePreconditioner& precond,
    const Eigen::VectorXd& rhs, double tol, int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("gmres tol must be positive");
    const Eigen::Index n = op.size();
    GmresStats stats;

    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        stats.converged = true;
        return {Eigen::VectorXd::Zero(n), stats};
    }

    // Right-preconditioned: solve A P^{-1} u = rhs, x = P^{-1} u, x0 = 0.
    // The Arnoldi residual then equals the true residual of A x = rhs.
    std::vector<Eigen::VectorXd> basis;
    basis.push_back(rhs / rhs_norm);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(max_iter + 1, max_iter);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(max_iter);
    Eigen::VectorXd sn = Eigen::VectorXd::Zero(max_iter);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(max_iter + 1);
    beta[0] = rhs_norm;

    int k = 0;
    double rel_res = 1.0;
    for (; k < max_iter; ++k) {
        Eigen::VectorXd w = op.apply(precond.apply(basis[static_cast<std::size_t>(k)]));
        // Modified Gram-Schmidt with one reorthogonalization pass.
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= k; ++i) {
                const double h = w.dot(basis[static_cast<std::size_t>(i)]);
                H(i, k) += h;
                w -= h * basis[static_cast<std::size_t>(i)];
            }
        }
        const double hnext = w.norm();
        H(k + 1, k) = hnext;

        // Apply stored Givens rotations to the new column.
        for (int i = 0; i < k; ++i) {
            const double tmp = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
            H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
            H(i, k) = tmp;
        }
        const double denom = std::hypot(H(k, k), H(k + 1, k));
        if (denom == 0.0) {
            stats.breakdown = true;
            break;
        }
        cs[k] = H(k, k) / denom;
        sn[k] = H(k + 1, k) / denom;
        H(k, k) = denom;
        H(k + 1, k) = 0.0;
        beta[k + 1] = -sn[k] * beta[k];
        beta[k] = cs[k] * beta[k];

        rel_res = std::abs(beta[k + 1]) / rhs_norm;
        stats.residual_history.push_back(rel_res);
        ++stats.iterations;

        if (rel_res <= tol) {
            ++k;
            stats.converged = true;
            break;
        }
        if (hnext <= 1e-14 * rhs_norm) {
            // Happy breakdown: Krylov space is invariant, solution is exact.
            stats.breakdown = true;
            stats.converged = true;
            ++k;
            break;
        }
        basis.push_back(w / hnext);
    }

    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    if (k > 0) {
        Eigen::VectorXd yk =
            H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(
                beta.head(k));
        for (int i = 0; i < k; ++i) u += yk[i] * basis[static_cast<std::size_t>(i)];
    }
    Eigen::VectorXd x = precond.apply(u);
    stats.relative_residual = (rhs - op.apply(x)).norm() / rhs_norm;
    if (stats.relative_residual <= tol) stats.converged = true;
    return {x, stats};
}

}  // namespace ksvm
