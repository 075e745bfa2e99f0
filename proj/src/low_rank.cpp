#include "ksvm/low_rank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ksvm {

std::string to_string(LowRankMethod m) {
    switch (m) {
        case LowRankMethod::kCholeskyGreedy: return "cholesky-greedy";
        case LowRankMethod::kCholeskyRandom: return "cholesky-random";
        case LowRankMethod::kNystromColumns: return "nystrom-columns";
        case LowRankMethod::kNystromGaussian: return "nystrom-gaussian";
        case LowRankMethod::kRandomFourier: return "rff";
    }
    return "?";
}

namespace {

// Shared body of both pivoted Cholesky variants. select_pivot picks the next
// pivot from the residual diagonal; stop decides on early termination.
template <typename SelectPivot, typename Stop>
LowRankFactor pivoted_cholesky_impl(const KernelOperator& op, int rank,
                                    LowRankMethod method, SelectPivot&& select,
                                    Stop&& stop) {
    const Eigen::Index n = op.size();
    if (rank < 1) throw std::invalid_argument("rank must be >= 1");
    rank = static_cast<int>(std::min<Eigen::Index>(rank, n));

    Eigen::VectorXd diag(n);
    for (Eigen::Index j = 0; j < n; ++j) diag[j] = op.entry(j, j);
    const double initial_trace = diag.sum();

    Eigen::MatrixXd Z(rank, n);
    int r = 0;
    while (r < rank) {
        if (stop(diag, initial_trace, r)) break;
        const Eigen::Index p = select(diag);
        const double dp = diag[p];
        if (dp <= 0.0) {
            if (dp < -1e-10 * std::max(1.0, initial_trace))
                throw std::runtime_error(
                    "pivoted Cholesky: negative pivot, operator not PSD");
            break;
        }
        const double root = std::sqrt(dp);
        Eigen::VectorXd row(n);
        for (Eigen::Index j = 0; j < n; ++j) row[j] = op.entry(p, j);
        if (r > 0)
            row.noalias() -= Z.topRows(r).transpose() * Z.topRows(r).col(p);
        row /= root;
        Z.row(r) = row.transpose();
        diag -= row.cwiseProduct(row);
        // A residual diagonal dipping below round-off scale means the input
        // was not PSD; mild negativity is clamped away.
        if (diag.minCoeff() < -1e-10 * std::max(1.0, initial_trace))
            throw std::runtime_error(
                "pivoted Cholesky: negative residual diagonal, operator not "
                "PSD");
        diag = diag.cwiseMax(0.0);
        diag[p] = 0.0;
        ++r;
    }

    LowRankFactor f;
    f.Z = Z.topRows(r);
    f.method = method;
    f.achieved_rank = r;
    f.trace_residual = std::max(diag.sum(), 0.0);
    return f;
}

}  // namespace

LowRankFactor pivoted_cholesky_greedy(const KernelOperator& op, int rank,
                                      double err_tol) {
    return pivoted_cholesky_impl(
        op, rank, LowRankMethod::kCholeskyGreedy,
        [](const Eigen::VectorXd& diag) {
            // Largest residual diagonal, smallest index on ties.
            Eigen::Index best = 0;
            for (Eigen::Index j = 1; j < diag.size(); ++j)
                if (diag[j] > diag[best]) best = j;
            return best;
        },
        [err_tol](const Eigen::VectorXd& diag, double, int) {
            return diag.maxCoeff() <= err_tol || diag.sum() <= err_tol;
        });
}

LowRankFactor pivoted_cholesky_random(const KernelOperator& op, int rank,
                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return pivoted_cholesky_impl(
        op, rank, LowRankMethod::kCholeskyRandom,
        [&rng](const Eigen::VectorXd& diag) {
            std::uniform_real_distribution<double> unif(0.0, diag.sum());
            const double target = unif(rng);
            double acc = 0.0;
            for (Eigen::Index j = 0; j < diag.size(); ++j) {
                acc += diag[j];
                if (acc >= target) return j;
            }
            return diag.size() - 1;
        },
        [](const Eigen::VectorXd& diag, double initial_trace, int) {
            // The residual trace hitting zero is a clean early exit rather
            // than a division-by-zero abort.
            return diag.sum() <= 1e-12 * initial_trace;
        });
}

LowRankFactor nystrom(const KernelOperator& op, int rank, NystromMode mode,
                      std::uint64_t seed, double ldl_threshold) {
    const Eigen::Index n = op.size();
    if (rank < 1 || rank > n)
        throw std::invalid_argument("nystrom: rank must lie in [1, n]");
    std::mt19937_64 rng(seed);

    Eigen::MatrixXd KQ(n, rank);
    Eigen::MatrixXd C(rank, rank);
    if (mode == NystromMode::kColumns) {
        // k distinct uniformly sampled coordinate columns.
        std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
        std::iota(pool.begin(), pool.end(), Eigen::Index{0});
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<Eigen::Index> cols(pool.begin(), pool.begin() + rank);
        for (int c = 0; c < rank; ++c) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
            e[cols[static_cast<std::size_t>(c)]] = 1.0;
            KQ.col(c) = op.apply(e);
        }
        for (int c = 0; c < rank; ++c)
            for (int r = 0; r < rank; ++r)
                C(r, c) = KQ(cols[static_cast<std::size_t>(r)], c);
    } else {
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::MatrixXd G(n, rank);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int c = 0; c < rank; ++c) G(i, c) = normal(rng);
        Eigen::MatrixXd Y(n, rank);
        for (int c = 0; c < rank; ++c) Y.col(c) = op.apply(G.col(c));
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
        for (int c = 0; c < rank; ++c) KQ.col(c) = op.apply(Q.col(c));
        C = Q.transpose() * KQ;
    }
    C = 0.5 * (C + C.transpose()).eval();

    // C = P^T L D L^T P with safeguarded diagonal; Z = D~^{-1/2} L^{-1} P (KQ)^T.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(C);
    Eigen::VectorXd dvec = ldlt.vectorD();
    for (int i = 0; i < rank; ++i)
        dvec[i] = std::max(std::abs(dvec[i]), ldl_threshold);
    Eigen::MatrixXd rhs = (ldlt.transpositionsP() * KQ.transpose()).eval();
    Eigen::MatrixXd Linv_rhs =
        ldlt.matrixL().solve(rhs);
    LowRankFactor f;
    f.Z = dvec.cwiseSqrt().cwiseInverse().asDiagonal() * Linv_rhs;
    f.method = mode == NystromMode::kColumns ? LowRankMethod::kNystromColumns
                                             : LowRankMethod::kNystromGaussian;
    f.achieved_rank = rank;
    f.trace_residual = 0.0;
    return f;
}

LowRankFactor random_fourier_features(const Eigen::MatrixXd& window_points,
                                      const GaussianKernelSpec& spec, int rank,
                                      std::uint64_t seed) {
    if (rank < 1) throw std::invalid_argument("rank must be >= 1");
    const Eigen::Index n = window_points.rows();
    const Eigen::Index d = window_points.cols();
    std::mt19937_64 rng(seed);
    // Spectral density of exp(-||.||^2 / ell^2): normal with per-coordinate
    // variance 2/ell^2.
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0) / spec.length_scale);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    Eigen::MatrixXd W(rank, d);
    Eigen::VectorXd b(rank);
    for (int i = 0; i < rank; ++i) {
        for (Eigen::Index t = 0; t < d; ++t) W(i, t) = normal(rng);
        b[i] = phase(rng);
    }

    LowRankFactor f;
    f.Z = (((W * window_points.transpose()).colwise() + b).array().cos() *
           std::sqrt(2.0 / rank))
              .matrix();
    f.method = LowRankMethod::kRandomFourier;
    f.achieved_rank = rank;
    f.trace_residual = 0.0;
    (void)n;
    return f;
}

StackedFactor stack_anova_factors(const std::vector<LowRankFactor>& factors,
                                  const std::vector<double>& weights) {
    if (factors.empty() || factors.size() != weights.size())
        throw std::invalid_argument("stack_anova_factors: size mismatch");
    const Eigen::Index n = factors.front().Z.cols();
    Eigen::Index total = 0;
    for (const auto& f : factors) {
        if (f.Z.cols() != n)
            throw std::invalid_argument("stack_anova_factors: differing n");
        total += f.Z.rows();
    }
    StackedFactor s;
    s.Z.resize(total, n);
    Eigen::Index row = 0;
    for (std::size_t l = 0; l < factors.size(); ++l) {
        const auto& Zl = factors[l].Z;
        s.Z.middleRows(row, Zl.rows()) = std::sqrt(weights[l]) * Zl;
        s.block_ranks.push_back(static_cast<int>(Zl.rows()));
        row += Zl.rows();
    }
    return s;
}

}  // namespace ksvm
