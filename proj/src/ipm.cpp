#include "ksvm/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <random>

namespace ksvm {

void IpmConfig::validate() const {
    if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("sigma must lie in (0, 1)");
    if (!(gamma0 > 0.0 && gamma0 < 1.0))
        throw std::invalid_argument("gamma0 must lie in (0, 1)");
    if (!(tol_ip > 0.0) || !(tol_gmres > 0.0))
        throw std::invalid_argument("tolerances must be positive");
    if (max_ip_iters < 1 || max_gmres_iters < 1)
        throw std::invalid_argument("iteration caps must be >= 1");
    if (!(mu0 > 0.0)) throw std::invalid_argument("mu0 must be positive");
}

double IpmResult::mean_gmres_iters() const {
    if (iterations.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& it : iterations) sum += it.gmres.iterations;
    return sum / static_cast<double>(iterations.size());
}

Eigen::VectorXd assemble_newton_rhs(const Eigen::VectorXd& alpha, double lambda,
                                    const Eigen::VectorXd& yky_alpha,
                                    const Eigen::VectorXd& y, double C,
                                    double mu) {
    const Eigen::Index n = alpha.size();
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = Eigen::VectorXd::Ones(n) - yky_alpha + lambda * y +
                  mu * alpha.cwiseInverse() -
                  mu * (C - alpha.array()).inverse().matrix();
    rhs[n] = y.dot(alpha);
    return rhs;
}

std::pair<double, double> step_lengths(const Eigen::VectorXd& alpha,
                                       const Eigen::VectorXd& dalpha,
                                       double gamma0, double C) {
    double smax = 1.0;
    for (Eigen::Index j = 0; j < alpha.size(); ++j) {
        if (dalpha[j] < 0.0)
            smax = std::min(smax, -alpha[j] / dalpha[j]);
        else if (dalpha[j] > 0.0)
            smax = std::min(smax, (C - alpha[j]) / dalpha[j]);
    }
    return {gamma0 * smax, gamma0};
}

namespace {

Eigen::VectorXd barrier_diagonal(const Eigen::VectorXd& alpha, double C,
                                 double mu) {
    return mu * (alpha.array().square().inverse() +
                 (C - alpha.array()).square().inverse())
                    .matrix();
}

Eigen::VectorXd initial_alpha(Eigen::Index n, double C) {
    // Strictly interior with per-index jitter so that y^T alpha^0 and the
    // initial dual infeasibility are both nonzero on balanced data.
    std::mt19937_64 rng(0x5EED5EEDull);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd a(n);
    for (Eigen::Index j = 0; j < n; ++j) a[j] = C * (0.4 + 0.2 * unif(rng));
    return a;
}

}  // namespace

IpmResult ipm_train(const KernelOperator& op, const Eigen::VectorXd& y,
                    const StackedFactor* factor, const IpmConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = op.size();
    if (y.size() != n) throw std::invalid_argument("ipm_train: label size mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
        if (y[i] != 1.0 && y[i] != -1.0)
            throw std::invalid_argument("ipm_train: labels must be +-1");

    const double C = cfg.C;
    Eigen::VectorXd alpha = initial_alpha(n, C);
    double lambda = 0.0;
    double mu = cfg.mu0;

    auto yky = [&](const Eigen::VectorXd& a) {
        return y.cwiseProduct(op.apply(y.cwiseProduct(a))).eval();
    };

    Eigen::VectorXd yky_alpha = yky(alpha);
    const double xi_alpha0 = std::abs(y.dot(alpha));
    Eigen::VectorXd xi_lambda0_vec =
        assemble_newton_rhs(alpha, lambda, yky_alpha, y, C, mu).head(n);
    const double xi_lambda0 = xi_lambda0_vec.norm();
    if (xi_alpha0 == 0.0 || xi_lambda0 == 0.0)
        throw std::runtime_error("ipm_train: degenerate initial infeasibility");

    SaddlePreconditioner precond(factor, y);
    double xi_alpha_rel = 1.0, xi_lambda_rel = 1.0;

    IpmResult res;
    int stalled_streak = 0;
    int it = 0;
    while ((mu > cfg.tol_ip || xi_alpha_rel > cfg.tol_ip ||
            xi_lambda_rel > cfg.tol_ip) &&
           it < cfg.max_ip_iters) {
        mu *= cfg.sigma;
        Eigen::VectorXd theta = barrier_diagonal(alpha, C, mu);
        SaddleOperator saddle(op, y, theta);
        precond.refresh(theta);

        const Eigen::VectorXd rhs =
            assemble_newton_rhs(alpha, lambda, yky_alpha, y, C, mu);
        auto [delta, gstats] =
            gmres_solve(saddle, precond, rhs, cfg.tol_gmres, cfg.max_gmres_iters);
        const Eigen::VectorXd dalpha = delta.head(n);
        const double dlambda = delta[n];

        auto [s_alpha, s_lambda] = step_lengths(alpha, dalpha, cfg.gamma0, C);
        alpha += s_alpha * dalpha;
        lambda += s_lambda * dlambda;

        yky_alpha = yky(alpha);
        xi_alpha_rel = std::abs(y.dot(alpha)) / xi_alpha0;
        xi_lambda_rel =
            assemble_newton_rhs(alpha, lambda, yky_alpha, y, C, mu).head(n).norm() /
            xi_lambda0;

        IpmIterationLog log;
        log.it = it;
        log.mu = mu;
        log.xi_alpha_rel = xi_alpha_rel;
        log.xi_lambda_rel = xi_lambda_rel;
        log.step_alpha = s_alpha;
        log.gmres = std::move(gstats);
        const bool stalled_step = !log.gmres.converged;
        res.iterations.push_back(std::move(log));
        ++it;

        stalled_streak = stalled_step ? stalled_streak + 1 : 0;
        if (stalled_streak > 3) {
            res.status = IpmStatus::kStalled;
            break;
        }
    }

    res.alpha = alpha;
    res.lambda = lambda;
    res.mu_final = mu;
    res.xi_alpha_rel = xi_alpha_rel;
    res.xi_lambda_rel = xi_lambda_rel;
    if (res.status != IpmStatus::kStalled)
        res.status = (mu <= cfg.tol_ip && xi_alpha_rel <= cfg.tol_ip &&
                      xi_lambda_rel <= cfg.tol_ip)
                         ? IpmStatus::kConverged
                         : IpmStatus::kMaxIterations;
    return res;
}

double compute_bias(const Eigen::VectorXd& alpha, const Eigen::VectorXd& y,
                    const KernelOperator& op, double C, double eps_sv) {
    const Eigen::VectorXd kay = op.apply(alpha.cwiseProduct(y));
    std::vector<double> free_vals, sv_vals;
    for (Eigen::Index j = 0; j < alpha.size(); ++j) {
        if (alpha[j] > eps_sv) {
            const double val = y[j] - kay[j];
            sv_vals.push_back(val);
            if (alpha[j] < C - eps_sv) free_vals.push_back(val);
        }
    }
    if (!free_vals.empty()) {
        double sum = 0.0;
        for (double v : free_vals) sum += v;
        return sum / static_cast<double>(free_vals.size());
    }
    if (!sv_vals.empty()) {
        std::nth_element(sv_vals.begin(), sv_vals.begin() + sv_vals.size() / 2,
                         sv_vals.end());
        double med = sv_vals[sv_vals.size() / 2];
        if (sv_vals.size() % 2 == 0) {
            auto lower = *std::max_element(sv_vals.begin(),
                                           sv_vals.begin() + sv_vals.size() / 2);
            med = 0.5 * (med + lower);
        }
        return med;
    }
    std::cerr << "ksvm: warning: no support vectors, bias set to 0\n";
    return 0.0;
}

TrainedModel make_model(const IpmResult& result, const Dataset& train,
                        const AnovaKernelSpec& spec, const FastsumConfig& fs,
                        const KernelOperator& op, double C) {
    TrainedModel m;
    m.alpha = result.alpha;
    m.y = train.labels;
    m.train_points = train.points;
    m.kernel = spec;
    if (train.normalization) m.normalization = *train.normalization;
    m.fastsum = fs;
    const double eps_sv = 1e-4 * C;
    m.bias = compute_bias(result.alpha, train.labels, op, C, eps_sv);
    for (Eigen::Index j = 0; j < result.alpha.size(); ++j)
        if (result.alpha[j] > eps_sv) m.support_indices.push_back(j);
    m.dual_feasibility = std::abs(train.labels.dot(result.alpha));
    return m;
}

Eigen::VectorXd TrainedModel::decision_values(const Eigen::MatrixXd& raw_points,
                                              PredictBackend backend) const {
    if (raw_points.cols() != train_points.cols())
        throw std::invalid_argument("predict: feature dimension mismatch");
    Eigen::MatrixXd pts = normalization.empty()
                              ? raw_points
                              : apply_normalization(raw_points, normalization);
    const Eigen::Index t = pts.rows();
    const Eigen::VectorXd coeff = alpha.cwiseProduct(y);

    auto exact_rows = [&](const std::vector<Eigen::Index>& rows) {
        Eigen::VectorXd vals(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double acc = 0.0;
            const Eigen::VectorXd x = pts.row(rows[r]);
            for (Eigen::Index i = 0; i < train_points.rows(); ++i)
                acc += coeff[i] * anova_eval(train_points.row(i), x, kernel);
            vals[static_cast<Eigen::Index>(r)] = acc;
        }
        return vals;
    };

    Eigen::VectorXd f(t);
    if (backend == PredictBackend::kExact) {
        std::vector<Eigen::Index> all(static_cast<std::size_t>(t));
        std::iota(all.begin(), all.end(), Eigen::Index{0});
        f = exact_rows(all);
    } else {
        // Per-window cross transforms; sources sit inside a padded torus so
        // most test points are admissible. Out-of-range targets fall back to
        // direct evaluation.
        const auto& w = kernel.windowing;
        f.setZero();
        std::vector<bool> offending(static_cast<std::size_t>(t), false);
        for (int l = 0; l < w.num_windows(); ++l) {
            const auto& win = w.windows[static_cast<std::size_t>(l)];
            Eigen::MatrixXd src(train_points.rows(),
                                static_cast<Eigen::Index>(win.size()));
            Eigen::MatrixXd tgt(t, static_cast<Eigen::Index>(win.size()));
            for (std::size_t c = 0; c < win.size(); ++c) {
                src.col(static_cast<Eigen::Index>(c)) = train_points.col(win[c]);
                tgt.col(static_cast<Eigen::Index>(c)) = pts.col(win[c]);
            }
            GaussianKernelSpec gs{w.length_scales[static_cast<std::size_t>(l)]};
            FastsumPlan plan = plan_fastsum(src, gs, fastsum, 1.0 / 1.2);
            // Identify targets outside the torus ball for this window.
            Eigen::MatrixXd scaled = plan.scale_points(tgt);
            std::vector<Eigen::Index> ok;
            for (Eigen::Index j = 0; j < t; ++j) {
                if (scaled.row(j).norm() <= fastsum.torus_radius)
                    ok.push_back(j);
                else
                    offending[static_cast<std::size_t>(j)] = true;
            }
            if (!ok.empty()) {
                Eigen::MatrixXd tgt_ok(static_cast<Eigen::Index>(ok.size()),
                                       tgt.cols());
                for (std::size_t r = 0; r < ok.size(); ++r)
                    tgt_ok.row(static_cast<Eigen::Index>(r)) = tgt.row(ok[r]);
                const Eigen::VectorXd part =
                    apply_fastsum_cross(plan, tgt_ok, coeff);
                const double eta = w.weights[static_cast<std::size_t>(l)];
                for (std::size_t r = 0; r < ok.size(); ++r)
                    f[ok[r]] += eta * part[static_cast<Eigen::Index>(r)];
            }
        }
        std::vector<Eigen::Index> redo;
        for (Eigen::Index j = 0; j < t; ++j)
            if (offending[static_cast<std::size_t>(j)]) redo.push_back(j);
        if (!redo.empty()) {
            const Eigen::VectorXd vals = exact_rows(redo);
            for (std::size_t r = 0; r < redo.size(); ++r)
                f[redo[r]] = vals[static_cast<Eigen::Index>(r)];
        }
    }
    return f.array() + bias;
}

Eigen::VectorXd TrainedModel::predict(const Eigen::MatrixXd& test_points,
                                      PredictBackend backend) const {
    const Eigen::VectorXd f = decision_values(test_points, backend);
    return f.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
}

}  // namespace ksvm
