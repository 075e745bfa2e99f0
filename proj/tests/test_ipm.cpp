#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ksvm/ipm.hpp"

using namespace ksvm;
using helpers::DenseOperator;

namespace {

AnovaKernelSpec single_window_spec(Eigen::Index d, double ell) {
    AnovaKernelSpec spec;
    std::vector<int> all;
    for (Eigen::Index j = 0; j < d; ++j) all.push_back(static_cast<int>(j));
    // anova_eval is size-agnostic; for d <= 3 this is also a valid windowing.
    spec.windowing.windows = {all};
    spec.windowing.weights = {1.0};
    spec.windowing.length_scales = {ell};
    spec.windowing.mi_scores.assign(static_cast<std::size_t>(d), 0.0);
    return spec;
}

}  // namespace

TEST_CASE("config validation rejects out-of-range settings") {
    IpmConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.C = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.sigma = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.gamma0 = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.tol_ip = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.max_ip_iters = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.mu0 = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("newton right-hand side matches the longhand formula") {
    const Eigen::Index n = 12;
    const double C = 0.5, mu = 0.3, lambda = -0.7;
    const Eigen::VectorXd y = helpers::alternating_labels(n);
    // alpha strictly interior.
    Eigen::VectorXd alpha =
        0.1 * C + 0.8 * C *
                      helpers::random_vector(n, 1).array().abs().min(1.0).matrix().array();
    const Eigen::MatrixXd K =
        helpers::dense_gaussian(helpers::random_points(n, 2, 2), 1.0);
    const Eigen::VectorXd yky_alpha =
        y.cwiseProduct(K * y.cwiseProduct(alpha));

    const Eigen::VectorXd rhs =
        assemble_newton_rhs(alpha, lambda, yky_alpha, y, C, mu);
    REQUIRE(rhs.size() == n + 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double expected = 1.0 - yky_alpha[j] + lambda * y[j] +
                                mu / alpha[j] - mu / (C - alpha[j]);
        CHECK(rhs[j] == doctest::Approx(expected).epsilon(1e-13));
    }
    CHECK(rhs[n] == doctest::Approx(y.dot(alpha)).epsilon(1e-13));
}

TEST_CASE("newton rhs vanishes at a barrier stationary point") {
    // Pick alpha and mu, then solve for the linear term so the top block is
    // exactly zero: yky_alpha := 1 + lambda*y + mu/alpha - mu/(C-alpha).
    const Eigen::Index n = 6;
    const double C = 1.0, mu = 0.05, lambda = 0.2;
    const Eigen::VectorXd y = helpers::alternating_labels(n);
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(n, 0.5);
    Eigen::VectorXd yky_alpha(n);
    for (Eigen::Index j = 0; j < n; ++j)
        yky_alpha[j] = 1.0 + lambda * y[j] + mu / alpha[j] - mu / (C - alpha[j]);
    const Eigen::VectorXd rhs =
        assemble_newton_rhs(alpha, lambda, yky_alpha, y, C, mu);
    CHECK(rhs.head(n).norm() <= 1e-14);
    CHECK(rhs[n] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("fraction-to-boundary step lengths") {
    const double C = 1.0, gamma0 = 0.99995;
    Eigen::VectorXd alpha(3);
    alpha << 0.5, 0.5, 0.5;

    SUBCASE("unconstrained direction gives the full damped step") {
        Eigen::VectorXd d(3);
        d << 0.1, -0.1, 0.0;  // stays well inside (0, C) at s = 1
        auto [sa, sl] = step_lengths(alpha, d, gamma0, C);
        CHECK(sa == doctest::Approx(gamma0).epsilon(1e-15));
        CHECK(sl == gamma0);
    }

    SUBCASE("upper bound is the binding constraint") {
        Eigen::VectorXd d(3);
        d << 1.0, 0.0, 0.0;  // hits C at s = 0.5
        auto [sa, sl] = step_lengths(alpha, d, gamma0, C);
        CHECK(sa == doctest::Approx(gamma0 * 0.5).epsilon(1e-15));
        CHECK(sl == gamma0);
    }

    SUBCASE("lower bound is the binding constraint") {
        Eigen::VectorXd d(3);
        d << 0.0, -2.0, 0.0;  // hits 0 at s = 0.25
        auto [sa, sl] = step_lengths(alpha, d, gamma0, C);
        CHECK(sa == doctest::Approx(gamma0 * 0.25).epsilon(1e-15));
        CHECK(sl == gamma0);
    }

    SUBCASE("tightest coordinate wins") {
        Eigen::VectorXd d(3);
        d << 1.0, -5.0, 0.01;
        auto [sa, sl] = step_lengths(alpha, d, gamma0, C);
        CHECK(sa == doctest::Approx(gamma0 * 0.1).epsilon(1e-15));
    }

    SUBCASE("zero direction gives s = gamma0") {
        auto [sa, sl] = step_lengths(alpha, Eigen::VectorXd::Zero(3), gamma0, C);
        CHECK(sa == gamma0);
    }

    SUBCASE("updated iterate stays strictly interior") {
        std::mt19937_64 rng(9);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int t = 0; t < 50; ++t) {
            Eigen::VectorXd a(5), d(5);
            for (int j = 0; j < 5; ++j) {
                a[j] = 0.05 + 0.9 * std::abs(normal(rng)) / 3.0;
                a[j] = std::min(a[j], 0.95);
                d[j] = normal(rng);
            }
            auto [sa, sl] = step_lengths(a, d, gamma0, C);
            const Eigen::VectorXd next = a + sa * d;
            CHECK(next.minCoeff() > 0.0);
            CHECK(next.maxCoeff() < C);
        }
    }
}

TEST_CASE("ipm input validation") {
    DenseOperator op(Eigen::MatrixXd::Identity(4, 4));
    IpmConfig cfg;
    Eigen::VectorXd bad_labels(4);
    bad_labels << 1.0, -1.0, 0.5, 1.0;
    CHECK_THROWS_AS(ipm_train(op, bad_labels, nullptr, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(ipm_train(op, helpers::alternating_labels(3), nullptr, cfg),
                    std::invalid_argument);
}

TEST_CASE("ipm converges on separable blobs and respects the box") {
    const Eigen::Index n = 200;
    Dataset data = helpers::blobs(n, 2, 4.0, 11);
    const auto spec = single_window_spec(2, 1.0);
    const auto op = exact_operator(data, spec);
    IpmConfig cfg;  // Table defaults: C = 0.5, sigma = 0.6, tol_ip = 0.1

    const IpmResult res = ipm_train(*op, data.labels, nullptr, cfg);
    CHECK(res.status == IpmStatus::kConverged);
    CHECK(static_cast<int>(res.iterations.size()) <= cfg.max_ip_iters);

    // All three stopping criteria are met.
    CHECK(res.mu_final <= cfg.tol_ip);
    CHECK(res.xi_alpha_rel <= cfg.tol_ip);
    CHECK(res.xi_lambda_rel <= cfg.tol_ip);

    // Strict interiority is preserved through every step.
    CHECK(res.alpha.minCoeff() > 0.0);
    CHECK(res.alpha.maxCoeff() < cfg.C);

    // Near dual feasibility.
    CHECK(std::abs(data.labels.dot(res.alpha)) <=
          1e-3 * res.alpha.lpNorm<1>());

    // The model separates the training set.
    const TrainedModel model =
        make_model(res, data, spec, FastsumConfig{}, *op, cfg.C);
    const Eigen::VectorXd pred =
        model.predict(data.points, PredictBackend::kExact);
    CHECK((pred.array() == data.labels.array()).all());
}

TEST_CASE("barrier parameter follows the geometric schedule") {
    const Eigen::Index n = 60;
    Dataset data = helpers::blobs(n, 2, 3.0, 13);
    const auto spec = single_window_spec(2, 1.0);
    const auto op = exact_operator(data, spec);
    IpmConfig cfg;
    const IpmResult res = ipm_train(*op, data.labels, nullptr, cfg);
    REQUIRE(!res.iterations.empty());
    // mu is reduced before each Newton solve, so after k iterations
    // mu = mu0 * sigma^k.
    for (std::size_t k = 0; k < res.iterations.size(); ++k)
        CHECK(res.iterations[k].mu ==
              doctest::Approx(cfg.mu0 * std::pow(cfg.sigma, k + 1))
                  .epsilon(1e-12));
    CHECK(res.mu_final ==
          doctest::Approx(cfg.mu0 *
                          std::pow(cfg.sigma, res.iterations.size()))
              .epsilon(1e-12));
}

TEST_CASE("iteration log is self-consistent") {
    const Eigen::Index n = 100;
    Dataset data = helpers::blobs(n, 2, 3.0, 17);
    const auto spec = single_window_spec(2, 1.0);
    const auto op = exact_operator(data, spec);
    const IpmResult res = ipm_train(*op, data.labels, nullptr, IpmConfig{});
    double sum = 0.0;
    for (std::size_t k = 0; k < res.iterations.size(); ++k) {
        CHECK(res.iterations[k].it == static_cast<int>(k));
        CHECK(res.iterations[k].step_alpha > 0.0);
        sum += res.iterations[k].gmres.iterations;
    }
    CHECK(res.mean_gmres_iters() ==
          doctest::Approx(sum / res.iterations.size()).epsilon(1e-15));
    CHECK(res.xi_alpha_rel == res.iterations.back().xi_alpha_rel);
    CHECK(res.xi_lambda_rel == res.iterations.back().xi_lambda_rel);
}

TEST_CASE("training is deterministic") {
    Dataset data = helpers::blobs(80, 2, 3.0, 19);
    const auto spec = single_window_spec(2, 1.0);
    const auto op = exact_operator(data, spec);
    const IpmResult a = ipm_train(*op, data.labels, nullptr, IpmConfig{});
    const IpmResult b = ipm_train(*op, data.labels, nullptr, IpmConfig{});
    CHECK(a.alpha == b.alpha);
    CHECK(a.lambda == b.lambda);
    CHECK(a.iterations.size() == b.iterations.size());
}

TEST_CASE("preconditioned run matches the unpreconditioned solution") {
    const Eigen::Index n = 150;
    Dataset data = helpers::blobs(n, 2, 3.0, 23);
    const auto spec = single_window_spec(2, 1.0);
    const auto op = exact_operator(data, spec);

    LowRankFactor lr = pivoted_cholesky_greedy(*op, 60, 1e-12);
    StackedFactor factor = stack_anova_factors({lr}, {1.0});

    const IpmResult plain = ipm_train(*op, data.labels, nullptr, IpmConfig{});
    const IpmResult pre = ipm_train(*op, data.labels, &factor, IpmConfig{});
    CHECK(pre.status == IpmStatus::kConverged);
    // Same Newton systems solved to the same GMRES tolerance: the iterates
    // agree to a few orders better than tol_gmres.
    CHECK((plain.alpha - pre.alpha).norm() <= 1e-2 * plain.alpha.norm());
    // The preconditioner should not make GMRES worse.
    CHECK(pre.mean_gmres_iters() <= plain.mean_gmres_iters() + 1e-12);
}

TEST_CASE("bias from free support vectors") {
    // K = I so (K a.*y)_j = alpha_j y_j and the free-SV residual is
    // y_j - alpha_j y_j = y_j (1 - alpha_j).
    DenseOperator op(Eigen::MatrixXd::Identity(4, 4));
    Eigen::VectorXd y(4);
    y << 1.0, 1.0, -1.0, -1.0;
    const double C = 1.0, eps = 1e-4;

    SUBCASE("average over free support vectors only") {
        Eigen::VectorXd alpha(4);
        alpha << 0.4, 1.0, 0.2, 0.0;  // free: 0, 2; bound-at-C: 1; zero: 3
        const double expected =
            0.5 * ((1.0 * (1.0 - 0.4)) + (-1.0 * (1.0 - 0.2)));
        CHECK(compute_bias(alpha, y, op, C, eps) ==
              doctest::Approx(expected).epsilon(1e-14));
    }

    SUBCASE("median fallback when every support vector sits at C") {
        Eigen::VectorXd alpha(4);
        alpha << 1.0, 1.0, 1.0, 0.0;
        // Residuals: y_j (1 - 1) = 0 for the three SVs; median is 0.
        CHECK(compute_bias(alpha, y, op, C, eps) == doctest::Approx(0.0));

        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(4, 4);
        DenseOperator zero_op(K);
        // With K = 0 the residuals are just y_j: {1, 1, -1} -> median 1.
        CHECK(compute_bias(alpha, y, zero_op, C, eps) ==
              doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("no support vectors gives zero") {
        CHECK(compute_bias(Eigen::VectorXd::Zero(4), y, op, C, eps) == 0.0);
    }
}

TEST_CASE("make_model thresholds support vectors at 1e-4 C") {
    DenseOperator op(Eigen::MatrixXd::Identity(5, 5));
    Dataset data;
    data.points = helpers::random_points(5, 2, 29);
    data.labels = helpers::alternating_labels(5);
    const auto spec = single_window_spec(2, 1.0);

    IpmResult res;
    res.alpha.resize(5);
    const double C = 0.5;
    res.alpha << 0.3, 1e-4 * C * 0.5, 0.2, 0.0, 2e-4 * C;
    const TrainedModel m = make_model(res, data, spec, FastsumConfig{}, op, C);
    REQUIRE(m.support_indices.size() == 3);
    CHECK(m.support_indices[0] == 0);
    CHECK(m.support_indices[1] == 2);
    CHECK(m.support_indices[2] == 4);
    CHECK(m.dual_feasibility ==
          doctest::Approx(std::abs(data.labels.dot(res.alpha)))
              .epsilon(1e-15));
}

TEST_CASE("decision values match the longhand expansion") {
    Dataset data = helpers::blobs(60, 2, 3.0, 31);
    const auto spec = single_window_spec(2, 1.2);
    const auto op = exact_operator(data, spec);
    IpmConfig cfg;
    const IpmResult res = ipm_train(*op, data.labels, nullptr, cfg);
    const TrainedModel m =
        make_model(res, data, spec, FastsumConfig{}, *op, cfg.C);

    const Eigen::MatrixXd tests = helpers::random_points(7, 2, 32);
    const Eigen::VectorXd f = m.decision_values(tests, PredictBackend::kExact);
    for (Eigen::Index r = 0; r < 7; ++r) {
        double acc = m.bias;
        for (Eigen::Index i = 0; i < 60; ++i)
            acc += m.alpha[i] * m.y[i] *
                   anova_eval(data.points.row(i), tests.row(r), spec);
        CHECK(f[r] == doctest::Approx(acc).epsilon(1e-12));
    }

    // predict is the sign of the decision value, with sign(0) = +1.
    const Eigen::VectorXd p = m.predict(tests, PredictBackend::kExact);
    for (Eigen::Index r = 0; r < 7; ++r)
        CHECK(p[r] == (f[r] >= 0.0 ? 1.0 : -1.0));

    CHECK_THROWS_AS(m.predict(helpers::random_points(3, 5, 33),
                              PredictBackend::kExact),
                    std::invalid_argument);
}

TEST_CASE("fast predict agrees with exact predict") {
    Dataset data = helpers::blobs(300, 2, 3.0, 37);
    const auto spec = single_window_spec(2, 1.0);
    const auto op = exact_operator(data, spec);
    IpmConfig cfg;
    const IpmResult res = ipm_train(*op, data.labels, nullptr, cfg);
    const TrainedModel m =
        make_model(res, data, spec, FastsumConfig{}, *op, cfg.C);

    // Mix of in-range targets and far outliers that exercise the exact
    // fallback path.
    Eigen::MatrixXd tests = helpers::random_points(50, 2, 38);
    tests.row(0) << 50.0, -50.0;
    const Eigen::VectorXd fe = m.decision_values(tests, PredictBackend::kExact);
    const Eigen::VectorXd ff = m.decision_values(tests, PredictBackend::kFast);
    CHECK((fe - ff).cwiseAbs().maxCoeff() <= 1e-4 * (1.0 + fe.norm()));
}
