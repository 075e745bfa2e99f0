#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ksvm/fastsum.hpp"

using namespace ksvm;

namespace {

Dataset wrap(const Eigen::MatrixXd& pts) {
    Dataset data;
    data.points = pts;
    data.labels = helpers::alternating_labels(pts.rows());
    return data;
}

double max_abs_error_vs_dense(const Eigen::MatrixXd& pts, double ell,
                              const FastsumConfig& cfg) {
    const auto plan = plan_fastsum(pts, GaussianKernelSpec{ell}, cfg);
    const Eigen::MatrixXd K = helpers::dense_gaussian(pts, ell);
    const Eigen::VectorXd v = helpers::random_vector(pts.rows(), 77);
    return (apply_fastsum(plan, v) - K * v).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("config validation") {
    FastsumConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.bandwidth = 15;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.bandwidth = 32;
    cfg.torus_radius = 0.3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.torus_radius = 0.25;
    cfg.window_cutoff = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("trig approximant is even (coefficient symmetry)") {
    // One source at the origin; targets at +-t must get identical values
    // since the Gaussian's Fourier coefficients satisfy b_J = b_{-J}.
    Eigen::MatrixXd src(3, 1);
    src << -1.0, 0.0, 1.0;
    FastsumConfig cfg;
    cfg.bandwidth = 16;
    const auto plan = plan_fastsum(src, GaussianKernelSpec{0.5}, cfg);
    Eigen::VectorXd v(3);
    v << 0.0, 1.0, 0.0;  // weight only on the source at the origin
    Eigen::MatrixXd targets(2, 1);
    targets << -0.5, 0.5;  // symmetric about the source, inside the domain
    const Eigen::VectorXd f = apply_fastsum_cross(plan, targets, v);
    CHECK(f[0] == doctest::Approx(f[1]).epsilon(1e-12));
}

TEST_CASE("coefficient sum approximates kappa(0) = 1") {
    // 1D points spread over [-1, 1]; with r_T = 1/4 the affine map has scale
    // 1/4, so ell = 0.4 lands at ell_scaled = 0.1.
    Eigen::MatrixXd pts(11, 1);
    for (int i = 0; i <= 10; ++i) pts(i, 0) = -1.0 + 0.2 * i;
    FastsumConfig cfg;  // N = 32
    const auto plan = plan_fastsum(pts, GaussianKernelSpec{0.4}, cfg);
    CHECK(plan.scaled_length() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(plan.coefficient_sum() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("scaling map image lies inside the torus ball") {
    const Eigen::MatrixXd pts = helpers::random_points(300, 3, 21, 4.0);
    FastsumConfig cfg;
    const auto plan = plan_fastsum(pts, GaussianKernelSpec{1.0}, cfg);
    const Eigen::MatrixXd scaled = plan.scale_points(pts);
    for (Eigen::Index i = 0; i < scaled.rows(); ++i)
        CHECK(scaled.row(i).norm() <= cfg.torus_radius * (1.0 + 1e-12));

    // fit_fraction shrinks the image further, leaving margin for targets.
    const auto padded = plan_fastsum(pts, GaussianKernelSpec{1.0}, cfg, 0.8);
    const Eigen::MatrixXd scaled2 = padded.scale_points(pts);
    for (Eigen::Index i = 0; i < scaled2.rows(); ++i)
        CHECK(scaled2.row(i).norm() <= 0.8 * cfg.torus_radius * (1.0 + 1e-12));
}

TEST_CASE("apply_fastsum of zero is zero") {
    const Eigen::MatrixXd pts = helpers::random_points(50, 2, 1);
    const auto plan = plan_fastsum(pts, GaussianKernelSpec{1.0}, FastsumConfig{});
    CHECK(apply_fastsum(plan, Eigen::VectorXd::Zero(50)).norm() == 0.0);
}

TEST_CASE("2D matvec matches the dense oracle to 1e-4") {
    const Eigen::MatrixXd pts = helpers::random_points(500, 2, 31);
    const auto plan = plan_fastsum(pts, GaussianKernelSpec{1.0}, FastsumConfig{});
    const Eigen::MatrixXd K = helpers::dense_gaussian(pts, 1.0);
    const Eigen::VectorXd v = helpers::random_vector(500, 32);
    const Eigen::VectorXd exact = K * v;
    CHECK((apply_fastsum(plan, v) - exact).norm() <= 1e-4 * exact.norm());
}

TEST_CASE("basis vector reproduces a kernel column") {
    const Eigen::MatrixXd pts = helpers::random_points(200, 1, 41);
    const auto plan = plan_fastsum(pts, GaussianKernelSpec{1.0}, FastsumConfig{});
    const Eigen::MatrixXd K = helpers::dense_gaussian(pts, 1.0);
    Eigen::VectorXd ek = Eigen::VectorXd::Zero(200);
    ek[17] = 1.0;
    CHECK((apply_fastsum(plan, ek) - K.col(17)).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("cross transform") {
    const Eigen::MatrixXd pts = helpers::random_points(300, 2, 51);
    FastsumConfig cfg;
    const auto plan = plan_fastsum(pts, GaussianKernelSpec{1.0}, cfg);
    const Eigen::VectorXd v = helpers::random_vector(300, 52);

    SUBCASE("targets = sources reproduces apply_fastsum") {
        const Eigen::VectorXd self = apply_fastsum(plan, v);
        const Eigen::VectorXd cross = apply_fastsum_cross(plan, pts, v);
        CHECK((self - cross).cwiseAbs().maxCoeff() <= 1e-12);
    }

    SUBCASE("single target on a source with unit weight gives ~1") {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(300);
        e[42] = 1.0;
        const Eigen::VectorXd f =
            apply_fastsum_cross(plan, pts.row(42), e);
        CHECK(f[0] == doctest::Approx(1.0).epsilon(1e-4));
    }

    SUBCASE("100 random targets match the dense cross matrix") {
        // Targets drawn narrower than the sources stay inside the map image.
        const Eigen::MatrixXd targets = helpers::random_points(100, 2, 53, 0.5);
        Eigen::MatrixXd C(100, 300);
        for (Eigen::Index i = 0; i < 100; ++i)
            for (Eigen::Index j = 0; j < 300; ++j)
                C(i, j) = std::exp(-(targets.row(i) - pts.row(j)).squaredNorm());
        const Eigen::VectorXd exact = C * v;
        const Eigen::VectorXd fast = apply_fastsum_cross(plan, targets, v);
        CHECK((fast - exact).norm() <= 1e-4 * exact.norm());
    }

    SUBCASE("target outside the scaled domain raises DomainError") {
        Eigen::MatrixXd far(1, 2);
        far << 1e3, 1e3;
        CHECK_THROWS_AS(apply_fastsum_cross(plan, far, v), DomainError);
    }
}

TEST_CASE("anova fast operator") {
    const Dataset data = wrap(helpers::random_points(1000, 6, 61));
    AnovaKernelSpec spec;
    spec.windowing.windows = {{0, 1, 2}, {3, 4, 5}};
    spec.windowing.weights = {0.5, 0.5};
    spec.windowing.length_scales = {1.0, 1.3};
    spec.windowing.mi_scores.assign(6, 0.0);
    FastsumConfig cfg;
    const auto fast = anova_fast_operator(data, spec, cfg);
    const auto exact = exact_operator(data, spec);
    const Eigen::VectorXd v = helpers::random_vector(1000, 62);

    SUBCASE("two-window apply matches the dense oracle") {
        const Eigen::VectorXd kv = exact->apply(v);
        CHECK((fast->apply(v) - kv).norm() <= 1e-4 * kv.norm());
    }

    SUBCASE("single window equals the scaled plain fast apply") {
        AnovaKernelSpec one;
        one.windowing.windows = {{0, 1, 2}};
        one.windowing.weights = {0.7};
        one.windowing.length_scales = {1.0};
        one.windowing.mi_scores.assign(6, 0.0);
        const auto op = anova_fast_operator(data, one, cfg);
        const auto plan =
            plan_fastsum(data.points.leftCols(3), GaussianKernelSpec{1.0}, cfg);
        const Eigen::VectorXd direct = 0.7 * apply_fastsum(plan, v);
        CHECK((op->apply(v) - direct).cwiseAbs().maxCoeff() <= 1e-12);
    }

    SUBCASE("linearity") {
        const Eigen::VectorXd w = helpers::random_vector(1000, 63);
        const Eigen::VectorXd lhs = fast->apply(v + w);
        const Eigen::VectorXd rhs = fast->apply(v) + fast->apply(w);
        CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    SUBCASE("approximate symmetry of the bilinear form") {
        const Eigen::VectorXd u = helpers::random_vector(1000, 64);
        const double asym =
            std::abs(u.dot(fast->apply(v)) - fast->apply(u).dot(v));
        CHECK(asym <= 1e-8 * u.norm() * v.norm());
    }

    SUBCASE("entry is the direct kernel evaluation") {
        CHECK(fast->entry(3, 8) == doctest::Approx(exact->entry(3, 8)).epsilon(1e-14));
    }
}

TEST_CASE("error strictly decreases as the bandwidth doubles") {
    const Eigen::MatrixXd pts = helpers::random_points(400, 2, 71);
    double prev = 1e300;
    for (int N : {8, 16, 32}) {
        FastsumConfig cfg;
        cfg.bandwidth = N;
        const double err = max_abs_error_vs_dense(pts, 1.0, cfg);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("plan reuse is bit-identical") {
    const Eigen::MatrixXd pts = helpers::random_points(200, 2, 81);
    const auto plan = plan_fastsum(pts, GaussianKernelSpec{1.0}, FastsumConfig{});
    const Eigen::VectorXd v = helpers::random_vector(200, 82);
    const Eigen::VectorXd a = apply_fastsum(plan, v);
    const Eigen::VectorXd b = apply_fastsum(plan, v);
    CHECK(a == b);
}

TEST_CASE("plan rejects unusable inputs") {
    CHECK_THROWS_AS(plan_fastsum(helpers::random_points(10, 4, 1),
                                 GaussianKernelSpec{1.0}, FastsumConfig{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(plan_fastsum(Eigen::MatrixXd(0, 2), GaussianKernelSpec{1.0},
                                 FastsumConfig{}),
                    std::invalid_argument);
    // Degenerate all-identical points are allowed.
    CHECK_NOTHROW(plan_fastsum(Eigen::MatrixXd::Zero(5, 2),
                               GaussianKernelSpec{1.0}, FastsumConfig{}));
}

TEST_CASE("apply length mismatch is rejected") {
    const auto plan = plan_fastsum(helpers::random_points(20, 1, 2),
                                   GaussianKernelSpec{1.0}, FastsumConfig{});
    CHECK_THROWS_AS(apply_fastsum(plan, Eigen::VectorXd::Zero(19)),
                    std::invalid_argument);
}
