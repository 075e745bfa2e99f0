#ifndef KSVM_TESTS_HELPERS_HPP
#define KSVM_TESTS_HELPERS_HPP

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "ksvm/dataset.hpp"
#include "ksvm/kernel.hpp"

namespace helpers {

inline Eigen::MatrixXd random_points(Eigen::Index n, Eigen::Index d,
                                     std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd pts(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = normal(rng);
    return pts;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

/// Alternating +-1 labels (balanced for even n).
inline Eigen::VectorXd alternating_labels(Eigen::Index n) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = i % 2 == 0 ? 1.0 : -1.0;
    return y;
}

/// Two well-separated Gaussian blobs in d dimensions, labels by blob.
inline ksvm::Dataset blobs(Eigen::Index n, Eigen::Index d, double gap,
                           std::uint64_t seed, double noise = 0.5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, noise);
    ksvm::Dataset data;
    data.points.resize(n, d);
    data.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double label = i % 2 == 0 ? 1.0 : -1.0;
        const double center = label * gap / 2.0;
        for (Eigen::Index j = 0; j < d; ++j)
            data.points(i, j) = center + normal(rng);
        data.labels[i] = label;
    }
    return data;
}

/// Concentric circles in 2D: inner disk +1, outer annulus -1.
inline ksvm::Dataset circles(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
    std::normal_distribution<double> jitter(0.0, 0.08);
    ksvm::Dataset data;
    data.points.resize(n, 2);
    data.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double label = i % 2 == 0 ? 1.0 : -1.0;
        const double radius = (label > 0 ? 0.5 : 1.5) + jitter(rng);
        const double t = angle(rng);
        data.points(i, 0) = radius * std::cos(t);
        data.points(i, 1) = radius * std::sin(t);
        data.labels[i] = label;
    }
    return data;
}

/// Dense Gaussian kernel matrix oracle built entry by entry.
inline Eigen::MatrixXd dense_gaussian(const Eigen::MatrixXd& pts, double ell) {
    const Eigen::Index n = pts.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double k =
                std::exp(-(pts.row(i) - pts.row(j)).squaredNorm() / (ell * ell));
            K(i, j) = k;
            K(j, i) = k;
        }
    return K;
}

/// Operator view of an explicit dense matrix.
class DenseOperator final : public ksvm::KernelOperator {
public:
    explicit DenseOperator(Eigen::MatrixXd K) : K_(std::move(K)) {}
    Eigen::Index size() const override { return K_.rows(); }
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const override {
        return K_ * v;
    }
    double entry(Eigen::Index i, Eigen::Index j) const override {
        return K_(i, j);
    }
    const Eigen::MatrixXd& matrix() const { return K_; }

private:
    Eigen::MatrixXd K_;
};

class TempFile {
public:
    explicit TempFile(const std::string& contents) {
        char buf[] = "/tmp/ksvm_test_XXXXXX";
        const int fd = mkstemp(buf);
        path_ = buf;
        if (fd >= 0) {
            FILE* f = fdopen(fd, "w");
            std::fwrite(contents.data(), 1, contents.size(), f);
            std::fclose(f);
        }
    }
    ~TempFile() { std::remove(path_.c_str()); }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace helpers

#endif
