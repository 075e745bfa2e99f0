#include "ksvm/fastsum.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <iostream>
#include <mutex>
#include <numbers>

namespace ksvm {

namespace {

// FFTW's planner is not reentrant; plan creation/destruction is serialized.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    fftw_complex* p = nullptr;
    explicit FftwBuffer(std::size_t count) {
        p = fftw_alloc_complex(count);
        if (!p) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(p); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    std::complex<double>* data() {
        return reinterpret_cast<std::complex<double>*>(p);
    }
};

}  // namespace

void FastsumConfig::validate() const {
    if (bandwidth < 2 || bandwidth % 2 != 0)
        throw std::invalid_argument("bandwidth must be a positive even integer");
    if (window_cutoff < 2 || window_cutoff > 8)
        throw std::invalid_argument("window_cutoff must lie in [2, 8]");
    if (oversampling < 1)
        throw std::invalid_argument("oversampling must be >= 1");
    if (!(torus_radius > 0.0 && torus_radius <= 0.25))
        throw std::invalid_argument("torus_radius must lie in (0, 1/4]");
}

struct FastsumPlan::Impl {
    int d = 0;
    int N = 0;
    int m = 0;
    int M = 0;  // oversampled grid edge, sigma_os * N
    double b_win = 0.0;
    double torus_radius = 0.0;
    double fit_fraction = 1.0;
    Eigen::VectorXd center;
    double scale = 1.0;
    double ell_scaled = 0.0;
    Eigen::MatrixXd scaled_nodes;  // n x d, inside the torus ball

    std::vector<std::size_t> spectral_index;  // N^d positions on the M^d grid
    std::vector<double> spectral_mult;        // b_J * dec(J)^2
    double coef_sum = 0.0;

    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    std::size_t grid_size() const {
        std::size_t s = 1;
        for (int t = 0; t < d; ++t) s *= static_cast<std::size_t>(M);
        return s;
    }

    double window_value(double t) const {
        const double mt = static_cast<double>(M) * t;
        return std::exp(-mt * mt / b_win) / std::sqrt(std::numbers::pi * b_win);
    }

    ~Impl() {
        if (fwd || bwd) {
            std::lock_guard<std::mutex> lock(planner_mutex());
            if (fwd) fftw_destroy_plan(fwd);
            if (bwd) fftw_destroy_plan(bwd);
        }
    }
};

FastsumPlan::FastsumPlan() : impl_(new Impl) {}
FastsumPlan::~FastsumPlan() = default;
FastsumPlan::FastsumPlan(FastsumPlan&&) noexcept = default;
FastsumPlan& FastsumPlan::operator=(FastsumPlan&&) noexcept = default;

Eigen::Index FastsumPlan::num_sources() const { return impl_->scaled_nodes.rows(); }
int FastsumPlan::dim() const { return impl_->d; }
double FastsumPlan::scaled_length() const { return impl_->ell_scaled; }
double FastsumPlan::coefficient_sum() const { return impl_->coef_sum; }

Eigen::MatrixXd FastsumPlan::scale_points(const Eigen::MatrixXd& pts) const {
    return (pts.rowwise() - impl_->center.transpose()) * impl_->scale;
}

FastsumPlan plan_fastsum(const Eigen::MatrixXd& points,
                         const GaussianKernelSpec& spec,
                         const FastsumConfig& cfg, double fit_fraction) {
    cfg.validate();
    const int d = static_cast<int>(points.cols());
    const Eigen::Index n = points.rows();
    if (d < 1 || d > 3)
        throw std::invalid_argument("fast summation window dimension must be 1..3");
    if (n < 1) throw std::invalid_argument("empty node set");
    if (!(fit_fraction > 0.0 && fit_fraction <= 1.0))
        throw std::invalid_argument("fit_fraction must lie in (0, 1]");

    FastsumPlan plan;
    auto& im = *plan.impl_;
    im.d = d;
    im.N = cfg.bandwidth;
    im.m = cfg.window_cutoff;
    im.M = cfg.oversampling * cfg.bandwidth;
    im.torus_radius = cfg.torus_radius;
    im.fit_fraction = fit_fraction;
    const double sig = static_cast<double>(cfg.oversampling);
    im.b_win = (2.0 * sig * im.m) / ((2.0 * sig - 1.0) * std::numbers::pi);

    // Affine map: center the bounding box, uniform scale into the l2 ball of
    // radius fit_fraction * torus_radius. Uniformity keeps the Gaussian
    // isotropic under the map.
    im.center = 0.5 * (points.colwise().maxCoeff() + points.colwise().minCoeff());
    double radius = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        radius = std::max(radius,
                          (points.row(i).transpose() - im.center).norm());
    im.scale = radius > 0.0 ? fit_fraction * cfg.torus_radius / radius : 1.0;
    im.scaled_nodes = plan.scale_points(points);
    im.ell_scaled = im.scale * spec.length_scale;
    if (im.ell_scaled > cfg.torus_radius)
        std::cerr << "ksvm: warning: scaled length scale " << im.ell_scaled
                  << " exceeds torus radius " << cfg.torus_radius
                  << "; periodization error may be large\n";

    // Fourier coefficients of the rescaled Gaussian: FFT of N^d grid samples.
    const int N = im.N;
    std::size_t nfreq = 1;
    for (int t = 0; t < d; ++t) nfreq *= static_cast<std::size_t>(N);
    {
        FftwBuffer buf(nfreq), out(nfreq);
        const double inv_ell2 = 1.0 / (im.ell_scaled * im.ell_scaled);
        for (std::size_t k = 0; k < nfreq; ++k) {
            std::size_t rem = k;
            double r2 = 0.0;
            for (int t = d - 1; t >= 0; --t) {
                const int kt = static_cast<int>(rem % static_cast<std::size_t>(N));
                rem /= static_cast<std::size_t>(N);
                const double coord =
                    (kt < N / 2 ? kt : kt - N) / static_cast<double>(N);
                r2 += coord * coord;
            }
            buf.data()[k] = std::exp(-r2 * inv_ell2);
        }
        fftw_plan p;
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            std::vector<int> dims(static_cast<std::size_t>(d), N);
            p = fftw_plan_dft(d, dims.data(), buf.p, out.p, FFTW_FORWARD,
                              FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
        }
        fftw_execute(p);
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            fftw_destroy_plan(p);
        }

        im.spectral_index.resize(nfreq);
        im.spectral_mult.resize(nfreq);
        const double invn = 1.0 / static_cast<double>(nfreq);
        const int M = im.M;
        for (std::size_t k = 0; k < nfreq; ++k) {
            std::size_t rem = k;
            int kdim[3] = {0, 0, 0};
            for (int t = d - 1; t >= 0; --t) {
                kdim[t] = static_cast<int>(rem % static_cast<std::size_t>(N));
                rem /= static_cast<std::size_t>(N);
            }
            std::size_t midx = 0;
            double dec2 = 1.0;
            for (int t = 0; t < d; ++t) {
                const int J = kdim[t] < N / 2 ? kdim[t] : kdim[t] - N;  // in I_N
                const int Jm = (J % M + M) % M;
                midx = midx * static_cast<std::size_t>(M) + static_cast<std::size_t>(Jm);
                const double arg = std::numbers::pi * J / static_cast<double>(M);
                dec2 *= std::exp(2.0 * im.b_win * arg * arg);
            }
            const double bJ = out.data()[k].real() * invn;
            im.spectral_index[k] = midx;
            im.spectral_mult[k] = bJ * dec2;
            im.coef_sum += bJ;
        }
    }

    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        std::vector<int> dims(static_cast<std::size_t>(d), im.M);
        FftwBuffer a(im.grid_size()), b(im.grid_size());
        im.fwd = fftw_plan_dft(d, dims.data(), a.p, b.p, FFTW_FORWARD, FFTW_ESTIMATE);
        im.bwd = fftw_plan_dft(d, dims.data(), a.p, b.p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    return plan;
}

namespace {

// Spread or gather with the truncated Gaussian window around one node.
// Visits (2m)^d grid points.
template <typename F>
void for_each_neighbor(const FastsumPlan::Impl& im,
                       const Eigen::Ref<const Eigen::RowVectorXd>& x, F&& f) {
    const int M = im.M;
    const int m = im.m;
    const int span = 2 * m;
    int base[3] = {0, 0, 0};
    for (int t = 0; t < im.d; ++t)
        base[t] = static_cast<int>(std::floor(x[t] * M)) - m + 1;

    double w[3][16];
    for (int t = 0; t < im.d; ++t)
        for (int o = 0; o < span; ++o)
            w[t][o] = im.window_value(x[t] - static_cast<double>(base[t] + o) / M);

    const auto wrap = [M](int l) { return ((l % M) + M) % M; };
    if (im.d == 1) {
        for (int a = 0; a < span; ++a)
            f(static_cast<std::size_t>(wrap(base[0] + a)), w[0][a]);
    } else if (im.d == 2) {
        for (int a = 0; a < span; ++a) {
            const std::size_t ia = static_cast<std::size_t>(wrap(base[0] + a)) *
                                   static_cast<std::size_t>(M);
            for (int b = 0; b < span; ++b)
                f(ia + static_cast<std::size_t>(wrap(base[1] + b)), w[0][a] * w[1][b]);
        }
    } else {
        for (int a = 0; a < span; ++a) {
            const std::size_t ia = static_cast<std::size_t>(wrap(base[0] + a)) *
                                   static_cast<std::size_t>(M);
            for (int b = 0; b < span; ++b) {
                const std::size_t ib =
                    (ia + static_cast<std::size_t>(wrap(base[1] + b))) *
                    static_cast<std::size_t>(M);
                const double wab = w[0][a] * w[1][b];
                for (int c = 0; c < span; ++c)
                    f(ib + static_cast<std::size_t>(wrap(base[2] + c)), wab * w[2][c]);
            }
        }
    }
}

Eigen::VectorXd run_transform(const FastsumPlan::Impl& im,
                              const Eigen::MatrixXd& scaled_targets,
                              const Eigen::VectorXd& v) {
    const std::size_t G = im.grid_size();
    FftwBuffer a(G), b(G);
    std::memset(a.p, 0, G * sizeof(fftw_complex));

    // Adjoint: spread source weights onto the oversampled grid.
    for (Eigen::Index i = 0; i < im.scaled_nodes.rows(); ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        for_each_neighbor(im, im.scaled_nodes.row(i),
                          [&](std::size_t idx, double w) {
                              a.data()[idx] += vi * w;
                          });
    }
    fftw_execute_dft(im.fwd, a.p, b.p);

    // Deconvolve, multiply by the kernel coefficients, deconvolve again for
    // the forward transform; frequencies outside I_N are dropped.
    std::memset(a.p, 0, G * sizeof(fftw_complex));
    for (std::size_t k = 0; k < im.spectral_index.size(); ++k) {
        const std::size_t idx = im.spectral_index[k];
        a.data()[idx] = b.data()[idx] * im.spectral_mult[k];
    }
    fftw_execute_dft(im.bwd, a.p, b.p);

    // Forward: gather at the targets. The backward FFT is unnormalized; its
    // 1/M^d pairs off against the M^d from the window deconvolution.
    Eigen::VectorXd out(scaled_targets.rows());
    for (Eigen::Index j = 0; j < scaled_targets.rows(); ++j) {
        double acc = 0.0;
        for_each_neighbor(im, scaled_targets.row(j),
                          [&](std::size_t idx, double w) {
                              acc += b.data()[idx].real() * w;
                          });
        out[j] = acc;
    }
    return out;
}

}  // namespace

Eigen::VectorXd apply_fastsum(const FastsumPlan& plan, const Eigen::VectorXd& v) {
    const auto& im = *plan.impl_;
    if (v.size() != im.scaled_nodes.rows())
        throw std::invalid_argument("apply_fastsum: vector length mismatch");
    return run_transform(im, im.scaled_nodes, v);
}

Eigen::VectorXd apply_fastsum_cross(const FastsumPlan& plan,
                                    const Eigen::MatrixXd& targets,
                                    const Eigen::VectorXd& v) {
    const auto& im = *plan.impl_;
    if (v.size() != im.scaled_nodes.rows())
        throw std::invalid_argument("apply_fastsum_cross: vector length mismatch");
    if (targets.cols() != im.d)
        throw std::invalid_argument("apply_fastsum_cross: target dimension mismatch");
    Eigen::MatrixXd scaled = plan.scale_points(targets);
    for (Eigen::Index j = 0; j < scaled.rows(); ++j) {
        if (scaled.row(j).norm() > im.torus_radius * (1.0 + 1e-12))
            throw DomainError("target " + std::to_string(j) +
                              " falls outside the scaled torus ball");
    }
    return run_transform(im, scaled, v);
}

namespace {

class AnovaFastOperator final : public KernelOperator {
public:
    AnovaFastOperator(const Dataset& data, const AnovaKernelSpec& spec,
                      const FastsumConfig& cfg, double fit_fraction)
        : points_(data.points), spec_(spec) {
        check_windowing(spec.windowing, static_cast<int>(data.dim()));
        const auto& w = spec_.windowing;
        for (int l = 0; l < w.num_windows(); ++l) {
            const auto& win = w.windows[static_cast<std::size_t>(l)];
            Eigen::MatrixXd sub(points_.rows(), static_cast<Eigen::Index>(win.size()));
            for (std::size_t t = 0; t < win.size(); ++t)
                sub.col(static_cast<Eigen::Index>(t)) = points_.col(win[t]);
            GaussianKernelSpec gs{w.length_scales[static_cast<std::size_t>(l)]};
            plans_.push_back(plan_fastsum(sub, gs, cfg, fit_fraction));
        }
    }

    Eigen::Index size() const override { return points_.rows(); }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const override {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
        const auto& w = spec_.windowing;
        for (int l = 0; l < w.num_windows(); ++l)
            out += w.weights[static_cast<std::size_t>(l)] *
                   apply_fastsum(plans_[static_cast<std::size_t>(l)], v);
        return out;
    }

    double entry(Eigen::Index i, Eigen::Index j) const override {
        return anova_eval(points_.row(i), points_.row(j), spec_);
    }

private:
    Eigen::MatrixXd points_;
    AnovaKernelSpec spec_;
    std::vector<FastsumPlan> plans_;
};

}  // namespace

std::unique_ptr<KernelOperator> anova_fast_operator(const Dataset& data,
                                                    const AnovaKernelSpec& spec,
                                                    const FastsumConfig& cfg,
                                                    double fit_fraction) {
    return std::make_unique<AnovaFastOperator>(data, spec, cfg, fit_fraction);
}

}  // namespace ksvm
