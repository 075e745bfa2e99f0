#include "ksvm/pipeline.hpp"

#include <chrono>
#include <sstream>

namespace ksvm {

std::string to_string(PrecondMethod m) {
    switch (m) {
        case PrecondMethod::kNone: return "none";
        case PrecondMethod::kCholeskyGreedy: return "cholesky-greedy";
        case PrecondMethod::kCholeskyRandom: return "cholesky-random";
        case PrecondMethod::kNystromColumns: return "nystrom-columns";
        case PrecondMethod::kNystromGaussian: return "nystrom-gaussian";
        case PrecondMethod::kRandomFourier: return "rff";
    }
    return "?";
}

std::optional<PrecondMethod> precond_from_string(const std::string& s) {
    for (auto m : {PrecondMethod::kNone, PrecondMethod::kCholeskyGreedy,
                   PrecondMethod::kCholeskyRandom, PrecondMethod::kNystromColumns,
                   PrecondMethod::kNystromGaussian, PrecondMethod::kRandomFourier})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

std::vector<std::vector<int>> parse_window_spec(const std::string& spec, int d) {
    std::vector<std::vector<int>> windows;
    std::istringstream groups(spec);
    std::string group;
    while (std::getline(groups, group, ';')) {
        std::vector<int> win;
        std::istringstream items(group);
        std::string item;
        while (std::getline(items, item, ',')) {
            if (item.empty()) continue;
            int f = -1;
            try {
                f = std::stoi(item);
            } catch (const std::exception&) {
                throw std::invalid_argument("bad window spec item: '" + item + "'");
            }
            if (f < 0 || f >= d)
                throw std::invalid_argument("window feature index out of range: " +
                                            item);
            win.push_back(f);
        }
        if (!win.empty()) windows.push_back(std::move(win));
    }
    if (windows.empty())
        throw std::invalid_argument("window spec has no windows: '" + spec + "'");
    return windows;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::MatrixXd window_columns(const Eigen::MatrixXd& pts,
                               const std::vector<int>& win) {
    Eigen::MatrixXd sub(pts.rows(), static_cast<Eigen::Index>(win.size()));
    for (std::size_t c = 0; c < win.size(); ++c)
        sub.col(static_cast<Eigen::Index>(c)) = pts.col(win[c]);
    return sub;
}

// Per-window rank split: total/P (floor, min 1) unless explicit.
std::vector<int> window_ranks(const PipelineConfig& cfg, int P, Eigen::Index n) {
    std::vector<int> ranks;
    if (!cfg.per_window_ranks.empty()) {
        if (static_cast<int>(cfg.per_window_ranks.size()) != P)
            throw std::invalid_argument("per_window_ranks size must equal P");
        ranks = cfg.per_window_ranks;
    } else {
        ranks.assign(static_cast<std::size_t>(P), std::max(1, cfg.rank / P));
    }
    for (auto& r : ranks) r = static_cast<int>(std::min<Eigen::Index>(r, n));
    return ranks;
}

// Per-window restriction of a full kernel operator, for factor construction.
class WindowOperator final : public KernelOperator {
public:
    WindowOperator(const Eigen::MatrixXd& window_points, double ell)
        : pts_(window_points), ell2_(ell * ell) {}
    Eigen::Index size() const override { return pts_.rows(); }
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const override {
        // Dense row sweep; factor construction only, never inside GMRES.
        Eigen::VectorXd out(pts_.rows());
        for (Eigen::Index i = 0; i < pts_.rows(); ++i) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < pts_.rows(); ++j)
                acc += entry(i, j) * v[j];
            out[i] = acc;
        }
        return out;
    }
    double entry(Eigen::Index i, Eigen::Index j) const override {
        return std::exp(-(pts_.row(i) - pts_.row(j)).squaredNorm() / ell2_);
    }

private:
    const Eigen::MatrixXd& pts_;
    double ell2_;
};

// Window operator whose applies go through the fast transform; used by the
// Nystrom sketch so its setup cost reflects the matvec backend.
class FastWindowOperator final : public KernelOperator {
public:
    FastWindowOperator(const Eigen::MatrixXd& window_points, double ell,
                       const FastsumConfig& cfg)
        : pts_(window_points),
          ell2_(ell * ell),
          plan_(plan_fastsum(window_points, GaussianKernelSpec{ell}, cfg)) {}
    Eigen::Index size() const override { return pts_.rows(); }
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const override {
        return apply_fastsum(plan_, v);
    }
    double entry(Eigen::Index i, Eigen::Index j) const override {
        return std::exp(-(pts_.row(i) - pts_.row(j)).squaredNorm() / ell2_);
    }

private:
    const Eigen::MatrixXd& pts_;
    double ell2_;
    FastsumPlan plan_;
};

}  // namespace

StackedFactor build_precond_factor(const KernelOperator& op,
                                   const Dataset& train,
                                   const AnovaKernelSpec& spec,
                                   const PipelineConfig& cfg,
                                   double* setup_seconds) {
    const auto& w = spec.windowing;
    const int P = w.num_windows();
    const auto ranks = window_ranks(cfg, P, train.n());
    const auto start = Clock::now();

    std::vector<LowRankFactor> factors;
    std::vector<Eigen::MatrixXd> window_pts;
    window_pts.reserve(static_cast<std::size_t>(P));
    for (int l = 0; l < P; ++l)
        window_pts.push_back(
            window_columns(train.points, w.windows[static_cast<std::size_t>(l)]));

    for (int l = 0; l < P; ++l) {
        const double ell = w.length_scales[static_cast<std::size_t>(l)];
        const int rank = ranks[static_cast<std::size_t>(l)];
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(l);
        const auto& pts = window_pts[static_cast<std::size_t>(l)];
        WindowOperator wop(pts, ell);
        switch (cfg.precond) {
            case PrecondMethod::kCholeskyGreedy:
                factors.push_back(
                    pivoted_cholesky_greedy(wop, rank, cfg.cholesky_err_tol));
                break;
            case PrecondMethod::kCholeskyRandom:
                factors.push_back(pivoted_cholesky_random(wop, rank, seed));
                break;
            case PrecondMethod::kNystromColumns:
                factors.push_back(
                    nystrom(wop, rank, NystromMode::kColumns, seed));
                break;
            case PrecondMethod::kNystromGaussian: {
                if (cfg.backend == OperatorBackend::kFast) {
                    FastWindowOperator fop(pts, ell, cfg.fastsum);
                    factors.push_back(
                        nystrom(fop, rank, NystromMode::kGaussian, seed));
                } else {
                    factors.push_back(
                        nystrom(wop, rank, NystromMode::kGaussian, seed));
                }
                break;
            }
            case PrecondMethod::kRandomFourier:
                factors.push_back(random_fourier_features(
                    pts, GaussianKernelSpec{ell}, rank, seed));
                break;
            case PrecondMethod::kNone:
                throw std::logic_error("no factor for precond 'none'");
        }
    }
    if (setup_seconds) *setup_seconds = seconds_since(start);
    return stack_anova_factors(factors, w.weights);
}

TrainedModel train_on_prepared(const Dataset& train, const AnovaKernelSpec& spec,
                               const PipelineConfig& cfg, TrainReport& report) {
    check_windowing(spec.windowing, static_cast<int>(train.dim()));
    const auto start = Clock::now();

    std::unique_ptr<KernelOperator> op =
        cfg.backend == OperatorBackend::kFast
            ? anova_fast_operator(train, spec, cfg.fastsum, 1.0 / 1.2)
            : exact_operator(train, spec);

    StackedFactor factor;
    const bool preconditioned = cfg.precond != PrecondMethod::kNone;
    if (preconditioned)
        factor = build_precond_factor(*op, train, spec, cfg,
                                      &report.precond_setup_seconds);

    IpmResult res = ipm_train(*op, train.labels,
                              preconditioned ? &factor : nullptr, cfg.ipm);
    TrainedModel model = make_model(res, train, spec, cfg.fastsum, *op, cfg.ipm.C);

    report.n_train = train.n();
    report.d = static_cast<int>(train.dim());
    report.P = spec.windowing.num_windows();
    report.rank = static_cast<int>(factor.rank());
    report.fit_seconds = seconds_since(start);
    report.ipm_iters = static_cast<int>(res.iterations.size());
    report.mean_gmres = res.mean_gmres_iters();
    report.xi_alpha = res.xi_alpha_rel;
    report.xi_lambda = res.xi_lambda_rel;
    report.mu_final = res.mu_final;
    report.status = res.status;
    return model;
}

std::pair<TrainedModel, Dataset> train_pipeline(const Dataset& raw,
                                                const PipelineConfig& cfg,
                                                TrainReport& report) {
    auto [train, test] = balance_and_split(raw, cfg.train_fraction, cfg.seed);
    zscore_fit_transform(train, test);

    AnovaKernelSpec spec;
    if (!cfg.explicit_windows.empty()) {
        auto windows =
            parse_window_spec(cfg.explicit_windows, static_cast<int>(train.dim()));
        spec.windowing.windows = windows;
        const int P = static_cast<int>(windows.size());
        spec.windowing.weights.assign(static_cast<std::size_t>(P), 1.0 / P);
        spec.windowing.length_scales.assign(static_cast<std::size_t>(P), 1.0);
        spec.windowing.mi_scores.assign(static_cast<std::size_t>(train.dim()), 0.0);
    } else {
        auto mi = mutual_information_scores(train, cfg.mi_bins);
        spec.windowing =
            build_windows(mi, static_cast<int>(train.dim()), cfg.window_size);
    }
    if (!cfg.length_scales.empty()) {
        const int P = spec.windowing.num_windows();
        if (cfg.length_scales.size() == 1) {
            spec.windowing.length_scales.assign(static_cast<std::size_t>(P),
                                                cfg.length_scales.front());
        } else if (static_cast<int>(cfg.length_scales.size()) == P) {
            spec.windowing.length_scales = cfg.length_scales;
        } else {
            throw std::invalid_argument(
                "length_scales must have 1 or P entries");
        }
    }

    TrainedModel model = train_on_prepared(train, spec, cfg, report);
    report.n_test = test.n();
    return {std::move(model), std::move(test)};
}

}  // namespace ksvm
