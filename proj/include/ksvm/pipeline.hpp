#ifndef KSVM_PIPELINE_HPP
#define KSVM_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "ksvm/dataset.hpp"
#include "ksvm/ipm.hpp"
#include "ksvm/model_io.hpp"

namespace ksvm {

enum class PrecondMethod {
    kNone,
    kCholeskyGreedy,
    kCholeskyRandom,
    kNystromColumns,
    kNystromGaussian,
    kRandomFourier,
};

std::string to_string(PrecondMethod m);
std::optional<PrecondMethod> precond_from_string(const std::string& s);

enum class OperatorBackend { kExact, kFast };

struct PipelineConfig {
    double train_fraction = 0.5;
    std::uint64_t seed = 0;
    int mi_bins = 10;
    int window_size = 3;
    std::string explicit_windows;  // "0,1,2;3,4" (0-based); empty = MI auto
    std::vector<double> length_scales;  // empty = 1 per window; size 1 = shared
    OperatorBackend backend = OperatorBackend::kFast;
    PrecondMethod precond = PrecondMethod::kCholeskyGreedy;
    int rank = 200;
    std::vector<int> per_window_ranks;  // empty = total rank split evenly
    double cholesky_err_tol = 1e-5;
    FastsumConfig fastsum;
    IpmConfig ipm;
};

struct TrainReport {
    Eigen::Index n_train = 0;
    Eigen::Index n_test = 0;
    int d = 0;
    int P = 0;
    int rank = 0;
    double fit_seconds = 0.0;
    double precond_setup_seconds = 0.0;
    int ipm_iters = 0;
    double mean_gmres = 0.0;
    double xi_alpha = 0.0;
    double xi_lambda = 0.0;
    double mu_final = 0.0;
    IpmStatus status = IpmStatus::kConverged;
};

/// Parse "0,1,2;3,4" into window index sets.
std::vector<std::vector<int>> parse_window_spec(const std::string& spec, int d);

/// Build the stacked preconditioner factor for a kernel operator. The total
/// rank is split across windows unless per-window ranks are given.
StackedFactor build_precond_factor(const KernelOperator& op,
                                   const Dataset& train,
                                   const AnovaKernelSpec& spec,
                                   const PipelineConfig& cfg,
                                   double* setup_seconds = nullptr);

/// Full training pipeline on an already split + normalized training set with
/// a prepared windowing.
TrainedModel train_on_prepared(const Dataset& train, const AnovaKernelSpec& spec,
                               const PipelineConfig& cfg, TrainReport& report);

/// load -> balance/split -> z-score -> windows -> factor -> IPM. Returns the
/// model plus the (normalized) held-out test split.
std::pair<TrainedModel, Dataset> train_pipeline(const Dataset& raw,
                                                const PipelineConfig& cfg,
                                                TrainReport& report);

}  // namespace ksvm

#endif
