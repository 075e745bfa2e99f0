#ifndef KSVM_TUNING_HPP
#define KSVM_TUNING_HPP

#include <vector>

#include "ksvm/pipeline.hpp"

namespace ksvm {

struct SearchSpace {
    double ell_min = 0.1;   // log-uniform per window
    double ell_max = 10.0;
    double c_min = 0.1;     // uniform
    double c_max = 0.7;
    int trials = 25;
    std::uint64_t seed = 0;
    bool shared_lengthscale = false;
    // Force trial 0 to a fixed (ell, C) baseline so the argmax provably
    // dominates it. Does not consume RNG draws.
    bool include_baseline = false;
    double baseline_ell = 1.0;
    double baseline_C = 0.4;
};

struct TrialRecord {
    int trial = 0;
    std::vector<double> length_scales;
    double C = 0.0;
    double accuracy = 0.0;
    double fit_seconds = 0.0;
    double predict_seconds = 0.0;
    double mean_gmres_iters = 0.0;
    int ipm_iters = 0;
    bool stalled = false;
};

struct TuneResult {
    std::vector<double> best_length_scales;
    double best_C = 0.0;
    int best_trial = 0;
    double best_accuracy = 0.0;
    std::vector<TrialRecord> log;
    TrainedModel best_model;
};

/// Fraction of matching signs.
double accuracy(const Eigen::VectorXd& predictions, const Eigen::VectorXd& labels);

/// Random search over (ell_l, C): sample, train on `train`, score on
/// `validation`, keep the argmax (ties to the earlier trial).
TuneResult random_search(const Dataset& train, const Dataset& validation,
                         const FeatureWindowing& windowing,
                         const SearchSpace& space, const PipelineConfig& cfg);

/// CSV trial log: trial, ell_1..ell_P, C, accuracy, fit_seconds,
/// predict_seconds, mean_gmres_iters, ipm_iters.
std::string trial_log_csv(const std::vector<TrialRecord>& log, int num_windows);

}  // namespace ksvm

#endif
