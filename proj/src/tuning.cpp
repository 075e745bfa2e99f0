#include "ksvm/tuning.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace ksvm {

double accuracy(const Eigen::VectorXd& predictions,
                const Eigen::VectorXd& labels) {
    if (predictions.size() != labels.size() || predictions.size() == 0)
        throw std::invalid_argument("accuracy: size mismatch");
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < predictions.size(); ++i)
        if ((predictions[i] >= 0.0) == (labels[i] >= 0.0)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

TuneResult random_search(const Dataset& train, const Dataset& validation,
                         const FeatureWindowing& windowing,
                         const SearchSpace& space, const PipelineConfig& cfg) {
    if (space.trials < 1)
        throw std::invalid_argument("random_search: trials must be >= 1");
    if (!(space.ell_min > 0.0 && space.ell_max >= space.ell_min))
        throw std::invalid_argument("random_search: bad length-scale range");
    if (!(space.c_min > 0.0 && space.c_max >= space.c_min))
        throw std::invalid_argument("random_search: bad C range");

    const int P = windowing.num_windows();
    std::mt19937_64 rng(space.seed);
    std::uniform_real_distribution<double> log_ell(std::log(space.ell_min),
                                                   std::log(space.ell_max));
    std::uniform_real_distribution<double> c_dist(space.c_min, space.c_max);

    using Clock = std::chrono::steady_clock;
    TuneResult result;
    result.best_accuracy = -1.0;

    for (int t = 0; t < space.trials; ++t) {
        TrialRecord rec;
        rec.trial = t;
        rec.length_scales.resize(static_cast<std::size_t>(P));
        if (t == 0 && space.include_baseline) {
            std::fill(rec.length_scales.begin(), rec.length_scales.end(),
                      space.baseline_ell);
        } else if (space.shared_lengthscale) {
            const double ell = std::exp(log_ell(rng));
            std::fill(rec.length_scales.begin(), rec.length_scales.end(), ell);
        } else {
            for (auto& ell : rec.length_scales) ell = std::exp(log_ell(rng));
        }
        rec.C = t == 0 && space.include_baseline ? space.baseline_C
                                                 : c_dist(rng);

        AnovaKernelSpec spec;
        spec.windowing = windowing;
        spec.windowing.length_scales = rec.length_scales;
        PipelineConfig trial_cfg = cfg;
        trial_cfg.ipm.C = rec.C;

        TrainReport report;
        TrainedModel model;
        try {
            model = train_on_prepared(train, spec, trial_cfg, report);
        } catch (const std::exception&) {
            // A diverged/ill-posed trial scores zero rather than aborting the
            // whole search.
            rec.stalled = true;
            result.log.push_back(std::move(rec));
            continue;
        }
        rec.fit_seconds = report.fit_seconds;
        rec.mean_gmres_iters = report.mean_gmres;
        rec.ipm_iters = report.ipm_iters;
        rec.stalled = report.status == IpmStatus::kStalled;

        const auto pstart = Clock::now();
        const auto backend = trial_cfg.backend == OperatorBackend::kFast
                                 ? PredictBackend::kFast
                                 : PredictBackend::kExact;
        Eigen::VectorXd pred = model.predict(validation.points, backend);
        rec.predict_seconds =
            std::chrono::duration<double>(Clock::now() - pstart).count();
        rec.accuracy = accuracy(pred, validation.labels);

        if (rec.accuracy > result.best_accuracy) {
            result.best_accuracy = rec.accuracy;
            result.best_trial = t;
            result.best_length_scales = rec.length_scales;
            result.best_C = rec.C;
            result.best_model = std::move(model);
        }
        result.log.push_back(std::move(rec));
    }
    if (result.best_accuracy < 0.0)
        throw std::runtime_error("random_search: every trial failed");
    return result;
}

std::string trial_log_csv(const std::vector<TrialRecord>& log, int num_windows) {
    std::ostringstream out;
    out << "trial";
    for (int l = 1; l <= num_windows; ++l) out << ",ell_" << l;
    out << ",C,accuracy,fit_seconds,predict_seconds,mean_gmres_iters,ipm_iters\n";
    out.precision(10);
    for (const auto& rec : log) {
        out << rec.trial;
        for (int l = 0; l < num_windows; ++l) {
            out << ',';
            if (l < static_cast<int>(rec.length_scales.size()))
                out << rec.length_scales[static_cast<std::size_t>(l)];
        }
        out << ',' << rec.C << ',' << rec.accuracy << ',' << rec.fit_seconds
            << ',' << rec.predict_seconds << ',' << rec.mean_gmres_iters << ','
            << rec.ipm_iters << '\n';
    }
    return out.str();
}

}  // namespace ksvm
