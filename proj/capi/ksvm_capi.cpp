#include "ksvm.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "ksvm/dataset.hpp"
#include "ksvm/fastsum.hpp"
#include "ksvm/ipm.hpp"
#include "ksvm/model_io.hpp"
#include "ksvm/pipeline.hpp"
#include "ksvm/tuning.hpp"

struct ksvm_dataset {
    ksvm::Dataset data;
};

struct ksvm_model {
    ksvm::TrainedModel model;
};

namespace {

thread_local std::string g_last_error = "ok";

ksvm_status fail(ksvm_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

// Translate a thrown exception into a status code, recording the message.
ksvm_status translate_current_exception() {
    try {
        throw;
    } catch (const ksvm::DataError& e) {
        return fail(KSVM_ERR_DATA, e.what());
    } catch (const ksvm::ModelFormatError& e) {
        return fail(KSVM_ERR_CONFIG, e.what());
    } catch (const ksvm::DomainError& e) {
        return fail(KSVM_ERR_DATA, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(KSVM_ERR_CONFIG, e.what());
    } catch (const std::exception& e) {
        return fail(KSVM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(KSVM_ERR_INTERNAL, "unknown error");
    }
}

template <typename Fn>
ksvm_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (...) {
        return translate_current_exception();
    }
}

ksvm::PipelineConfig to_pipeline_config(const ksvm_train_options& o) {
    ksvm::PipelineConfig cfg;
    cfg.train_fraction = o.train_fraction;
    cfg.seed = o.seed;
    cfg.mi_bins = o.mi_bins;
    cfg.window_size = o.window_size;
    if (o.windows) cfg.explicit_windows = o.windows;
    if (o.length_scales && o.num_length_scales > 0)
        cfg.length_scales.assign(o.length_scales,
                                 o.length_scales + o.num_length_scales);
    cfg.backend = o.fast_backend ? ksvm::OperatorBackend::kFast
                                 : ksvm::OperatorBackend::kExact;
    if (o.precond) {
        auto m = ksvm::precond_from_string(o.precond);
        if (!m)
            throw std::invalid_argument(std::string("unknown preconditioner: ") +
                                        o.precond);
        cfg.precond = *m;
    }
    cfg.rank = o.rank;
    cfg.cholesky_err_tol = o.cholesky_err_tol;
    cfg.fastsum.bandwidth = o.fastsum_bandwidth;
    cfg.fastsum.window_cutoff = o.fastsum_cutoff;
    cfg.fastsum.oversampling = o.fastsum_oversampling;
    cfg.fastsum.torus_radius = o.fastsum_torus_radius;
    cfg.ipm.C = o.C;
    cfg.ipm.sigma = o.sigma;
    cfg.ipm.gamma0 = o.gamma0;
    cfg.ipm.tol_ip = o.tol_ip;
    cfg.ipm.max_ip_iters = o.max_ip_iters;
    cfg.ipm.tol_gmres = o.tol_gmres;
    cfg.ipm.max_gmres_iters = o.max_gmres_iters;
    cfg.ipm.mu0 = o.mu0;
    cfg.fastsum.validate();
    cfg.ipm.validate();
    return cfg;
}

void fill_report(const ksvm::TrainReport& r, ksvm_train_report* out) {
    if (!out) return;
    out->n_train = r.n_train;
    out->n_test = r.n_test;
    out->d = r.d;
    out->P = r.P;
    out->rank = r.rank;
    out->fit_seconds = r.fit_seconds;
    out->precond_setup_seconds = r.precond_setup_seconds;
    out->ipm_iters = r.ipm_iters;
    out->mean_gmres = r.mean_gmres;
    out->xi_alpha = r.xi_alpha;
    out->xi_lambda = r.xi_lambda;
    out->mu_final = r.mu_final;
    out->status = static_cast<int>(r.status);
}

ksvm_status predict_impl(const ksvm_model* model, const ksvm_dataset* data,
                         int fast_backend, bool normalized_input,
                         double* decision_values, double* labels_out) {
    if (!model || !data) return fail(KSVM_ERR_CONFIG, "null handle");
    return guarded([&]() -> ksvm_status {
        const auto& m = model->model;
        Eigen::MatrixXd pts = data->data.points;
        if (pts.cols() != m.train_points.cols())
            return fail(KSVM_ERR_CONFIG, "feature count does not match model");
        if (normalized_input) {
            // decision_values() re-applies the stored normalization, so hand
            // it the raw coordinates back.
            for (Eigen::Index j = 0; j < pts.cols(); ++j) {
                const auto& s = m.normalization[static_cast<std::size_t>(j)];
                pts.col(j) = pts.col(j).array() * s.stddev + s.mean;
            }
        }
        const auto backend = fast_backend ? ksvm::PredictBackend::kFast
                                          : ksvm::PredictBackend::kExact;
        const Eigen::VectorXd f = m.decision_values(pts, backend);
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            if (decision_values) decision_values[i] = f[i];
            if (labels_out) labels_out[i] = f[i] >= 0.0 ? 1.0 : -1.0;
        }
        return KSVM_OK;
    });
}

}  // namespace

extern "C" {

const char* ksvm_last_error(void) { return g_last_error.c_str(); }

void ksvm_set_max_threads(int n) {
    Eigen::setNbThreads(n >= 1 ? n : 0);
}

ksvm_status ksvm_dataset_subset(const ksvm_dataset* data, int64_t n,
                                ksvm_dataset** out) {
    if (!data || !out) return fail(KSVM_ERR_CONFIG, "null argument");
    if (n < 1 || n > data->data.n())
        return fail(KSVM_ERR_CONFIG, "subset size out of range");
    return guarded([&]() -> ksvm_status {
        ksvm::Dataset sub;
        sub.points = data->data.points.topRows(n);
        if (data->data.has_labels) sub.labels = data->data.labels.head(n);
        sub.has_labels = data->data.has_labels;
        sub.feature_names = data->data.feature_names;
        sub.normalization = data->data.normalization;
        *out = new ksvm_dataset{std::move(sub)};
        return KSVM_OK;
    });
}

ksvm_status ksvm_dataset_load_libsvm(const char* path, int dim_override,
                                     ksvm_dataset** out) {
    if (!path || !out) return fail(KSVM_ERR_CONFIG, "null argument");
    return guarded([&]() -> ksvm_status {
        auto* h = new ksvm_dataset{ksvm::load_libsvm(path, dim_override)};
        *out = h;
        return KSVM_OK;
    });
}

ksvm_status ksvm_dataset_load_csv(const char* path, const char* label_column,
                                  int has_header, ksvm_dataset** out) {
    if (!path || !out) return fail(KSVM_ERR_CONFIG, "null argument");
    return guarded([&]() -> ksvm_status {
        const std::string label = label_column ? label_column : "";
        auto* h = new ksvm_dataset{ksvm::load_csv(path, label, has_header != 0)};
        *out = h;
        return KSVM_OK;
    });
}

ksvm_status ksvm_dataset_from_arrays(const double* points, const double* labels,
                                     int64_t n, int64_t d, ksvm_dataset** out) {
    if (!points || !out || n < 1 || d < 1)
        return fail(KSVM_ERR_CONFIG, "bad array arguments");
    return guarded([&]() -> ksvm_status {
        ksvm::Dataset data;
        data.points = Eigen::Map<const Eigen::Matrix<
            double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(points, n,
                                                                      d);
        if (labels) {
            data.labels = Eigen::Map<const Eigen::VectorXd>(labels, n);
            for (Eigen::Index i = 0; i < n; ++i)
                if (data.labels[i] != 1.0 && data.labels[i] != -1.0)
                    return fail(KSVM_ERR_DATA, "labels must be +-1");
            data.has_labels = true;
        } else {
            data.has_labels = false;
        }
        *out = new ksvm_dataset{std::move(data)};
        return KSVM_OK;
    });
}

int64_t ksvm_dataset_rows(const ksvm_dataset* data) {
    return data ? data->data.n() : -1;
}

int64_t ksvm_dataset_cols(const ksvm_dataset* data) {
    return data ? data->data.dim() : -1;
}

int ksvm_dataset_has_labels(const ksvm_dataset* data) {
    return data && data->data.has_labels ? 1 : 0;
}

ksvm_status ksvm_dataset_labels(const ksvm_dataset* data, double* out) {
    if (!data || !out) return fail(KSVM_ERR_CONFIG, "null argument");
    if (!data->data.has_labels)
        return fail(KSVM_ERR_DATA, "dataset has no labels");
    Eigen::Map<Eigen::VectorXd>(out, data->data.n()) = data->data.labels;
    return KSVM_OK;
}

void ksvm_dataset_free(ksvm_dataset* data) { delete data; }

void ksvm_train_options_init(ksvm_train_options* opts) {
    if (!opts) return;
    std::memset(opts, 0, sizeof(*opts));
    const ksvm::PipelineConfig defaults;
    opts->train_fraction = defaults.train_fraction;
    opts->seed = defaults.seed;
    opts->mi_bins = defaults.mi_bins;
    opts->window_size = defaults.window_size;
    opts->windows = nullptr;
    opts->length_scales = nullptr;
    opts->num_length_scales = 0;
    opts->fast_backend = 1;
    opts->precond = "cholesky-greedy";
    opts->rank = defaults.rank;
    opts->cholesky_err_tol = defaults.cholesky_err_tol;
    opts->fastsum_bandwidth = defaults.fastsum.bandwidth;
    opts->fastsum_cutoff = defaults.fastsum.window_cutoff;
    opts->fastsum_oversampling = defaults.fastsum.oversampling;
    opts->fastsum_torus_radius = defaults.fastsum.torus_radius;
    opts->C = defaults.ipm.C;
    opts->sigma = defaults.ipm.sigma;
    opts->gamma0 = defaults.ipm.gamma0;
    opts->tol_ip = defaults.ipm.tol_ip;
    opts->max_ip_iters = defaults.ipm.max_ip_iters;
    opts->tol_gmres = defaults.ipm.tol_gmres;
    opts->max_gmres_iters = defaults.ipm.max_gmres_iters;
    opts->mu0 = defaults.ipm.mu0;
}

ksvm_status ksvm_train(const ksvm_dataset* data,
                       const ksvm_train_options* opts, ksvm_model** model_out,
                       ksvm_dataset** test_out, ksvm_train_report* report) {
    if (!data || !opts || !model_out)
        return fail(KSVM_ERR_CONFIG, "null argument");
    if (!data->data.has_labels)
        return fail(KSVM_ERR_DATA, "training data has no labels");
    return guarded([&]() -> ksvm_status {
        const auto cfg = to_pipeline_config(*opts);
        ksvm::TrainReport rep;
        auto [model, test] = ksvm::train_pipeline(data->data, cfg, rep);
        fill_report(rep, report);
        if (rep.status == ksvm::IpmStatus::kStalled)
            return fail(KSVM_ERR_SOLVER,
                        "interior point iteration stalled before reaching the "
                        "duality tolerance");
        *model_out = new ksvm_model{std::move(model)};
        if (test_out) *test_out = new ksvm_dataset{std::move(test)};
        return KSVM_OK;
    });
}

ksvm_status ksvm_predict(const ksvm_model* model, const ksvm_dataset* data,
                         int fast_backend, double* decision_values,
                         double* labels_out) {
    return predict_impl(model, data, fast_backend, false, decision_values,
                        labels_out);
}

ksvm_status ksvm_predict_normalized(const ksvm_model* model,
                                    const ksvm_dataset* data, int fast_backend,
                                    double* decision_values,
                                    double* labels_out) {
    return predict_impl(model, data, fast_backend, true, decision_values,
                        labels_out);
}

ksvm_status ksvm_model_save(const ksvm_model* model, const char* path) {
    if (!model || !path) return fail(KSVM_ERR_CONFIG, "null argument");
    return guarded([&]() -> ksvm_status {
        ksvm::save_model(model->model, path);
        return KSVM_OK;
    });
}

ksvm_status ksvm_model_load(const char* path, ksvm_model** out) {
    if (!path || !out) return fail(KSVM_ERR_CONFIG, "null argument");
    return guarded([&]() -> ksvm_status {
        *out = new ksvm_model{ksvm::load_model(path)};
        return KSVM_OK;
    });
}

int64_t ksvm_model_num_support(const ksvm_model* model) {
    return model ? static_cast<int64_t>(model->model.support_indices.size())
                 : -1;
}

double ksvm_model_bias(const ksvm_model* model) {
    return model ? model->model.bias : 0.0;
}

void ksvm_model_free(ksvm_model* model) { delete model; }

void ksvm_tune_options_init(ksvm_tune_options* opts) {
    if (!opts) return;
    const ksvm::SearchSpace defaults;
    opts->ell_min = defaults.ell_min;
    opts->ell_max = defaults.ell_max;
    opts->c_min = defaults.c_min;
    opts->c_max = defaults.c_max;
    opts->trials = defaults.trials;
    opts->seed = defaults.seed;
    opts->shared_lengthscale = defaults.shared_lengthscale ? 1 : 0;
    opts->holdout = 0;
}

ksvm_status ksvm_tune(const ksvm_dataset* data,
                      const ksvm_train_options* train_opts,
                      const ksvm_tune_options* tune_opts,
                      ksvm_model** best_model_out, ksvm_tune_summary* summary,
                      char** csv_out) {
    if (!data || !train_opts || !tune_opts)
        return fail(KSVM_ERR_CONFIG, "null argument");
    if (!data->data.has_labels)
        return fail(KSVM_ERR_DATA, "tuning data has no labels");
    return guarded([&]() -> ksvm_status {
        const auto cfg = to_pipeline_config(*train_opts);
        auto [train, validation] =
            ksvm::balance_and_split(data->data, cfg.train_fraction, cfg.seed);
        if (tune_opts->holdout) {
            // 3-way split: selection scores never touch the test part.
            auto [inner_train, inner_val] =
                ksvm::balance_and_split(train, 0.5, cfg.seed + 1);
            train = std::move(inner_train);
            validation = std::move(inner_val);
        }
        ksvm::zscore_fit_transform(train, validation);

        ksvm::FeatureWindowing windowing;
        if (!cfg.explicit_windows.empty()) {
            windowing.windows = ksvm::parse_window_spec(
                cfg.explicit_windows, static_cast<int>(train.dim()));
            const int P = static_cast<int>(windowing.windows.size());
            windowing.weights.assign(static_cast<std::size_t>(P), 1.0 / P);
            windowing.length_scales.assign(static_cast<std::size_t>(P), 1.0);
            windowing.mi_scores.assign(static_cast<std::size_t>(train.dim()),
                                       0.0);
        } else {
            auto mi = ksvm::mutual_information_scores(train, cfg.mi_bins);
            windowing = ksvm::build_windows(mi, static_cast<int>(train.dim()),
                                            cfg.window_size);
        }

        ksvm::SearchSpace space;
        space.ell_min = tune_opts->ell_min;
        space.ell_max = tune_opts->ell_max;
        space.c_min = tune_opts->c_min;
        space.c_max = tune_opts->c_max;
        space.trials = tune_opts->trials;
        space.seed = tune_opts->seed;
        space.shared_lengthscale = tune_opts->shared_lengthscale != 0;

        auto result =
            ksvm::random_search(train, validation, windowing, space, cfg);
        if (summary) {
            summary->best_C = result.best_C;
            summary->best_accuracy = result.best_accuracy;
            summary->best_trial = result.best_trial;
        }
        if (csv_out) {
            const std::string csv =
                ksvm::trial_log_csv(result.log, windowing.num_windows());
            char* buf = static_cast<char*>(std::malloc(csv.size() + 1));
            if (!buf) return fail(KSVM_ERR_INTERNAL, "out of memory");
            std::memcpy(buf, csv.c_str(), csv.size() + 1);
            *csv_out = buf;
        }
        if (best_model_out)
            *best_model_out = new ksvm_model{std::move(result.best_model)};
        return KSVM_OK;
    });
}

void ksvm_string_free(char* s) { std::free(s); }

}  // extern "C"
