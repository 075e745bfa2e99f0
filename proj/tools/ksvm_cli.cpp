// Command-line front end: train, predict, tune, benchmark. Talks to the
// engine exclusively through the C API.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ksvm.h"

namespace {

using Clock = std::chrono::steady_clock;

struct DataFlags {
    std::string path;
    std::string format = "libsvm";
    std::string label_col = "label";
    bool no_header = false;
    int dim = 0;
};

struct TrainFlags {
    double train_fraction = 0.5;
    std::uint64_t seed = 0;
    std::string windows = "auto";
    std::vector<double> length_scales;
    std::string precond = "cholesky-greedy";
    int rank = 200;
    int bandwidth = 32;
    int cutoff = 4;
    int oversampling = 2;
    double torus_radius = 0.25;
    double C = 0.5;
    double sigma = 0.6;
    double gamma0 = 0.99995;
    double tol_ip = 0.1;
    double tol_gmres = 1e-3;
    int max_ip = 50;
    int max_gmres = 100;
    bool exact = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
    cmd->add_option("--data", f.path, "input dataset path")->required();
    cmd->add_option("--format", f.format, "libsvm or csv")
        ->check(CLI::IsMember({"libsvm", "csv"}));
    cmd->add_option("--label-col", f.label_col,
                    "CSV label column (name or 0-based index; empty = none)");
    cmd->add_flag("--no-header", f.no_header, "CSV file has no header row");
    cmd->add_option("--dim", f.dim, "fixed feature count for libsvm input");
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--train-fraction", f.train_fraction);
    cmd->add_option("--seed", f.seed);
    cmd->add_option("--windows", f.windows,
                    "'auto' or explicit 0-based groups like 0,1,2;3,4");
    cmd->add_option("--lengthscale", f.length_scales,
                    "kernel length scale(s): one shared or one per window");
    cmd->add_option("--precond", f.precond,
                    "none|cholesky-greedy|cholesky-random|nystrom-columns|"
                    "nystrom-gaussian|rff");
    cmd->add_option("--rank", f.rank, "total preconditioner rank");
    cmd->add_option("--bandwidth", f.bandwidth, "Fourier bandwidth N");
    cmd->add_option("--cutoff", f.cutoff, "spreading window cutoff m");
    cmd->add_option("--oversampling", f.oversampling);
    cmd->add_option("--torus-radius", f.torus_radius);
    cmd->add_option("--C", f.C, "box constraint");
    cmd->add_option("--sigma", f.sigma, "barrier reduction factor");
    cmd->add_option("--gamma0", f.gamma0, "fraction-to-boundary");
    cmd->add_option("--tol-ip", f.tol_ip);
    cmd->add_option("--tol-gmres", f.tol_gmres);
    cmd->add_option("--max-ip", f.max_ip);
    cmd->add_option("--max-gmres", f.max_gmres);
    cmd->add_flag("--exact", f.exact,
                  "dense kernel matvec instead of the Fourier transform path");
}

ksvm_train_options to_options(const TrainFlags& f) {
    ksvm_train_options o;
    ksvm_train_options_init(&o);
    o.train_fraction = f.train_fraction;
    o.seed = f.seed;
    if (f.windows != "auto") o.windows = f.windows.c_str();
    if (!f.length_scales.empty()) {
        o.length_scales = f.length_scales.data();
        o.num_length_scales = static_cast<int>(f.length_scales.size());
    }
    o.fast_backend = f.exact ? 0 : 1;
    o.precond = f.precond.c_str();
    o.rank = f.rank;
    o.fastsum_bandwidth = f.bandwidth;
    o.fastsum_cutoff = f.cutoff;
    o.fastsum_oversampling = f.oversampling;
    o.fastsum_torus_radius = f.torus_radius;
    o.C = f.C;
    o.sigma = f.sigma;
    o.gamma0 = f.gamma0;
    o.tol_ip = f.tol_ip;
    o.max_ip_iters = f.max_ip;
    o.tol_gmres = f.tol_gmres;
    o.max_gmres_iters = f.max_gmres;
    return o;
}

int load_data(const DataFlags& f, ksvm_dataset** out) {
    ksvm_status st;
    if (f.format == "csv") {
        st = ksvm_dataset_load_csv(f.path.c_str(), f.label_col.c_str(),
                                   f.no_header ? 0 : 1, out);
    } else {
        st = ksvm_dataset_load_libsvm(f.path.c_str(), f.dim, out);
    }
    if (st != KSVM_OK)
        std::cerr << "error loading " << f.path << ": " << ksvm_last_error()
                  << "\n";
    return st;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string metrics_csv(const ksvm_train_report& r) {
    std::ostringstream out;
    out << "n_train,d,P,rank,fit_s,ipm_iters,mean_gmres,xi_alpha,xi_lambda,"
           "mu_final\n";
    out << r.n_train << ',' << r.d << ',' << r.P << ',' << r.rank << ','
        << fmt(r.fit_seconds) << ',' << r.ipm_iters << ','
        << fmt(r.mean_gmres) << ',' << fmt(r.xi_alpha) << ','
        << fmt(r.xi_lambda) << ',' << fmt(r.mu_final) << '\n';
    return out.str();
}

int write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        std::cerr << "error writing " << path << "\n";
        return KSVM_ERR_DATA;
    }
    return KSVM_OK;
}

int cmd_train(const DataFlags& df, const TrainFlags& tf,
              const std::string& model_out, const std::string& metrics_out) {
    ksvm_dataset* data = nullptr;
    if (int st = load_data(df, &data)) return st;

    const auto opts = to_options(tf);
    ksvm_model* model = nullptr;
    ksvm_train_report report{};
    const ksvm_status st = ksvm_train(data, &opts, &model, nullptr, &report);
    ksvm_dataset_free(data);
    if (st != KSVM_OK) {
        std::cerr << "training failed: " << ksvm_last_error() << "\n";
        return st;
    }

    if (ksvm_status save = ksvm_model_save(model, model_out.c_str())) {
        std::cerr << "error saving model: " << ksvm_last_error() << "\n";
        ksvm_model_free(model);
        return save;
    }
    ksvm_model_free(model);

    const std::string csv = metrics_csv(report);
    std::cout << csv;
    if (!metrics_out.empty())
        if (int w = write_file(metrics_out, csv)) return w;
    std::cout << "model written to " << model_out << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const DataFlags& df, bool exact,
                const std::string& pred_out) {
    ksvm_model* model = nullptr;
    if (ksvm_status st = ksvm_model_load(model_path.c_str(), &model)) {
        std::cerr << "error loading model: " << ksvm_last_error() << "\n";
        return st;
    }
    ksvm_dataset* data = nullptr;
    if (int st = load_data(df, &data)) {
        ksvm_model_free(model);
        return st;
    }

    const auto n = ksvm_dataset_rows(data);
    std::vector<double> labels(static_cast<std::size_t>(n));
    const auto start = Clock::now();
    const ksvm_status st =
        ksvm_predict(model, data, exact ? 0 : 1, nullptr, labels.data());
    const double seconds =
        std::chrono::duration<double>(Clock::now() - start).count();
    if (st != KSVM_OK) {
        std::cerr << "prediction failed: " << ksvm_last_error() << "\n";
        ksvm_dataset_free(data);
        ksvm_model_free(model);
        return st;
    }

    std::ostringstream lines;
    for (double v : labels) lines << (v >= 0.0 ? 1 : -1) << '\n';
    if (int w = write_file(pred_out, lines.str())) {
        ksvm_dataset_free(data);
        ksvm_model_free(model);
        return w;
    }

    if (ksvm_dataset_has_labels(data)) {
        std::vector<double> truth(static_cast<std::size_t>(n));
        ksvm_dataset_labels(data, truth.data());
        std::int64_t hits = 0;
        for (std::size_t i = 0; i < truth.size(); ++i)
            if ((labels[i] >= 0.0) == (truth[i] >= 0.0)) ++hits;
        std::cout << "accuracy " << fmt(static_cast<double>(hits) /
                                        static_cast<double>(n))
                  << "\n";
    }
    std::cout << "predict_s " << fmt(seconds) << "\n";
    std::cout << "predictions written to " << pred_out << "\n";
    ksvm_dataset_free(data);
    ksvm_model_free(model);
    return 0;
}

int cmd_tune(const DataFlags& df, const TrainFlags& tf, int trials,
             double ell_min, double ell_max, double c_min, double c_max,
             bool shared_ell, bool holdout, const std::string& log_out,
             const std::string& model_out) {
    ksvm_dataset* data = nullptr;
    if (int st = load_data(df, &data)) return st;

    const auto topts = to_options(tf);
    ksvm_tune_options tune;
    ksvm_tune_options_init(&tune);
    tune.trials = trials;
    tune.seed = tf.seed;
    tune.ell_min = ell_min;
    tune.ell_max = ell_max;
    tune.c_min = c_min;
    tune.c_max = c_max;
    tune.shared_lengthscale = shared_ell ? 1 : 0;
    tune.holdout = holdout ? 1 : 0;

    ksvm_model* best = nullptr;
    ksvm_tune_summary summary{};
    char* csv = nullptr;
    const ksvm_status st = ksvm_tune(data, &topts, &tune, &best, &summary, &csv);
    ksvm_dataset_free(data);
    if (st != KSVM_OK) {
        std::cerr << "tuning failed: " << ksvm_last_error() << "\n";
        return st;
    }

    int rc = write_file(log_out, csv);
    ksvm_string_free(csv);
    if (rc == 0) rc = ksvm_model_save(best, model_out.c_str());
    if (rc != 0) std::cerr << "error: " << ksvm_last_error() << "\n";
    ksvm_model_free(best);
    if (rc != 0) return rc;

    std::cout << "best_trial " << summary.best_trial << " C "
              << fmt(summary.best_C) << " accuracy "
              << fmt(summary.best_accuracy) << "\n";
    std::cout << "trial log written to " << log_out << ", best model to "
              << model_out << "\n";
    return 0;
}

int cmd_benchmark(const DataFlags& df, const TrainFlags& tf,
                  const std::vector<std::string>& methods,
                  const std::vector<int>& ranks, const std::vector<int>& sizes,
                  const std::string& csv_out) {
    ksvm_dataset* data = nullptr;
    if (int st = load_data(df, &data)) return st;
    const std::int64_t total = ksvm_dataset_rows(data);

    std::ostringstream out;
    out << "method,rank,n_train,setup_s,mean_gmres,ipm_iters,status\n";
    for (int size : sizes) {
        // The requested size is the target training-set size; the subset is
        // padded so the split and balancing land near it.
        const auto want = static_cast<std::int64_t>(
            std::ceil(static_cast<double>(size) / tf.train_fraction));
        ksvm_dataset* subset = nullptr;
        if (ksvm_dataset_subset(data, std::min(want, total), &subset)) {
            std::cerr << "subset failed: " << ksvm_last_error() << "\n";
            ksvm_dataset_free(data);
            return KSVM_ERR_CONFIG;
        }
        for (const auto& method : methods) {
            for (int rank : ranks) {
                TrainFlags run = tf;
                run.precond = method;
                run.rank = rank;
                const auto opts = to_options(run);
                ksvm_model* model = nullptr;
                ksvm_train_report rep{};
                const ksvm_status st =
                    ksvm_train(subset, &opts, &model, nullptr, &rep);
                std::string status = "ok";
                if (st != KSVM_OK) {
                    status = ksvm_last_error();
                    for (auto& c : status)
                        if (c == ',' || c == '\n') c = ';';
                } else {
                    ksvm_model_free(model);
                }
                out << method << ',' << rank << ',' << rep.n_train << ','
                    << fmt(rep.precond_setup_seconds) << ','
                    << fmt(rep.mean_gmres) << ',' << rep.ipm_iters << ','
                    << status << '\n';
            }
        }
        ksvm_dataset_free(subset);
    }
    ksvm_dataset_free(data);

    std::cout << out.str();
    if (!csv_out.empty()) return write_file(csv_out, out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("KIS_THREADS"))
        ksvm_set_max_threads(std::atoi(threads));

    CLI::App app{"kernel SVM trainer: interior point + Krylov + fast kernel "
                 "transforms"};
    app.require_subcommand(1);

    DataFlags df;
    TrainFlags tf;

    auto* train = app.add_subcommand("train", "fit a model");
    add_data_flags(train, df);
    add_train_flags(train, tf);
    std::string model_out = "model.json";
    std::string metrics_out;
    train->add_option("--out", model_out, "model output path");
    train->add_option("--metrics", metrics_out, "metrics CSV output path");

    auto* predict = app.add_subcommand("predict", "classify with a saved model");
    std::string model_path;
    std::string pred_out = "predictions.txt";
    bool pred_exact = false;
    predict->add_option("--model", model_path, "model JSON path")->required();
    add_data_flags(predict, df);
    predict->add_option("--out", pred_out, "predictions output path");
    predict->add_flag("--exact", pred_exact, "dense kernel evaluation");

    auto* tune = app.add_subcommand("tune", "random hyperparameter search");
    add_data_flags(tune, df);
    add_train_flags(tune, tf);
    int trials = 25;
    double ell_min = 0.1, ell_max = 10.0, c_min = 0.1, c_max = 0.7;
    bool shared_ell = false;
    std::string tune_out = "tune_log.csv";
    std::string tune_model_out = "best_model.json";
    tune->add_option("--trials", trials);
    tune->add_option("--ell-min", ell_min);
    tune->add_option("--ell-max", ell_max);
    tune->add_option("--C-min", c_min);
    tune->add_option("--C-max", c_max);
    tune->add_flag("--shared-ell", shared_ell,
                   "one length scale for all windows");
    bool holdout = false;
    tune->add_flag("--holdout", holdout,
                   "score trials on a validation part carved out of the "
                   "training split (3-way split)");
    tune->add_option("--out", tune_out, "trial log CSV path");
    tune->add_option("--model-out", tune_model_out, "best model path");

    auto* bench = app.add_subcommand(
        "benchmark", "preconditioner setup time and iteration counts");
    add_data_flags(bench, df);
    add_train_flags(bench, tf);
    std::vector<std::string> methods = {"cholesky-greedy"};
    std::vector<int> ranks = {50, 200};
    std::vector<int> sizes = {1000};
    std::string bench_out;
    bench->add_option("--methods", methods)->delimiter(',');
    bench->add_option("--ranks", ranks)->delimiter(',');
    bench->add_option("--sizes", sizes)->delimiter(',');
    bench->add_option("--out", bench_out, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : KSVM_ERR_CONFIG;
    }

    if (train->parsed()) return cmd_train(df, tf, model_out, metrics_out);
    if (predict->parsed()) return cmd_predict(model_path, df, pred_exact, pred_out);
    if (tune->parsed())
        return cmd_tune(df, tf, trials, ell_min, ell_max, c_min, c_max,
                        shared_ell, holdout, tune_out, tune_model_out);
    if (bench->parsed())
        return cmd_benchmark(df, tf, methods, ranks, sizes, bench_out);
    return KSVM_ERR_CONFIG;
}
