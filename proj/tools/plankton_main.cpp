#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plankton/commands.hpp"
#include "plankton/error.hpp"
#include "plankton/runconfig.hpp"

using plankton::RunConfig;

namespace {

struct CommonOpts {
    std::string config_path;
    int jobs = 1;
    // Flag overrides; only applied when the user passed them.
    std::string resize;
    int side = 0;
    bool class_weighting = false;
    double scale = 0;
    std::vector<std::size_t> top_k;
    std::vector<std::string> exclude;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Run configuration JSON")->required();
    cmd->add_option("--jobs", opts.jobs, "Parallel workers");
    cmd->add_option("--resize", opts.resize, "Resize method: squash or pad");
    cmd->add_option("--side", opts.side, "Resize side in pixels");
    cmd->add_flag("--class-weighting", opts.class_weighting, "Weight the loss by class frequency");
    cmd->add_option("--scale-mm-per-px", opts.scale, "Physical scale, mm per pixel");
    cmd->add_option("--top-k", opts.top_k, "Top-k values for evaluation");
    cmd->add_option("--exclude", opts.exclude, "Class names excluded from evaluation");
}

RunConfig load_config(const CLI::App* cmd, const CommonOpts& opts) {
    RunConfig config = RunConfig::load(opts.config_path);
    if (cmd->count("--resize")) config.resize = opts.resize;
    if (cmd->count("--side")) config.side = opts.side;
    if (cmd->count("--class-weighting")) config.training.class_weighting = opts.class_weighting;
    if (cmd->count("--scale-mm-per-px")) config.scale_mm_per_px = opts.scale;
    if (cmd->count("--top-k")) config.top_k = opts.top_k;
    if (cmd->count("--exclude")) config.exclude = opts.exclude;
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lake plankton feature/MLP/ensemble classification pipeline"};
    app.require_subcommand(1);

    CommonOpts split_opts, extract_opts, train_opts, predict_opts, ensemble_opts, evaluate_opts,
        report_opts;
    std::vector<std::uint64_t> train_seeds;
    std::string predict_model, predict_split = "test";
    std::string ensemble_method;
    std::vector<std::string> ensemble_members, ensemble_val_members;
    std::size_t ensemble_best_n = 0;
    std::string evaluate_confidences, evaluate_name = "metrics";
    std::string report_metrics, report_name = "per_class_f1";

    CLI::App* split = app.add_subcommand("split", "Scan the corpus and write the split manifest");
    add_common(split, split_opts);

    CLI::App* extract = app.add_subcommand("extract", "Extract features for every sample");
    add_common(extract, extract_opts);

    CLI::App* train = app.add_subcommand("train", "Train MLP instances");
    add_common(train, train_opts);
    train->add_option("--seed", train_seeds, "Training seed; repeat to train several instances");
    bool train_grid = false;
    train->add_flag("--grid", train_grid, "Search the config's architecture/learning-rate grid");

    CLI::App* predict = app.add_subcommand("predict", "Write confidences for a trained model");
    add_common(predict, predict_opts);
    predict->add_option("--model", predict_model, "Model JSON path")->required();
    predict->add_option("--split", predict_split, "Split to predict: train, val or test");

    CLI::App* ensemble = app.add_subcommand("ensemble", "Combine member confidence files");
    add_common(ensemble, ensemble_opts);
    ensemble->add_option("--method", ensemble_method, "average or stack");
    ensemble->add_option("--members", ensemble_members, "Member test-split confidence CSVs");
    ensemble->add_option("--val-members", ensemble_val_members,
                         "Member validation-split confidence CSVs (stack fit, best-n ranking)");
    ensemble->add_option("--best-n", ensemble_best_n, "Keep only the n best members by val F1");

    CLI::App* evaluate = app.add_subcommand("evaluate", "Compute metrics for a confidence CSV");
    add_common(evaluate, evaluate_opts);
    evaluate->add_option("--confidences", evaluate_confidences, "Confidence CSV path")->required();
    evaluate->add_option("--name", evaluate_name, "Report name under work_dir/metrics");

    CLI::App* report = app.add_subcommand("report", "Render the per-class F1 chart");
    add_common(report, report_opts);
    report->add_option("--metrics", report_metrics, "Metrics JSON path")->required();
    report->add_option("--name", report_name, "Chart name under work_dir/charts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (split->parsed()) {
            std::cout << plankton::cli::cmd_split(load_config(split, split_opts)) << '\n';
        } else if (extract->parsed()) {
            std::cout << plankton::cli::cmd_extract(load_config(extract, extract_opts),
                                                    extract_opts.jobs)
                      << '\n';
        } else if (train->parsed()) {
            auto paths = plankton::cli::cmd_train(load_config(train, train_opts), train_seeds,
                                                  train_opts.jobs, train_grid);
            for (const auto& path : paths) std::cout << path << '\n';
        } else if (predict->parsed()) {
            std::cout << plankton::cli::cmd_predict(load_config(predict, predict_opts),
                                                    predict_model, predict_split)
                      << '\n';
        } else if (ensemble->parsed()) {
            plankton::cli::EnsembleArgs args;
            args.method = ensemble_method;
            args.test_members = ensemble_members;
            args.val_members = ensemble_val_members;
            args.best_n = ensemble_best_n;
            auto paths = plankton::cli::cmd_ensemble(load_config(ensemble, ensemble_opts), args);
            for (const auto& path : paths) std::cout << path << '\n';
        } else if (evaluate->parsed()) {
            std::cout << plankton::cli::cmd_evaluate(load_config(evaluate, evaluate_opts),
                                                     evaluate_confidences, evaluate_name)
                      << '\n';
        } else if (report->parsed()) {
            std::cout << plankton::cli::cmd_report(load_config(report, report_opts),
                                                   report_metrics, report_name)
                      << '\n';
        }
    } catch (const plankton::Error& error) {
        std::cerr << "error: " << error.what() << '\n';
        return 1;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << '\n';
        return 1;
    }
    return 0;
}
