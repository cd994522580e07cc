// tremor-bench: tabular Parkinson's-detection benchmark pipeline.
//
// Subcommands mirror the pipeline stages: run (everything), validate (CV
// only), tune (grid search only), evaluate (reload tuned models, test only),
// inspect-data (schema and class-count audit).
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 fit/runtime
// error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tremor/tremor.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> subset;
    std::optional<std::string> preprocess_mode;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Experiment config JSON")->required();
    cmd->add_option("--seed", flags.seed, "Master seed (overrides config)");
    cmd->add_option("--out", flags.out, "Output directory (overrides config)");
    cmd->add_option("--subset", flags.subset, "pdrbd, pdhc or both (overrides config)")
        ->check(CLI::IsMember({"pdrbd", "pdhc", "both"}));
    cmd->add_option("--preprocess-mode", flags.preprocess_mode,
                    "paper (preprocess once, then fold) or strict (re-fit per fold)")
        ->check(CLI::IsMember({"paper", "strict"}));
}

tremor::ExperimentConfig resolve_config(const CommonFlags& flags) {
    tremor::ExperimentConfig config = tremor::load_config(flags.config_path);
    if (flags.seed) {
        config.seed = *flags.seed;
    }
    if (flags.out) {
        config.output_dir = *flags.out;
    }
    if (flags.subset) {
        config.subset = *flags.subset;
    }
    if (flags.preprocess_mode) {
        config.mode = tremor::preprocess_mode_from_name(*flags.preprocess_mode);
    }
    return config;
}

void print_timings(const nlohmann::json& timings) {
    for (const auto& [stage, ms] : timings.items()) {
        std::printf("  %-24s %10.1f ms\n", stage.c_str(), ms.get<double>());
    }
}

int cmd_run(const CommonFlags& flags) {
    const tremor::ExperimentConfig config = resolve_config(flags);
    const tremor::ExperimentReport report = tremor::run_experiment(config);
    std::cout << tremor::render_report(report.document, "markdown");
    std::cout << "\nStage timings (wall clock):\n";
    print_timings(report.timings);
    std::cout << "\nArtifacts written to " << config.output_dir << "/\n";
    return kExitOk;
}

int cmd_validate(const CommonFlags& flags) {
    tremor::ExperimentConfig config = resolve_config(flags);
    tremor::validate_config(config);
    nlohmann::json out = nlohmann::json::object();
    for (const std::string& subset : tremor::subsets_to_run(config)) {
        tremor::SubsetRun run = tremor::prepare_subset(config, subset);
        tremor::run_validation_stage(config, run);
        std::cout << subset << " validation (" << config.cv_repeats << "x" << config.cv_folds
                  << " stratified CV):\n";
        nlohmann::json results = nlohmann::json::array();
        for (const auto& r : run.validation) {
            std::printf("  %-10s mean accuracy %.4f   loss %.4f   failures %d\n",
                        tremor::algorithm_display_name(r.spec.algorithm), r.mean_accuracy,
                        r.validation_loss, r.n_failures);
            results.push_back(tremor::to_json(r));
        }
        out[subset] = std::move(results);
        tremor::detail::write_json_file(
            std::filesystem::path(config.output_dir) / subset / "folds.json",
            tremor::to_json(run.plan));
    }
    tremor::detail::write_json_file(std::filesystem::path(config.output_dir) / "validation.json",
                                    out);
    return kExitOk;
}

int cmd_tune(const CommonFlags& flags, const std::vector<std::string>& model_names) {
    tremor::ExperimentConfig config = resolve_config(flags);
    tremor::validate_config(config);
    std::vector<tremor::Algorithm> algorithms;
    if (model_names.empty()) {
        algorithms.assign(std::begin(tremor::kAllAlgorithms), std::end(tremor::kAllAlgorithms));
    } else {
        for (const auto& name : model_names) {
            algorithms.push_back(tremor::algorithm_from_name(name));
        }
    }
    nlohmann::json out = nlohmann::json::object();
    for (const std::string& subset : tremor::subsets_to_run(config)) {
        tremor::SubsetRun run = tremor::prepare_subset(config, subset);
        for (tremor::Algorithm a : algorithms) {
            run.selected.push_back(tremor::detail::spec_for(
                config, a, tremor::derive_seed(config.seed, 100, run.selected.size())));
        }
        tremor::run_tuning_stage(config, run);
        std::cout << subset << " grid search (" << config.grid_repeats << "x" << config.grid_folds
                  << " CV per cell):\n";
        nlohmann::json results = nlohmann::json::array();
        for (const auto& gs : run.tuning) {
            std::printf("  %-10s best %s  (cv accuracy %.4f)\n",
                        tremor::algorithm_display_name(gs.best_spec.algorithm),
                        gs.best_spec.params.dump().c_str(),
                        gs.cells[gs.best_index].result.mean_accuracy);
            nlohmann::json cells = nlohmann::json::array();
            for (const auto& cell : gs.cells) {
                cells.push_back({{"params", cell.params},
                                 {"mean_accuracy", cell.result.mean_accuracy},
                                 {"validation_loss", cell.result.validation_loss}});
            }
            results.push_back({{"algorithm", tremor::algorithm_name(gs.best_spec.algorithm)},
                               {"best_params", gs.best_spec.params},
                               {"cells", std::move(cells)}});
        }
        out[subset] = std::move(results);
    }
    tremor::detail::write_json_file(std::filesystem::path(config.output_dir) / "tuning.json", out);
    return kExitOk;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& models_dir_flag) {
    tremor::ExperimentConfig config = resolve_config(flags);
    tremor::validate_config(config);
    const std::filesystem::path models_root =
        models_dir_flag.empty() ? std::filesystem::path(config.output_dir)
                                : std::filesystem::path(models_dir_flag);
    nlohmann::json out = nlohmann::json::object();
    for (const std::string& subset : tremor::subsets_to_run(config)) {
        const std::filesystem::path subset_dir = models_root / subset;
        std::ifstream scaler_in(subset_dir / "scaler.json");
        if (!scaler_in) {
            throw tremor::ConfigError("evaluate: missing " + (subset_dir / "scaler.json").string() +
                                      " (run `tremor-bench run` first)");
        }
        nlohmann::json scaler_json;
        scaler_in >> scaler_json;
        const tremor::ScalerParams scaler = tremor::scaler_from_json(scaler_json);

        const tremor::LabeledDataset ds = tremor::load_subset(config, subset);
        const tremor::SplitPair split = tremor::stratified_split(
            ds, config.test_fraction, tremor::detail::subset_base_seed(config, subset));
        const tremor::LabeledDataset test = tremor::transform_minmax(scaler, split.test);

        std::vector<tremor::EvalReport> reports;
        const std::filesystem::path models_dir = subset_dir / "models";
        if (!std::filesystem::is_directory(models_dir)) {
            throw tremor::ConfigError("evaluate: missing models directory " + models_dir.string());
        }
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(models_dir)) {
            if (entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::ifstream in(file);
            nlohmann::json mj;
            in >> mj;
            const tremor::TrainedModel model = tremor::load_model(mj);
            const std::vector<int> pred = tremor::predict(model, test.X);
            const std::vector<double> scores = tremor::decision_score(model, test.X);
            reports.push_back(tremor::evaluate_predictions(
                test.y, pred, scores, tremor::algorithm_display_name(model.spec.algorithm),
                subset));
        }
        std::cout << subset << " test results:\n" << tremor::render_eval_table(reports) << "\n";
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : reports) {
            arr.push_back(tremor::to_json(r));
        }
        out[subset] = std::move(arr);
    }
    tremor::detail::write_json_file(std::filesystem::path(config.output_dir) / "evaluate.json",
                                    out);
    return kExitOk;
}

int cmd_inspect(const CommonFlags& flags) {
    const tremor::ExperimentConfig config = resolve_config(flags);
    const tremor::Schema schema = tremor::load_schema(config.schema_path);
    const tremor::FeatureTable table = tremor::load_csv(config.dataset_path, schema);

    std::cout << "dataset: " << config.dataset_path << "\n";
    std::cout << "rows: " << table.n_rows() << ", features: " << table.n_features() << "\n";
    std::cout << "group counts:";
    for (const auto& [group, count] : table.group_counts()) {
        std::cout << " " << tremor::group_name(group) << "=" << count;
    }
    std::cout << "\n";

    std::size_t categorical = 0;
    std::size_t with_missing = 0;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        categorical += table.columns[j].kind == tremor::ColumnKind::Categorical ? 1 : 0;
        for (const auto& row : table.rows) {
            if (row.cells[j].is_missing()) {
                ++with_missing;
                break;
            }
        }
    }
    std::cout << "categorical features: " << categorical << "\n";
    std::cout << "features with missing cells: " << with_missing << "\n";

    const tremor::FeatureTable encoded = tremor::encode_categoricals(table);
    auto [pdrbd, pdhc] = tremor::derive_subsets(encoded);
    std::cout << "PDRBD subset: " << pdrbd.n() << " rows x " << pdrbd.p() << " features ("
              << pdrbd.count(1) << " PD / " << pdrbd.count(0) << " RBD)\n";
    std::cout << "PDHC subset:  " << pdhc.n() << " rows x " << pdhc.p() << " features ("
              << pdhc.count(1) << " PD / " << pdhc.count(0) << " HC)\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parkinson's-detection tabular ML benchmark"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::vector<std::string> tune_models;
    std::string models_dir;

    CLI::App* run = app.add_subcommand("run", "Full pipeline: ingest to test report");
    add_common_flags(run, flags);
    CLI::App* validate = app.add_subcommand("validate", "Cross-validate the eight classifiers");
    add_common_flags(validate, flags);
    CLI::App* tune = app.add_subcommand("tune", "Grid-search hyperparameters");
    add_common_flags(tune, flags);
    tune->add_option("--models", tune_models, "Algorithms to tune (default: all eight)")
        ->delimiter(',');
    CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate persisted tuned models on the test split");
    add_common_flags(evaluate, flags);
    evaluate->add_option("--models-dir", models_dir,
                         "Directory holding <subset>/models/*.json (default: output dir)");
    CLI::App* inspect = app.add_subcommand("inspect-data", "Schema and class-count audit");
    add_common_flags(inspect, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) {
            return cmd_run(flags);
        }
        if (validate->parsed()) {
            return cmd_validate(flags);
        }
        if (tune->parsed()) {
            return cmd_tune(flags, tune_models);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(flags, models_dir);
        }
        if (inspect->parsed()) {
            return cmd_inspect(flags);
        }
    } catch (const tremor::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const tremor::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const tremor::FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
