#pragma once

#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tremor/dataset.hpp"
#include "tremor/errors.hpp"
#include "tremor/metrics.hpp"
#include "tremor/models.hpp"
#include "tremor/preprocess.hpp"
#include "tremor/selection.hpp"

namespace tremor {

// Run configuration. JSON file fields mirror the member names; CLI flags
// override file values.
struct ExperimentConfig {
    std::string dataset_path;
    std::string schema_path;
    std::string subset = "both"; // pdrbd | pdhc | both
    double test_fraction = 0.25;
    std::uint64_t seed = 42;
    PreprocessParams prep;
    int cv_folds = 10;
    int cv_repeats = 10;
    int grid_folds = 5;
    int grid_repeats = 5;
    double selection_threshold = 0.90;
    PreprocessMode mode = PreprocessMode::Paper;
    std::string output_dir = "results";
    nlohmann::json model_defaults = nlohmann::json::object(); // algorithm -> param overrides
    nlohmann::json grids = nlohmann::json::object();          // algorithm -> grid override
};

inline void validate_config(const ExperimentConfig& c) {
    if (c.dataset_path.empty() || c.schema_path.empty()) {
        throw ConfigError("config: dataset and schema paths are required");
    }
    if (!std::filesystem::exists(c.dataset_path)) {
        throw ConfigError("config: dataset file does not exist: " + c.dataset_path);
    }
    if (!std::filesystem::exists(c.schema_path)) {
        throw ConfigError("config: schema file does not exist: " + c.schema_path);
    }
    if (c.subset != "pdrbd" && c.subset != "pdhc" && c.subset != "both") {
        throw ConfigError("config: subset must be pdrbd, pdhc or both");
    }
    if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) {
        throw ConfigError("config: test_fraction must be in (0,1)");
    }
    if (c.prep.lof_k < 1) {
        throw ConfigError("config: preprocess.lof_k must be >= 1");
    }
    if (!(c.prep.lof_threshold > 0.0)) {
        throw ConfigError("config: preprocess.lof_threshold must be positive");
    }
    if (c.prep.smote_k < 1) {
        throw ConfigError("config: preprocess.smote_k must be >= 1");
    }
    if (c.cv_folds < 2 || c.grid_folds < 2) {
        throw ConfigError("config: cv folds must be >= 2");
    }
    if (c.cv_repeats < 1 || c.grid_repeats < 1) {
        throw ConfigError("config: cv repeats must be >= 1");
    }
    if (!(c.selection_threshold >= 0.0 && c.selection_threshold <= 1.0)) {
        throw ConfigError("config: selection_threshold must be in [0,1]");
    }
    for (const auto& [name, params] : c.model_defaults.items()) {
        merge_params(algorithm_from_name(name), params); // throws on unknown keys
    }
    for (const auto& [name, grid] : c.grids.items()) {
        const Algorithm a = algorithm_from_name(name);
        const ParamGrid g = param_grid_from_json(grid);
        for (std::size_t i = 0; i < g.cell_count(); ++i) {
            merge_params(a, g.cell_params(i));
        }
    }
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    return {{"dataset", c.dataset_path},
            {"schema", c.schema_path},
            {"subset", c.subset},
            {"test_fraction", c.test_fraction},
            {"seed", c.seed},
            {"preprocess",
             {{"lof_k", c.prep.lof_k},
              {"lof_threshold", c.prep.lof_threshold},
              {"smote_k", c.prep.smote_k},
              {"smote_target_ratio", c.prep.smote_target_ratio}}},
            {"cv", {{"folds", c.cv_folds}, {"repeats", c.cv_repeats}}},
            {"grid_cv", {{"folds", c.grid_folds}, {"repeats", c.grid_repeats}}},
            {"selection_threshold", c.selection_threshold},
            {"preprocess_mode", preprocess_mode_name(c.mode)},
            {"output_dir", c.output_dir},
            {"model_defaults", c.model_defaults},
            {"grids", c.grids}};
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        c.dataset_path = j.value("dataset", "");
        c.schema_path = j.value("schema", "");
        c.subset = j.value("subset", c.subset);
        c.test_fraction = j.value("test_fraction", c.test_fraction);
        c.seed = j.value("seed", c.seed);
        if (j.contains("preprocess")) {
            const auto& p = j.at("preprocess");
            c.prep.lof_k = p.value("lof_k", c.prep.lof_k);
            c.prep.lof_threshold = p.value("lof_threshold", c.prep.lof_threshold);
            c.prep.smote_k = p.value("smote_k", c.prep.smote_k);
            c.prep.smote_target_ratio = p.value("smote_target_ratio", c.prep.smote_target_ratio);
        }
        if (j.contains("cv")) {
            c.cv_folds = j.at("cv").value("folds", c.cv_folds);
            c.cv_repeats = j.at("cv").value("repeats", c.cv_repeats);
        }
        if (j.contains("grid_cv")) {
            c.grid_folds = j.at("grid_cv").value("folds", c.grid_folds);
            c.grid_repeats = j.at("grid_cv").value("repeats", c.grid_repeats);
        }
        c.selection_threshold = j.value("selection_threshold", c.selection_threshold);
        if (j.contains("preprocess_mode")) {
            c.mode = preprocess_mode_from_name(j.at("preprocess_mode").get<std::string>());
        }
        c.output_dir = j.value("output_dir", c.output_dir);
        c.model_defaults = j.value("model_defaults", nlohmann::json::object());
        c.grids = j.value("grids", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config file not found: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

struct ExperimentReport {
    nlohmann::json document; // report.json content, fully deterministic
    nlohmann::json timings;  // stage -> milliseconds, written separately
};

namespace detail {

// Annotates stage failures without changing the exception type, so the CLI
// can still map config/data/fit errors to distinct exit codes.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError("[" + stage + "] " + e.what());
    } catch (const DataError& e) {
        throw DataError("[" + stage + "] " + e.what());
    } catch (const FitError& e) {
        throw FitError("[" + stage + "] " + e.what());
    }
}

class StageTimer {
public:
    explicit StageTimer(nlohmann::json& sink) : sink_(sink) {}

    template <typename Fn>
    auto timed(const std::string& stage, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        auto finish = [&] {
            const auto end = std::chrono::steady_clock::now();
            sink_[stage] =
                std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end - start)
                    .count();
        };
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                finish();
                return;
            } else {
                auto result = fn();
                finish();
                return result;
            }
        } catch (...) {
            finish();
            throw;
        }
    }

private:
    nlohmann::json& sink_;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw ConfigError("write failed: " + path.string());
    }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline nlohmann::json counts_json(const ClassCounts& c, const std::string& positive,
                                  const std::string& negative) {
    return {{positive, c.positive}, {negative, c.negative}};
}

} // namespace detail

inline std::vector<std::string> subsets_to_run(const ExperimentConfig& config) {
    if (config.subset == "both") {
        return {"pdrbd", "pdhc"};
    }
    return {config.subset};
}

// Ingests the CSV, encodes categoricals and returns the requested subset.
inline LabeledDataset load_subset(const ExperimentConfig& config, const std::string& subset) {
    const Schema schema = load_schema(config.schema_path);
    const FeatureTable table = load_csv(config.dataset_path, schema);
    const FeatureTable encoded = encode_categoricals(table);
    auto [pdrbd, pdhc] = derive_subsets(encoded);
    return subset == "pdrbd" ? std::move(pdrbd) : std::move(pdhc);
}

namespace detail {

inline std::uint64_t subset_base_seed(const ExperimentConfig& config, const std::string& subset) {
    return derive_seed(config.seed, subset == "pdrbd" ? 1 : 2);
}

inline ModelSpec spec_for(const ExperimentConfig& config, Algorithm a, std::uint64_t seed) {
    ModelSpec spec;
    spec.algorithm = a;
    spec.params = config.model_defaults.value(algorithm_name(a), nlohmann::json::object());
    spec.seed = seed;
    return spec;
}

} // namespace detail

// Full per-subset pipeline state, exposed so the CLI subcommands and the
// tests can run individual stages.
struct SubsetRun {
    std::string name;
    LabeledDataset dataset;
    SplitPair split;
    PreprocessResult prep;
    LabeledDataset cv_data; // preprocessed train (paper) or raw train (strict)
    FoldPlan plan;
    std::vector<CVResult> validation;
    std::vector<ModelSpec> selected;
    std::string selection_source = "own"; // "own" or "pdrbd" (subset=both runs)
    std::vector<GridSearchResult> tuning;           // parallel to selected
    std::vector<TrainedModel> final_models;         // parallel to selected
    std::vector<EvalReport> test_reports;           // parallel to selected
};

inline SubsetRun prepare_subset(const ExperimentConfig& config, const std::string& subset) {
    SubsetRun run;
    run.name = subset;
    const std::uint64_t base = detail::subset_base_seed(config, subset);

    run.dataset = detail::run_stage("load", [&] { return load_subset(config, subset); });
    run.split = detail::run_stage("split", [&] {
        return stratified_split(run.dataset, config.test_fraction, base);
    });
    run.prep = detail::run_stage("preprocess", [&] {
        PreprocessParams prep = config.prep;
        prep.seed = derive_seed(base, stream::kSmote);
        return preprocess_pipeline(run.split.train, prep);
    });
    run.cv_data = config.mode == PreprocessMode::Paper ? run.prep.clean : run.split.train;
    return run;
}

inline CvOptions cv_options_for(const ExperimentConfig& config, std::uint64_t base) {
    CvOptions options;
    options.mode = config.mode;
    options.prep = config.prep;
    options.prep.seed = derive_seed(base, stream::kSmote);
    return options;
}

inline void run_validation_stage(const ExperimentConfig& config, SubsetRun& run) {
    const std::uint64_t base = detail::subset_base_seed(config, run.name);
    detail::run_stage("validate", [&] {
        run.plan = stratified_kfold_plan(run.cv_data.y, config.cv_folds, config.cv_repeats,
                                         derive_seed(base, stream::kFoldPlan));
        const CvOptions options = cv_options_for(config, base);
        std::size_t algo_idx = 0;
        for (Algorithm a : kAllAlgorithms) {
            const ModelSpec spec =
                detail::spec_for(config, a, derive_seed(base, stream::kFit, algo_idx));
            run.validation.push_back(cross_validate(spec, run.cv_data, run.plan, options));
            ++algo_idx;
        }
    });
}

inline void run_selection_stage(const ExperimentConfig& config, SubsetRun& run) {
    detail::run_stage("select", [&] {
        run.selected = select_models(run.validation, config.selection_threshold);
    });
}

inline void run_tuning_stage(const ExperimentConfig& config, SubsetRun& run) {
    const std::uint64_t base = detail::subset_base_seed(config, run.name);
    detail::run_stage("tune", [&] {
        const CvOptions options = cv_options_for(config, base);
        for (std::size_t s = 0; s < run.selected.size(); ++s) {
            const ModelSpec& spec = run.selected[s];
            const std::string name = algorithm_name(spec.algorithm);
            const ParamGrid grid = config.grids.contains(name)
                                       ? param_grid_from_json(config.grids.at(name))
                                       : default_grid(spec.algorithm);
            run.tuning.push_back(grid_search(spec, grid, run.cv_data,
                                             derive_seed(base, stream::kGridCell, s), options,
                                             config.grid_folds, config.grid_repeats));
        }
    });
}

inline void run_test_stage(const ExperimentConfig& config, SubsetRun& run) {
    const std::uint64_t base = detail::subset_base_seed(config, run.name);
    detail::run_stage("test", [&] {
        const LabeledDataset test_scaled = transform_minmax(run.prep.scaler, run.split.test);
        for (std::size_t s = 0; s < run.tuning.size(); ++s) {
            ModelSpec spec = run.tuning[s].best_spec;
            spec.seed = derive_seed(base, stream::kFinalFit, s);
            TrainedModel model = fit(spec, run.prep.clean);
            const std::vector<int> pred = predict(model, test_scaled.X);
            const std::vector<double> scores = decision_score(model, test_scaled.X);
            run.test_reports.push_back(evaluate_predictions(
                test_scaled.y, pred, scores, algorithm_display_name(spec.algorithm), run.name));
            run.final_models.push_back(std::move(model));
        }
    });
}

namespace detail {

inline nlohmann::json subset_report_json(const SubsetRun& run) {
    const std::string pos = run.dataset.positive_class_name;
    const std::string neg = run.dataset.negative_class_name;

    nlohmann::json split = {
        {"train_rows", run.split.train.n()},
        {"test_rows", run.split.test.n()},
        {"train_counts", counts_json(class_counts(run.split.train), pos, neg)},
        {"test_counts", counts_json(class_counts(run.split.test), pos, neg)},
        {"feature_count", run.dataset.p()},
        {"test_fraction", run.split.test_fraction}};

    nlohmann::json preprocess = {
        {"scaler", to_json(run.prep.scaler)},
        {"lof",
         {{"k", run.prep.lof.k},
          {"threshold", run.prep.lof.threshold},
          {"kept", run.prep.lof.kept_indices.size()},
          {"removed", run.prep.lof.scores.size() - run.prep.lof.kept_indices.size()},
          {"scores", run.prep.lof.scores}}},
        {"counts",
         {{"raw", counts_json(run.prep.raw_counts, pos, neg)},
          {"post_lof", counts_json(run.prep.post_lof_counts, pos, neg)},
          {"post_smote", counts_json(run.prep.post_smote_counts, pos, neg)}}}};

    nlohmann::json validation = nlohmann::json::array();
    for (const auto& r : run.validation) {
        validation.push_back(to_json(r));
    }

    nlohmann::json selected = nlohmann::json::array();
    for (const auto& spec : run.selected) {
        selected.push_back(algorithm_name(spec.algorithm));
    }

    nlohmann::json tuning = nlohmann::json::array();
    for (const auto& gs : run.tuning) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : gs.cells) {
            cells.push_back({{"params", cell.params},
                             {"mean_accuracy", cell.result.mean_accuracy},
                             {"validation_loss", cell.result.validation_loss},
                             {"n_failures", cell.result.n_failures}});
        }
        tuning.push_back({{"algorithm", algorithm_name(gs.best_spec.algorithm)},
                          {"best_params", gs.best_spec.params},
                          {"best_index", gs.best_index},
                          {"cells", std::move(cells)}});
    }

    nlohmann::json tests = nlohmann::json::array();
    for (const auto& r : run.test_reports) {
        tests.push_back(to_json(r));
    }

    return {{"positive_class", pos},
            {"negative_class", neg},
            {"split", std::move(split)},
            {"preprocess", std::move(preprocess)},
            {"validation", std::move(validation)},
            {"selected", std::move(selected)},
            {"selection_source", run.selection_source},
            {"tuning", std::move(tuning)},
            {"test", std::move(tests)}};
}

inline void persist_subset_artifacts(const ExperimentConfig& config, const SubsetRun& run) {
    const std::filesystem::path dir = std::filesystem::path(config.output_dir) / run.name;
    write_json_file(dir / "scaler.json", to_json(run.prep.scaler));
    write_json_file(dir / "lof.json", to_json(run.prep.lof));
    if (run.plan.n_folds > 0) {
        write_json_file(dir / "folds.json", to_json(run.plan));
    }
    for (const auto& model : run.final_models) {
        write_json_file(dir / "models" / (std::string(algorithm_name(model.spec.algorithm)) + ".json"),
                        save_model(model));
    }
}

} // namespace detail

// Markdown rendering works from the canonical JSON document, so parsing
// report.json and re-rendering reproduces report.md byte for byte.
inline std::string render_report(const nlohmann::json& document, const std::string& format);

// Executes ingest -> split -> preprocess -> validate -> select -> tune ->
// test for every requested subset and persists all artifacts. On a stage
// error the partial report is still written, marked incomplete, and the
// stage-tagged exception is rethrown for the CLI's exit code.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    validate_config(config);

    ExperimentReport report;
    report.timings = nlohmann::json::object();
    report.document = {{"schema_version", 1},
                       {"config", config_to_json(config)},
                       {"incomplete", false},
                       {"subsets", nlohmann::json::object()}};
    detail::StageTimer timer(report.timings);

    auto persist_report = [&] {
        const std::filesystem::path dir(config.output_dir);
        detail::write_json_file(dir / "report.json", report.document);
        detail::write_text_file(dir / "report.md", render_report(report.document, "markdown"));
        detail::write_json_file(dir / "timings.json", report.timings);
    };

    // With subset=both, model selection is decided once, on the PDRBD
    // validation outcome, and the surviving specs carry over to PDHC. PDHC
    // validation accuracies sit well below any threshold that separates the
    // PDRBD field, so per-subset filtering would always abort the second leg.
    std::vector<ModelSpec> shared_selection;
    bool selection_decided = false;

    try {
        for (const std::string& subset : subsets_to_run(config)) {
            SubsetRun run = timer.timed(subset + ".prepare",
                                        [&] { return prepare_subset(config, subset); });
            timer.timed(subset + ".validate", [&] { run_validation_stage(config, run); });
            if (config.subset == "both" && selection_decided) {
                run.selected = shared_selection;
                run.selection_source = "pdrbd";
            } else {
                timer.timed(subset + ".select", [&] { run_selection_stage(config, run); });
                if (config.subset == "both") {
                    shared_selection = run.selected;
                    selection_decided = true;
                }
            }
            timer.timed(subset + ".tune", [&] { run_tuning_stage(config, run); });
            timer.timed(subset + ".test", [&] { run_test_stage(config, run); });
            report.document["subsets"][subset] = detail::subset_report_json(run);
            detail::persist_subset_artifacts(config, run);
        }
    } catch (const std::exception& e) {
        report.document["incomplete"] = true;
        report.document["error"] = e.what();
        persist_report();
        throw;
    }
    persist_report();
    return report;
}

namespace detail {

inline std::string fixed4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

inline std::string render_markdown(const nlohmann::json& doc) {
    std::string md;
    md += "# tremor-bench report\n\n";
    const auto& config = doc.at("config");
    md += "- dataset: `" + config.at("dataset").get<std::string>() + "`\n";
    md += "- subset: " + config.at("subset").get<std::string>() + "\n";
    md += "- seed: " + std::to_string(config.at("seed").get<std::uint64_t>()) + "\n";
    md += "- preprocess mode: " + config.at("preprocess_mode").get<std::string>() + "\n";
    md += "- test fraction: " + fixed4(config.at("test_fraction").get<double>()) + "\n";

    if (doc.value("incomplete", false)) {
        md += "\n**INCOMPLETE RUN**: " + doc.value("error", std::string("unknown error")) + "\n";
    }

    for (const auto& [subset, body] : doc.at("subsets").items()) {
        std::string upper = subset;
        for (char& c : upper) {
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        md += "\n## " + upper + "\n";
        const std::string pos = body.at("positive_class").get<std::string>();
        const std::string neg = body.at("negative_class").get<std::string>();

        const auto& split = body.at("split");
        md += "\n### Split\n\n";
        md += "| partition | rows | " + pos + " | " + neg + " |\n|---|---|---|---|\n";
        md += "| train | " + std::to_string(split.at("train_rows").get<std::size_t>()) + " | " +
              std::to_string(split.at("train_counts").at(pos).get<std::size_t>()) + " | " +
              std::to_string(split.at("train_counts").at(neg).get<std::size_t>()) + " |\n";
        md += "| test | " + std::to_string(split.at("test_rows").get<std::size_t>()) + " | " +
              std::to_string(split.at("test_counts").at(pos).get<std::size_t>()) + " | " +
              std::to_string(split.at("test_counts").at(neg).get<std::size_t>()) + " |\n";

        const auto& prep = body.at("preprocess");
        md += "\n### Preprocessing audit\n\n";
        md += "| stage | " + pos + " | " + neg + " |\n|---|---|---|\n";
        for (const char* stage : {"raw", "post_lof", "post_smote"}) {
            const auto& counts = prep.at("counts").at(stage);
            md += std::string("| ") + stage + " | " +
                  std::to_string(counts.at(pos).get<std::size_t>()) + " | " +
                  std::to_string(counts.at(neg).get<std::size_t>()) + " |\n";
        }
        md += "\nLOF: k=" + std::to_string(prep.at("lof").at("k").get<int>()) +
              ", threshold=" + fixed4(prep.at("lof").at("threshold").get<double>()) + ", removed " +
              std::to_string(prep.at("lof").at("removed").get<std::size_t>()) + " of " +
              std::to_string(prep.at("lof").at("removed").get<std::size_t>() +
                             prep.at("lof").at("kept").get<std::size_t>()) +
              " training rows.\n";

        if (body.contains("validation") && !body.at("validation").empty()) {
            md += "\n### Validation (" + std::to_string(doc.at("config").at("cv").at("repeats").get<int>()) +
                  "x" + std::to_string(doc.at("config").at("cv").at("folds").get<int>()) +
                  " stratified CV)\n\n";
            md += "| Algorithm | Mean accuracy | Validation loss | Failures |\n|---|---|---|---|\n";
            for (const auto& r : body.at("validation")) {
                const Algorithm a =
                    algorithm_from_name(r.at("spec").at("algorithm").get<std::string>());
                md += std::string("| ") + algorithm_display_name(a) + " | " +
                      fixed4(r.at("mean_accuracy").get<double>()) + " | " +
                      fixed4(r.at("validation_loss").get<double>()) + " | " +
                      std::to_string(r.at("n_failures").get<int>()) + " |\n";
            }
        }

        if (body.contains("selected") && !body.at("selected").empty()) {
            md += "\n### Selected models\n\n";
            for (const auto& name : body.at("selected")) {
                md += std::string("- ") +
                      algorithm_display_name(algorithm_from_name(name.get<std::string>())) + "\n";
            }
        }

        if (body.contains("tuning") && !body.at("tuning").empty()) {
            md += "\n### Tuned hyperparameters\n\n";
            md += "| Algorithm | Best parameters | CV accuracy |\n|---|---|---|\n";
            for (const auto& t : body.at("tuning")) {
                const Algorithm a = algorithm_from_name(t.at("algorithm").get<std::string>());
                const auto& best_cell = t.at("cells")[t.at("best_index").get<std::size_t>()];
                md += std::string("| ") + algorithm_display_name(a) + " | `" +
                      t.at("best_params").dump() + "` | " +
                      fixed4(best_cell.at("mean_accuracy").get<double>()) + " |\n";
            }
        }

        if (body.contains("test") && !body.at("test").empty()) {
            std::vector<EvalReport> rows;
            for (const auto& r : body.at("test")) {
                rows.push_back(eval_report_from_json(r));
            }
            md += "\n### Test results\n\n";
            md += render_eval_table(rows);
            md += "\n### Test results (class-weighted)\n\n";
            md += "| Algorithm | Accuracy | PPV | TPR | F1-score | AUC |\n|---|---|---|---|---|---|\n";
            for (const auto& r : rows) {
                md += "| " + r.model + " | " + detail::fixed2(r.accuracy) + " | " +
                      detail::fixed2(r.weighted_ppv) + " | " + detail::fixed2(r.weighted_tpr) +
                      " | " + detail::fixed2(r.weighted_f1) + " | " + detail::fixed2(r.auc) +
                      " |\n";
            }
        }
    }
    return md;
}

} // namespace detail

inline std::string render_report(const nlohmann::json& document, const std::string& format) {
    if (format == "json") {
        return document.dump(2) + "\n";
    }
    if (format == "markdown") {
        return detail::render_markdown(document);
    }
    throw ConfigError("render_report: format must be json or markdown");
}

} // namespace tremor
