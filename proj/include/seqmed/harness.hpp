#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "seqmed/datagen.hpp"
#include "seqmed/seq_lapmed.hpp"
#include "seqmed/serialize.hpp"

namespace seqmed {

enum class Scenario { categorical, sphere, isolet, custom_csv };
enum class ModelKind { seqmed, seqlapmed_exact, seqlapmed_approx };

std::string to_string(Scenario s);
std::string to_string(ModelKind m);
Scenario scenario_from_string(std::string_view name);
ModelKind model_kind_from_string(std::string_view name);

/**
 * One experiment: a sequential model plus optional baselines, run over `trials`
 * independent streams and scored on each stream's held-out test batch.
 *
 * Config files are flat `key = value` lines; `#` starts a comment.
 */
struct ExperimentConfig {
    Scenario scenario = Scenario::categorical;
    ModelKind model = ModelKind::seqmed;
    bool per_batch = true;
    bool full_retrain = true;
    int trials = 1;
    StreamConfig stream;

    KernelKind kernel = KernelKind::tfidf_linear;
    double rbf_width = 1.0;
    double C = 10.0;    // supervised slack parameter
    LapConfig lap;      // mode is taken from `model`

    std::filesystem::path output_dir;  // empty: no files written
    std::filesystem::path isolet_train;
    std::filesystem::path isolet_test;
    std::set<int> isolet_positive{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
    std::filesystem::path data_dir;    // custom-csv: batch_0001.csv ... and test.csv
    int threads = 0;                   // 0: one per hardware thread

    /// Defaults that depend on the scenario (kernel, label fraction, model).
    static ExperimentConfig defaults_for(Scenario scenario);
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig from_file(const std::filesystem::path& path);

    /// Rejects inconsistent settings before any data is generated.
    void validate() const;
};

struct ResultRow {
    int trial = 0;
    int t = 0;
    std::string model;
    double accuracy = 0.0;
    double fit_seconds = 0.0;
    std::size_t n_support = 0;
    bool degenerate = false;
};

struct ResultsTable {
    std::vector<ResultRow> rows;

    std::vector<std::string> model_names() const;
};

struct SummaryRow {
    int t = 0;
    std::string model;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single trial
    int count = 0;
};

/// Runs every trial (in parallel when threads allow) and writes results.csv,
/// summary.csv and timings.csv into output_dir when it is set.
ResultsTable run_experiment(const ExperimentConfig& config);

/// The stream a trial runs on; trial seeds are seed XOR trial.
Stream trial_stream(const ExperimentConfig& config, int trial);

std::vector<SummaryRow> summarize(const ResultsTable& table);
double accuracy(const IndexVector& predicted, const Vector& truth);

/// trial,t,model,accuracy,n_support,degenerate
std::string results_csv(const ResultsTable& table);
/// t,model,mean_accuracy,std_accuracy,trials
std::string summary_csv(const std::vector<SummaryRow>& summary);
/// trial,t,model,fit_seconds
std::string timings_csv(const ResultsTable& table);

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// Renders mean accuracy per model against t, with a one-standard-deviation band, as SVG.
std::string render_plot(const std::vector<SummaryRow>& summary);
void emit_plot(const std::filesystem::path& summary_path, const std::filesystem::path& out_path);

/// Builds an untrained model of the requested kind.
AnyModel make_model(const ExperimentConfig& config, ModelKind kind, const KernelSpec& kernel);

/// The kernel a trial uses; tfidf weights come from the first batch.
KernelSpec trial_kernel(const ExperimentConfig& config, const Stream& stream);

/// Restricts a batch to its labeled rows (supervised models see only these).
Batch labeled_part(const Batch& batch);

}  // namespace seqmed
