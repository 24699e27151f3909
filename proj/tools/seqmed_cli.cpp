// Command-line front end: data generation, experiments, model fitting and scoring.
#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <sstream>

#include "seqmed/harness.hpp"
#include "seqmed/io.hpp"

using namespace seqmed;
using Json = nlohmann::ordered_json;

namespace {

struct SimulateArgs {
    std::string scenario = "categorical";
    std::string out;
    std::uint64_t seed = 1;
    int time_points = 10;
    int n_min = 97;
    int n_max = 103;
    std::optional<double> labeled_fraction;
    int test_size = 1000;
};

struct FitArgs {
    std::string data;
    std::string out;
    std::string resume;
    std::string model = "seqmed";
    std::string kernel = "linear";
    double rbf_width = 1.0;
    double C = 10.0;
    double gamma_A = 0.005;
    double gamma_I = 0.0;
    int knn = 20;
    double heat_width = 0.01;
    int rank = 0;
    double C_override = 0.0;
};

void simulate(const SimulateArgs& a) {
    StreamConfig sc;
    sc.seed = a.seed;
    sc.time_points = a.time_points;
    sc.n_min = a.n_min;
    sc.n_max = a.n_max;
    sc.test_size = a.test_size;
    Stream s;
    if (a.scenario == "categorical") {
        sc.labeled_fraction = a.labeled_fraction.value_or(1.0);
        s = gen_categorical(sc);
    } else if (a.scenario == "sphere") {
        sc.labeled_fraction = a.labeled_fraction.value_or(0.1);
        s = gen_sphere(sc);
    } else {
        throw std::invalid_argument("simulate: scenario must be categorical or sphere");
    }
    write_stream(a.out, s);
    std::cout << Json{{"status", "ok"}, {"batches", s.batches.size()}, {"dir", a.out}}.dump() << '\n';
}

void fit(const FitArgs& a) {
    std::vector<Batch> batches = read_batches(a.data);
    AnyModel model = [&]() -> AnyModel {
        if (!a.resume.empty()) return load_model(a.resume);
        ExperimentConfig cfg;
        cfg.C = a.C;
        cfg.rbf_width = a.rbf_width;
        cfg.lap.gamma_A = a.gamma_A;
        cfg.lap.gamma_I = a.gamma_I;
        cfg.lap.knn = a.knn;
        cfg.lap.heat_width = a.heat_width;
        cfg.lap.rank = a.rank;
        cfg.lap.C_override = a.C_override;
        const KernelKind kind = kernel_kind_from_string(a.kernel);
        KernelSpec kernel;
        if (kind == KernelKind::rbf) kernel = KernelSpec::rbf(a.rbf_width);
        else if (kind == KernelKind::tfidf_linear) kernel = fit_tfidf(batches.front().X);
        else if (kind == KernelKind::linear) kernel = KernelSpec::linear();
        else throw std::invalid_argument("fit: precomputed kernels are not available from the command line");
        return make_model(cfg, model_kind_from_string(a.model), kernel);
    }();
    const bool supervised = std::holds_alternative<SeqMedModel>(model);
    int fitted = 0;
    int degenerate = 0;
    for (const Batch& b : batches) {
        if (b.t <= model_time(model)) continue;
        Batch feed = supervised ? labeled_part(b) : b;
        feed.t = model_time(model) + 1;
        if (partial_fit(model, feed).degenerate) ++degenerate;
        ++fitted;
    }
    save_model(model, a.out);
    std::cout << Json{{"status", "ok"},
                      {"fitted_batches", fitted},
                      {"degenerate_batches", degenerate},
                      {"t", model_time(model)},
                      {"support_vectors", support_vector_count(model)}}
                     .dump()
              << '\n';
}

void predict(const std::string& model_path, const std::string& input, const std::string& out) {
    const AnyModel model = load_model(model_path);
    const Batch b = read_batch_csv(input);
    const Vector f = decision_values(model, b.X);
    const IndexVector labels = sign_labels(f);
    std::ostringstream csv;
    csv << "decision,label\n";
    for (Eigen::Index i = 0; i < f.size(); ++i) csv << format_double(f(i)) << ',' << labels(i) << '\n';
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        write_file_atomic(out, csv.str());
        std::cout << Json{{"status", "ok"}, {"rows", f.size()}, {"out", out}}.dump() << '\n';
    }
}

void eval(const std::string& model_path, const std::string& test_path) {
    const AnyModel model = load_model(model_path);
    const Batch test = read_batch_csv(test_path);
    if (!test.fully_labeled()) throw std::invalid_argument("eval: test file has unlabeled rows");
    const double acc = accuracy(sign_labels(decision_values(model, test.X)), test.y);
    std::cout << Json{{"accuracy", acc}, {"rows", test.size()}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential MED and Laplacian MED classifiers for streamed batches"};
    app.require_subcommand(1);
    std::string command;

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Write a synthetic stream as batch CSV files");
    s->add_option("--scenario", sim.scenario, "categorical or sphere")->check(CLI::IsMember({"categorical", "sphere"}));
    s->add_option("--out", sim.out, "Output directory")->required();
    s->add_option("--seed", sim.seed);
    s->add_option("--time-points", sim.time_points);
    s->add_option("--n-min", sim.n_min);
    s->add_option("--n-max", sim.n_max);
    s->add_option("--labeled-fraction", sim.labeled_fraction);
    s->add_option("--test-size", sim.test_size);

    std::string config_path;
    std::string output_override;
    auto* r = app.add_subcommand("run", "Run an experiment described by a config file");
    r->add_option("config", config_path, "Config file (key = value lines)")->required()->check(CLI::ExistingFile);
    r->add_option("--output-dir", output_override, "Overrides output_dir");

    FitArgs fa;
    auto* f = app.add_subcommand("fit", "Fit (or continue fitting) a model on batch_NNNN.csv files");
    f->add_option("--data", fa.data, "Directory holding batch CSVs")->required()->check(CLI::ExistingDirectory);
    f->add_option("--out", fa.out, "Model JSON to write")->required();
    f->add_option("--resume", fa.resume, "Continue from a saved model")->check(CLI::ExistingFile);
    f->add_option("--model", fa.model, "seqmed, seqlapmed-exact or seqlapmed-approx");
    f->add_option("--kernel", fa.kernel, "linear, rbf or tfidf");
    f->add_option("--rbf-width", fa.rbf_width);
    f->add_option("--C", fa.C);
    f->add_option("--gamma-A", fa.gamma_A);
    f->add_option("--gamma-I", fa.gamma_I);
    f->add_option("--knn", fa.knn);
    f->add_option("--heat-width", fa.heat_width);
    f->add_option("--rank", fa.rank);
    f->add_option("--C-override", fa.C_override);

    std::string model_path;
    std::string input_path;
    std::string out_path;
    auto* p = app.add_subcommand("predict", "Write decision values and labels for a CSV");
    p->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    p->add_option("--input", input_path)->required()->check(CLI::ExistingFile);
    p->add_option("--out", out_path, "Defaults to stdout");

    auto* e = app.add_subcommand("eval", "Report accuracy on a labeled CSV");
    e->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    e->add_option("--test", input_path)->required()->check(CLI::ExistingFile);

    std::string summary_path;
    auto* pl = app.add_subcommand("plot", "Render summary.csv as an SVG accuracy plot");
    pl->add_option("--summary", summary_path)->required()->check(CLI::ExistingFile);
    pl->add_option("--out", out_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        std::cerr << Json{{"error", err.what()}, {"kind", "usage"}}.dump() << '\n';
        return 2;
    }

    try {
        if (*s) {
            command = "simulate";
            simulate(sim);
        } else if (*r) {
            command = "run";
            ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
            if (!output_override.empty()) cfg.output_dir = output_override;
            const ResultsTable table = run_experiment(cfg);
            std::cout << Json{{"status", "ok"}, {"rows", table.rows.size()}, {"output_dir", cfg.output_dir.string()}}
                             .dump()
                      << '\n';
        } else if (*f) {
            command = "fit";
            fit(fa);
        } else if (*p) {
            command = "predict";
            predict(model_path, input_path, out_path);
        } else if (*e) {
            command = "eval";
            eval(model_path, input_path);
        } else if (*pl) {
            command = "plot";
            emit_plot(summary_path, out_path);
            std::cout << Json{{"status", "ok"}, {"out", out_path}}.dump() << '\n';
        }
    } catch (const std::exception& err) {
        std::cerr << Json{{"error", err.what()}, {"command", command}}.dump() << '\n';
        return 1;
    }
    return 0;
}
