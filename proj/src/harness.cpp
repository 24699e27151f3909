#include "seqmed/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "seqmed/io.hpp"

namespace seqmed {

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::categorical: return "categorical";
        case Scenario::sphere: return "sphere";
        case Scenario::isolet: return "isolet";
        case Scenario::custom_csv: return "custom-csv";
    }
    return "?";
}

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::seqmed: return "seqmed";
        case ModelKind::seqlapmed_exact: return "seqlapmed-exact";
        case ModelKind::seqlapmed_approx: return "seqlapmed-approx";
    }
    return "?";
}

Scenario scenario_from_string(std::string_view name) {
    for (auto s : {Scenario::categorical, Scenario::sphere, Scenario::isolet, Scenario::custom_csv}) {
        if (name == to_string(s)) return s;
    }
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

ModelKind model_kind_from_string(std::string_view name) {
    for (auto m : {ModelKind::seqmed, ModelKind::seqlapmed_exact, ModelKind::seqlapmed_approx}) {
        if (name == to_string(m)) return m;
    }
    throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty()) throw std::invalid_argument("config: " + key + " must be a number");
    return v;
}

long to_long(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty()) throw std::invalid_argument("config: " + key + " must be an integer");
    return v;
}

bool is_lap(ModelKind m) { return m != ModelKind::seqmed; }

}  // namespace

ExperimentConfig ExperimentConfig::defaults_for(Scenario scenario) {
    ExperimentConfig c;
    c.scenario = scenario;
    switch (scenario) {
        case Scenario::categorical:
            c.kernel = KernelKind::tfidf_linear;
            c.model = ModelKind::seqmed;
            break;
        case Scenario::sphere:
            c.kernel = KernelKind::rbf;
            c.rbf_width = 1.0;
            c.model = ModelKind::seqlapmed_approx;
            c.stream.labeled_fraction = 0.1;
            c.stream.time_points = 8;
            c.lap.gamma_A = 0.005;
            c.lap.gamma_I = 0.5;
            c.lap.knn = 20;
            c.lap.heat_width = 0.01;
            break;
        case Scenario::isolet:
            c.kernel = KernelKind::rbf;
            c.rbf_width = 10.0;
            c.model = ModelKind::seqlapmed_exact;
            c.stream.time_points = 24;
            c.lap.gamma_A = 0.001;
            c.lap.gamma_I = 0.5;
            c.lap.knn = 10;
            c.lap.heat_width = 100.0;
            break;
        case Scenario::custom_csv:
            c.kernel = KernelKind::linear;
            c.model = ModelKind::seqmed;
            c.stream.time_points = 1000000;
            break;
    }
    return c;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        if (seen.count(key)) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        seen[key] = line_no;
        entries.emplace_back(std::move(key), std::move(value));
    }

    Scenario scenario = Scenario::categorical;
    for (const auto& [key, value] : entries) {
        if (key == "scenario") scenario = scenario_from_string(value);
    }
    ExperimentConfig c = defaults_for(scenario);

    for (const auto& [key, value] : entries) {
        if (key == "scenario") {
        } else if (key == "model") {
            c.model = model_kind_from_string(value);
        } else if (key == "baselines") {
            c.per_batch = false;
            c.full_retrain = false;
            for (const auto& b : split_list(value)) {
                if (b == "per-batch") c.per_batch = true;
                else if (b == "full-retrain") c.full_retrain = true;
                else if (b != "none") throw std::invalid_argument("config: unknown baseline '" + b + "'");
            }
        } else if (key == "trials") {
            c.trials = static_cast<int>(to_long(key, value));
        } else if (key == "time_points") {
            c.stream.time_points = static_cast<int>(to_long(key, value));
        } else if (key == "n_min") {
            c.stream.n_min = static_cast<int>(to_long(key, value));
        } else if (key == "n_max") {
            c.stream.n_max = static_cast<int>(to_long(key, value));
        } else if (key == "labeled_fraction") {
            c.stream.labeled_fraction = to_double(key, value);
        } else if (key == "test_size") {
            c.stream.test_size = static_cast<int>(to_long(key, value));
        } else if (key == "seed") {
            std::size_t used = 0;
            try {
                c.stream.seed = std::stoull(value, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != value.size() || value.empty() || value.front() == '-') {
                throw std::invalid_argument("config: seed must be a nonnegative integer");
            }
        } else if (key == "kernel") {
            c.kernel = kernel_kind_from_string(value);
        } else if (key == "rbf_width") {
            c.rbf_width = to_double(key, value);
        } else if (key == "C") {
            c.C = to_double(key, value);
        } else if (key == "gamma_A") {
            c.lap.gamma_A = to_double(key, value);
        } else if (key == "gamma_I") {
            c.lap.gamma_I = to_double(key, value);
        } else if (key == "knn") {
            c.lap.knn = static_cast<int>(to_long(key, value));
        } else if (key == "heat_width") {
            c.lap.heat_width = to_double(key, value);
        } else if (key == "rank") {
            c.lap.rank = static_cast<int>(to_long(key, value));
        } else if (key == "C_override") {
            c.lap.C_override = to_double(key, value);
        } else if (key == "tol") {
            c.lap.solver.tol = to_double(key, value);
        } else if (key == "max_iter") {
            c.lap.solver.max_iter = static_cast<int>(to_long(key, value));
        } else if (key == "output_dir") {
            c.output_dir = value;
        } else if (key == "isolet_train") {
            c.isolet_train = value;
        } else if (key == "isolet_test") {
            c.isolet_test = value;
        } else if (key == "isolet_positive") {
            c.isolet_positive.clear();
            for (const auto& id : split_list(value)) c.isolet_positive.insert(static_cast<int>(to_long(key, id)));
        } else if (key == "data_dir") {
            c.data_dir = value;
        } else if (key == "threads") {
            c.threads = static_cast<int>(to_long(key, value));
        } else {
            throw std::invalid_argument("config line " + std::to_string(seen[key]) + ": unknown key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) { return parse(read_file(path)); }

void ExperimentConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("config: trials must be at least 1");
    if (threads < 0) throw std::invalid_argument("config: threads must be nonnegative");
    stream.validate();
    if (!(C > 0.0)) throw std::invalid_argument("config: C must be positive");
    if (kernel == KernelKind::rbf && !(rbf_width > 0.0)) throw std::invalid_argument("config: rbf_width must be positive");
    if (kernel == KernelKind::precomputed) throw std::invalid_argument("config: precomputed kernels are not supported in experiments");
    if (kernel == KernelKind::tfidf_linear && scenario != Scenario::categorical && scenario != Scenario::custom_csv) {
        throw std::invalid_argument("config: tfidf kernel needs count data (categorical or custom-csv)");
    }
    if (is_lap(model)) {
        if (!(lap.gamma_A > 0.0)) throw std::invalid_argument("config: gamma_A must be positive");
        if (!(lap.gamma_I >= 0.0)) throw std::invalid_argument("config: gamma_I must be nonnegative");
        if (lap.knn < 1) throw std::invalid_argument("config: knn must be positive");
        if (!(lap.heat_width > 0.0)) throw std::invalid_argument("config: heat_width must be positive");
        if (lap.rank < 0) throw std::invalid_argument("config: rank must be nonnegative");
    }
    if (!(lap.solver.tol > 0.0) || lap.solver.max_iter < 1) {
        throw std::invalid_argument("config: tol and max_iter must be positive");
    }
    if (scenario == Scenario::categorical && stream.labeled_fraction < 1.0 && !is_lap(model)) {
        throw std::invalid_argument("config: partially labeled categorical data needs a seqlapmed model");
    }
    if (scenario == Scenario::isolet && (isolet_train.empty() || isolet_test.empty())) {
        throw std::invalid_argument("config: isolet scenario needs isolet_train and isolet_test");
    }
    if (scenario == Scenario::isolet && isolet_positive.empty()) {
        throw std::invalid_argument("config: isolet_positive must name at least one class");
    }
    if (scenario == Scenario::custom_csv && data_dir.empty()) {
        throw std::invalid_argument("config: custom-csv scenario needs data_dir");
    }
}

std::vector<std::string> ResultsTable::model_names() const {
    std::vector<std::string> names;
    for (const auto& r : rows) {
        if (std::find(names.begin(), names.end(), r.model) == names.end()) names.push_back(r.model);
    }
    return names;
}

Stream trial_stream(const ExperimentConfig& config, int trial) {
    Stream s;
    switch (config.scenario) {
        case Scenario::categorical: {
            StreamConfig sc = config.stream;
            sc.seed = config.stream.seed ^ static_cast<std::uint64_t>(trial);
            s = gen_categorical(sc);
            break;
        }
        case Scenario::sphere: {
            StreamConfig sc = config.stream;
            sc.seed = config.stream.seed ^ static_cast<std::uint64_t>(trial);
            s = gen_sphere(sc);
            break;
        }
        case Scenario::isolet: {
            IsoletOptions opt;
            opt.positive_classes = config.isolet_positive;
            s = load_isolet_stream(config.isolet_train, config.isolet_test, opt);
            break;
        }
        case Scenario::custom_csv:
            s.batches = read_batches(config.data_dir);
            s.test = read_batch_csv(config.data_dir / "test.csv");
            break;
    }
    if (static_cast<int>(s.batches.size()) > config.stream.time_points) {
        s.batches.resize(static_cast<std::size_t>(config.stream.time_points));
    }
    if (!s.test.fully_labeled()) throw std::invalid_argument("test batch must be fully labeled");
    return s;
}

KernelSpec trial_kernel(const ExperimentConfig& config, const Stream& stream) {
    switch (config.kernel) {
        case KernelKind::linear: return KernelSpec::linear();
        case KernelKind::rbf: return KernelSpec::rbf(config.rbf_width);
        case KernelKind::tfidf_linear: return fit_tfidf(stream.batches.front().X);
        case KernelKind::precomputed: break;
    }
    throw std::invalid_argument("unsupported kernel for experiments");
}

AnyModel make_model(const ExperimentConfig& config, ModelKind kind, const KernelSpec& kernel) {
    if (kind == ModelKind::seqmed) {
        CSchedule schedule;
        schedule.constant = config.C;
        return SeqMedModel(kernel, schedule, config.lap.solver);
    }
    LapConfig lap = config.lap;
    lap.mode = kind == ModelKind::seqlapmed_exact ? LapMode::exact : LapMode::approx;
    return SeqLapMedModel(kernel, lap);
}

Batch labeled_part(const Batch& batch) {
    const auto idx = batch.labeled_indices();
    Batch out;
    out.X = select_rows(batch.X, idx);
    out.y = select_entries(batch.y, idx);
    out.t = batch.t;
    return out;
}

double accuracy(const IndexVector& predicted, const Vector& truth) {
    if (predicted.size() != truth.size() || truth.size() == 0) {
        throw std::invalid_argument("accuracy: size mismatch or empty test set");
    }
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (static_cast<double>(predicted(i)) == truth(i)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

namespace {

struct Timed {
    FitReport report;
    double seconds = 0.0;
};

Timed timed_fit(AnyModel& model, Batch batch) {
    batch.t = model_time(model) + 1;
    const auto start = std::chrono::steady_clock::now();
    Timed out;
    out.report = partial_fit(model, batch);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

ResultRow score(const AnyModel& model, const Stream& stream, const Timed& fit, int trial, int t,
                std::string name) {
    ResultRow row;
    row.trial = trial;
    row.t = t;
    row.model = std::move(name);
    row.accuracy = accuracy(sign_labels(decision_values(model, stream.test.X)), stream.test.y);
    row.fit_seconds = fit.seconds;
    row.n_support = support_vector_count(model);
    row.degenerate = fit.report.degenerate;
    return row;
}

std::vector<ResultRow> run_trial(const ExperimentConfig& config, int trial) {
    const Stream stream = trial_stream(config, trial);
    if (stream.batches.empty()) throw std::invalid_argument("stream has no batches");
    const KernelSpec kernel = trial_kernel(config, stream);
    const bool supervised = config.model == ModelKind::seqmed;

    std::vector<ResultRow> rows;
    AnyModel sequential = make_model(config, config.model, kernel);
    std::vector<Batch> seen;
    for (const Batch& batch : stream.batches) {
        const Batch feed = supervised ? labeled_part(batch) : batch;
        const int t = batch.t;

        Timed fit = timed_fit(sequential, feed);
        rows.push_back(score(sequential, stream, fit, trial, t, to_string(config.model)));

        if (config.per_batch) {
            AnyModel fresh = make_model(config, config.model, kernel);
            fit = timed_fit(fresh, feed);
            rows.push_back(score(fresh, stream, fit, trial, t, "per-batch"));
        }
        if (config.full_retrain) {
            seen.push_back(feed);
            AnyModel fresh = make_model(config, config.model, kernel);
            fit = timed_fit(fresh, concatenate(seen));
            rows.push_back(score(fresh, stream, fit, trial, t, "full-retrain"));
        }
    }
    return rows;
}

}  // namespace

ResultsTable run_experiment(const ExperimentConfig& config) {
    config.validate();
    std::vector<std::vector<ResultRow>> per_trial(static_cast<std::size_t>(config.trials));
    std::vector<std::exception_ptr> errors(per_trial.size());

    unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(config.trials));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int trial = next++; trial < config.trials; trial = next++) {
            try {
                per_trial[static_cast<std::size_t>(trial)] = run_trial(config, trial);
            } catch (...) {
                errors[static_cast<std::size_t>(trial)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    ResultsTable table;
    for (auto& rows : per_trial) table.rows.insert(table.rows.end(), rows.begin(), rows.end());

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        write_file_atomic(config.output_dir / "results.csv", results_csv(table));
        write_file_atomic(config.output_dir / "summary.csv", summary_csv(summarize(table)));
        write_file_atomic(config.output_dir / "timings.csv", timings_csv(table));
    }
    return table;
}

std::vector<SummaryRow> summarize(const ResultsTable& table) {
    std::vector<SummaryRow> out;
    for (const auto& name : table.model_names()) {
        std::map<int, std::vector<double>> by_t;
        for (const auto& r : table.rows) {
            if (r.model == name) by_t[r.t].push_back(r.accuracy);
        }
        for (const auto& [t, values] : by_t) {
            SummaryRow s;
            s.t = t;
            s.model = name;
            s.count = static_cast<int>(values.size());
            double sum = 0.0;
            for (double v : values) sum += v;
            s.mean = sum / s.count;
            if (s.count > 1) {
                double ss = 0.0;
                for (double v : values) ss += (v - s.mean) * (v - s.mean);
                s.stddev = std::sqrt(ss / (s.count - 1));
            }
            out.push_back(s);
        }
    }
    return out;
}

std::string results_csv(const ResultsTable& table) {
    std::ostringstream out;
    out << "trial,t,model,accuracy,n_support,degenerate\n";
    for (const auto& r : table.rows) {
        out << r.trial << ',' << r.t << ',' << r.model << ',' << format_double(r.accuracy) << ',' << r.n_support
            << ',' << (r.degenerate ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string summary_csv(const std::vector<SummaryRow>& summary) {
    std::ostringstream out;
    out << "t,model,mean_accuracy,std_accuracy,trials\n";
    for (const auto& s : summary) {
        out << s.t << ',' << s.model << ',' << format_double(s.mean) << ',' << format_double(s.stddev) << ','
            << s.count << '\n';
    }
    return out.str();
}

std::string timings_csv(const ResultsTable& table) {
    std::ostringstream out;
    out << "trial,t,model,fit_seconds\n";
    for (const auto& r : table.rows) {
        out << r.trial << ',' << r.t << ',' << r.model << ',' << format_double(r.fit_seconds) << '\n';
    }
    return out.str();
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != "t,model,mean_accuracy,std_accuracy,trials") {
        throw std::runtime_error(path.string() + ": not a summary file");
    }
    std::vector<SummaryRow> out;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_list(line);
        if (fields.size() != 5) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) + " needs 5 fields");
        }
        SummaryRow s;
        try {
            s.t = static_cast<int>(to_long("t", fields[0]));
            s.model = fields[1];
            s.mean = to_double("mean_accuracy", fields[2]);
            s.stddev = to_double("std_accuracy", fields[3]);
            s.count = static_cast<int>(to_long("trials", fields[4]));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) + ": " + e.what());
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace seqmed
