#include <doctest.h>

#include <fstream>

#include "seqmed/harness.hpp"
#include "seqmed/io.hpp"
#include "temp_dir.hpp"

using namespace seqmed;

namespace {

ExperimentConfig small_categorical() {
    ExperimentConfig c = ExperimentConfig::defaults_for(Scenario::categorical);
    c.trials = 2;
    c.stream.time_points = 3;
    c.stream.n_min = 30;
    c.stream.n_max = 34;
    c.stream.test_size = 200;
    c.threads = 2;
    return c;
}

std::string message_of(const std::string& text) {
    try {
        ExperimentConfig::parse(text);
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("one row per trial, time point and model") {
    fixture::TempDir dir("harness");
    ExperimentConfig c = small_categorical();
    c.output_dir = dir.path();
    const ResultsTable table = run_experiment(c);
    CHECK(table.rows.size() == 18);
    CHECK(table.model_names() == std::vector<std::string>{"seqmed", "per-batch", "full-retrain"});

    const std::string results = read_file(dir / "results.csv");
    CHECK(results.rfind("trial,t,model,accuracy,n_support,degenerate\n", 0) == 0);
    CHECK(count(results, "\n") == 19);
    CHECK(read_file(dir / "timings.csv").rfind("trial,t,model,fit_seconds\n", 0) == 0);

    const std::vector<SummaryRow> summary = read_summary_csv(dir / "summary.csv");
    CHECK(summary.size() == 9);
    for (const SummaryRow& s : summary) {
        CHECK(s.count == 2);
        CHECK(s.mean >= 0.0);
        CHECK(s.mean <= 1.0);
    }

    // at t = 1 all three models saw the same data
    for (int trial = 0; trial < 2; ++trial) {
        std::vector<double> first;
        for (const ResultRow& r : table.rows)
            if (r.trial == trial && r.t == 1) first.push_back(r.accuracy);
        REQUIRE(first.size() == 3);
        CHECK(first[0] == first[1]);
        CHECK(first[0] == first[2]);
    }
}

TEST_CASE("full retrain is a fresh fit on the concatenated stream") {
    ExperimentConfig c = small_categorical();
    c.trials = 1;
    const ResultsTable table = run_experiment(c);
    const Stream s = trial_stream(c, 0);
    const KernelSpec k = trial_kernel(c, s);
    AnyModel m = make_model(c, c.model, k);
    Batch joined = concatenate({s.batches[0], s.batches[1], s.batches[2]});
    partial_fit(m, joined);
    const double expected = accuracy(sign_labels(decision_values(m, s.test.X)), s.test.y);
    for (const ResultRow& r : table.rows)
        if (r.model == "full-retrain" && r.t == 3) CHECK(r.accuracy == expected);
}

TEST_CASE("degenerate batches are flagged, not dropped") {
    fixture::TempDir dir("degenerate");
    Batch b1{Matrix(4, 2), Vector(4), 1};
    b1.X << 0, 1, 1, 0, 2, 2, -1, -2;
    b1.y << 1, -1, 1, -1;
    Batch b2 = b1;
    b2.t = 2;
    b2.y << 1, 1, 1, 1;
    write_batch_csv(dir / "batch_0001.csv", b1);
    write_batch_csv(dir / "batch_0002.csv", b2);
    write_batch_csv(dir / "test.csv", b1);
    const ExperimentConfig c = ExperimentConfig::parse("scenario = custom-csv\ndata_dir = " + dir.path().string() +
                                                       "\nkernel = linear\n");
    const ResultsTable table = run_experiment(c);
    CHECK(table.rows.size() == 6);
    int flagged = 0;
    for (const ResultRow& r : table.rows) flagged += r.degenerate;
    CHECK(flagged == 2);  // sequential and per-batch at t = 2
    CHECK(results_csv(table).find(",1\n") != std::string::npos);
}

TEST_CASE("reruns are byte-identical regardless of threading") {
    fixture::TempDir a("rerun_a"), b("rerun_b");
    ExperimentConfig c = small_categorical();
    c.output_dir = a.path();
    run_experiment(c);
    c.output_dir = b.path();
    c.threads = 1;
    run_experiment(c);
    CHECK(read_file(a / "results.csv") == read_file(b / "results.csv"));
    CHECK(read_file(a / "summary.csv") == read_file(b / "summary.csv"));
}

TEST_CASE("trial streams follow the seed") {
    ExperimentConfig c = small_categorical();
    c.stream.seed = 5;
    const Stream s1 = trial_stream(c, 1);
    StreamConfig direct = c.stream;
    direct.seed = 5 ^ 1;
    CHECK(s1.batches[0].X == gen_categorical(direct).batches[0].X);
    CHECK(trial_stream(c, 0).batches[0].X != s1.batches[0].X);
}

TEST_CASE("semi-supervised sphere run") {
    ExperimentConfig c = ExperimentConfig::defaults_for(Scenario::sphere);
    c.trials = 1;
    c.stream.time_points = 3;
    c.stream.test_size = 200;
    const ResultsTable table = run_experiment(c);
    CHECK(table.rows.size() == 9);
    CHECK(table.model_names().front() == "seqlapmed-approx");
    for (const ResultRow& r : table.rows) CHECK(r.accuracy > 0.5);
}

TEST_CASE("config parsing") {
    const ExperimentConfig c = ExperimentConfig::parse(
        "# sphere run\n"
        "scenario = sphere\n"
        "model = seqlapmed-exact   # exact recursion\n"
        "baselines = per-batch\n"
        "trials = 3\n"
        "gamma_I = 2.5\n"
        "seed = 17\n");
    CHECK(c.scenario == Scenario::sphere);
    CHECK(c.model == ModelKind::seqlapmed_exact);
    CHECK(c.per_batch);
    CHECK_FALSE(c.full_retrain);
    CHECK(c.trials == 3);
    CHECK(c.lap.gamma_I == 2.5);
    CHECK(c.stream.seed == 17);
    CHECK(c.stream.labeled_fraction == 0.1);
    CHECK(c.kernel == KernelKind::rbf);

    const ExperimentConfig none = ExperimentConfig::parse("baselines = none\n");
    CHECK_FALSE(none.per_batch);
    CHECK_FALSE(none.full_retrain);

    CHECK(message_of("trials = 2\ntrials = 3\n").find("line 2") != std::string::npos);
    CHECK(message_of("trials = 2\ncolour = red\n").find("unknown key 'colour'") != std::string::npos);
    CHECK(message_of("trials\n").find("line 1") != std::string::npos);
    CHECK(message_of("trials = two\n").find("trials") != std::string::npos);
    CHECK(message_of("trials = 0\n").find("trials") != std::string::npos);
    CHECK(message_of("scenario = moon\n").find("moon") != std::string::npos);
    CHECK(message_of("scenario = isolet\n").find("isolet_train") != std::string::npos);
    CHECK(message_of("scenario = sphere\nkernel = tfidf\n").find("tfidf") != std::string::npos);
    CHECK(message_of("seed = -4\n").find("seed") != std::string::npos);
    CHECK(message_of("baselines = oracle\n").find("oracle") != std::string::npos);
}

TEST_CASE("summary statistics") {
    ResultsTable t;
    t.rows = {{0, 1, "a", 0.5}, {1, 1, "a", 0.7}, {0, 1, "b", 0.9}};
    const auto s = summarize(t);
    REQUIRE(s.size() == 2);
    CHECK(s[0].model == "a");
    CHECK(s[0].mean == doctest::Approx(0.6));
    CHECK(s[0].stddev == doctest::Approx(std::sqrt(0.02)));
    CHECK(s[1].stddev == 0.0);
    IndexVector pred(4);
    pred << 1, -1, 1, 1;
    Vector truth(4);
    truth << 1, -1, -1, 1;
    CHECK(accuracy(pred, truth) == 0.75);
}

TEST_CASE("plots") {
    std::vector<SummaryRow> rows;
    for (int t = 1; t <= 4; ++t) {
        rows.push_back({t, "seqmed", 0.6 + 0.05 * t, 0.02, 3});
        rows.push_back({t, "per-batch", 0.6, 0.03, 3});
        rows.push_back({t, "full-retrain", 0.65 + 0.05 * t, 0.01, 3});
    }
    const std::string svg = render_plot(rows);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(count(svg, "class=\"curve\"") == 3);
    CHECK(count(svg, "<polyline") == 3);
    CHECK(svg.find("data-model=\"per-batch\"") != std::string::npos);
    CHECK(render_plot(rows) == svg);

    const std::string single = render_plot({{1, "seqmed", 0.8, 0.05, 2}});
    CHECK(count(single, "class=\"curve\"") == 1);
    CHECK(single.find("<circle") != std::string::npos);

    CHECK_THROWS(render_plot({}));

    fixture::TempDir dir("plot");
    ResultsTable table;
    table.rows = {{0, 1, "seqmed", 0.7}, {0, 2, "seqmed", 0.8}};
    std::ofstream(dir / "summary.csv") << summary_csv(summarize(table));
    emit_plot(dir / "summary.csv", dir / "plot.svg");
    CHECK(read_file(dir / "plot.svg") == render_plot(read_summary_csv(dir / "summary.csv")));
    std::ofstream(dir / "bad.csv") << "a,b\n";
    CHECK_THROWS(read_summary_csv(dir / "bad.csv"));
}

}
