#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <random>

#include "oracles.hpp"
#include "seqmed/datagen.hpp"
#include "seqmed/io.hpp"
#include "seqmed/serialize.hpp"
#include "temp_dir.hpp"

using namespace seqmed;

namespace {

Stream sphere_stream(int time_points, std::uint64_t seed = 3) {
    StreamConfig c;
    c.seed = seed;
    c.time_points = time_points;
    c.n_min = 40;
    c.n_max = 50;
    c.labeled_fraction = 0.3;
    c.test_size = 100;
    return gen_sphere(c);
}

LapConfig lap_config(LapMode mode) {
    LapConfig c;
    c.gamma_A = 0.01;
    c.gamma_I = 5.0;
    c.knn = 6;
    c.heat_width = 0.5;
    c.mode = mode;
    return c;
}

Batch labeled_only(const Batch& b) {
    const auto idx = b.labeled_indices();
    return Batch{select_rows(b.X, idx), select_entries(b.y, idx), b.t};
}

double max_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("serialize") {

TEST_CASE("supervised model round trip") {
    fixture::TempDir dir("serialize");
    const Stream s = sphere_stream(4);
    CSchedule schedule;
    schedule.constant = 7.5;
    schedule.per_step = {3.0, 4.0};
    SeqMedModel m(KernelSpec::rbf(0.7), schedule);
    for (const Batch& b : s.batches) m.partial_fit(labeled_only(b));
    save_model(m, dir / "m.json");
    const AnyModel back = load_model(dir / "m.json");
    REQUIRE(std::holds_alternative<SeqMedModel>(back));
    const SeqMedModel& r = std::get<SeqMedModel>(back);
    std::mt19937_64 rng(1);
    const Matrix probes = oracle::random_matrix(rng, 100, 3);
    CHECK(max_diff(r.decision_values(probes), m.decision_values(probes)) <= 1e-12);
    CHECK(r.time() == 4);
    CHECK(r.bias() == m.bias());
    CHECK(r.schedule().per_step == schedule.per_step);
    CHECK(r.schedule().constant == 7.5);
    CHECK(model_to_json(r) == model_to_json(m));
}

TEST_CASE("field order of a supervised file") {
    SeqMedModel m(KernelSpec::linear());
    const std::string text = model_to_json(m);
    std::vector<std::size_t> at;
    for (const char* key : {"\"version\"", "\"type\"", "\"kernel\"", "\"solver\"", "\"C_schedule\"", "\"history\"",
                            "\"bias\"", "\"t\""})
        at.push_back(text.find(key));
    for (std::size_t i = 1; i < at.size(); ++i) CHECK(at[i - 1] < at[i]);
}

TEST_CASE("tfidf kernel state survives") {
    StreamConfig c;
    c.time_points = 2;
    c.test_size = 30;
    const Stream s = gen_categorical(c);
    const KernelSpec k = fit_tfidf(s.batches[0].X);
    SeqMedModel m(k);
    for (const Batch& b : s.batches) m.partial_fit(b);
    const AnyModel back = model_from_json(model_to_json(m));
    const SeqMedModel& r = std::get<SeqMedModel>(back);
    CHECK(r.kernel().idf_weights == k.idf_weights);
    CHECK(max_diff(r.decision_values(s.test.X), m.decision_values(s.test.X)) <= 1e-12);
}

TEST_CASE("laplacian model round trip in both modes") {
    for (LapMode mode : {LapMode::exact, LapMode::approx}) {
        CAPTURE(to_string(mode));
        const Stream s = sphere_stream(4);
        SeqLapMedModel m(KernelSpec::rbf(1.0), lap_config(mode));
        for (const Batch& b : s.batches) m.partial_fit(b);
        const AnyModel back = model_from_json(model_to_json(m));
        REQUIRE(std::holds_alternative<SeqLapMedModel>(back));
        const SeqLapMedModel& r = std::get<SeqLapMedModel>(back);
        std::mt19937_64 rng(2);
        const Matrix probes = oracle::random_matrix(rng, 100, 3);
        CHECK(max_diff(r.decision_values(probes), m.decision_values(probes)) <= 1e-12);
        CHECK(r.prior_steps() == m.prior_steps());
        CHECK(r.running_state().count == m.running_state().count);
        CHECK(model_to_json(r) == model_to_json(m));
    }
}

TEST_CASE("resuming from a file equals an uninterrupted run") {
    fixture::TempDir dir("resume");
    const Stream s = sphere_stream(5);
    for (LapMode mode : {LapMode::exact, LapMode::approx}) {
        CAPTURE(to_string(mode));
        SeqLapMedModel straight(KernelSpec::rbf(1.0), lap_config(mode));
        for (const Batch& b : s.batches) straight.partial_fit(b);

        SeqLapMedModel first(KernelSpec::rbf(1.0), lap_config(mode));
        for (int t = 0; t < 2; ++t) first.partial_fit(s.batches[t]);
        save_model(first, dir / "half.json");
        AnyModel resumed = load_model(dir / "half.json");
        for (int t = 2; t < 5; ++t) partial_fit(resumed, s.batches[t]);
        CHECK(model_time(resumed) == 5);
        CHECK(max_diff(decision_values(resumed, s.test.X), straight.decision_values(s.test.X)) <= 1e-10);
        CHECK(support_vector_count(resumed) == straight.support_vector_count());
    }

    SeqMedModel straight(KernelSpec::rbf(1.0));
    for (const Batch& b : s.batches) straight.partial_fit(labeled_only(b));
    AnyModel part = SeqMedModel(KernelSpec::rbf(1.0));
    for (int t = 0; t < 3; ++t) partial_fit(part, labeled_only(s.batches[t]));
    AnyModel resumed = model_from_json(model_to_json(std::get<SeqMedModel>(part)));
    for (int t = 3; t < 5; ++t) partial_fit(resumed, labeled_only(s.batches[t]));
    CHECK(max_diff(decision_values(resumed, s.test.X), straight.decision_values(s.test.X)) <= 1e-10);
}

TEST_CASE("doubles are written to round-trip exactly") {
    CHECK(format_double(0.1) == "0.1");
    const double v = 1.0 / 3.0;
    CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
}

TEST_CASE("broken files are rejected with a useful message") {
    const Stream s = sphere_stream(2);
    SeqMedModel m(KernelSpec::rbf(1.0));
    for (const Batch& b : s.batches) m.partial_fit(labeled_only(b));
    const std::string text = model_to_json(m);

    const std::string truncated = text.substr(0, text.find("\"bias\""));
    try {
        model_from_json(truncated);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("missing field 'bias'") != std::string::npos);
    }

    SeqLapMedModel lap(KernelSpec::rbf(1.0), lap_config(LapMode::approx));
    lap.partial_fit(s.batches[0]);
    const std::string lap_text = model_to_json(lap);
    try {
        model_from_json(lap_text.substr(0, lap_text.find("\"running\"")));
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("missing field 'running'") != std::string::npos);
    }

    nlohmann::json j = nlohmann::json::parse(text);
    j.erase("history");
    try {
        model_from_json(j.dump());
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("missing field 'history'") != std::string::npos);
    }

    j = nlohmann::json::parse(text);
    j["version"] = kModelFormatVersion + 1;
    try {
        model_from_json(j.dump());
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("version") != std::string::npos);
    }

    j = nlohmann::json::parse(text);
    j["type"] = "svm";
    CHECK_THROWS_AS(model_from_json(j.dump()), SchemaError);
    j = nlohmann::json::parse(text);
    j["bias"] = "zero";
    CHECK_THROWS_AS(model_from_json(j.dump()), SchemaError);
    j = nlohmann::json::parse(text);
    j["history"][0]["samples"]["rows"] = 999;
    CHECK_THROWS_AS(model_from_json(j.dump()), SchemaError);
    CHECK_THROWS(load_model("/nonexistent/model.json"));
}

}
