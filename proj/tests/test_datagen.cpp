#include <doctest.h>

#include <cmath>
#include <fstream>

#include "isolet_fixture.hpp"
#include "seqmed/datagen.hpp"
#include "temp_dir.hpp"

using namespace seqmed;

namespace {

bool same_stream(const Stream& a, const Stream& b) {
    if (a.batches.size() != b.batches.size()) return false;
    for (std::size_t i = 0; i < a.batches.size(); ++i) {
        if (a.batches[i].X != b.batches[i].X || a.batches[i].y != b.batches[i].y) return false;
        if (a.batches[i].t != b.batches[i].t) return false;
    }
    return a.test.X == b.test.X && a.test.y == b.test.y;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::string isolet_row(int cls, int features = 617) {
    std::string line;
    for (int j = 0; j < features; ++j) line += "0.5, ";
    return line + std::to_string(cls) + ".\n";
}

}  // namespace

TEST_SUITE("datagen") {

TEST_CASE("random source") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng r(7);
    double lo = 1, hi = 0;
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        const auto k = r.below(7);
        CHECK(k < 7);
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK_THROWS_AS(r.below(0), std::invalid_argument);
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));

    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    r.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("streams are reproducible from the seed") {
    StreamConfig c;
    c.seed = 99;
    c.time_points = 3;
    c.test_size = 50;
    CHECK(same_stream(gen_categorical(c), gen_categorical(c)));
    CHECK(same_stream(gen_sphere(c), gen_sphere(c)));
    StreamConfig d = c;
    d.seed = 100;
    CHECK_FALSE(same_stream(gen_categorical(c), gen_categorical(d)));

    // a longer stream shares its prefix and test set
    StreamConfig longer = c;
    longer.time_points = 5;
    const Stream s3 = gen_sphere(c), s5 = gen_sphere(longer);
    for (int t = 0; t < 3; ++t) CHECK(s3.batches[t].X == s5.batches[t].X);
    CHECK(s3.test.X == s5.test.X);
}

TEST_CASE("categorical stream shape and balance") {
    StreamConfig c;
    c.time_points = 10;
    const Stream s = gen_categorical(c);
    REQUIRE(s.batches.size() == 10);
    for (std::size_t i = 0; i < s.batches.size(); ++i) {
        const Batch& b = s.batches[i];
        CHECK(b.t == static_cast<int>(i + 1));
        CHECK(b.size() >= 97);
        CHECK(b.size() <= 103);
        CHECK(b.X.cols() == 200);
        CHECK(b.fully_labeled());
        CHECK(std::abs(b.y.sum()) <= 1.0);
        CHECK(((b.X.array() == 0) || (b.X.array() == 1) || (b.X.array() == 2)).all());
    }
    CHECK(s.test.size() == 1000);
    CHECK(s.test.y.sum() == 0.0);
}

TEST_CASE("categorical block probabilities") {
    Rng rng(5);
    const CategoricalParams params;
    const Batch b = categorical_batch(rng, 2000, params);
    auto freq = [&](int first, int count, double sign, int value) {
        long hits = 0, total = 0;
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            if (sign != 0 && b.y(i) != sign) continue;
            for (int j = first; j < first + count; ++j) {
                hits += b.X(i, j) == value;
                ++total;
            }
        }
        return static_cast<double>(hits) / static_cast<double>(total);
    };
    // 2e5 draws per block: three standard errors stay below 0.01
    CHECK(std::abs(freq(0, 100, 0, 0) - 0.90) < 0.01);
    CHECK(std::abs(freq(0, 100, 0, 1) - 0.05) < 0.01);
    CHECK(std::abs(freq(100, 50, 0, 0) - 0.60) < 0.01);
    CHECK(std::abs(freq(100, 50, 0, 2) - 0.20) < 0.01);
    CHECK(std::abs(freq(150, 50, 1, 1) - 0.35) < 0.01);
    CHECK(std::abs(freq(150, 50, -1, 1) - 0.10) < 0.01);
    CHECK(std::abs(freq(150, 50, -1, 2) - 0.35) < 0.01);

    // the first 150 features carry no class signal
    const double diff = std::abs(freq(0, 150, 1, 0) - freq(0, 150, -1, 0));
    CHECK(diff < 0.01);
}

TEST_CASE("sphere geometry and label masking") {
    StreamConfig c;
    c.time_points = 8;
    c.labeled_fraction = 0.1;
    const Stream s = gen_sphere(c);
    StreamConfig full = c;
    full.labeled_fraction = 1.0;
    const Stream f = gen_sphere(full);
    for (std::size_t i = 0; i < s.batches.size(); ++i) {
        const Batch& b = s.batches[i];
        const Vector r = b.X.rowwise().norm();
        CHECK(r.maxCoeff() <= 1.0 + 1e-12);
        for (Eigen::Index k = 0; k < b.size(); ++k) {
            const double truth = f.batches[i].y(k);
            CHECK((truth > 0 ? r(k) >= 0.55 : r(k) <= 0.45));
            if (b.y(k) != 0) CHECK(b.y(k) == truth);
        }
        CHECK(b.labeled_count() == static_cast<Eigen::Index>(std::ceil(0.1 * static_cast<double>(b.size()))));
        CHECK((b.y.array() > 0).any());
        CHECK((b.y.array() < 0).any());
        CHECK(b.X == f.batches[i].X);
    }
    CHECK(s.test.fully_labeled());
}

TEST_CASE("configuration validation") {
    StreamConfig c;
    c.time_points = 0;
    CHECK_THROWS_AS(gen_sphere(c), std::invalid_argument);
    c = {};
    c.n_min = 10;
    c.n_max = 5;
    CHECK_THROWS_AS(gen_categorical(c), std::invalid_argument);
    c = {};
    c.labeled_fraction = 0.0;
    CHECK_THROWS_AS(gen_sphere(c), std::invalid_argument);
}

TEST_CASE("batch csv round trip") {
    fixture::TempDir dir("datagen");
    StreamConfig c;
    c.time_points = 3;
    c.labeled_fraction = 0.2;
    c.test_size = 40;
    const Stream s = gen_sphere(c);
    write_stream(dir.path(), s);
    CHECK(std::filesystem::exists(dir / "batch_0001.csv"));
    CHECK(std::filesystem::exists(dir / "test.csv"));
    const std::vector<Batch> back = read_batches(dir.path());
    REQUIRE(back.size() == 3);
    for (int t = 0; t < 3; ++t) {
        CHECK(back[t].t == t + 1);
        CHECK(back[t].X == s.batches[t].X);
        CHECK(back[t].y == s.batches[t].y);
    }
    CHECK(batch_file_name(12) == "batch_0012.csv");

    write_text(dir / "bad.csv", "f0,f1,label\n1,2,1\n3,x,1\n");
    try {
        read_batch_csv(dir / "bad.csv");
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    write_text(dir / "label.csv", "f0,label\n1,2\n");
    CHECK_THROWS(read_batch_csv(dir / "label.csv"));
    fixture::TempDir empty("datagen_empty");
    CHECK_THROWS(read_batches(empty.path()));
}

TEST_CASE("isolet loader on the synthetic fixture") {
    fixture::TempDir dir("isolet");
    const fixture::IsoletFiles files = fixture::write_isolet(dir.path());
    const Stream s = load_isolet_stream(files.train, files.test);
    REQUIRE(s.batches.size() == 24);
    Eigen::Index total = 0;
    for (std::size_t g = 0; g < s.batches.size(); ++g) {
        const Batch& b = s.batches[g];
        CHECK(b.t == static_cast<int>(g + 1));
        CHECK(b.X.cols() == 617);
        CHECK(b.labeled_count() == 52);
        // labels sit on the first speaker's rows
        CHECK((b.y.head(52).array() != 0).all());
        CHECK(b.size() == (g == 20 || g == 22 ? 259 : 260));
        total += b.size();
    }
    CHECK(total == 6238);
    CHECK(s.test.size() == 1559);
    CHECK(s.test.fully_labeled());
    CHECK(std::abs(s.test.y.sum()) <= 1.0);
}

TEST_CASE("isolet loader handles both speaker layouts and rejects bad rows") {
    fixture::TempDir dir("isolet_small");
    // adjacent repeats: one pass per speaker, 4 speakers, groups of 2
    std::string text;
    for (int s = 0; s < 4; ++s)
        for (int k = 1; k <= 26; ++k) text += isolet_row(k) + isolet_row(k);
    write_text(dir / "train", text);
    write_text(dir / "test", isolet_row(3));
    IsoletOptions opt;
    opt.speakers_per_group = 2;
    const Stream s = load_isolet_stream(dir / "train", dir / "test", opt);
    REQUIRE(s.batches.size() == 2);
    CHECK(s.batches[0].size() == 104);
    CHECK(s.batches[0].labeled_count() == 52);
    CHECK(s.test.y(0) == 1.0);

    write_text(dir / "short", isolet_row(1, 10));
    try {
        load_isolet_stream(dir / "short", dir / "test");
        FAIL("expected a column count error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
    write_text(dir / "cls", isolet_row(1) + isolet_row(27));
    try {
        load_isolet_stream(dir / "cls", dir / "test");
        FAIL("expected a class id error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    CHECK_THROWS(load_isolet_stream(dir / "missing", dir / "test"));
}

}
