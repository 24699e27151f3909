#include "seqmed/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "seqmed/io.hpp"

namespace seqmed {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int draw_category(Rng& rng, const std::array<double, 3>& probs) {
    const double u = rng.uniform();
    if (u < probs[0]) return 0;
    if (u < probs[0] + probs[1]) return 1;
    return 2;
}

// Labels for a batch of n: n/2 of each class, the odd one out decided by a coin, shuffled.
std::vector<double> balanced_labels(Rng& rng, int n) {
    int positives = n / 2;
    if (n % 2 == 1 && rng.below(2) == 1) ++positives;
    std::vector<double> labels(static_cast<std::size_t>(n), -1.0);
    std::fill(labels.begin(), labels.begin() + positives, 1.0);
    rng.shuffle(labels);
    return labels;
}

int draw_size(Rng& rng, const StreamConfig& config) {
    return static_cast<int>(rng.uniform_int(config.n_min, config.n_max));
}

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Batch sphere_batch(Rng& rng, int n, const SphereParams& params) {
    Batch b;
    b.y = to_vector(balanced_labels(rng, n));
    b.X.resize(n, 3);
    for (int i = 0; i < n; ++i) {
        Eigen::Vector3d dir;
        do {
            dir << rng.normal(), rng.normal(), rng.normal();
        } while (dir.norm() < 1e-12);
        dir.normalize();
        const double radius = b.y(i) < 0 ? rng.uniform(0.0, params.inner_max)
                                         : rng.uniform(params.outer_min, params.outer_max);
        b.X.row(i) = (radius * dir).transpose();
    }
    return b;
}

// Keeps ceil(fraction * n) labels, split between the classes as evenly as they allow.
void mask_labels(Rng& rng, Batch& b, double fraction) {
    const auto n = static_cast<int>(b.size());
    const int keep = std::min(n, static_cast<int>(std::ceil(fraction * n - 1e-9)));
    std::vector<Eigen::Index> pos;
    std::vector<Eigen::Index> neg;
    for (Eigen::Index i = 0; i < b.y.size(); ++i) (b.y(i) > 0 ? pos : neg).push_back(i);
    int keep_pos = keep / 2;
    if (keep % 2 == 1 && rng.below(2) == 1) ++keep_pos;
    keep_pos = std::min<int>(keep_pos, static_cast<int>(pos.size()));
    int keep_neg = keep - keep_pos;
    if (keep_neg > static_cast<int>(neg.size())) {
        keep_neg = static_cast<int>(neg.size());
        keep_pos = keep - keep_neg;
    }
    rng.shuffle(pos);
    rng.shuffle(neg);
    Vector masked = Vector::Zero(b.y.size());
    for (int i = 0; i < keep_pos; ++i) masked(pos[static_cast<std::size_t>(i)]) = 1.0;
    for (int i = 0; i < keep_neg; ++i) masked(neg[static_cast<std::size_t>(i)]) = -1.0;
    b.y = masked;
}

}  // namespace

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % bound;
}

long Rng::uniform_int(long lo, long hi) {
    if (hi < lo) throw std::invalid_argument("Rng::uniform_int: empty range");
    return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::normal() {
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void StreamConfig::validate() const {
    if (time_points < 1) throw std::invalid_argument("stream: time_points must be positive");
    if (n_min < 2 || n_max < n_min) throw std::invalid_argument("stream: invalid batch size range");
    if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) {
        throw std::invalid_argument("stream: labeled_fraction must lie in (0, 1]");
    }
    if (test_size < 1) throw std::invalid_argument("stream: test_size must be positive");
}

Batch categorical_batch(Rng& rng, int n, const CategoricalParams& params) {
    Batch b;
    b.y = to_vector(balanced_labels(rng, n));
    const int p = params.features();
    b.X.resize(n, p);
    for (int i = 0; i < n; ++i) {
        int j = 0;
        for (int k = 0; k < params.sparse_features; ++k) b.X(i, j++) = draw_category(rng, params.sparse);
        for (int k = 0; k < params.dense_features; ++k) b.X(i, j++) = draw_category(rng, params.dense);
        const auto& signal = b.y(i) > 0 ? params.signal_positive : params.signal_negative;
        for (int k = 0; k < params.signal_features; ++k) b.X(i, j++) = draw_category(rng, signal);
    }
    return b;
}

Stream gen_categorical(const StreamConfig& config, const CategoricalParams& params) {
    config.validate();
    Stream s;
    for (int t = 1; t <= config.time_points; ++t) {
        Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(t)));
        Batch b = categorical_batch(rng, draw_size(rng, config), params);
        b.t = t;
        if (config.labeled_fraction < 1.0) mask_labels(rng, b, config.labeled_fraction);
        s.batches.push_back(std::move(b));
    }
    Rng rng(mix_seed(config.seed, 0));
    s.test = categorical_batch(rng, config.test_size, params);
    return s;
}

Stream gen_sphere(const StreamConfig& config, const SphereParams& params) {
    config.validate();
    Stream s;
    for (int t = 1; t <= config.time_points; ++t) {
        Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(t)));
        Batch b = sphere_batch(rng, draw_size(rng, config), params);
        b.t = t;
        mask_labels(rng, b, config.labeled_fraction);
        s.batches.push_back(std::move(b));
    }
    Rng rng(mix_seed(config.seed, 0));
    s.test = sphere_batch(rng, config.test_size, params);
    return s;
}

namespace {

struct IsoletRows {
    Matrix X;
    std::vector<int> classes;
};

IsoletRows read_isolet(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("isolet: cannot open " + path.string());
    constexpr int kFeatures = 617;
    std::vector<double> values;
    std::vector<int> classes;
    std::string line;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<double> fields = parse_numeric_fields(line, path.string(), row);
        if (fields.size() != kFeatures + 1) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) + " has " +
                                     std::to_string(fields.size()) + " columns, expected 618");
        }
        const double cls = fields.back();
        if (cls != std::floor(cls) || cls < 1 || cls > 26) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) +
                                     " has class id outside 1..26");
        }
        values.insert(values.end(), fields.begin(), fields.end() - 1);
        classes.push_back(static_cast<int>(cls));
    }
    IsoletRows out;
    out.classes = std::move(classes);
    const auto n = static_cast<Eigen::Index>(out.classes.size());
    out.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), n, kFeatures);
    return out;
}

Vector binary_labels(const std::vector<int>& classes, const std::set<int>& positive) {
    Vector y(static_cast<Eigen::Index>(classes.size()));
    for (std::size_t i = 0; i < classes.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = positive.count(classes[i]) ? 1.0 : -1.0;
    }
    return y;
}

// Speaker start offsets. A run of non-decreasing class ids is one pass over the
// alphabet; a speaker is one pass when letters repeat back to back (1,1,2,2,...)
// and two passes otherwise (1..26,1..26).
std::vector<std::size_t> speaker_starts(const std::vector<int>& classes) {
    std::vector<std::size_t> passes;
    bool adjacent_repeat = false;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (i == 0 || classes[i] < classes[i - 1]) passes.push_back(i);
        else if (classes[i] == classes[i - 1]) adjacent_repeat = true;
    }
    const std::size_t per_speaker = adjacent_repeat ? 1 : 2;
    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k < passes.size(); k += per_speaker) starts.push_back(passes[k]);
    return starts;
}

}  // namespace

Stream load_isolet_stream(const std::filesystem::path& train_path, const std::filesystem::path& test_path,
                          const IsoletOptions& options) {
    if (options.speakers_per_group < 1) throw std::invalid_argument("isolet: speakers_per_group must be positive");
    const IsoletRows train = read_isolet(train_path);
    const IsoletRows test = read_isolet(test_path);
    const Vector y = binary_labels(train.classes, options.positive_classes);

    std::vector<std::size_t> starts = speaker_starts(train.classes);
    starts.push_back(train.classes.size());
    const std::size_t speakers = starts.size() - 1;
    const auto group = static_cast<std::size_t>(options.speakers_per_group);

    Stream s;
    for (std::size_t g = 0; g * group < speakers; ++g) {
        const std::size_t first = starts[g * group];
        const std::size_t labeled_end = starts[g * group + 1];
        const std::size_t end = starts[std::min(speakers, (g + 1) * group)];
        Batch b;
        b.t = static_cast<int>(g + 1);
        const auto rows = static_cast<Eigen::Index>(end - first);
        b.X = train.X.middleRows(static_cast<Eigen::Index>(first), rows);
        b.y = y.segment(static_cast<Eigen::Index>(first), rows);
        for (std::size_t i = labeled_end; i < end; ++i) b.y(static_cast<Eigen::Index>(i - first)) = 0.0;
        s.batches.push_back(std::move(b));
    }
    s.test.X = test.X;
    s.test.y = binary_labels(test.classes, options.positive_classes);
    return s;
}

std::string batch_file_name(int t) {
    char name[32];
    std::snprintf(name, sizeof(name), "batch_%04d.csv", t);
    return name;
}

void write_batch_csv(const std::filesystem::path& path, const Batch& batch) {
    std::ostringstream out;
    for (Eigen::Index j = 0; j < batch.X.cols(); ++j) out << 'f' << j << ',';
    out << "label\n";
    for (Eigen::Index i = 0; i < batch.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < batch.X.cols(); ++j) out << format_double(batch.X(i, j)) << ',';
        out << static_cast<int>(batch.y(i)) << '\n';
    }
    write_file_atomic(path, out.str());
}

Batch read_batch_csv(const std::filesystem::path& path, int t) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error(path.string() + ": missing header");
    const std::size_t columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
    if (columns < 2 || header.rfind("label") == std::string::npos) {
        throw std::runtime_error(path.string() + ": header must be f0,...,f{p-1},label");
    }
    std::vector<double> values;
    std::vector<double> labels;
    std::string line;
    long row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<double> fields = parse_numeric_fields(line, path.string(), row);
        if (fields.size() != columns) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) + " has " +
                                     std::to_string(fields.size()) + " columns, expected " +
                                     std::to_string(columns));
        }
        const double label = fields.back();
        if (label != 1.0 && label != -1.0 && label != 0.0) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) + " has label outside {-1,0,1}");
        }
        values.insert(values.end(), fields.begin(), fields.end() - 1);
        labels.push_back(label);
    }
    Batch b;
    b.t = t;
    const auto n = static_cast<Eigen::Index>(labels.size());
    const auto p = static_cast<Eigen::Index>(columns - 1);
    b.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), n, p);
    b.y = Eigen::Map<const Vector>(labels.data(), n);
    return b;
}

void write_stream(const std::filesystem::path& dir, const Stream& stream) {
    std::filesystem::create_directories(dir);
    for (const auto& b : stream.batches) write_batch_csv(dir / batch_file_name(b.t), b);
    write_batch_csv(dir / "test.csv", stream.test);
}

std::vector<Batch> read_batches(const std::filesystem::path& dir) {
    std::vector<Batch> out;
    for (int t = 1;; ++t) {
        const auto path = dir / batch_file_name(t);
        if (!std::filesystem::exists(path)) break;
        out.push_back(read_batch_csv(path, t));
    }
    if (out.empty()) throw std::runtime_error("no batch_0001.csv found in " + dir.string());
    return out;
}

}  // namespace seqmed
