#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <vector>

#include "seqmed/batch.hpp"

namespace seqmed {

/**
 * Portable random source: std::mt19937_64 (whose output sequence is fixed by the
 * C++ standard) with hand-written conversions, so identical seeds give identical
 * streams on every platform and standard library.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();                         // [0, 1) with 53 random bits
    double uniform(double lo, double hi);
    std::uint64_t below(std::uint64_t bound);  // uniform on [0, bound), rejection sampled
    long uniform_int(long lo, long hi);        // inclusive
    double normal();                           // Box-Muller, no cached second draw

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; derives independent sub-seeds from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

struct StreamConfig {
    std::uint64_t seed = 1;
    int time_points = 10;
    int n_min = 97;
    int n_max = 103;
    double labeled_fraction = 1.0;
    int test_size = 1000;

    void validate() const;
};

struct Stream {
    std::vector<Batch> batches;  // t = 1, 2, ...
    Batch test;                  // fully labeled, t = 0
};

/// Probabilities of the values {0, 1, 2} for each feature block.
struct CategoricalParams {
    int sparse_features = 100;
    int dense_features = 50;
    int signal_features = 50;
    std::array<double, 3> sparse{0.90, 0.05, 0.05};
    std::array<double, 3> dense{0.60, 0.20, 0.20};
    std::array<double, 3> signal_positive{0.55, 0.35, 0.10};
    std::array<double, 3> signal_negative{0.55, 0.10, 0.35};

    int features() const { return sparse_features + dense_features + signal_features; }
};

struct SphereParams {
    double inner_max = 0.45;  // class -1 radius ~ U[0, inner_max]
    double outer_min = 0.55;  // class +1 radius ~ U[outer_min, outer_max]
    double outer_max = 1.0;
};

/// Fully labeled categorical count data; only the last block separates the classes.
Stream gen_categorical(const StreamConfig& config, const CategoricalParams& params = {});

/// Points in the unit ball, class -1 near the center and +1 on the shell; partially labeled.
Stream gen_sphere(const StreamConfig& config, const SphereParams& params = {});

/// Builds one class-balanced batch of categorical data; exposed for tests.
Batch categorical_batch(Rng& rng, int n, const CategoricalParams& params);

struct IsoletOptions {
    std::set<int> positive_classes{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
    int speakers_per_group = 5;
};

/**
 * Streams UCI Isolet files (617 features and a class id 1..26 per row).
 * Speakers are recovered from the class-id sequence in file order; every group of
 * consecutive speakers becomes one batch in which only the first speaker keeps labels.
 */
Stream load_isolet_stream(const std::filesystem::path& train_path, const std::filesystem::path& test_path,
                          const IsoletOptions& options = {});

/// Header f0..f{p-1},label; labels -1, 0 (unlabeled) or 1.
void write_batch_csv(const std::filesystem::path& path, const Batch& batch);
Batch read_batch_csv(const std::filesystem::path& path, int t = 0);

/// batch_0001.csv, batch_0002.csv, ... plus test.csv.
void write_stream(const std::filesystem::path& dir, const Stream& stream);
std::vector<Batch> read_batches(const std::filesystem::path& dir);

std::string batch_file_name(int t);

}  // namespace seqmed
