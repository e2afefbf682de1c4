#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "joininfer/table.hpp"
#include "joininfer/types.hpp"

namespace joininfer {

inline constexpr uint64_t kDefaultExactThreshold = 1'000'000;
inline constexpr int kDefaultSketchPrecision = 14;

struct ColumnStats {
    std::string table;
    std::string column;
    uint64_t count = 0;     ///< non-null rows
    uint64_t distinct = 0;  ///< exact when is_exact, otherwise a sketch estimate
    bool is_exact = true;
    TypeTag type_tag = TypeTag::Text;
    uint64_t rows = 0;      ///< table row count, NULLs included
    uint64_t parse_errors = 0;
};

/// HyperLogLog cardinality sketch with linear counting in the small range.
class HyperLogLog {
public:
    explicit HyperLogLog(int precision = kDefaultSketchPrecision, uint64_t seed = 0);

    void add(const Value& value);
    void add_hash(uint64_t hash) noexcept;
    void merge(const HyperLogLog& other);
    uint64_t estimate() const;

    int precision() const noexcept { return precision_; }
    uint64_t seed() const noexcept { return seed_; }

private:
    int precision_;
    uint64_t seed_;
    std::vector<uint8_t> registers_;
};

/// Sketch estimate over a value stream. Precision must lie in [4, 18].
uint64_t approx_distinct(std::span<const Value> values, int precision = kDefaultSketchPrecision,
                         uint64_t seed = 0);

/// Non-null count plus a distinct count that is exact below `exact_threshold`
/// non-null values and a sketch estimate at or above it.
ColumnStats profile_column(const Column& column, uint64_t exact_threshold = kDefaultExactThreshold,
                           int precision = kDefaultSketchPrecision);

/// Uniform reservoir sample (Algorithm L) of row positions from a stream of
/// `stream_length` items: exactly min(size, stream_length) positions, fully
/// determined by `seed`.
std::vector<size_t> reservoir_positions(size_t stream_length, size_t size, uint64_t seed);

/// Raw sample: row positions drawn from one column, NULLs included.
struct RawSample {
    const Column* column = nullptr;
    std::vector<size_t> rows;
    size_t requested_size = 0;
    uint64_t seed = 0;
};

RawSample draw_sample(const Column& column, size_t size, uint64_t seed);

/// Values kept after cleaning. Numeric-like values live in `numbers`, text in
/// `texts`; only one of the two is populated.
struct CleanedSample {
    std::string table;
    std::string column;
    TypeTag type_tag = TypeTag::Text;
    std::vector<double> numbers;
    std::vector<std::string> texts;
    size_t requested_size = 0;
    uint64_t seed = 0;

    size_t size() const noexcept { return type_tag == TypeTag::Text ? texts.size() : numbers.size(); }
    bool empty() const noexcept { return size() == 0; }
    size_t distinct_count() const;
    std::vector<Value> values() const;
};

struct CleaningConfig {
    /// Tukey fence coefficient on numeric values: keep [Q1 - k*IQR, Q3 + k*IQR].
    double numeric_fence = 1.5;
    /// Fence coefficient on string lengths; 0 keeps lengths within [Q1, Q3].
    double length_fence = 0.0;
};

/// Linear-interpolation quantile of an ascending sequence, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

CleanedSample clean_sample(const RawSample& raw, TypeTag type_tag, const CleaningConfig& config = {});

/// Cleans an explicit list of optional values (NULL = nullopt).
CleanedSample clean_values(std::span<const std::optional<Value>> raw, TypeTag type_tag,
                           const CleaningConfig& config = {});

/// On-disk cache of column statistics keyed by (table, column, content hash).
class StatsCache {
public:
    explicit StatsCache(std::filesystem::path path);

    std::optional<ColumnStats> lookup(const std::string& table, const std::string& column,
                                      const std::string& content_key) const;
    void store(const ColumnStats& stats, const std::string& content_key);
    void save() const;
    size_t size() const noexcept { return entries_.size(); }

private:
    std::filesystem::path path_;
    std::map<std::string, ColumnStats> entries_;
};

}  // namespace joininfer
