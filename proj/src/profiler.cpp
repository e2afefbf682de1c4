#include "joininfer/profiler.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_set>

#include "joininfer/hashing.hpp"
#include "json.hpp"

namespace joininfer {

// --- HyperLogLog ----------------------------------------------------------------

namespace {

// Linear-counting switch-over points per precision (HLL++).
constexpr uint32_t kLinearCountingThreshold[] = {10,    20,    40,    80,     220,    400,   900, 1800,
                                                 3100,  6500,  11500, 20000, 50000, 120000, 350000};

}  // namespace

HyperLogLog::HyperLogLog(int precision, uint64_t seed) : precision_(precision), seed_(seed) {
    if (precision < 4 || precision > 18) {
        throw Error(ErrorKind::BadConfig, "sketch precision must be in [4, 18], got " + std::to_string(precision));
    }
    registers_.assign(size_t{1} << precision, 0);
}

void HyperLogLog::add(const Value& value) { add_hash(hash_value(value, seed_)); }

void HyperLogLog::add_hash(uint64_t hash) noexcept {
    const auto p = static_cast<unsigned>(precision_);
    const size_t index = static_cast<size_t>(hash >> (64 - p));
    const uint64_t rest = (hash << p) | (uint64_t{1} << (p - 1));
    const auto rank = static_cast<uint8_t>(std::countl_zero(rest) + 1);
    if (rank > registers_[index]) registers_[index] = rank;
}

void HyperLogLog::merge(const HyperLogLog& other) {
    if (other.precision_ != precision_ || other.seed_ != seed_) {
        throw std::invalid_argument("cannot merge sketches with different precision or seed");
    }
    for (size_t i = 0; i < registers_.size(); ++i) {
        registers_[i] = std::max(registers_[i], other.registers_[i]);
    }
}

uint64_t HyperLogLog::estimate() const {
    const double m = static_cast<double>(registers_.size());
    double harmonic = 0.0;
    size_t zeros = 0;
    for (uint8_t r : registers_) {
        harmonic += std::ldexp(1.0, -static_cast<int>(r));
        if (r == 0) ++zeros;
    }
    if (zeros > 0) {
        const double linear = m * std::log(m / static_cast<double>(zeros));
        if (linear <= kLinearCountingThreshold[precision_ - 4]) {
            return static_cast<uint64_t>(std::llround(linear));
        }
    }
    const double alpha = 0.7213 / (1.0 + 1.079 / m);
    return static_cast<uint64_t>(std::llround(alpha * m * m / harmonic));
}

uint64_t approx_distinct(std::span<const Value> values, int precision, uint64_t seed) {
    HyperLogLog sketch(precision, seed);
    for (const auto& v : values) sketch.add(v);
    return sketch.estimate();
}

// --- profiling ---------------------------------------------------------------------

ColumnStats profile_column(const Column& column, uint64_t exact_threshold, int precision) {
    ColumnStats stats;
    stats.column = column.name();
    stats.type_tag = column.type();
    stats.rows = column.size();
    stats.parse_errors = column.parse_errors();
    for (size_t i = 0; i < column.size(); ++i) {
        if (!column.is_null(i)) ++stats.count;
    }
    if (stats.count < exact_threshold) {
        std::unordered_set<Value> seen;
        seen.reserve(stats.count);
        for (size_t i = 0; i < column.size(); ++i) {
            if (auto v = column.value(i)) seen.insert(std::move(*v));
        }
        stats.distinct = seen.size();
        stats.is_exact = true;
    } else {
        HyperLogLog sketch(precision);
        for (size_t i = 0; i < column.size(); ++i) {
            if (auto v = column.value(i)) sketch.add(*v);
        }
        stats.distinct = sketch.estimate();
        stats.is_exact = false;
    }
    return stats;
}

// --- sampling --------------------------------------------------------------------------

namespace {

double open_unit(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

size_t bounded(std::mt19937_64& rng, size_t bound) {
    return static_cast<size_t>((static_cast<unsigned __int128>(rng()) * bound) >> 64);
}

}  // namespace

std::vector<size_t> reservoir_positions(size_t stream_length, size_t size, uint64_t seed) {
    if (size == 0) throw Error(ErrorKind::BadConfig, "sample size must be at least 1");
    std::vector<size_t> out;
    if (size >= stream_length) {
        out.resize(stream_length);
        for (size_t i = 0; i < stream_length; ++i) out[i] = i;
        return out;
    }
    std::mt19937_64 rng(seed);
    out.resize(size);
    for (size_t i = 0; i < size; ++i) out[i] = i;
    const double k = static_cast<double>(size);
    double w = std::exp(std::log(open_unit(rng)) / k);
    size_t i = size - 1;
    while (true) {
        const double skip = std::floor(std::log(open_unit(rng)) / std::log1p(-w));
        if (!(skip < static_cast<double>(stream_length))) break;
        i += static_cast<size_t>(skip) + 1;
        if (i >= stream_length) break;
        out[bounded(rng, size)] = i;
        w *= std::exp(std::log(open_unit(rng)) / k);
    }
    std::sort(out.begin(), out.end());
    return out;
}

RawSample draw_sample(const Column& column, size_t size, uint64_t seed) {
    RawSample raw;
    raw.column = &column;
    raw.requested_size = size;
    raw.seed = seed;
    raw.rows = reservoir_positions(column.size(), size, seed);
    return raw;
}

// --- cleaning --------------------------------------------------------------------------

size_t CleanedSample::distinct_count() const {
    if (type_tag == TypeTag::Text) {
        std::unordered_set<std::string_view> seen(texts.begin(), texts.end());
        return seen.size();
    }
    std::vector<double> sorted = numbers;
    std::sort(sorted.begin(), sorted.end());
    return static_cast<size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

std::vector<Value> CleanedSample::values() const {
    std::vector<Value> out;
    out.reserve(size());
    if (type_tag == TypeTag::Text) {
        for (const auto& t : texts) out.emplace_back(t);
    } else {
        for (double d : numbers) out.emplace_back(d);
    }
    return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

namespace {

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

void apply_fences(CleanedSample& out, const CleaningConfig& config) {
    if (out.type_tag == TypeTag::Text) {
        if (out.texts.empty()) return;
        std::vector<double> lengths;
        lengths.reserve(out.texts.size());
        for (const auto& t : out.texts) lengths.push_back(static_cast<double>(t.size()));
        std::sort(lengths.begin(), lengths.end());
        const double q1 = quantile_sorted(lengths, 0.25);
        const double q3 = quantile_sorted(lengths, 0.75);
        const double lo = q1 - config.length_fence * (q3 - q1);
        const double hi = q3 + config.length_fence * (q3 - q1);
        std::erase_if(out.texts, [&](const std::string& t) {
            const auto len = static_cast<double>(t.size());
            return len < lo || len > hi;
        });
    } else if (is_numeric(out.type_tag)) {
        if (out.numbers.empty()) return;
        std::vector<double> sorted = out.numbers;
        std::sort(sorted.begin(), sorted.end());
        const double q1 = quantile_sorted(sorted, 0.25);
        const double q3 = quantile_sorted(sorted, 0.75);
        const double lo = q1 - config.numeric_fence * (q3 - q1);
        const double hi = q3 + config.numeric_fence * (q3 - q1);
        std::erase_if(out.numbers, [&](double v) { return v < lo || v > hi; });
    }
}

template <typename Get>
CleanedSample clean_impl(size_t n, Get&& get, TypeTag type_tag, const CleaningConfig& config) {
    CleanedSample out;
    out.type_tag = type_tag;
    for (size_t i = 0; i < n; ++i) {
        std::optional<Value> v = get(i);
        if (!v) continue;
        if (const auto* text = std::get_if<std::string>(&*v)) {
            if (type_tag != TypeTag::Text || blank(*text)) continue;
            out.texts.push_back(*text);
        } else {
            if (type_tag == TypeTag::Text) continue;
            const double d = std::get<double>(*v);
            if (type_tag == TypeTag::IntegerUnsigned && d < 0) continue;
            out.numbers.push_back(d);
        }
    }
    apply_fences(out, config);
    return out;
}

}  // namespace

CleanedSample clean_sample(const RawSample& raw, TypeTag type_tag, const CleaningConfig& config) {
    if (raw.column == nullptr) throw std::invalid_argument("raw sample has no source column");
    const Column& col = *raw.column;
    CleanedSample out = clean_impl(
        raw.rows.size(), [&](size_t i) { return col.value(raw.rows[i]); }, type_tag, config);
    out.column = col.name();
    out.requested_size = raw.requested_size;
    out.seed = raw.seed;
    return out;
}

CleanedSample clean_values(std::span<const std::optional<Value>> raw, TypeTag type_tag,
                           const CleaningConfig& config) {
    CleanedSample out = clean_impl(raw.size(), [&](size_t i) { return raw[i]; }, type_tag, config);
    out.requested_size = raw.size();
    return out;
}

// --- stats cache -------------------------------------------------------------------------

namespace {

std::string cache_key(const std::string& table, const std::string& column, const std::string& content_key) {
    return table + "|" + column + "|" + content_key;
}

}  // namespace

StatsCache::StatsCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
        for (const auto& [key, e] : doc.at("entries").items()) {
            ColumnStats s;
            s.table = e.at("table").get<std::string>();
            s.column = e.at("column").get<std::string>();
            s.count = e.at("count").get<uint64_t>();
            s.distinct = e.at("distinct").get<uint64_t>();
            s.is_exact = e.at("is_exact").get<bool>();
            s.rows = e.at("rows").get<uint64_t>();
            s.parse_errors = e.value("parse_errors", uint64_t{0});
            s.type_tag = parse_type_tag(e.at("type_tag").get<std::string>()).value_or(TypeTag::Text);
            entries_[key] = s;
        }
    } catch (const nlohmann::json::exception&) {
        entries_.clear();  // unreadable cache is treated as empty
    }
}

std::optional<ColumnStats> StatsCache::lookup(const std::string& table, const std::string& column,
                                              const std::string& content_key) const {
    auto it = entries_.find(cache_key(table, column, content_key));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void StatsCache::store(const ColumnStats& stats, const std::string& content_key) {
    entries_[cache_key(stats.table, stats.column, content_key)] = stats;
}

void StatsCache::save() const {
    nlohmann::json entries = nlohmann::json::object();
    for (const auto& [key, s] : entries_) {
        entries[key] = {{"table", s.table},       {"column", s.column},
                        {"count", s.count},       {"distinct", s.distinct},
                        {"is_exact", s.is_exact}, {"rows", s.rows},
                        {"parse_errors", s.parse_errors},
                        {"type_tag", std::string(to_string(s.type_tag))}};
    }
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    const auto tmp = path_.string() + ".tmp";
    {
        std::ofstream out(tmp);
        out << nlohmann::json{{"version", 1}, {"entries", entries}}.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path_);
}

}  // namespace joininfer
