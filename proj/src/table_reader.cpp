#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>

#include "joininfer/catalog.hpp"
#include "joininfer/table.hpp"

namespace joininfer {

// --- Column -----------------------------------------------------------------

std::optional<Value> Column::value(size_t row) const {
    if (null_[row]) return std::nullopt;
    if (stores_text()) return Value{texts_[row]};
    return Value{numbers_[row]};
}

void Column::reserve(size_t rows) {
    null_.reserve(rows);
    if (stores_text()) {
        texts_.reserve(rows);
    } else {
        numbers_.reserve(rows);
    }
}

void Column::push_null() {
    null_.push_back(1);
    if (stores_text()) {
        texts_.emplace_back();
    } else {
        numbers_.push_back(0.0);
    }
}

void Column::push(const Value& value) {
    if (const auto* text = std::get_if<std::string>(&value)) {
        push_text(*text);
    } else {
        push_number(std::get<double>(value));
    }
}

void Column::push_number(double value) {
    if (stores_text()) throw std::logic_error("numeric value pushed into text column " + name_);
    null_.push_back(0);
    numbers_.push_back(value);
}

void Column::push_text(std::string value) {
    if (!stores_text()) throw std::logic_error("text value pushed into non-text column " + name_);
    null_.push_back(0);
    texts_.push_back(std::move(value));
}

const Column* Table::find(std::string_view column) const {
    for (const auto& c : columns) {
        if (iequals(c.name(), column)) return &c;
    }
    return nullptr;
}

Column* Table::find(std::string_view column) {
    for (auto& c : columns) {
        if (iequals(c.name(), column)) return &c;
    }
    return nullptr;
}

bool iequals(std::string_view a, std::string_view b) noexcept {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// --- delimited reader ---------------------------------------------------------

namespace {

/// Line source over plain or gzip-compressed files.
class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path) {
        if (!std::filesystem::exists(path)) {
            throw Error(ErrorKind::NotFound, "data file not found: " + path.string());
        }
        file_ = gzopen(path.c_str(), "rb");
        if (file_ == nullptr) throw Error(ErrorKind::NotFound, "cannot open data file: " + path.string());
        gzbuffer(file_, 1 << 17);
    }
    ~LineReader() {
        if (file_ != nullptr) gzclose(file_);
    }
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    bool next(std::string& line) {
        line.clear();
        char buf[8192];
        bool any = false;
        while (gzgets(file_, buf, sizeof buf) != nullptr) {
            any = true;
            line.append(buf);
            if (!line.empty() && line.back() == '\n') break;
        }
        if (!any) return false;
        while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
        return true;
    }

private:
    gzFile file_ = nullptr;
};

/// Splits one record, honouring double-quoted fields. Returns false when a
/// quoted field is still open at end of line (caller appends the next line).
bool split_record(const std::string& line, char delimiter, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty() && !was_quoted) {
            quoted = true;
            was_quoted = true;
        } else if (c == delimiter) {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else {
            field.push_back(c);
        }
    }
    if (quoted) return false;
    fields.push_back(std::move(field));
    return true;
}

}  // namespace

Table read_table(const TableDecl& decl, std::vector<ReadWarning>* warnings) {
    if (!decl.data_source) {
        throw Error(ErrorKind::InvalidInput, "table '" + decl.name + "' has no data_source");
    }
    const DataSource& src = *decl.data_source;
    LineReader reader(src.path);

    Table table;
    table.name = decl.name;
    for (const auto& c : decl.columns) table.columns.emplace_back(c.name, c.declared_type);

    // Position of each declared column within a record.
    std::vector<size_t> positions(decl.columns.size());
    for (size_t i = 0; i < positions.size(); ++i) positions[i] = i;

    std::string line;
    std::vector<std::string> fields;
    size_t line_no = 0;
    size_t header_width = decl.columns.size();

    auto warn = [&](std::string message) {
        if (warnings != nullptr) warnings->push_back({decl.name, std::move(message)});
    };

    if (src.header) {
        if (!reader.next(line)) return table;
        ++line_no;
        split_record(line, src.delimiter, fields);
        if (fields.size() == decl.columns.size() + 1 && fields.back().empty()) fields.pop_back();
        header_width = fields.size();
        for (size_t i = 0; i < decl.columns.size(); ++i) {
            auto it = std::find_if(fields.begin(), fields.end(),
                                   [&](const std::string& f) { return iequals(f, decl.columns[i].name); });
            if (it == fields.end()) {
                throw Error(ErrorKind::InvalidInput, "table '" + decl.name + "': column '" +
                                                         decl.columns[i].name + "' missing from header of " +
                                                         src.path.string());
            }
            positions[i] = static_cast<size_t>(it - fields.begin());
        }
    }

    size_t reported = 0;
    std::string record;
    while (reader.next(line)) {
        ++line_no;
        record = line;
        while (!split_record(record, src.delimiter, fields)) {
            if (!reader.next(line)) break;
            ++line_no;
            record += '\n';
            record += line;
        }
        if (record.empty()) continue;
        // Tolerate one trailing delimiter (dbgen-style '|' terminated rows).
        if (fields.size() == header_width + 1 && fields.back().empty()) fields.pop_back();
        if (fields.size() != header_width) {
            if (reported++ < 5) {
                warn("line " + std::to_string(line_no) + ": expected " + std::to_string(header_width) +
                     " fields, got " + std::to_string(fields.size()) + "; row skipped");
            }
            continue;
        }
        for (size_t i = 0; i < table.columns.size(); ++i) {
            Column& col = table.columns[i];
            try {
                auto v = parse_value(fields[positions[i]], col.type());
                if (v) {
                    col.push(*v);
                } else {
                    col.push_null();
                }
            } catch (const ParseError& e) {
                col.note_parse_error();
                col.push_null();
                if (reported++ < 5) {
                    warn("line " + std::to_string(line_no) + ", column " + col.name() + ": " + e.what());
                }
            }
        }
    }
    for (const auto& col : table.columns) {
        if (col.parse_errors() > 0) {
            warn("column " + col.name() + ": " + std::to_string(col.parse_errors()) +
                 " unparseable value(s) treated as NULL");
        }
    }
    return table;
}

}  // namespace joininfer
