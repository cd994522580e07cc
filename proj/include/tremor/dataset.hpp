#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tremor/errors.hpp"
#include "tremor/matrix.hpp"
#include "tremor/random.hpp"

namespace tremor {

enum class Group { PD, RBD, HC };

inline const char* group_name(Group g) {
    switch (g) {
        case Group::PD: return "PD";
        case Group::RBD: return "RBD";
        case Group::HC: return "HC";
    }
    return "?";
}

inline Group group_from_name(const std::string& s) {
    if (s == "PD") return Group::PD;
    if (s == "RBD") return Group::RBD;
    if (s == "HC") return Group::HC;
    throw DataError("unrecognized group label: '" + s + "'");
}

enum class ColumnKind { Numeric, Categorical };

struct SchemaColumn {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;

    bool operator==(const SchemaColumn&) const = default;
};

// Column manifest for a dataset CSV: every column in file order, plus the
// name of the group-label column.
struct Schema {
    std::vector<SchemaColumn> features; // feature columns, CSV order, group excluded
    std::string group_column;
    std::size_t group_position = 0; // index of the group column in the CSV header
    std::vector<std::string> csv_header; // all column names, CSV order
};

inline Schema schema_from_json(const nlohmann::json& j) {
    Schema s;
    s.group_column = j.at("group_column").get<std::string>();
    bool group_seen = false;
    std::size_t position = 0;
    for (const auto& col : j.at("columns")) {
        const std::string name = col.at("name").get<std::string>();
        const std::string kind = col.at("kind").get<std::string>();
        s.csv_header.push_back(name);
        if (name == s.group_column) {
            if (group_seen) {
                throw ConfigError("schema: group column listed twice: " + name);
            }
            if (kind != "group") {
                throw ConfigError("schema: group column '" + name + "' must have kind \"group\"");
            }
            s.group_position = position;
            group_seen = true;
        } else if (kind == "numeric") {
            s.features.push_back({name, ColumnKind::Numeric});
        } else if (kind == "categorical") {
            s.features.push_back({name, ColumnKind::Categorical});
        } else {
            throw ConfigError("schema: column '" + name + "' has unknown kind '" + kind + "'");
        }
        ++position;
    }
    if (!group_seen) {
        throw ConfigError("schema: group column '" + s.group_column + "' not listed in columns");
    }
    return s;
}

inline nlohmann::json schema_to_json(const Schema& s) {
    nlohmann::json cols = nlohmann::json::array();
    std::size_t feature_idx = 0;
    for (std::size_t i = 0; i < s.csv_header.size(); ++i) {
        if (i == s.group_position) {
            cols.push_back({{"name", s.group_column}, {"kind", "group"}});
        } else {
            const auto& f = s.features[feature_idx++];
            cols.push_back({{"name", f.name},
                            {"kind", f.kind == ColumnKind::Numeric ? "numeric" : "categorical"}});
        }
    }
    return {{"group_column", s.group_column}, {"columns", cols}};
}

inline Schema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("schema file not found: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("schema file " + path + " is not valid JSON: " + e.what());
    }
    try {
        return schema_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("schema file " + path + ": " + e.what());
    }
}

// One table cell: a number, a raw category string, or an explicit missing value.
struct Cell {
    enum class Kind { Missing, Number, Text };

    Kind kind = Kind::Missing;
    double number = 0.0;
    std::string text;

    static Cell missing() { return {}; }
    static Cell of(double v) { return {Kind::Number, v, {}}; }
    static Cell of(std::string s) { return {Kind::Text, 0.0, std::move(s)}; }

    bool is_missing() const { return kind == Kind::Missing; }
    bool is_number() const { return kind == Kind::Number; }
    bool is_text() const { return kind == Kind::Text; }

    bool operator==(const Cell&) const = default;
};

struct FeatureRow {
    std::vector<Cell> cells;
    Group group = Group::HC;

    bool operator==(const FeatureRow&) const = default;
};

// Named-column table holding the raw and the encoded dataset.
struct FeatureTable {
    std::vector<SchemaColumn> columns;
    std::vector<FeatureRow> rows;
    std::string group_column = "Group";
    std::size_t group_position = 0;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_features() const { return columns.size(); }

    std::map<Group, std::size_t> group_counts() const {
        std::map<Group, std::size_t> counts;
        for (const auto& r : rows) {
            counts[r.group]++;
        }
        return counts;
    }

    bool operator==(const FeatureTable&) const = default;
};

namespace csv {

// Minimal RFC 4180 reader: quoted fields, doubled-quote escapes, \r\n tolerant.
inline std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) {
        throw DataError("csv line " + std::to_string(line_no) + ": unterminated quote");
    }
    fields.push_back(std::move(field));
    return fields;
}

inline std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Shortest representation that round-trips the double exactly.
inline std::string format_number(double v) {
    std::array<char, 40> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline double parse_number(const std::string& raw, std::size_t row, const std::string& column) {
    const std::string s = trim(raw);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw DataError("row " + std::to_string(row) + ", column '" + column +
                        "': non-numeric cell '" + raw + "'");
    }
    return v;
}

} // namespace csv

inline FeatureTable load_csv(const std::string& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("dataset file not found: " + path);
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("dataset file is empty (no header): " + path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = csv::split_record(line, 1);
    if (header.size() != schema.csv_header.size()) {
        throw DataError("header has " + std::to_string(header.size()) + " columns, schema lists " +
                        std::to_string(schema.csv_header.size()));
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (csv::trim(header[i]) != schema.csv_header[i]) {
            throw DataError("header mismatch at column " + std::to_string(i) + ": expected '" +
                            schema.csv_header[i] + "', found '" + csv::trim(header[i]) + "'");
        }
    }

    FeatureTable table;
    table.columns = schema.features;
    table.group_column = schema.group_column;
    table.group_position = schema.group_position;

    std::size_t line_no = 1;
    std::size_t row_idx = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue; // trailing blank line
        }
        const auto fields = csv::split_record(line, line_no);
        if (fields.size() != schema.csv_header.size()) {
            throw DataError("row " + std::to_string(row_idx) + " has " +
                            std::to_string(fields.size()) + " cells, expected " +
                            std::to_string(schema.csv_header.size()));
        }
        FeatureRow row;
        row.cells.reserve(schema.features.size());
        std::size_t feature_idx = 0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == schema.group_position) {
                row.group = group_from_name(csv::trim(fields[i]));
                continue;
            }
            const auto& col = schema.features[feature_idx++];
            const std::string value = csv::trim(fields[i]);
            if (value.empty()) {
                row.cells.push_back(Cell::missing());
            } else if (col.kind == ColumnKind::Numeric) {
                row.cells.push_back(Cell::of(csv::parse_number(value, row_idx, col.name)));
            } else {
                row.cells.push_back(Cell::of(value));
            }
        }
        table.rows.push_back(std::move(row));
        ++row_idx;
    }
    return table;
}

inline void save_csv(const FeatureTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write dataset file: " + path);
    }
    const std::size_t width = table.n_features() + 1;
    for (std::size_t i = 0; i < width; ++i) {
        if (i > 0) {
            out << ',';
        }
        if (i == table.group_position) {
            out << csv::quote_field(table.group_column);
        } else {
            const std::size_t f = i < table.group_position ? i : i - 1;
            out << csv::quote_field(table.columns[f].name);
        }
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < width; ++i) {
            if (i > 0) {
                out << ',';
            }
            if (i == table.group_position) {
                out << group_name(row.group);
                continue;
            }
            const std::size_t f = i < table.group_position ? i : i - 1;
            const Cell& cell = row.cells[f];
            switch (cell.kind) {
                case Cell::Kind::Missing: break;
                case Cell::Kind::Number: out << csv::format_number(cell.number); break;
                case Cell::Kind::Text: out << csv::quote_field(cell.text); break;
            }
        }
        out << '\n';
    }
    if (!out) {
        throw DataError("write failed: " + path);
    }
}

namespace detail {

inline bool iequals(const std::string& a, const char* b) {
    std::size_t i = 0;
    for (; i < a.size() && b[i] != '\0'; ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return i == a.size() && b[i] == '\0';
}

} // namespace detail

// Gender maps Female/Male to 1/0, the yes-no columns map Yes/No to 1/0.
// Cells already holding 0 or 1 pass through, so encoding is idempotent.
inline FeatureTable encode_categoricals(const FeatureTable& table) {
    FeatureTable out = table;
    for (std::size_t j = 0; j < out.columns.size(); ++j) {
        if (out.columns[j].kind != ColumnKind::Categorical) {
            continue;
        }
        const bool is_gender = detail::iequals(out.columns[j].name, "gender");
        for (std::size_t i = 0; i < out.rows.size(); ++i) {
            Cell& cell = out.rows[i].cells[j];
            if (cell.is_missing()) {
                continue;
            }
            if (cell.is_number()) {
                if (cell.number == 0.0 || cell.number == 1.0) {
                    continue; // already encoded
                }
                throw DataError("column '" + out.columns[j].name + "', row " + std::to_string(i) +
                                ": unrecognized category value '" +
                                csv::format_number(cell.number) + "'");
            }
            const std::string& v = cell.text;
            double encoded;
            if (is_gender ? detail::iequals(v, "female") : detail::iequals(v, "yes")) {
                encoded = 1.0;
            } else if (is_gender ? detail::iequals(v, "male") : detail::iequals(v, "no")) {
                encoded = 0.0;
            } else {
                throw DataError("column '" + out.columns[j].name + "', row " + std::to_string(i) +
                                ": unrecognized category value '" + v + "'");
            }
            cell = Cell::of(encoded);
        }
    }
    return out;
}

// Feature matrix with binary labels; the unit flowing through split,
// preprocessing and training. PD is always the positive class.
struct LabeledDataset {
    Matrix X;
    std::vector<int> y;
    std::string positive_class_name = "PD";
    std::string negative_class_name;
    std::vector<std::string> feature_names;

    std::size_t n() const { return X.rows(); }
    std::size_t p() const { return X.cols(); }

    std::size_t count(int label) const {
        return static_cast<std::size_t>(std::count(y.begin(), y.end(), label));
    }

    bool operator==(const LabeledDataset&) const = default;
};

namespace detail {

inline LabeledDataset build_subset(const FeatureTable& table, Group positive, Group negative,
                                   const std::string& subset_name) {
    std::vector<std::size_t> row_idx;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].group == positive || table.rows[i].group == negative) {
            row_idx.push_back(i);
        }
    }

    // Keep only columns fully observed within the subset's rows.
    std::vector<std::size_t> col_idx;
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        bool complete = true;
        for (std::size_t i : row_idx) {
            const Cell& cell = table.rows[i].cells[j];
            if (cell.is_text()) {
                throw DataError("derive_subsets: table is not encoded (text cell in column '" +
                                table.columns[j].name + "')");
            }
            if (cell.is_missing()) {
                complete = false;
                break;
            }
        }
        if (complete) {
            col_idx.push_back(j);
        }
    }
    if (col_idx.empty()) {
        throw DataError(subset_name + ": no feature column is fully observed");
    }

    LabeledDataset ds;
    ds.negative_class_name = group_name(negative);
    for (std::size_t j : col_idx) {
        ds.feature_names.push_back(table.columns[j].name);
    }
    ds.X = Matrix(row_idx.size(), col_idx.size());
    ds.y.reserve(row_idx.size());
    for (std::size_t r = 0; r < row_idx.size(); ++r) {
        const auto& row = table.rows[row_idx[r]];
        for (std::size_t c = 0; c < col_idx.size(); ++c) {
            ds.X.at(r, c) = row.cells[col_idx[c]].number;
        }
        ds.y.push_back(row.group == positive ? 1 : 0);
    }

    const std::size_t n_pos = ds.count(1);
    if (n_pos == 0 || n_pos == ds.n()) {
        throw DataError(subset_name + ": subset is missing one of its two classes");
    }
    return ds;
}

} // namespace detail

// PDRBD keeps every feature (and requires them fully observed); PDHC drops
// any column with a missing cell among PD and HC rows, which removes the
// motor-examination block and the HC-unavailable clinical fields.
inline std::pair<LabeledDataset, LabeledDataset> derive_subsets(const FeatureTable& table) {
    LabeledDataset pdrbd = detail::build_subset(table, Group::PD, Group::RBD, "PDRBD");
    if (pdrbd.p() != table.n_features()) {
        throw DataError("PDRBD: expected all " + std::to_string(table.n_features()) +
                        " features observed, found a column with missing PD/RBD cells");
    }
    LabeledDataset pdhc = detail::build_subset(table, Group::PD, Group::HC, "PDHC");
    return {std::move(pdrbd), std::move(pdhc)};
}

struct SplitPair {
    LabeledDataset train;
    LabeledDataset test;
    std::uint64_t seed = 0;
    double test_fraction = 0.0;
};

namespace detail {

inline LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& idx) {
    LabeledDataset out;
    out.positive_class_name = ds.positive_class_name;
    out.negative_class_name = ds.negative_class_name;
    out.feature_names = ds.feature_names;
    out.X = ds.X.select_rows(idx);
    out.y.reserve(idx.size());
    for (std::size_t i : idx) {
        out.y.push_back(ds.y[i]);
    }
    return out;
}

} // namespace detail

// Stratified split. Per-class test counts come from largest-remainder rounding
// of test_fraction * class_size; remainder ties go to the first-listed class
// (positive first). Rows are shuffled within class before allocation, so the
// draw is deterministic in (ds, test_fraction, seed).
inline SplitPair stratified_split(const LabeledDataset& ds, double test_fraction,
                                  std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("stratified_split: test_fraction must be in (0,1)");
    }
    std::vector<std::size_t> pos_rows;
    std::vector<std::size_t> neg_rows;
    for (std::size_t i = 0; i < ds.y.size(); ++i) {
        (ds.y[i] == 1 ? pos_rows : neg_rows).push_back(i);
    }
    if (pos_rows.size() < 2 || neg_rows.size() < 2) {
        throw DataError("stratified_split: each class needs at least 2 rows");
    }

    Rng rng(derive_seed(seed, stream::kSplit));
    rng.shuffle(pos_rows);
    rng.shuffle(neg_rows);

    // Largest-remainder allocation over the two classes, positive listed first.
    const std::array<std::vector<std::size_t>*, 2> classes = {&pos_rows, &neg_rows};
    std::array<double, 2> quota{};
    std::array<std::size_t, 2> take{};
    double quota_sum = 0.0;
    for (int c = 0; c < 2; ++c) {
        quota[c] = test_fraction * static_cast<double>(classes[c]->size());
        take[c] = static_cast<std::size_t>(std::floor(quota[c]));
        quota_sum += quota[c];
    }
    std::size_t total = static_cast<std::size_t>(std::floor(quota_sum + 0.5));
    std::size_t assigned = take[0] + take[1];
    while (assigned < total) {
        const double rem0 = quota[0] - static_cast<double>(take[0]);
        const double rem1 = quota[1] - static_cast<double>(take[1]);
        take[rem1 > rem0 ? 1 : 0]++; // tie goes to the first-listed class
        ++assigned;
    }

    for (int c = 0; c < 2; ++c) {
        const std::size_t n_c = classes[c]->size();
        if (take[c] == 0 || take[c] >= n_c) {
            throw DataError(std::string("stratified_split: class '") +
                            (c == 0 ? ds.positive_class_name : ds.negative_class_name) +
                            "' would get " + std::to_string(take[c]) + " test rows of " +
                            std::to_string(n_c));
        }
    }

    std::vector<std::size_t> test_idx;
    std::vector<std::size_t> train_idx;
    for (int c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < classes[c]->size(); ++i) {
            (i < take[c] ? test_idx : train_idx).push_back((*classes[c])[i]);
        }
    }
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    SplitPair split;
    split.seed = seed;
    split.test_fraction = test_fraction;
    split.train = detail::take_rows(ds, train_idx);
    split.test = detail::take_rows(ds, test_idx);
    return split;
}

} // namespace tremor
