#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "swa/errors.hpp"

namespace swa {

using Index = std::size_t;

/// Regression design: n subjects by p features, a response of length n, and
/// one name per feature.
///
/// Features are addressed by column position. `source_index(j)` maps a column
/// back to its position in the dataset it was derived from (identity unless
/// the dataset is a screened view), so results can report original identities.
class Dataset {
public:
    /// Empty `names` defaults to "V1".."Vp".
    Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, std::vector<std::string> names = {},
            std::vector<Index> source_index = {})
        : x_(std::move(x)), y_(std::move(y)), names_(std::move(names)),
          source_(std::move(source_index)) {
        if (names_.empty()) names_ = default_names(static_cast<Index>(x_.cols()));
        if (source_.empty()) {
            source_.resize(static_cast<std::size_t>(x_.cols()));
            for (Index j = 0; j < source_.size(); ++j) source_[j] = j;
        }
        validate();
    }

    Index n() const { return static_cast<Index>(x_.rows()); }
    Index p() const { return static_cast<Index>(x_.cols()); }
    const Eigen::MatrixXd& x() const { return x_; }
    const Eigen::VectorXd& y() const { return y_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(Index j) const { return names_.at(j); }
    Index source_index(Index j) const { return source_.at(j); }
    const std::vector<Index>& source_indices() const { return source_; }

    /// Column position of a feature name, or p() when absent.
    Index find(std::string_view name) const {
        for (Index j = 0; j < names_.size(); ++j)
            if (names_[j] == name) return j;
        return p();
    }

    /// Sub-design restricted to `columns`, carrying names and source indices along.
    Dataset select_columns(const std::vector<Index>& columns) const {
        Eigen::MatrixXd sub(x_.rows(), static_cast<Eigen::Index>(columns.size()));
        std::vector<std::string> names;
        std::vector<Index> source;
        names.reserve(columns.size());
        source.reserve(columns.size());
        for (Index k = 0; k < columns.size(); ++k) {
            const Index j = columns[k];
            if (j >= p()) throw ConfigError("column index " + std::to_string(j) + " out of range");
            sub.col(static_cast<Eigen::Index>(k)) = x_.col(static_cast<Eigen::Index>(j));
            names.push_back(names_[j]);
            source.push_back(source_[j]);
        }
        return Dataset(std::move(sub), y_, std::move(names), std::move(source));
    }

    static std::vector<std::string> default_names(Index p) {
        std::vector<std::string> names(p);
        for (Index j = 0; j < p; ++j) names[j] = "V" + std::to_string(j + 1);
        return names;
    }

private:
    void validate() const {
        if (x_.rows() != y_.size())
            throw DataError("row-count mismatch: x has " + std::to_string(x_.rows()) + " rows, y has " +
                            std::to_string(y_.size()));
        if (x_.rows() < 2) throw DataError("need at least 2 rows, got " + std::to_string(x_.rows()));
        if (x_.cols() < 1) throw DataError("need at least 1 feature column");
        if (names_.size() != static_cast<std::size_t>(x_.cols()))
            throw DataError("expected " + std::to_string(x_.cols()) + " feature names, got " +
                            std::to_string(names_.size()));
        if (source_.size() != names_.size()) throw DataError("source index length differs from feature count");
        std::unordered_set<std::string_view> seen;
        for (Index j = 0; j < names_.size(); ++j) {
            if (names_[j].empty()) throw DataError("empty feature name at column " + std::to_string(j + 1));
            if (!seen.insert(names_[j]).second) throw DataError("duplicate feature name '" + names_[j] + "'");
        }
        for (Eigen::Index j = 0; j < x_.cols(); ++j)
            for (Eigen::Index i = 0; i < x_.rows(); ++i)
                if (!std::isfinite(x_(i, j)))
                    throw DataError("non-finite value at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
        for (Eigen::Index i = 0; i < y_.size(); ++i)
            if (!std::isfinite(y_(i))) throw DataError("non-finite response at row " + std::to_string(i + 1));
    }

    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    std::vector<std::string> names_;
    std::vector<Index> source_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

/// Parses one numeric cell; rows and columns in messages are 1-based data positions.
inline double parse_cell(std::string_view cell, std::size_t row, std::size_t col, std::string_view file) {
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    const std::string where = std::string(file) + " (" + std::to_string(row) + "," + std::to_string(col) + ")";
    if (cell.empty() || ec != std::errc() || ptr != last) throw DataError("non-numeric cell '" + std::string(cell) + "' at " + where);
    if (!std::isfinite(value)) throw DataError("non-finite cell '" + std::string(cell) + "' at " + where);
    return value;
}

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        lines.push_back(std::move(line));
    }
    return lines;
}

} // namespace detail

/// Reads a design matrix and a single-column response from CSV files.
///
/// With a header, the x file's first row holds feature names and the y file's
/// first row is skipped. Without one, features are named V1..Vp.
inline Dataset load_csv(const std::filesystem::path& x_path, const std::filesystem::path& y_path, bool has_header) {
    const auto x_lines = detail::read_lines(x_path);
    const auto y_lines = detail::read_lines(y_path);
    const std::string xname = x_path.filename().string();
    const std::string yname = y_path.filename().string();

    std::size_t first = 0;
    std::vector<std::string> names;
    if (has_header) {
        if (x_lines.empty()) throw DataError(xname + ": missing header row");
        for (auto cell : detail::split_commas(x_lines[0])) {
            if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
            names.emplace_back(cell);
        }
        first = 1;
    }
    if (x_lines.size() <= first) throw DataError(xname + ": no data rows");

    const std::size_t rows = x_lines.size() - first;
    const std::size_t cols = names.empty() ? detail::split_commas(x_lines[first]).size() : names.size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto cells = detail::split_commas(x_lines[first + r]);
        if (cells.size() != cols)
            throw DataError(xname + ": ragged row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(cols));
        for (std::size_t c = 0; c < cols; ++c)
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = detail::parse_cell(cells[c], r + 1, c + 1, xname);
    }

    const std::size_t yfirst = has_header ? 1 : 0;
    if (y_lines.size() < yfirst) throw DataError(yname + ": missing header row");
    const std::size_t yrows = y_lines.size() - yfirst;
    if (yrows != rows)
        throw DataError("row-count mismatch: " + xname + " has " + std::to_string(rows) + " rows, " + yname + " has " +
                        std::to_string(yrows));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto cells = detail::split_commas(y_lines[yfirst + r]);
        if (cells.size() != 1)
            throw DataError(yname + ": row " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                            " cells, expected 1");
        y(static_cast<Eigen::Index>(r)) = detail::parse_cell(cells[0], r + 1, 1, yname);
    }

    if (names.empty()) names = Dataset::default_names(cols);
    return Dataset(std::move(x), std::move(y), std::move(names));
}

/// CSV text of the design matrix (header row of names, shortest round-trip decimals).
inline std::string design_csv(const Dataset& d) {
    std::ostringstream out;
    for (Index j = 0; j < d.p(); ++j) out << (j ? "," : "") << d.name(j);
    out << '\n';
    for (Index i = 0; i < d.n(); ++i) {
        for (Index j = 0; j < d.p(); ++j)
            out << (j ? "," : "") << detail::format_double(d.x()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out << '\n';
    }
    return out.str();
}

inline std::string response_csv(const Dataset& d, std::string_view header = "y") {
    std::ostringstream out;
    out << header << '\n';
    for (Index i = 0; i < d.n(); ++i) out << detail::format_double(d.y()(static_cast<Eigen::Index>(i))) << '\n';
    return out.str();
}

/// Centers and/or scales every column to unit sample standard deviation (n-1).
/// The response is left untouched.
inline Dataset standardize(const Dataset& d, bool center, bool scale) {
    Eigen::MatrixXd x = d.x();
    const double n = static_cast<double>(d.n());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        auto col = x.col(j);
        const double mean = col.mean();
        if (scale) {
            const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1.0));
            if (!(sd > 0.0)) throw DataError("column '" + d.name(static_cast<Index>(j)) + "' is constant and cannot be scaled");
            if (center)
                col = (col.array() - mean) / sd;
            else
                col /= sd;
        } else if (center) {
            col.array() -= mean;
        }
    }
    return Dataset(std::move(x), d.y(), d.names(), d.source_indices());
}

/// Stable 64-bit FNV-1a digest of the design, response and names, as hex.
inline std::string fingerprint(const Dataset& d) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::uint64_t dims[2] = {d.n(), d.p()};
    feed(dims, sizeof dims);
    feed(d.x().data(), sizeof(double) * static_cast<std::size_t>(d.x().size()));
    feed(d.y().data(), sizeof(double) * static_cast<std::size_t>(d.y().size()));
    for (const auto& name : d.names()) {
        feed(name.data(), name.size());
        feed("\0", 1);
    }
    char buf[17];
    static constexpr char digits[] = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

} // namespace swa
