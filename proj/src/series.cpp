#include "eclf/series.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace eclf {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

bool parse_double(std::string_view text, double& out) {
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
    if (!m.allFinite()) {
        throw ParseError(std::string(what) + " contains non-finite values");
    }
}

}  // namespace

YearMonth::YearMonth(int y, int m) : year(y), month(m) {
    if (m < 1 || m > 12) {
        throw RangeError("month out of range: " + std::to_string(m));
    }
}

YearMonth YearMonth::parse(std::string_view text) {
    text = trim(text);
    int y = 0;
    int m = 0;
    if (text.size() != 7 || text[4] != '-') {
        throw ParseError("invalid date '" + std::string(text) + "', expected YYYY-MM");
    }
    const auto r1 = std::from_chars(text.data(), text.data() + 4, y);
    const auto r2 = std::from_chars(text.data() + 5, text.data() + 7, m);
    if (r1.ec != std::errc{} || r1.ptr != text.data() + 4 || r2.ec != std::errc{} ||
        r2.ptr != text.data() + 7 || m < 1 || m > 12) {
        throw ParseError("invalid date '" + std::string(text) + "', expected YYYY-MM");
    }
    return {y, m};
}

YearMonth YearMonth::plus(long n) const {
    const long idx = static_cast<long>(year) * 12 + (month - 1) + n;
    const long y = idx >= 0 ? idx / 12 : -((-idx + 11) / 12);
    const long m = idx - y * 12;
    return {static_cast<int>(y), static_cast<int>(m + 1)};
}

long YearMonth::months_until(const YearMonth& other) const {
    return (static_cast<long>(other.year) - year) * 12 + (other.month - month);
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

MonthlySeries::MonthlySeries(YearMonth start, Eigen::VectorXd values)
    : start_(start), values_(std::move(values)) {
    if (values_.size() == 0) {
        throw InsufficientDataError("monthly series must be nonempty");
    }
    if (!values_.allFinite()) {
        throw ParseError("monthly series contains non-finite values");
    }
}

Eigen::Index MonthlySeries::index_of(const YearMonth& ym) const {
    if (!contains(ym)) {
        throw RangeError(ym.to_string() + " outside series range " + start_.to_string() + ".." +
                         end().to_string());
    }
    return start_.months_until(ym);
}

double MonthlySeries::at(const YearMonth& ym) const { return values_[index_of(ym)]; }

FeatureMatrix::FeatureMatrix(YearMonth start, std::vector<std::string> names, Eigen::MatrixXd data)
    : start_(start), names_(std::move(names)), data_(std::move(data)) {
    if (static_cast<Eigen::Index>(names_.size()) != data_.cols()) {
        throw AlignmentError("feature names do not match column count");
    }
    std::set<std::string> seen;
    for (const auto& n : names_) {
        if (!seen.insert(n).second) throw DuplicateError("duplicate feature column '" + n + "'");
    }
    require_finite(data_, "feature matrix");
}

bool FeatureMatrix::has_column(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

Eigen::Index FeatureMatrix::column_index(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw MissingFeatureError("missing feature '" + std::string(name) + "'");
    return static_cast<Eigen::Index>(it - names_.begin());
}

Eigen::VectorXd FeatureMatrix::column(std::string_view name) const {
    return data_.col(column_index(name));
}

FeatureMatrix FeatureMatrix::select(const std::vector<std::string>& names) const {
    Eigen::MatrixXd out(rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = data_.col(column_index(names[j]));
    }
    return {start_, names, std::move(out)};
}

FeatureMatrix FeatureMatrix::slice(const YearMonth& from, const YearMonth& to) const {
    if (from > to || from < start_ || to > end()) {
        throw RangeError("feature slice " + from.to_string() + ".." + to.to_string() +
                         " outside " + start_.to_string() + ".." + end().to_string());
    }
    const auto first = start_.months_until(from);
    const auto count = from.months_until(to) + 1;
    return {from, names_, data_.middleRows(first, count)};
}

FeatureMatrix FeatureMatrix::with_column(const std::string& name,
                                         const Eigen::VectorXd& values) const {
    if (values.size() != rows()) throw AlignmentError("appended column has wrong length");
    Eigen::MatrixXd out(rows(), cols() + 1);
    out.leftCols(cols()) = data_;
    out.col(cols()) = values;
    auto names = names_;
    names.push_back(name);
    return {start_, std::move(names), std::move(out)};
}

Dataset parse_dataset(std::string_view csv_text) {
    std::vector<std::string_view> lines;
    {
        std::size_t pos = 0;
        while (pos <= csv_text.size()) {
            auto nl = csv_text.find('\n', pos);
            if (nl == std::string_view::npos) nl = csv_text.size();
            auto line = trim(csv_text.substr(pos, nl - pos));
            if (!line.empty()) lines.push_back(line);
            pos = nl + 1;
        }
    }
    if (lines.empty()) throw ParseError("empty dataset");
    if (lines.front().substr(0, 3) == "\xEF\xBB\xBF") lines.front().remove_prefix(3);

    const auto header = split_fields(lines.front());
    if (header.size() < 3 || header[0] != "date" || header[1] != "load") {
        throw ParseError("header must be 'date,load,<feature...>' with at least one feature");
    }
    std::vector<std::string> names(header.begin() + 2, header.end());
    const auto n_feat = static_cast<Eigen::Index>(names.size());

    struct Row {
        YearMonth date;
        double load;
        std::vector<double> features;
    };
    std::vector<Row> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = split_fields(lines[r]);
        if (fields.size() != header.size()) {
            throw ParseError("row " + std::to_string(r) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        Row row{YearMonth::parse(fields[0]), 0.0, std::vector<double>(names.size())};
        for (std::size_t c = 1; c < fields.size(); ++c) {
            double v = 0.0;
            if (!parse_double(fields[c], v)) {
                throw ParseError("row " + std::to_string(r) + ", column '" +
                                 std::string(header[c]) + "': non-numeric value '" +
                                 std::string(fields[c]) + "'");
            }
            (c == 1 ? row.load : row.features[c - 2]) = v;
        }
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date == rows[i - 1].date) {
            throw DuplicateError("duplicate month " + rows[i].date.to_string());
        }
        if (rows[i].date != rows[i - 1].date.next()) {
            throw GapError("missing month " + rows[i - 1].date.next().to_string());
        }
    }
    if (static_cast<Eigen::Index>(rows.size()) < kMinDatasetRows) {
        throw InsufficientDataError("dataset has " + std::to_string(rows.size()) +
                                    " rows; at least " + std::to_string(kMinDatasetRows) +
                                    " required");
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd load(n);
    Eigen::MatrixXd feats(n, n_feat);
    for (Eigen::Index i = 0; i < n; ++i) {
        load[i] = rows[i].load;
        for (Eigen::Index j = 0; j < n_feat; ++j) feats(i, j) = rows[i].features[j];
    }
    const auto start = rows.front().date;
    return {MonthlySeries(start, std::move(load)),
            FeatureMatrix(start, std::move(names), std::move(feats))};
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error("FormatError", "number formatting failed");
    std::string s(buf, ptr);
    if (s == "-0") s = "0";
    return s;
}

std::string serialize_dataset(const Dataset& dataset) {
    const auto& load = dataset.load;
    const auto& feats = dataset.features;
    if (load.start() != feats.start() || load.size() != feats.rows()) {
        throw AlignmentError("load and features are not aligned");
    }
    std::string out = "date,load";
    for (const auto& n : feats.names()) out += "," + n;
    out += "\n";
    for (Eigen::Index i = 0; i < load.size(); ++i) {
        out += load.start().plus(i).to_string();
        out += "," + format_number(load[i]);
        for (Eigen::Index j = 0; j < feats.cols(); ++j) out += "," + format_number(feats.data()(i, j));
        out += "\n";
    }
    return out;
}

MonthlySeries slice(const MonthlySeries& series, const YearMonth& from, const YearMonth& to) {
    if (from > to || !series.contains(from) || !series.contains(to)) {
        throw RangeError("slice " + from.to_string() + ".." + to.to_string() + " outside " +
                         series.start().to_string() + ".." + series.end().to_string());
    }
    const auto first = series.start().months_until(from);
    const auto count = from.months_until(to) + 1;
    return {from, series.values().segment(first, count)};
}

}  // namespace eclf
