#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eclf/error.hpp"

namespace eclf {

/// Calendar month. Ordered lexicographically on (year, month).
struct YearMonth {
    int year = 1970;
    int month = 1;

    YearMonth() = default;
    YearMonth(int y, int m);

    /// Parses `YYYY-MM`; throws ParseError otherwise.
    static YearMonth parse(std::string_view text);

    /// Returns the month `n` months later (negative `n` goes backwards).
    YearMonth plus(long n) const;
    YearMonth next() const { return plus(1); }
    YearMonth prev() const { return plus(-1); }

    /// Number of months from `*this` to `other` (negative when `other` is earlier).
    long months_until(const YearMonth& other) const;

    std::string to_string() const;

    friend auto operator<=>(const YearMonth&, const YearMonth&) = default;
    friend bool operator==(const YearMonth&, const YearMonth&) = default;
};

/// Gap-free monthly series: value i belongs to `start().plus(i)`.
class MonthlySeries {
public:
    MonthlySeries(YearMonth start, Eigen::VectorXd values);

    YearMonth start() const { return start_; }
    YearMonth end() const { return start_.plus(size() - 1); }
    Eigen::Index size() const { return values_.size(); }

    const Eigen::VectorXd& values() const { return values_; }
    double operator[](Eigen::Index i) const { return values_[i]; }

    /// Value at a calendar month; RangeError when outside the series.
    double at(const YearMonth& ym) const;
    bool contains(const YearMonth& ym) const { return ym >= start_ && ym <= end(); }
    Eigen::Index index_of(const YearMonth& ym) const;

    friend bool operator==(const MonthlySeries& a, const MonthlySeries& b) {
        return a.start_ == b.start_ && a.values_.size() == b.values_.size() &&
               a.values_ == b.values_;
    }

private:
    YearMonth start_;
    Eigen::VectorXd values_;
};

/// Month-aligned named feature columns, stored row-major by month in a dense
/// matrix (rows = months, cols = features).
class FeatureMatrix {
public:
    FeatureMatrix(YearMonth start, std::vector<std::string> names, Eigen::MatrixXd data);

    YearMonth start() const { return start_; }
    YearMonth end() const { return start_.plus(rows() - 1); }
    Eigen::Index rows() const { return data_.rows(); }
    Eigen::Index cols() const { return data_.cols(); }

    const std::vector<std::string>& names() const { return names_; }
    const Eigen::MatrixXd& data() const { return data_; }

    /// Column index by name; MissingFeatureError when absent.
    Eigen::Index column_index(std::string_view name) const;
    bool has_column(std::string_view name) const;
    Eigen::VectorXd column(std::string_view name) const;

    /// Sub-matrix with the named columns, in the requested order.
    FeatureMatrix select(const std::vector<std::string>& names) const;
    /// Rows covering [from, to] inclusive.
    FeatureMatrix slice(const YearMonth& from, const YearMonth& to) const;
    /// Appends a column; DuplicateError on a name clash.
    FeatureMatrix with_column(const std::string& name, const Eigen::VectorXd& values) const;

    friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
        return a.start_ == b.start_ && a.names_ == b.names_ && a.data_.rows() == b.data_.rows() &&
               a.data_.cols() == b.data_.cols() && a.data_ == b.data_;
    }

private:
    YearMonth start_;
    std::vector<std::string> names_;
    Eigen::MatrixXd data_;
};

struct Dataset {
    MonthlySeries load;
    FeatureMatrix features;
};

/// Minimum number of rows accepted by parse_dataset (two seasonal cycles).
inline constexpr Eigen::Index kMinDatasetRows = 24;

/// Parses a `date,load,<features...>` CSV. Rows may arrive in any order;
/// the result is sorted by date and must be gap-free.
Dataset parse_dataset(std::string_view csv_text);

/// Inverse of parse_dataset, using shortest round-trip number formatting.
std::string serialize_dataset(const Dataset& dataset);

/// Copy of `series` restricted to [from, to] inclusive.
MonthlySeries slice(const MonthlySeries& series, const YearMonth& from, const YearMonth& to);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

}  // namespace eclf
