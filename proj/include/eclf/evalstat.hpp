#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "eclf/series.hpp"

namespace eclf {

/// Models x months grid of MAPE percentages.
struct MapeTable {
    std::vector<std::string> models;
    std::vector<YearMonth> months;
    Eigen::MatrixXd values;  ///< rows = models, cols = months

    Eigen::Index model_index(std::string_view name) const;
};

/// Parses `model,m1,...,mK` rows. Months are labelled consecutively from `first_month`.
MapeTable parse_mape_table(std::string_view csv_text, YearMonth first_month = {2021, 1});

double mae(const Eigen::Ref<const Eigen::VectorXd>& actual, const Eigen::Ref<const Eigen::VectorXd>& forecast);

/// Mean absolute percentage error in percent. DivisionByZeroError on a zero actual.
double mape(const Eigen::Ref<const Eigen::VectorXd>& actual, const Eigen::Ref<const Eigen::VectorXd>& forecast);

struct WinLoss {
    int wins = 0;
    int losses = 0;
    friend bool operator==(const WinLoss&, const WinLoss&) = default;
};

/// Wins are months where the baseline is strictly better; ties are losses.
WinLoss win_loss(const Eigen::Ref<const Eigen::VectorXd>& baseline_mapes,
                 const Eigen::Ref<const Eigen::VectorXd>& reference_mapes);

/// Average ranks (1 = smallest), ties sharing the mean of their positions.
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Mean per-month rank of each model (MAPE ascending, average ranks for ties).
std::map<std::string, double> friedman_rank(const MapeTable& table);

struct WilcoxonResult {
    double statistic = 0.0;  ///< W-, rank sum of negative differences
    int n = 0;               ///< non-zero differences used
    std::uint64_t favourable = 0;  ///< sign assignments with W <= W-
    double p_value = 1.0;
};

/// Exact lower-tail signed-rank test of baseline - reference (n <= 25).
/// Zero differences are dropped; tied |d| take average ranks and the null
/// distribution is built over the realized rank multiset.
WilcoxonResult wilcoxon_signed_rank(const Eigen::Ref<const Eigen::VectorXd>& baseline,
                                    const Eigen::Ref<const Eigen::VectorXd>& reference);

double wilcoxon_one_sided(const Eigen::Ref<const Eigen::VectorXd>& baseline,
                          const Eigen::Ref<const Eigen::VectorXd>& reference);

struct ModelComparison {
    std::string model;
    WinLoss win_loss;
    double p_value = 1.0;
    bool significant = false;
};

struct EvalReport {
    std::string reference;
    double alpha = 0.05;
    std::vector<std::string> models;               ///< table order
    std::map<std::string, double> mean_mape;
    std::map<std::string, double> f_rank;
    std::vector<ModelComparison> comparisons;      ///< one per non-reference model
    WinLoss reference_total;                       ///< aggregate of the reference against all baselines

    const ModelComparison& comparison(std::string_view model) const;
};

EvalReport build_report(const MapeTable& table, const std::string& reference, double alpha);

nlohmann::json to_json(const EvalReport& report);
/// Mirrors the bottom rows of the published tables: Mean-MAPE, Win/Loss, F-rank, P-value.
std::string report_csv(const EvalReport& report);

}  // namespace eclf
