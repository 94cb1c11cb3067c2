#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "eclf/featsel.hpp"
#include "eclf/gbt.hpp"
#include "eclf/lstm.hpp"
#include "eclf/series.hpp"
#include "eclf/stl.hpp"

namespace eclf {

/// Which components get the recurrent error-correction stage.
enum class Variant { ECLF, ECNeither, ECRC, ECTC };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);
bool corrects(Variant v, Component c);
inline constexpr Variant kAllVariants[] = {Variant::ECLF, Variant::ECNeither, Variant::ECRC, Variant::ECTC};

struct LstmStageConfig {
    int hidden = 50;
    int window = 12;  ///< lookback in months
    AdamConfig adam;
};

struct EclfConfig {
    StlConfig stl;
    double pcc_threshold = 0.3;
    double keep_fraction = 0.5;
    /// Fixed feature lists; when empty the features are selected from the data.
    std::vector<std::string> trend_features;
    std::vector<std::string> random_features;
    LstmStageConfig lstm_trend;
    LstmStageConfig lstm_random;
    GbtConfig gbt_trend;
    GbtConfig gbt_random;
    Variant variant = Variant::ECLF;
    int stack_folds = 4;
    int horizon = 12;
    std::uint64_t seed = 42;
    bool parallel = true;  ///< train the two component stacks concurrently

    void validate() const;
};

/// Feature lists matching the published trend/random selections
/// (month, temperature, off days / temperature, off days).
std::vector<std::string> preset_trend_features();
std::vector<std::string> preset_random_features();

/// splitmix64 mix of a base seed and a tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);
/// Seed used for permutation importance inside run_eclf.
std::uint64_t selection_seed(std::uint64_t base);

/// Recurrent first-stage learner with its standardization statistics.
/// Inputs per month are [component value, selected features...].
struct LstmForecaster {
    LstmParams<double> params;
    Standardizer scaler;  ///< column 0 is the component itself
    int window = 12;
    std::vector<double> epoch_losses;
};

/// Trains on one-step-ahead windows of `component` (rows aligned with `features`).
/// Statistics come from these rows only.
LstmForecaster train_lstm_forecaster(const Eigen::Ref<const Eigen::VectorXd>& component,
                                     const Eigen::Ref<const Eigen::MatrixXd>& features,
                                     const LstmStageConfig& config, std::uint64_t seed);

/// Recursive multi-step forecast: predictions are fed back as lags.
/// `features` must have rows for history + horizon - 1 months.
Eigen::VectorXd recursive_forecast(const LstmForecaster& model, const Eigen::Ref<const Eigen::VectorXd>& history,
                                   const Eigen::Ref<const Eigen::MatrixXd>& features, Eigen::Index horizon);

nlohmann::json to_json(const LstmForecaster& model);
LstmForecaster lstm_forecaster_from_json(const nlohmann::json& j);

/// S_hat(m) = S(m - 12 months).
MonthlySeries seasonal_naive(const MonthlySeries& seasonal, const YearMonth& horizon_start, int horizon);

/// Out-of-sample block of the expanding-window cross-fit.
struct FoldRecord {
    YearMonth train_start;
    YearMonth train_end;     ///< last month whose target the fold's learner saw
    YearMonth predict_from;
    YearMonth predict_to;
};

/// Throws AlignmentError if any fold trained on a month it predicts, or if
/// blocks overlap or are out of order.
void validate_folds(const std::vector<FoldRecord>& folds);

struct StackResult {
    Component component = Component::Trend;
    bool corrected = false;
    MonthlySeries forecast;                   ///< horizon months
    std::vector<std::string> features;        ///< selected exogenous features
    std::vector<FoldRecord> folds;
    /// Stage-1 column over training + horizon months; empty where not produced.
    std::vector<std::optional<double>> stage1;
    YearMonth stage1_start;
    int stage2_rows = 0;
    std::optional<LstmForecaster> lstm;       ///< final learner used on the horizon
    std::vector<double> fold_final_losses;
    GbtEnsemble gbt;
};

/// Error-correction stack for one component. `component` covers the training
/// span; `features` covers training + horizon (same start). `horizon` months
/// follow the component's last month.
StackResult error_correction_stack(const MonthlySeries& component, const FeatureMatrix& features,
                                   const std::vector<std::string>& selected, const EclfConfig& cfg,
                                   Component which, int horizon);

struct ForecastBundle {
    MonthlySeries s_hat;
    MonthlySeries t_hat;
    MonthlySeries r_hat;
    MonthlySeries y_hat;
    Decomposition decomposition;  ///< of the training span
    std::optional<FeatureSelection> trend_selection;
    std::optional<FeatureSelection> random_selection;
    StackResult trend;
    StackResult random;
    Variant variant = Variant::ECLF;
    YearMonth split;
};

/// Full method: decompose the training span (months before `split`), select
/// component features, seasonal-naive seasonal forecast, error-correction
/// stacks for trend and remainder, additive reconstruction. Only months before
/// `split` of `load` are read.
ForecastBundle run_eclf(const MonthlySeries& load, const FeatureMatrix& features, const EclfConfig& cfg,
                        const YearMonth& split);

nlohmann::json diagnostics_json(const ForecastBundle& bundle);

struct AblationRow {
    Variant variant;
    ForecastBundle bundle;
    double mape = 0.0;
    double mae = 0.0;
};

/// Runs every variant with the same seed and scores each against `load`
/// over the horizon.
std::vector<AblationRow> run_ablation(const MonthlySeries& load, const FeatureMatrix& features,
                                      const EclfConfig& cfg, const YearMonth& split);

/// January of the final year covered by `series`.
YearMonth default_split(const MonthlySeries& series);

}  // namespace eclf
