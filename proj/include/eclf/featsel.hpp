#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "eclf/gbt.hpp"
#include "eclf/series.hpp"

namespace eclf {

enum class Component { Trend, Random };

const char* to_string(Component c);
Component component_from_string(const std::string& s);

struct RankedFeature {
    std::string name;
    double pcc = 0.0;
    std::optional<double> importance;  ///< set for candidates that reached pruning
};

struct FeatureSelection {
    Component component = Component::Trend;
    std::vector<RankedFeature> ranked;  ///< ordered by |pcc| descending
    std::vector<std::string> selected;
};

/// Pearson correlation coefficient. DegenerateInputError for a constant input.
double pcc(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

struct ScreenResult {
    std::vector<std::pair<std::string, double>> kept;  ///< |pcc| >= threshold, |pcc| descending
    /// Set when nothing met the threshold and `kept` holds the top-1 fallback.
    bool fell_back = false;
};

/// Every feature with its pcc against `target`, sorted by |pcc| descending
/// (ties in column order). Constant features score 0.
std::vector<std::pair<std::string, double>> rank_by_pcc(const FeatureMatrix& features,
                                                        const MonthlySeries& target);

ScreenResult screen_by_pcc(const FeatureMatrix& features, const MonthlySeries& target, double threshold);

/// Small ensemble used for permutation importance.
GbtConfig importance_model_config();

/// Permutation importance: mean increase in training MSE over `repeats`
/// shuffles of each column, one RNG stream per (seed, column index).
std::vector<double> permutation_importance(const FeatureMatrix& features, const MonthlySeries& target,
                                           std::uint64_t seed, int repeats = 10);

FeatureSelection prune_by_importance(const FeatureMatrix& features, const MonthlySeries& target,
                                     const std::vector<std::string>& candidates, double keep_fraction,
                                     std::uint64_t seed);

/// Screening followed by pruning, recording every feature in `ranked`.
FeatureSelection select_features(const FeatureMatrix& features, const MonthlySeries& target,
                                 Component component, double threshold, double keep_fraction,
                                 std::uint64_t seed);

nlohmann::json to_json(const FeatureSelection& selection);

}  // namespace eclf
