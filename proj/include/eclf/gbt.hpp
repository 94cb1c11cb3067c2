#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "eclf/series.hpp"

namespace eclf {

/// Boosting hyperparameters. The regulariser is
/// gamma * (#leaves) + lambda / 2 * ||leaf weights||^2.
struct GbtConfig {
    int n_estimators = 300;
    int max_depth = 2;
    double learning_rate = 0.11;
    double lambda = 1.0;
    double gamma = 0.0;
    double min_child_weight = 1.0;

    void validate() const;
};

/// Node of a regression tree stored in a flat array. Leaves have feature == -1.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;  ///< rows with x[feature] < threshold go left
    int left = -1;
    int right = -1;
    double weight = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root

    /// Index of the leaf reached by `row`.
    int leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
        return nodes[static_cast<std::size_t>(leaf_index(row))].weight;
    }
    int depth() const;
    int leaf_count() const;
};

struct GbtEnsemble {
    double base_score = 0.0;
    double learning_rate = 1.0;
    std::vector<std::string> feature_names;
    std::vector<RegressionTree> trees;
    /// Training RMSE after 0, 1, ..., K rounds (fit diagnostics only).
    std::vector<double> train_rmse;
    /// Final training predictions as accumulated during fitting.
    Eigen::VectorXd train_predictions;
    GbtConfig config;
};

/// Exact greedy second-order boosting on squared error (g = yhat - y, h = 1).
/// Splits are searched over midpoints of sorted unique values; ties prefer
/// the lowest feature index, then the lowest threshold; non-positive gains
/// are never taken. `seed` is accepted for API stability (no subsampling).
GbtEnsemble fit_gbt(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                    std::vector<std::string> feature_names, const GbtConfig& config,
                    std::uint64_t seed = 0);

GbtEnsemble fit_gbt(const FeatureMatrix& features, const MonthlySeries& targets, const GbtConfig& config,
                    std::uint64_t seed = 0);

/// Prediction for a row given in the model's feature order.
double predict_row(const GbtEnsemble& model, const Eigen::Ref<const Eigen::RowVectorXd>& row);

/// Prediction for a row keyed by feature name; MissingFeatureError when a
/// feature the model needs is absent.
double predict_gbt(const GbtEnsemble& model, const std::map<std::string, double>& row);

/// Predictions for every row of `features` (columns looked up by name).
Eigen::VectorXd predict_gbt(const GbtEnsemble& model, const FeatureMatrix& features);

/// Positional batch prediction (columns in model order).
Eigen::VectorXd predict_matrix(const GbtEnsemble& model, const Eigen::Ref<const Eigen::MatrixXd>& x);

nlohmann::json to_json(const GbtEnsemble& model);
GbtEnsemble gbt_from_json(const nlohmann::json& j);

}  // namespace eclf
