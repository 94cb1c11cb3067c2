#include "eclf/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace eclf {

void GbtConfig::validate() const {
    if (n_estimators < 0) throw ConfigError("n_estimators must be >= 0");
    if (max_depth < 0) throw ConfigError("max_depth must be >= 0");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate must be in (0, 1]");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (gamma < 0.0) throw ConfigError("gamma must be >= 0");
    if (min_child_weight < 0.0) throw ConfigError("min_child_weight must be >= 0");
}

int RegressionTree::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const auto& nd = nodes[static_cast<std::size_t>(i)];
        i = row[nd.feature] < nd.threshold ? nd.left : nd.right;
    }
    return i;
}

int RegressionTree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& nd = nodes[i];
        if (nd.is_leaf()) continue;
        d[static_cast<std::size_t>(nd.left)] = d[i] + 1;
        d[static_cast<std::size_t>(nd.right)] = d[i] + 1;
        best = std::max(best, d[i] + 1);
    }
    return best;
}

int RegressionTree::leaf_count() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

constexpr double kTieTolerance = 1e-12;

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXd& grad, const GbtConfig& cfg)
        : x_(x), grad_(grad), cfg_(cfg) {}

    RegressionTree build() {
        std::vector<Eigen::Index> rows(static_cast<std::size_t>(x_.rows()));
        std::iota(rows.begin(), rows.end(), Eigen::Index{0});
        tree_.nodes.clear();
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    double leaf_weight(double g, double h) const { return -g / (h + cfg_.lambda); }

    double score(double g, double h) const { return g * g / (h + cfg_.lambda); }

    Split best_split(const std::vector<Eigen::Index>& rows, double g_total, double h_total) const {
        Split best;
        // Gains closer than this are ties and keep the earlier candidate.
        double g_sq = 0.0;
        for (auto r : rows) g_sq += grad_[r] * grad_[r];
        const double tie = kTieTolerance * g_sq;
        std::vector<Eigen::Index> order(rows);
        for (Eigen::Index f = 0; f < x_.cols(); ++f) {
            std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                const double va = x_(a, f);
                const double vb = x_(b, f);
                return va < vb || (va == vb && a < b);
            });
            double gl = 0.0;
            double hl = 0.0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                gl += grad_[order[k]];
                hl += 1.0;
                const double v = x_(order[k], f);
                const double v_next = x_(order[k + 1], f);
                if (!(v < v_next)) continue;
                const double hr = h_total - hl;
                if (hl < cfg_.min_child_weight || hr < cfg_.min_child_weight) continue;
                const double gr = g_total - gl;
                const double gain =
                    0.5 * (score(gl, hl) + score(gr, hr) - score(g_total, h_total)) - cfg_.gamma;
                if (gain > 0.0 && (best.feature < 0 || gain > best.gain + tie)) {
                    best = {static_cast<int>(f), 0.5 * (v + v_next), gain};
                }
            }
        }
        return best;
    }

    int grow(const std::vector<Eigen::Index>& rows, int depth) {
        double g = 0.0;
        for (auto r : rows) g += grad_[r];
        const double h = static_cast<double>(rows.size());

        const auto id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        Split split;
        if (depth < cfg_.max_depth && rows.size() > 1) split = best_split(rows, g, h);
        if (split.feature < 0) {
            tree_.nodes[static_cast<std::size_t>(id)].weight = leaf_weight(g, h);
            return id;
        }
        std::vector<Eigen::Index> left;
        std::vector<Eigen::Index> right;
        for (auto r : rows) (x_(r, split.feature) < split.threshold ? left : right).push_back(r);
        const int l = grow(left, depth + 1);
        const int rgt = grow(right, depth + 1);
        auto& nd = tree_.nodes[static_cast<std::size_t>(id)];
        nd.feature = split.feature;
        nd.threshold = split.threshold;
        nd.left = l;
        nd.right = rgt;
        return id;
    }

    const Eigen::Ref<const Eigen::MatrixXd>& x_;
    const Eigen::VectorXd& grad_;
    const GbtConfig& cfg_;
    RegressionTree tree_;
};

double rmse(const Eigen::VectorXd& pred, const Eigen::Ref<const Eigen::VectorXd>& y) {
    return std::sqrt((pred - y).squaredNorm() / static_cast<double>(y.size()));
}

}  // namespace

GbtEnsemble fit_gbt(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                    std::vector<std::string> feature_names, const GbtConfig& config, std::uint64_t /*seed*/) {
    config.validate();
    if (x.cols() == 0) throw ConfigError("gbt needs at least one feature");
    if (static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
        throw AlignmentError("feature name count does not match columns");
    }
    if (x.rows() != y.size()) throw AlignmentError("gbt features and targets differ in length");
    if (y.size() < 1) throw InsufficientDataError("gbt needs at least one row");
    if (!x.allFinite() || !y.allFinite()) throw ConfigError("gbt inputs must be finite");

    GbtEnsemble model;
    model.base_score = y.mean();
    model.learning_rate = config.learning_rate;
    model.feature_names = std::move(feature_names);
    model.config = config;

    Eigen::VectorXd pred = Eigen::VectorXd::Constant(y.size(), model.base_score);
    model.train_rmse.push_back(rmse(pred, y));
    for (int k = 0; k < config.n_estimators; ++k) {
        const Eigen::VectorXd grad = pred - y;
        TreeBuilder builder(x, grad, config);
        auto tree = builder.build();
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            pred[i] += model.learning_rate * tree.predict(x.row(i));
        }
        model.trees.push_back(std::move(tree));
        model.train_rmse.push_back(rmse(pred, y));
    }
    model.train_predictions = pred;
    return model;
}

GbtEnsemble fit_gbt(const FeatureMatrix& features, const MonthlySeries& targets, const GbtConfig& config,
                    std::uint64_t seed) {
    if (features.start() != targets.start() || features.rows() != targets.size()) {
        throw AlignmentError("features and targets are not aligned");
    }
    if (targets.size() < 2) throw InsufficientDataError("gbt needs at least two rows");
    return fit_gbt(features.data(), targets.values(), features.names(), config, seed);
}

double predict_row(const GbtEnsemble& model, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    double p = model.base_score;
    for (const auto& t : model.trees) p += model.learning_rate * t.predict(row);
    return p;
}

double predict_gbt(const GbtEnsemble& model, const std::map<std::string, double>& row) {
    std::vector<bool> used(model.feature_names.size(), false);
    for (const auto& t : model.trees) {
        for (const auto& nd : t.nodes) {
            if (!nd.is_leaf()) used[static_cast<std::size_t>(nd.feature)] = true;
        }
    }
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(model.feature_names.size()));
    for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
        const auto it = row.find(model.feature_names[j]);
        if (it == row.end()) {
            if (used[j]) throw MissingFeatureError("missing feature '" + model.feature_names[j] + "'");
            continue;
        }
        x[static_cast<Eigen::Index>(j)] = it->second;
    }
    return predict_row(model, x);
}

Eigen::VectorXd predict_matrix(const GbtEnsemble& model, const Eigen::Ref<const Eigen::MatrixXd>& x) {
    if (x.cols() != static_cast<Eigen::Index>(model.feature_names.size())) {
        throw AlignmentError("prediction matrix has wrong column count");
    }
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict_row(model, x.row(i));
    return out;
}

Eigen::VectorXd predict_gbt(const GbtEnsemble& model, const FeatureMatrix& features) {
    return predict_matrix(model, features.select(model.feature_names).data());
}

namespace {

nlohmann::json node_to_json(const GbtEnsemble& m, const RegressionTree& t, int i) {
    const auto& nd = t.nodes[static_cast<std::size_t>(i)];
    if (nd.is_leaf()) return {{"leaf", nd.weight}};
    return {{"feature", m.feature_names[static_cast<std::size_t>(nd.feature)]},
            {"threshold", nd.threshold},
            {"left", node_to_json(m, t, nd.left)},
            {"right", node_to_json(m, t, nd.right)}};
}

int node_from_json(const nlohmann::json& j, const std::vector<std::string>& names, RegressionTree& t) {
    const auto id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    if (j.contains("leaf")) {
        t.nodes.back().weight = j.at("leaf").get<double>();
        return id;
    }
    const auto name = j.at("feature").get<std::string>();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ParseError("tree references unknown feature '" + name + "'");
    const double thr = j.at("threshold").get<double>();
    const int l = node_from_json(j.at("left"), names, t);
    const int r = node_from_json(j.at("right"), names, t);
    auto& nd = t.nodes[static_cast<std::size_t>(id)];
    nd.feature = static_cast<int>(it - names.begin());
    nd.threshold = thr;
    nd.left = l;
    nd.right = r;
    return id;
}

}  // namespace

nlohmann::json to_json(const GbtEnsemble& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : model.trees) trees.push_back(node_to_json(model, t, 0));
    const auto& c = model.config;
    return {{"base_score", model.base_score},
            {"learning_rate", model.learning_rate},
            {"feature_names", model.feature_names},
            {"config",
             {{"n_estimators", c.n_estimators},
              {"max_depth", c.max_depth},
              {"learning_rate", c.learning_rate},
              {"lambda", c.lambda},
              {"gamma", c.gamma},
              {"min_child_weight", c.min_child_weight}}},
            {"trees", trees}};
}

GbtEnsemble gbt_from_json(const nlohmann::json& j) {
    try {
        GbtEnsemble m;
        m.base_score = j.at("base_score").get<double>();
        m.learning_rate = j.at("learning_rate").get<double>();
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        const auto& c = j.at("config");
        m.config.n_estimators = c.at("n_estimators").get<int>();
        m.config.max_depth = c.at("max_depth").get<int>();
        m.config.learning_rate = c.at("learning_rate").get<double>();
        m.config.lambda = c.at("lambda").get<double>();
        m.config.gamma = c.at("gamma").get<double>();
        m.config.min_child_weight = c.at("min_child_weight").get<double>();
        for (const auto& tj : j.at("trees")) {
            RegressionTree t;
            node_from_json(tj, m.feature_names, t);
            m.trees.push_back(std::move(t));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid gbt model json: ") + e.what());
    }
}

}  // namespace eclf
