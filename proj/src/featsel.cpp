#include "eclf/featsel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace eclf {

const char* to_string(Component c) { return c == Component::Trend ? "trend" : "random"; }

Component component_from_string(const std::string& s) {
    if (s == "trend") return Component::Trend;
    if (s == "random") return Component::Random;
    throw ConfigError("unknown component '" + s + "' (expected trend or random)");
}

double pcc(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size()) throw AlignmentError("pcc inputs differ in length");
    if (x.size() < 2) throw InsufficientDataError("pcc needs at least two samples");
    const Eigen::ArrayXd dx = x.array() - x.mean();
    const Eigen::ArrayXd dy = y.array() - y.mean();
    const double sxx = dx.square().sum();
    const double syy = dy.square().sum();
    if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateInputError("pcc undefined for a constant input");
    const double r = (dx * dy).sum() / (std::sqrt(sxx) * std::sqrt(syy));
    return std::clamp(r, -1.0, 1.0);
}

std::vector<std::pair<std::string, double>> rank_by_pcc(const FeatureMatrix& features,
                                                        const MonthlySeries& target) {
    if (features.start() != target.start() || features.rows() != target.size()) {
        throw AlignmentError("features and target are not aligned");
    }
    std::vector<std::pair<std::string, double>> out;
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        double r = 0.0;
        try {
            r = pcc(features.data().col(j), target.values());
        } catch (const DegenerateInputError&) {
            r = 0.0;
        }
        out.emplace_back(features.names()[static_cast<std::size_t>(j)], r);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return std::abs(a.second) > std::abs(b.second); });
    return out;
}

ScreenResult screen_by_pcc(const FeatureMatrix& features, const MonthlySeries& target, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("pcc threshold must be in [0, 1]");
    if (features.cols() == 0) throw ConfigError("no features to screen");
    const auto ranked = rank_by_pcc(features, target);
    ScreenResult res;
    for (const auto& r : ranked) {
        if (std::abs(r.second) >= threshold) res.kept.push_back(r);
    }
    if (res.kept.empty()) {
        res.kept.push_back(ranked.front());
        res.fell_back = true;
    }
    return res;
}

GbtConfig importance_model_config() {
    GbtConfig cfg;
    cfg.n_estimators = 50;
    cfg.max_depth = 2;
    cfg.learning_rate = 0.3;
    return cfg;
}

std::vector<double> permutation_importance(const FeatureMatrix& features, const MonthlySeries& target,
                                           std::uint64_t seed, int repeats) {
    const auto model = fit_gbt(features, target, importance_model_config(), seed);
    const Eigen::MatrixXd& x = features.data();
    const Eigen::VectorXd& y = target.values();
    const auto n = x.rows();
    const double base_mse = (model.train_predictions - y).squaredNorm() / static_cast<double>(n);

    std::vector<double> out(static_cast<std::size_t>(x.cols()), 0.0);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(j)};
        std::mt19937_64 rng(seq);
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
        double total = 0.0;
        Eigen::MatrixXd shuffled = x;
        for (int r = 0; r < repeats; ++r) {
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            for (Eigen::Index i = 0; i < n; ++i) shuffled(i, j) = x(perm[static_cast<std::size_t>(i)], j);
            const Eigen::VectorXd pred = predict_matrix(model, shuffled);
            total += (pred - y).squaredNorm() / static_cast<double>(n) - base_mse;
        }
        out[static_cast<std::size_t>(j)] = total / repeats;
    }
    return out;
}

FeatureSelection prune_by_importance(const FeatureMatrix& features, const MonthlySeries& target,
                                     const std::vector<std::string>& candidates, double keep_fraction,
                                     std::uint64_t seed) {
    if (candidates.empty()) throw ConfigError("prune_by_importance needs at least one candidate");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ConfigError("keep_fraction must be in (0, 1]");

    const auto sub = features.select(candidates);
    FeatureSelection sel;
    for (const auto& c : candidates) {
        double r = 0.0;
        try {
            r = pcc(sub.column(c), target.values());
        } catch (const DegenerateInputError&) {
        }
        sel.ranked.push_back({c, r, std::nullopt});
    }
    if (candidates.size() == 1) {
        sel.ranked.front().importance = 0.0;
        sel.selected = candidates;
        return sel;
    }

    const auto imp = permutation_importance(sub, target, seed);
    for (std::size_t j = 0; j < candidates.size(); ++j) sel.ranked[j].importance = imp[j];

    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(keep_fraction * static_cast<double>(candidates.size()) - 1e-12)));
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    for (auto j : order) sel.selected.push_back(candidates[j]);
    return sel;
}

FeatureSelection select_features(const FeatureMatrix& features, const MonthlySeries& target,
                                 Component component, double threshold, double keep_fraction,
                                 std::uint64_t seed) {
    const auto screened = screen_by_pcc(features, target, threshold);
    std::vector<std::string> candidates;
    for (const auto& k : screened.kept) candidates.push_back(k.first);
    auto pruned = prune_by_importance(features, target, candidates, keep_fraction, seed);

    FeatureSelection sel;
    sel.component = component;
    sel.selected = pruned.selected;
    for (const auto& [name, r] : rank_by_pcc(features, target)) {
        RankedFeature rf{name, r, std::nullopt};
        for (const auto& p : pruned.ranked) {
            if (p.name == name) rf.importance = p.importance;
        }
        sel.ranked.push_back(std::move(rf));
    }
    return sel;
}

nlohmann::json to_json(const FeatureSelection& selection) {
    nlohmann::json ranked = nlohmann::json::array();
    for (const auto& r : selection.ranked) {
        ranked.push_back({{"name", r.name},
                          {"pcc", r.pcc},
                          {"importance", r.importance ? nlohmann::json(*r.importance) : nlohmann::json()}});
    }
    return {{"component", to_string(selection.component)}, {"ranked", ranked}, {"selected", selection.selected}};
}

}  // namespace eclf
