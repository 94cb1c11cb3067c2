#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eclf/featsel.hpp"
#include "support.hpp"

using namespace eclf;
using eclf::test::vec;

namespace {

// Textbook Pearson sum formula, computed in long double.
double pcc_oracle(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const auto n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const long double mx = sx / n, my = sy / n;
    long double cov = 0, vx = 0, vy = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    return static_cast<double>(cov / (std::sqrt(vx) * std::sqrt(vy)));
}

FeatureMatrix matrix(const std::vector<std::string>& names, const std::vector<Eigen::VectorXd>& cols) {
    Eigen::MatrixXd m(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = cols[j];
    return FeatureMatrix({2013, 1}, names, m);
}

MonthlySeries series(const Eigen::VectorXd& v) { return MonthlySeries({2013, 1}, v); }

}  // namespace

TEST_CASE("pcc examples") {
    CHECK(pcc(vec({1, 2, 3}), vec({2, 4, 6})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pcc(vec({1, 2, 3}), vec({3, 2, 1})) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(pcc(vec({1, 2, 3, 4}), vec({1, 3, 2, 4})) - 0.8) <= 1e-12);
}

TEST_CASE("pcc errors") {
    CHECK_THROWS_AS(pcc(vec({1, 1, 1}), vec({1, 2, 3})), DegenerateInputError);
    CHECK_THROWS_AS(pcc(vec({1, 2, 3}), vec({4, 4, 4})), DegenerateInputError);
    CHECK_THROWS_AS(pcc(vec({1}), vec({2})), InsufficientDataError);
    CHECK_THROWS_AS(pcc(vec({1, 2}), vec({1, 2, 3})), AlignmentError);
}

TEST_CASE("pcc symmetry, oracle agreement and affine invariance") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto x = test::gaussian(40, seed, 3.0);
        const Eigen::VectorXd y = 0.3 * x + test::gaussian(40, seed + 1000);
        const double r = pcc(x, y);
        CHECK(std::abs(r) <= 1.0);
        CHECK(std::abs(r - pcc(y, x)) <= 1e-12);
        CHECK(std::abs(r - pcc_oracle(x, y)) <= 1e-12);
        const Eigen::VectorXd pos = 2.5 * x.array() + 7.0;
        const Eigen::VectorXd neg = -0.4 * x.array() - 3.0;
        CHECK(std::abs(pcc(pos, y) - r) <= 1e-12);
        CHECK(std::abs(pcc(neg, y) + r) <= 1e-12);
    }
}

TEST_CASE("screen_by_pcc: identical and negated target rank first") {
    const auto t = test::gaussian(60, 1);
    const auto noise = test::gaussian(60, 2);
    const Eigen::VectorXd neg = -t;
    const auto f = matrix({"noise", "same", "neg"}, {noise, t, neg});
    const auto res = screen_by_pcc(f, series(t), 0.3);
    REQUIRE(res.kept.size() >= 2);
    CHECK(res.kept[0].first == "same");
    CHECK(res.kept[0].second == doctest::Approx(1.0));
    CHECK(res.kept[1].first == "neg");
    CHECK(res.kept[1].second == doctest::Approx(-1.0));
    CHECK_FALSE(res.fell_back);
}

TEST_CASE("screen_by_pcc: calibrated correlations 0.9 / 0.5 / 0.1") {
    const Eigen::Index n = 600;
    const auto t = test::gaussian(n, 10);
    std::vector<Eigen::VectorXd> cols;
    for (double rho : {0.1, 0.9, 0.5}) {
        const auto e = test::gaussian(n, static_cast<std::uint64_t>(rho * 100) + 7);
        cols.push_back(rho * t + std::sqrt(1.0 - rho * rho) * e);
    }
    const auto f = matrix({"weak", "strong", "medium"}, cols);
    const auto res = screen_by_pcc(f, series(t), 0.3);
    REQUIRE(res.kept.size() == 2);
    CHECK(res.kept[0].first == "strong");
    CHECK(res.kept[1].first == "medium");
    CHECK(std::abs(res.kept[0].second - pcc_oracle(cols[1], t)) <= 1e-12);
    CHECK(std::abs(res.kept[1].second - pcc_oracle(cols[2], t)) <= 1e-12);
    CHECK(std::abs(pcc_oracle(cols[0], t)) < 0.3);
}

TEST_CASE("screen_by_pcc: ties keep column order, fallback to top-1") {
    const auto t = test::gaussian(30, 3);
    const auto f = matrix({"a", "b", "c"}, {test::gaussian(30, 4), t, t});
    const auto res = screen_by_pcc(f, series(t), 0.99);
    REQUIRE(res.kept.size() == 2);
    CHECK(res.kept[0].first == "b");
    CHECK(res.kept[1].first == "c");

    const auto weak = matrix({"x", "y"}, {test::gaussian(200, 5), test::gaussian(200, 6)});
    const auto fb = screen_by_pcc(weak, series(test::gaussian(200, 7)), 0.9);
    CHECK(fb.fell_back);
    REQUIRE(fb.kept.size() == 1);
    const auto ranked = rank_by_pcc(weak, series(test::gaussian(200, 7)));
    CHECK(fb.kept[0] == ranked[0]);
}

TEST_CASE("screen_by_pcc: constant feature scores zero, errors") {
    const auto t = test::gaussian(30, 3);
    const auto f = matrix({"const", "sig"}, {Eigen::VectorXd::Constant(30, 2.0), t});
    const auto ranked = rank_by_pcc(f, series(t));
    CHECK(ranked[1].first == "const");
    CHECK(ranked[1].second == 0.0);
    CHECK_THROWS_AS(screen_by_pcc(f, series(t), 1.5), ConfigError);
    CHECK_THROWS_AS(screen_by_pcc(f, MonthlySeries({2013, 2}, t), 0.3), AlignmentError);
}

TEST_CASE("screen_by_pcc is deterministic") {
    const auto t = test::gaussian(50, 3);
    const auto f = matrix({"a", "b", "c"}, {test::gaussian(50, 4), test::gaussian(50, 5), t});
    const auto a = screen_by_pcc(f, series(t), 0.1);
    const auto b = screen_by_pcc(f, series(t), 0.1);
    CHECK(a.kept == b.kept);
}

TEST_CASE("prune_by_importance: single candidate always survives") {
    const auto t = test::gaussian(40, 1);
    const auto f = matrix({"a", "b"}, {test::gaussian(40, 2), test::gaussian(40, 3)});
    const auto sel = prune_by_importance(f, series(t), {"b"}, 0.1, 5);
    CHECK(sel.selected == std::vector<std::string>{"b"});
}

TEST_CASE("prune_by_importance: signal beats noise") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const auto signal = test::uniform(96, seed, -1.0, 1.0);
        const auto noise = test::uniform(96, seed + 50, -1.0, 1.0);
        const Eigen::VectorXd y = 3.0 * signal + 0.1 * test::gaussian(96, seed + 99);
        const auto f = matrix({"noise", "signal"}, {noise, signal});
        const auto sel = prune_by_importance(f, series(y), {"noise", "signal"}, 0.5, seed);
        CHECK(sel.selected == std::vector<std::string>{"signal"});
        REQUIRE(sel.ranked.size() == 2);
        CHECK(*sel.ranked[1].importance > *sel.ranked[0].importance);
    }
}

TEST_CASE("prune_by_importance: duplicated column keeps at most one copy") {
    const auto signal = test::uniform(96, 8, -1.0, 1.0);
    const Eigen::VectorXd y = 2.0 * signal + 0.05 * test::gaussian(96, 9);
    const auto f = matrix({"s1", "s2"}, {signal, signal});
    for (double keep : {0.25, 0.5}) {
        const auto sel = prune_by_importance(f, series(y), {"s1", "s2"}, keep, 3);
        CHECK(sel.selected.size() == 1);
    }
}

TEST_CASE("prune_by_importance: keep count and determinism") {
    const auto y = test::gaussian(80, 20);
    std::vector<Eigen::VectorXd> cols;
    std::vector<std::string> names;
    for (int k = 0; k < 5; ++k) {
        cols.push_back(static_cast<double>(k) * 0.3 * y + test::gaussian(80, 30 + static_cast<std::uint64_t>(k)));
        names.push_back("f" + std::to_string(k));
    }
    const auto f = matrix(names, cols);
    const auto a = prune_by_importance(f, series(y), names, 0.5, 77);
    const auto b = prune_by_importance(f, series(y), names, 0.5, 77);
    CHECK(a.selected.size() == 3);
    CHECK(a.selected == b.selected);
    for (std::size_t i = 0; i < a.ranked.size(); ++i) CHECK(*a.ranked[i].importance == *b.ranked[i].importance);
    CHECK(prune_by_importance(f, series(y), names, 1.0, 77).selected.size() == 5);
    CHECK(prune_by_importance(f, series(y), names, 0.01, 77).selected.size() == 1);
    CHECK_THROWS_AS(prune_by_importance(f, series(y), {}, 0.5, 1), ConfigError);
    CHECK_THROWS_AS(prune_by_importance(f, series(y), names, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(prune_by_importance(f, series(y), {"nope"}, 0.5, 1), MissingFeatureError);
}

TEST_CASE("select_features: invariants of the selection") {
    const Eigen::Index n = 96;
    const auto y = test::gaussian(n, 40);
    std::vector<Eigen::VectorXd> cols;
    std::vector<std::string> names;
    for (int k = 0; k < 6; ++k) {
        cols.push_back(static_cast<double>(k % 3) * y + test::gaussian(n, 50 + static_cast<std::uint64_t>(k)));
        names.push_back("x" + std::to_string(k));
    }
    const auto f = matrix(names, cols);
    const auto sel = select_features(f, series(y), Component::Random, 0.3, 0.5, 9);
    CHECK(sel.component == Component::Random);
    CHECK(sel.ranked.size() == 6);
    CHECK_FALSE(sel.selected.empty());
    for (std::size_t i = 0; i < sel.ranked.size(); ++i) {
        CHECK(std::abs(sel.ranked[i].pcc) <= 1.0);
        if (i > 0) CHECK(std::abs(sel.ranked[i - 1].pcc) >= std::abs(sel.ranked[i].pcc));
    }
    for (const auto& s : sel.selected) {
        const auto it = std::find_if(sel.ranked.begin(), sel.ranked.end(), [&](const auto& r) { return r.name == s; });
        REQUIRE(it != sel.ranked.end());
        CHECK(it->importance.has_value());
        CHECK(std::abs(it->pcc) >= 0.3);
    }
    const auto j = to_json(sel);
    CHECK(j["component"] == "random");
    CHECK(j["ranked"].size() == 6);
    CHECK(j["ranked"][0].contains("importance"));
    CHECK(j["selected"].size() == sel.selected.size());
}

TEST_CASE("component names") {
    CHECK(std::string(to_string(Component::Trend)) == "trend");
    CHECK(component_from_string("random") == Component::Random);
    CHECK_THROWS_AS(component_from_string("seasonal"), ConfigError);
}
