#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>

#include "eclf/loess.hpp"
#include "eclf/stl.hpp"
#include "support.hpp"

using namespace eclf;
using eclf::test::vec;

namespace {

// Direct weighted least squares at one point: pick the q nearest abscissae,
// tricube weights on distance / (largest chosen distance), solve the normal
// equations of the raw polynomial basis.
double wls_oracle(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, double x0, int q, int degree) {
    std::vector<int> idx(static_cast<std::size_t>(xs.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::abs(xs[a] - x0) < std::abs(xs[b] - x0); });
    idx.resize(static_cast<std::size_t>(q));
    double h = 0.0;
    for (int i : idx) h = std::max(h, std::abs(xs[i] - x0));
    Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
    Eigen::VectorXd aty = Eigen::VectorXd::Zero(degree + 1);
    for (int i : idx) {
        const double r = std::abs(xs[i] - x0) / h;
        const double w = r < 1.0 ? std::pow(1.0 - r * r * r, 3) : 0.0;
        Eigen::VectorXd basis(degree + 1);
        for (int j = 0; j <= degree; ++j) basis[j] = std::pow(xs[i], j);
        ata += w * basis * basis.transpose();
        aty += w * ys[i] * basis;
    }
    const Eigen::VectorXd beta = ata.fullPivLu().solve(aty);
    double out = 0.0;
    for (int j = 0; j <= degree; ++j) out += beta[j] * std::pow(x0, j);
    return out;
}

MonthlySeries monthly(const Eigen::VectorXd& v) { return MonthlySeries({2013, 1}, v); }

double rms(const Eigen::VectorXd& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

}  // namespace

TEST_CASE("loess reproduces a line with degree 1 for any window") {
    const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(20, 0.0, 19.0);
    const Eigen::VectorXd ys = 2.0 * xs.array() + 1.0;
    const Eigen::VectorXd eval = Eigen::VectorXd::LinSpaced(39, 0.0, 19.0);
    for (int window : {3, 5, 7, 11, 19, 21, 51}) {
        const auto out = loess_smooth(xs, ys, eval, {window, 1});
        for (Eigen::Index i = 0; i < eval.size(); ++i) CHECK(out[i] == doctest::Approx(2.0 * eval[i] + 1.0).epsilon(1e-12));
        CHECK((out.array() - (2.0 * eval.array() + 1.0)).abs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("loess reproduces random affine functions on irregular abscissae") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Eigen::VectorXd xs = test::uniform(15, seed, -5.0, 5.0);
        std::sort(xs.begin(), xs.end());
        const auto coef = test::gaussian(2, seed + 100, 3.0);
        const Eigen::VectorXd ys = coef[0] + coef[1] * xs.array();
        const Eigen::VectorXd rho = test::uniform(15, seed + 200, 0.2, 1.0);
        const auto out = loess_smooth(xs, ys, xs, {5, 1}, rho);
        CHECK((out - ys).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("loess degree 0 on a constant") {
    const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(10, 0.0, 9.0);
    const Eigen::VectorXd ys = Eigen::VectorXd::Constant(10, 5.0);
    const auto out = loess_smooth(xs, ys, xs, {3, 0});
    CHECK((out.array() - 5.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("loess matches a normal-equations oracle on x^2") {
    const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(10, 0.0, 9.0);
    const Eigen::VectorXd ys = xs.array().square();
    const Eigen::VectorXd eval = vec({2.0, 3.3, 4.0, 4.6, 5.0, 6.2, 7.0});
    const auto out = loess_smooth(xs, ys, eval, {5, 1});
    for (Eigen::Index i = 0; i < eval.size(); ++i) {
        CHECK(std::abs(out[i] - wls_oracle(xs, ys, eval[i], 5, 1)) <= 1e-10);
    }
    const auto quad = loess_smooth(xs, ys, eval, {5, 2});
    for (Eigen::Index i = 0; i < eval.size(); ++i) {
        CHECK(std::abs(quad[i] - wls_oracle(xs, ys, eval[i], 5, 2)) <= 1e-9);
        CHECK(std::abs(quad[i] - eval[i] * eval[i]) <= 1e-9);
    }
}

TEST_CASE("loess oracle at boundaries uses one-sided neighbourhoods") {
    const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(12, 0.0, 11.0);
    const Eigen::VectorXd ys = test::gaussian(12, 9);
    const Eigen::VectorXd eval = vec({0.0, 0.4, 1.0, 10.0, 10.7, 11.0});
    const auto out = loess_smooth(xs, ys, eval, {7, 1});
    for (Eigen::Index i = 0; i < eval.size(); ++i) {
        CHECK(std::abs(out[i] - wls_oracle(xs, ys, eval[i], 7, 1)) <= 1e-10);
    }
}

TEST_CASE("loess window larger than the data is clamped") {
    const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(4, 0.0, 3.0);
    const Eigen::VectorXd ys = test::gaussian(4, 3);
    const auto out = loess_smooth(xs, ys, xs, {9, 1});
    CHECK(out.allFinite());
    const Eigen::VectorXd ext = vec({-1.0, 4.0});
    CHECK(loess_smooth(xs, ys, ext, {9, 1}).allFinite());
}

TEST_CASE("loess with all-zero robustness weights falls back to the mean") {
    const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(7, 0.0, 6.0);
    const Eigen::VectorXd ys = vec({1, 5, 2, 8, 3, 9, 4});
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(7);
    const auto out = loess_smooth(xs, ys, vec({3.0}), {7, 1}, zero);
    CHECK(out[0] == doctest::Approx(ys.mean()));
}

TEST_CASE("loess argument errors") {
    const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(5, 0.0, 4.0);
    const Eigen::VectorXd ys = Eigen::VectorXd::Zero(5);
    CHECK_THROWS_AS(loess_smooth(xs, ys, xs, {4, 1}), ConfigError);
    CHECK_THROWS_AS(loess_smooth(xs, ys, xs, {3, 2}), ConfigError);
    CHECK_THROWS_AS(loess_smooth(xs, ys, xs, {3, 3}), ConfigError);
    CHECK_THROWS_AS(loess_smooth(xs, Eigen::VectorXd::Zero(4), xs, {3, 1}), AlignmentError);
    CHECK_THROWS_AS(loess_smooth(vec({0, 2, 1, 3, 4}), ys, xs, {3, 1}), ConfigError);
    CHECK_THROWS_AS(loess_smooth(xs, ys, xs, {3, 1}, Eigen::VectorXd::Constant(5, 2.0)), ConfigError);
}

TEST_CASE("stl config defaults and validation") {
    StlConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(StlConfig::default_trend_window(12, 7) == 23);
    CHECK(c.trend_window == 23);
    CHECK(StlConfig::for_period(12).trend_window == 23);
    CHECK(StlConfig::for_period(4).lowpass_window == 5);
    auto bad = c;
    bad.trend_window = 12;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.seasonal_window = 5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.inner_iterations = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.robust_iterations = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("stl on a constant series") {
    const auto d = stl_decompose(monthly(Eigen::VectorXd::Constant(108, 100.0)));
    CHECK((d.trend.values().array() - 100.0).abs().maxCoeff() <= 1e-6);
    CHECK(d.seasonal.values().cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(d.remainder.values().cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("stl recovers an injected sinusoid") {
    Eigen::VectorXd y(108);
    for (int t = 0; t < 108; ++t) y[t] = 10.0 * std::sin(2.0 * std::numbers::pi * t / 12.0);
    const auto d = stl_decompose(monthly(y));
    CHECK(rms(d.seasonal.values() - y) < 0.5);
    CHECK(rms(d.remainder.values()) < 0.5);
}

TEST_CASE("stl recovers trend and season together") {
    Eigen::VectorXd y(108), s(108), t(108);
    for (int i = 0; i < 108; ++i) {
        s[i] = 20.0 * std::cos(2.0 * std::numbers::pi * i / 12.0) + 5.0 * std::sin(4.0 * std::numbers::pi * i / 12.0);
        t[i] = 500.0 + 1.5 * i;
        y[i] = s[i] + t[i];
    }
    const auto d = stl_decompose(monthly(y));
    CHECK(rms(d.seasonal.values() - s) < 0.5);
    CHECK(rms(d.trend.values() - t) < 0.5);
}

TEST_CASE("stl additivity on random series and configs") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Eigen::Index n = 24 + static_cast<Eigen::Index>(seed % 90);
        Eigen::VectorXd y = test::gaussian(n, seed, 50.0);
        y.array() += 1000.0;
        StlConfig c;
        c.robust_iterations = static_cast<int>(seed % 3);
        c.inner_iterations = 1 + static_cast<int>(seed % 2);
        const auto d = stl_decompose(monthly(y), c);
        const Eigen::VectorXd sum = d.seasonal.values() + d.trend.values() + d.remainder.values();
        CHECK((sum - y).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(d.source == monthly(y));
        CHECK(d.seasonal.start() == d.trend.start());
        CHECK(d.remainder.size() == n);
    }
}

TEST_CASE("stl shift equivariance") {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        Eigen::VectorXd y = test::gaussian(96, seed, 10.0);
        for (int i = 0; i < 96; ++i) y[i] += 15.0 * std::sin(2.0 * std::numbers::pi * i / 12.0) + 0.3 * i;
        const double c = 1234.5;
        const auto a = stl_decompose(monthly(y));
        const auto b = stl_decompose(monthly((y.array() + c).matrix()));
        CHECK(((b.trend.values().array() - c) - a.trend.values().array()).abs().maxCoeff() <= 1e-6);
        CHECK((b.seasonal.values() - a.seasonal.values()).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK((b.remainder.values() - a.remainder.values()).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("stl robustness to a single outlier") {
    Eigen::VectorXd y(108);
    for (int i = 0; i < 108; ++i) y[i] = 100.0 + 0.5 * i + 10.0 * std::sin(2.0 * std::numbers::pi * i / 12.0);
    y += test::gaussian(108, 21, 1.0);
    const double range = y.maxCoeff() - y.minCoeff();
    const double magnitude = 10.0 * range;
    StlConfig c;
    c.robust_iterations = 2;
    const auto clean = stl_decompose(monthly(y), c);
    for (int at : {5, 50, 100}) {
        Eigen::VectorXd z = y;
        z[at] += magnitude;
        const auto dirty = stl_decompose(monthly(z), c);
        double worst = 0.0;
        for (int i = 0; i < 108; ++i) {
            if (std::abs(i - at) <= 1) continue;
            worst = std::max(worst, std::abs(dirty.trend[i] - clean.trend[i]));
        }
        CHECK(worst < 0.2 * magnitude);
    }
}

TEST_CASE("stl requires two full periods") {
    CHECK_THROWS_AS(stl_decompose(monthly(Eigen::VectorXd::Zero(23))), InsufficientDataError);
    CHECK_NOTHROW(stl_decompose(monthly(Eigen::VectorXd::Zero(24))));
}

TEST_CASE("stl is deterministic") {
    const Eigen::VectorXd y = test::gaussian(72, 8, 3.0);
    const auto a = stl_decompose(monthly(y));
    const auto b = stl_decompose(monthly(y));
    CHECK(a.trend == b.trend);
    CHECK(a.seasonal == b.seasonal);
}

TEST_CASE("reconstruct") {
    const Eigen::VectorXd y = test::gaussian(60, 1, 5.0);
    const auto d = stl_decompose(monthly(y));
    CHECK((reconstruct(d.seasonal, d.trend, d.remainder).values() - y).cwiseAbs().maxCoeff() <= 1e-9);

    const MonthlySeries z({2020, 1}, Eigen::VectorXd::Zero(5));
    CHECK(reconstruct(z, z, z).values().isZero(0.0));

    const auto r = reconstruct(MonthlySeries({2020, 1}, vec({1, 2})), MonthlySeries({2020, 1}, vec({10, 10})),
                               MonthlySeries({2020, 1}, vec({0.5, -0.5})));
    CHECK(r.values() == vec({11.5, 11.5}));
    CHECK(r.start() == YearMonth{2020, 1});

    CHECK_THROWS_AS(reconstruct(z, MonthlySeries({2020, 2}, Eigen::VectorXd::Zero(5)), z), AlignmentError);
    CHECK_THROWS_AS(reconstruct(z, MonthlySeries({2020, 1}, Eigen::VectorXd::Zero(4)), z), AlignmentError);
}

TEST_CASE("bisquare robustness weights") {
    const Eigen::VectorXd r = vec({0.0, 1.0, -1.0, 2.0, 100.0});
    const auto w = bisquare_weights(r);
    // h = 6 * median|r| = 6
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(std::pow(1.0 - 1.0 / 36.0, 2)));
    CHECK(w[2] == doctest::Approx(w[1]));
    CHECK(w[3] == doctest::Approx(std::pow(1.0 - 4.0 / 36.0, 2)));
    CHECK(w[4] == 0.0);
    const auto z = bisquare_weights(vec({0.0, 0.0, 0.0, 5.0}));
    CHECK(z == vec({1.0, 1.0, 1.0, 0.0}));
}
