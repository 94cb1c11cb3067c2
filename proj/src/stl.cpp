#include "eclf/stl.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace eclf {

namespace {

void require_odd(int w, const char* name) {
    if (w <= 0 || w % 2 == 0) throw ConfigError(std::string(name) + " must be odd and positive");
}

Eigen::VectorXd moving_average(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index len) {
    const auto n = x.size() - len + 1;
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = x.segment(i, len).mean();
    return out;
}

Eigen::VectorXd positions(Eigen::Index first, Eigen::Index count) {
    return Eigen::VectorXd::LinSpaced(count, static_cast<double>(first),
                                      static_cast<double>(first + count - 1));
}

double median(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return m;
}

struct InnerResult {
    Eigen::VectorXd seasonal;
    Eigen::VectorXd trend;
};

void inner_loop(const Eigen::VectorXd& y, const StlConfig& cfg, const Eigen::VectorXd* rho,
                InnerResult& state) {
    const auto n = y.size();
    const auto np = static_cast<Eigen::Index>(cfg.period);
    const LoessConfig seasonal_cfg{cfg.seasonal_window, cfg.seasonal_degree};
    const LoessConfig lowpass_cfg{cfg.lowpass_window, cfg.lowpass_degree};
    const LoessConfig trend_cfg{cfg.trend_window, cfg.trend_degree};

    for (int pass = 0; pass < cfg.inner_iterations; ++pass) {
        const Eigen::VectorXd detrended = y - state.trend;

        // Cycle-subseries smoothing, extended by one cycle at each end.
        Eigen::VectorXd cycle(n + 2 * np);
        for (Eigen::Index j = 0; j < np; ++j) {
            const auto m = (n - j + np - 1) / np;
            if (m == 0) continue;
            Eigen::VectorXd sub(m);
            std::optional<Eigen::VectorXd> sub_rho;
            if (rho) sub_rho = Eigen::VectorXd(m);
            for (Eigen::Index k = 0; k < m; ++k) {
                sub[k] = detrended[j + k * np];
                if (rho) (*sub_rho)[k] = (*rho)[j + k * np];
            }
            const Eigen::VectorXd smooth =
                loess_smooth(positions(0, m), sub, positions(-1, m + 2), seasonal_cfg, sub_rho);
            for (Eigen::Index k = 0; k < m + 2; ++k) cycle[j + k * np] = smooth[k];
        }

        // Low-pass filter of the cycle-subseries estimate.
        Eigen::VectorXd low = moving_average(cycle, np);
        low = moving_average(low, np);
        low = moving_average(low, 3);
        low = loess_smooth(positions(0, n), low, positions(0, n), lowpass_cfg);

        state.seasonal = cycle.segment(np, n) - low;

        const Eigen::VectorXd deseasonal = y - state.seasonal;
        std::optional<Eigen::VectorXd> trend_rho;
        if (rho) trend_rho = *rho;
        state.trend = loess_smooth(positions(0, n), deseasonal, positions(0, n), trend_cfg, trend_rho);
    }
}

}  // namespace

void StlConfig::validate() const {
    if (period < 2) throw ConfigError("stl period must be >= 2");
    require_odd(seasonal_window, "seasonal_window");
    require_odd(trend_window, "trend_window");
    require_odd(lowpass_window, "lowpass_window");
    if (seasonal_window < 7) throw ConfigError("seasonal_window must be >= 7");
    if (trend_window <= period) throw ConfigError("trend_window must exceed period");
    if (lowpass_window < period) throw ConfigError("lowpass_window must be >= period");
    LoessConfig{seasonal_window, seasonal_degree}.validate();
    LoessConfig{trend_window, trend_degree}.validate();
    LoessConfig{lowpass_window, lowpass_degree}.validate();
    if (robust_iterations < 0) throw ConfigError("robust_iterations must be >= 0");
    if (inner_iterations < 1) throw ConfigError("inner_iterations must be >= 1");
}

int StlConfig::default_trend_window(int period, int seasonal_window) {
    const double raw = 1.5 * period / (1.0 - 1.5 / seasonal_window);
    int w = static_cast<int>(std::ceil(raw - 1e-12));
    if (w % 2 == 0) ++w;
    return w;
}

StlConfig StlConfig::for_period(int period, int seasonal_window) {
    StlConfig cfg;
    cfg.period = period;
    cfg.seasonal_window = seasonal_window;
    cfg.trend_window = default_trend_window(period, seasonal_window);
    cfg.lowpass_window = period % 2 == 0 ? period + 1 : period;
    return cfg;
}

Eigen::VectorXd bisquare_weights(const Eigen::Ref<const Eigen::VectorXd>& residuals) {
    const auto n = residuals.size();
    std::vector<double> abs_r(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) abs_r[static_cast<std::size_t>(i)] = std::abs(residuals[i]);
    const double h = 6.0 * median(abs_r);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = std::abs(residuals[i]);
        if (a == 0.0) {
            w[i] = 1.0;
        } else if (h <= 0.0 || a >= h) {
            w[i] = 0.0;
        } else {
            const double u = a / h;
            w[i] = (1.0 - u * u) * (1.0 - u * u);
        }
    }
    return w;
}

Decomposition stl_decompose(const MonthlySeries& series, const StlConfig& config) {
    config.validate();
    const auto n = series.size();
    if (n < 2 * static_cast<Eigen::Index>(config.period)) {
        throw InsufficientDataError("stl needs at least two full periods (" +
                                    std::to_string(2 * config.period) + " points), got " +
                                    std::to_string(n));
    }
    const Eigen::VectorXd& y = series.values();
    InnerResult state{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};

    inner_loop(y, config, nullptr, state);
    for (int outer = 0; outer < config.robust_iterations; ++outer) {
        const Eigen::VectorXd rho = bisquare_weights(y - state.seasonal - state.trend);
        inner_loop(y, config, &rho, state);
    }

    Eigen::VectorXd remainder = y - state.seasonal - state.trend;
    const auto start = series.start();
    return {MonthlySeries(start, std::move(state.seasonal)), MonthlySeries(start, std::move(state.trend)),
            MonthlySeries(start, std::move(remainder)), series};
}

MonthlySeries reconstruct(const MonthlySeries& s_hat, const MonthlySeries& t_hat,
                          const MonthlySeries& r_hat) {
    if (s_hat.start() != t_hat.start() || s_hat.start() != r_hat.start() ||
        s_hat.size() != t_hat.size() || s_hat.size() != r_hat.size()) {
        throw AlignmentError("components are not aligned");
    }
    return {s_hat.start(), s_hat.values() + t_hat.values() + r_hat.values()};
}

}  // namespace eclf
