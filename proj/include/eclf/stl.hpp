#pragma once

#include "eclf/loess.hpp"
#include "eclf/series.hpp"

namespace eclf {

/// Parameters of the seasonal-trend decomposition. Windows are in
/// observations (seasonal_window in cycles) and must be odd.
struct StlConfig {
    int period = 12;
    int seasonal_window = 7;
    int trend_window = 23;
    int lowpass_window = 13;  ///< smallest odd integer >= period
    int seasonal_degree = 1;
    int trend_degree = 1;
    int lowpass_degree = 1;
    int robust_iterations = 1;
    int inner_iterations = 2;

    /// ConfigError when a window is even, trend_window <= period, etc.
    void validate() const;

    /// Smallest odd integer >= 1.5 * period / (1 - 1.5 / seasonal_window).
    static int default_trend_window(int period, int seasonal_window);
    /// Defaults for a given period with derived trend and low-pass windows.
    static StlConfig for_period(int period, int seasonal_window = 7);
};

/// Additive split Y = S + T + R, all four series sharing start and length.
struct Decomposition {
    MonthlySeries seasonal;
    MonthlySeries trend;
    MonthlySeries remainder;
    MonthlySeries source;
};

/// Robust STL: cycle-subseries LOESS, low-pass filtering of the seasonal
/// estimate, LOESS trend, and an outer bisquare reweighting loop. The
/// remainder is always the exact residual Y - S - T.
Decomposition stl_decompose(const MonthlySeries& series, const StlConfig& config = {});

/// Pointwise sum of three aligned component series.
MonthlySeries reconstruct(const MonthlySeries& s_hat, const MonthlySeries& t_hat,
                          const MonthlySeries& r_hat);

/// Bisquare weights on |r| / (6 median|r|), exact zero residuals weighted 1.
Eigen::VectorXd bisquare_weights(const Eigen::Ref<const Eigen::VectorXd>& residuals);

}  // namespace eclf
