#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "eclf/series.hpp"

namespace eclf {

/// Synthetic stand-in for a city load dataset.
///
/// For month index t (0-based) with calendar month m:
///
///     load_t = base + slope * t + profile[m] + temp_coeff * (avg_temp_t - comfort_temp)^2
///              + off_day_coeff * (off_days_t - mean_off_days) + noise_t
///
/// where noise_t ~ N(0, noise_sd * mean of the noiseless load). The twelve
/// feature columns follow `canonical_feature_names()`; weather columns are a
/// fixed monthly climatology plus seeded Gaussian anomalies, off_days counts
/// weekend days plus holidays.
struct SynthConfig {
    std::uint64_t seed = 42;
    int years = 9;
    double noise_sd = 0.02;  ///< fraction of the mean noiseless load
    YearMonth start{2013, 1};

    double base = 1000.0;
    double slope = 1.5;  ///< load units per month
    std::array<double, 12> profile{40.0, -30.0, -20.0, -35.0, -10.0, 30.0,
                                   70.0, 75.0,  20.0,  -25.0, -15.0, 25.0};
    double temp_coeff = 0.25;
    double comfort_temp = 16.0;
    double off_day_coeff = -4.0;
    double mean_off_days = 9.0;

    void validate() const;
};

const std::vector<std::string>& canonical_feature_names();

/// Noiseless load implied by the formula above for given feature values.
double synth_noiseless_load(const SynthConfig& cfg, long t, int month, double avg_temp, double off_days);

Dataset synthesize(const SynthConfig& config);

}  // namespace eclf
