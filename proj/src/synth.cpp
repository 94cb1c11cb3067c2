#include "eclf/synth.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

namespace eclf {

void SynthConfig::validate() const {
    if (years < 3) throw ConfigError("synth needs at least 3 years");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw ConfigError("noise_sd must be >= 0");
}

const std::vector<std::string>& canonical_feature_names() {
    static const std::vector<std::string> names{
        "off_days", "avg_temp",    "max_temp",   "min_temp",  "humidity",  "wind_speed",
        "rainfall", "air_pressure", "cloudiness", "month_sin", "month_cos", "holiday_count"};
    return names;
}

double synth_noiseless_load(const SynthConfig& cfg, long t, int month, double avg_temp, double off_days) {
    const double dt = avg_temp - cfg.comfort_temp;
    return cfg.base + cfg.slope * static_cast<double>(t) + cfg.profile[static_cast<std::size_t>(month - 1)] +
           cfg.temp_coeff * dt * dt + cfg.off_day_coeff * (off_days - cfg.mean_off_days);
}

namespace {

int weekend_days(const YearMonth& ym) {
    using namespace std::chrono;
    const year_month_day first{year{ym.year}, month{static_cast<unsigned>(ym.month)}, day{1}};
    const auto last = year_month_day_last{year{ym.year}, month_day_last{month{static_cast<unsigned>(ym.month)}}};
    const unsigned days = static_cast<unsigned>(last.day());
    const unsigned wd0 = weekday{sys_days{first}}.c_encoding();
    int count = 0;
    for (unsigned d = 0; d < days; ++d) {
        const unsigned wd = (wd0 + d) % 7;
        if (wd == 0 || wd == 6) ++count;
    }
    return count;
}

}  // namespace

Dataset synthesize(const SynthConfig& cfg) {
    cfg.validate();
    const Eigen::Index n = static_cast<Eigen::Index>(cfg.years) * 12;
    const auto& names = canonical_feature_names();
    Eigen::MatrixXd feats(n, static_cast<Eigen::Index>(names.size()));
    Eigen::VectorXd noiseless(n);

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution festival_in_january(0.3);

    constexpr double two_pi = 2.0 * std::numbers::pi;
    int festival_month = 2;
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto ym = cfg.start.plus(t);
        const int m = ym.month;
        if (m == 1) festival_month = festival_in_january(rng) ? 1 : 2;
        const double phase = two_pi * (m - 1) / 12.0;
        const double wet_phase = two_pi * (m - 4) / 12.0;

        int holidays = 0;
        if (m == 1) holidays += 1;
        if (m == festival_month) holidays += 3;
        if (m == 4 || m == 6) holidays += 1;
        if (m == 5) holidays += 2;
        if (m == 10) holidays += 3;
        const double off_days = weekend_days(ym) + holidays;

        const double avg_temp = 16.0 - 12.0 * std::cos(phase) + 1.5 * unit(rng);
        const double max_temp = avg_temp + 5.0 + 0.5 * unit(rng);
        const double min_temp = avg_temp - 5.0 + 0.5 * unit(rng);
        const double humidity = 70.0 + 10.0 * std::sin(wet_phase) + 3.0 * unit(rng);
        const double wind = std::max(0.0, 3.0 + 0.5 * unit(rng));
        const double rain = std::max(0.0, 80.0 + 60.0 * std::sin(wet_phase) + 20.0 * unit(rng));
        const double pressure = 1013.0 + 8.0 * std::cos(phase) + 2.0 * unit(rng);
        const double cloud = 50.0 + 10.0 * std::sin(wet_phase) + 5.0 * unit(rng);

        feats.row(t) << off_days, avg_temp, max_temp, min_temp, humidity, wind, rain, pressure, cloud,
            std::sin(phase), std::cos(phase), static_cast<double>(holidays);
        noiseless[t] = synth_noiseless_load(cfg, static_cast<long>(t), m, avg_temp, off_days);
    }

    const double sd = cfg.noise_sd * noiseless.mean();
    Eigen::VectorXd load = noiseless;
    if (sd > 0.0) {
        for (Eigen::Index t = 0; t < n; ++t) load[t] += sd * unit(rng);
    }
    return {MonthlySeries(cfg.start, std::move(load)), FeatureMatrix(cfg.start, names, std::move(feats))};
}

}  // namespace eclf
