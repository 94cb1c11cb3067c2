#include "eclf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "eclf/evalstat.hpp"

namespace eclf {

const char* to_string(Variant v) {
    switch (v) {
        case Variant::ECLF: return "ECLF";
        case Variant::ECNeither: return "EC-Neither";
        case Variant::ECRC: return "EC-RC";
        case Variant::ECTC: return "EC-TC";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    for (auto v : kAllVariants) {
        if (s == to_string(v)) return v;
    }
    throw ConfigError("unknown variant '" + s + "' (expected ECLF, EC-Neither, EC-RC or EC-TC)");
}

bool corrects(Variant v, Component c) {
    switch (v) {
        case Variant::ECLF: return true;
        case Variant::ECNeither: return false;
        case Variant::ECRC: return c == Component::Random;
        case Variant::ECTC: return c == Component::Trend;
    }
    return false;
}

void EclfConfig::validate() const {
    stl.validate();
    if (stl.period != 12) throw ConfigError("the pipeline forecasts monthly data; stl period must be 12");
    if (!(pcc_threshold >= 0.0 && pcc_threshold <= 1.0)) throw ConfigError("pcc_threshold must be in [0, 1]");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ConfigError("keep_fraction must be in (0, 1]");
    for (const auto* l : {&lstm_trend, &lstm_random}) {
        if (l->hidden < 1) throw ConfigError("lstm hidden must be positive");
        if (l->window < 1) throw ConfigError("lstm window must be positive");
        l->adam.validate();
    }
    gbt_trend.validate();
    gbt_random.validate();
    if (stack_folds < 1) throw ConfigError("stack_folds must be positive");
    if (horizon < 1 || horizon > 12) throw ConfigError("horizon must be between 1 and 12 months");
}

std::vector<std::string> preset_trend_features() { return {"month_sin", "month_cos", "avg_temp", "off_days"}; }
std::vector<std::string> preset_random_features() { return {"avg_temp", "off_days"}; }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t z = base ^ (tag * 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kTrendTag = 0x7472656e64;   // "trend"
constexpr std::uint64_t kRandomTag = 0x72616e646f6d; // "random"
constexpr std::uint64_t kSelectTag = 0x73656c656374; // "select"
constexpr Eigen::Index kMinStage2Rows = 12;
constexpr Eigen::Index kMinTrainingMonths = 36;

Eigen::MatrixXd input_matrix(const Eigen::Ref<const Eigen::VectorXd>& component,
                             const Eigen::Ref<const Eigen::MatrixXd>& features) {
    Eigen::MatrixXd x(component.size(), 1 + features.cols());
    x.col(0) = component;
    x.rightCols(features.cols()) = features;
    return x;
}

template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (Error& e) {
        e.add_context(stage);
        throw;
    }
}

}  // namespace

std::uint64_t selection_seed(std::uint64_t base) { return derive_seed(base, kSelectTag); }

LstmForecaster train_lstm_forecaster(const Eigen::Ref<const Eigen::VectorXd>& component,
                                     const Eigen::Ref<const Eigen::MatrixXd>& features,
                                     const LstmStageConfig& config, std::uint64_t seed) {
    const auto n = component.size();
    const auto lookback = static_cast<Eigen::Index>(config.window);
    if (features.rows() != n) throw AlignmentError("lstm component and features differ in length");
    if (n <= lookback) throw InsufficientDataError("lstm needs more months than its window");

    const Eigen::MatrixXd raw = input_matrix(component, features);
    LstmForecaster model{LstmParams<double>{}, Standardizer::fit(raw), config.window, {}};
    Eigen::MatrixXd z(raw.rows(), raw.cols());
    for (Eigen::Index i = 0; i < raw.rows(); ++i) z.row(i) = model.scaler.apply(raw.row(i));

    std::vector<Sample<double>> samples;
    samples.reserve(static_cast<std::size_t>(n - lookback));
    for (Eigen::Index t = lookback; t < n; ++t) {
        samples.push_back({z.middleRows(t - lookback, lookback), z(t, 0)});
    }
    auto init = LstmParams<double>::random(config.hidden, raw.cols(), seed);
    AdamConfig adam = config.adam;
    adam.seed = derive_seed(seed, 0xADA);
    auto trained = adam_train(std::move(init), samples, adam);
    model.params = std::move(trained.params);
    model.epoch_losses = std::move(trained.epoch_losses);
    return model;
}

Eigen::VectorXd recursive_forecast(const LstmForecaster& model, const Eigen::Ref<const Eigen::VectorXd>& history,
                                   const Eigen::Ref<const Eigen::MatrixXd>& features, Eigen::Index horizon) {
    const auto lookback = static_cast<Eigen::Index>(model.window);
    const auto n = history.size();
    if (n < lookback) throw InsufficientDataError("history shorter than the lstm window");
    if (features.rows() < n + horizon - 1) throw RangeError("features do not cover the forecast lags");

    Eigen::VectorXd comp(n + horizon);
    comp.head(n) = history;
    Window<double> window(lookback, features.cols() + 1);
    for (Eigen::Index h = 0; h < horizon; ++h) {
        const auto t = n + h;
        for (Eigen::Index k = 0; k < lookback; ++k) {
            const auto lag = t - lookback + k;
            Eigen::RowVectorXd raw(features.cols() + 1);
            raw[0] = comp[lag];
            raw.tail(features.cols()) = features.row(lag);
            window.row(k) = model.scaler.apply(raw);
        }
        comp[t] = model.scaler.invert(lstm_forward(model.params, window), 0);
    }
    return comp.tail(horizon);
}

nlohmann::json to_json(const LstmForecaster& model) {
    return {{"window", model.window}, {"scaler", to_json(model.scaler)}, {"params", to_json(model.params)}};
}

LstmForecaster lstm_forecaster_from_json(const nlohmann::json& j) {
    try {
        LstmForecaster m;
        m.window = j.at("window").get<int>();
        m.scaler = standardizer_from_json(j.at("scaler"));
        m.params = lstm_params_from_json(j.at("params"));
        if (m.window < 1) throw ParseError("LSTM window must be positive");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed LSTM model: ") + e.what());
    }
}

MonthlySeries seasonal_naive(const MonthlySeries& seasonal, const YearMonth& horizon_start, int horizon) {
    if (horizon < 1) throw RangeError("horizon must be positive");
    Eigen::VectorXd out(horizon);
    for (int h = 0; h < horizon; ++h) {
        const auto source = horizon_start.plus(h - 12);
        if (!seasonal.contains(source)) {
            throw RangeError("seasonal history does not cover " + source.to_string());
        }
        out[h] = seasonal.at(source);
    }
    return {horizon_start, std::move(out)};
}

void validate_folds(const std::vector<FoldRecord>& folds) {
    for (std::size_t k = 0; k < folds.size(); ++k) {
        const auto& f = folds[k];
        if (!(f.train_start <= f.train_end && f.train_end < f.predict_from && f.predict_from <= f.predict_to)) {
            throw AlignmentError("fold " + std::to_string(k) + " trains on months it predicts");
        }
        if (k > 0 && folds[k - 1].predict_to >= f.predict_from) {
            throw AlignmentError("fold " + std::to_string(k) + " overlaps its predecessor");
        }
    }
}

StackResult error_correction_stack(const MonthlySeries& component, const FeatureMatrix& features,
                                   const std::vector<std::string>& selected, const EclfConfig& cfg,
                                   Component which, int horizon) {
    if (selected.empty()) throw ConfigError("no features selected for the stack");
    if (features.start() != component.start() || features.rows() < component.size() + horizon) {
        throw AlignmentError("features must start with the component and cover the horizon");
    }
    const auto n = component.size();
    const auto h = static_cast<Eigen::Index>(horizon);
    const auto sel = features.select(selected).slice(component.start(), component.end().plus(horizon));
    const Eigen::MatrixXd& x = sel.data();
    const Eigen::VectorXd& y = component.values();
    const bool corrected = corrects(cfg.variant, which);
    const auto& lstm_cfg = which == Component::Trend ? cfg.lstm_trend : cfg.lstm_random;
    const auto& gbt_cfg = which == Component::Trend ? cfg.gbt_trend : cfg.gbt_random;
    const auto stack_seed = derive_seed(cfg.seed, which == Component::Trend ? kTrendTag : kRandomTag);

    StackResult res{which, corrected, MonthlySeries(component.end().next(), Eigen::VectorXd::Zero(h)),
                    selected, {}, std::vector<std::optional<double>>(static_cast<std::size_t>(n + h)),
                    component.start(), 0, std::nullopt, {}, {}};
    const auto horizon_start = component.end().next();

    if (!corrected) {
        res.gbt = fit_gbt(x.topRows(n), y, selected, gbt_cfg, stack_seed);
        res.stage2_rows = static_cast<int>(n);
        res.forecast = MonthlySeries(horizon_start, predict_matrix(res.gbt, x.bottomRows(h)));
        return res;
    }

    // Expanding-window cross-fit: `folds` blocks of `h` months at the end of
    // the training span, each predicted by a learner that saw only earlier months.
    const auto lookback = static_cast<Eigen::Index>(lstm_cfg.window);
    const auto max_folds = (n - lookback - kMinStage2Rows) / h;
    const auto folds = std::min<Eigen::Index>(cfg.stack_folds, max_folds);
    if (folds < 1 || folds * h < kMinStage2Rows) {
        throw InsufficientDataError("training span too short for " + std::to_string(kMinStage2Rows) +
                                    " cross-fit rows (have " + std::to_string(n) + " months)");
    }
    const auto crossfit_begin = n - folds * h;
    for (Eigen::Index k = 0; k < folds; ++k) {
        const auto origin = crossfit_begin + k * h;
        FoldRecord rec{component.start(), component.start().plus(origin - 1), component.start().plus(origin),
                       component.start().plus(origin + h - 1)};
        const auto learner = train_lstm_forecaster(y.head(origin), x.topRows(origin), lstm_cfg,
                                                   derive_seed(stack_seed, static_cast<std::uint64_t>(k + 1)));
        const Eigen::VectorXd pred = recursive_forecast(learner, y.head(origin), x.topRows(origin + h), h);
        for (Eigen::Index i = 0; i < h; ++i) res.stage1[static_cast<std::size_t>(origin + i)] = pred[i];
        res.fold_final_losses.push_back(learner.epoch_losses.back());
        res.folds.push_back(rec);
    }
    validate_folds(res.folds);

    auto final_learner = train_lstm_forecaster(y, x.topRows(n), lstm_cfg, stack_seed);
    const Eigen::VectorXd horizon_stage1 = recursive_forecast(final_learner, y, x, h);
    for (Eigen::Index i = 0; i < h; ++i) res.stage1[static_cast<std::size_t>(n + i)] = horizon_stage1[i];
    res.lstm = std::move(final_learner);

    // Stage 2: selected features plus the stage-1 column.
    const auto rows = folds * h;
    Eigen::MatrixXd train_x(rows, x.cols() + 1);
    train_x.leftCols(x.cols()) = x.middleRows(crossfit_begin, rows);
    for (Eigen::Index i = 0; i < rows; ++i) train_x(i, x.cols()) = *res.stage1[static_cast<std::size_t>(crossfit_begin + i)];
    auto names = selected;
    names.push_back(std::string(to_string(which)) + "_stage1");
    res.gbt = fit_gbt(train_x, y.segment(crossfit_begin, rows), names, gbt_cfg, stack_seed);
    res.stage2_rows = static_cast<int>(rows);

    Eigen::MatrixXd horizon_x(h, x.cols() + 1);
    horizon_x.leftCols(x.cols()) = x.bottomRows(h);
    horizon_x.col(x.cols()) = horizon_stage1;
    res.forecast = MonthlySeries(horizon_start, predict_matrix(res.gbt, horizon_x));
    return res;
}

YearMonth default_split(const MonthlySeries& series) { return {series.end().year, 1}; }

ForecastBundle run_eclf(const MonthlySeries& load, const FeatureMatrix& features, const EclfConfig& cfg,
                        const YearMonth& split) {
    cfg.validate();
    const auto train_start = load.start();
    const auto train_months = train_start.months_until(split);
    if (train_months < kMinTrainingMonths) {
        throw InsufficientDataError("split " + split.to_string() + " leaves " + std::to_string(train_months) +
                                    " training months; at least " + std::to_string(kMinTrainingMonths) +
                                    " required");
    }
    if (!load.contains(split.prev())) throw RangeError("load does not reach the month before the split");
    if (features.start() > train_start) throw RangeError("features start after the load series");
    const auto available = split.months_until(features.end()) + 1;
    if (available < 1) throw RangeError("features do not cover any month after the split");
    const int horizon = static_cast<int>(std::min<long>(cfg.horizon, available));
    const auto horizon_end = split.plus(horizon - 1);

    const auto train_load = slice(load, train_start, split.prev());
    const auto feats = features.slice(train_start, horizon_end);
    const auto train_feats = feats.slice(train_start, split.prev());

    auto decomposition = in_stage("decompose", [&] { return stl_decompose(train_load, cfg.stl); });

    std::optional<FeatureSelection> trend_sel;
    std::optional<FeatureSelection> random_sel;
    std::vector<std::string> trend_features = cfg.trend_features;
    std::vector<std::string> random_features = cfg.random_features;
    in_stage("select-features", [&] {
        const auto sel_seed = selection_seed(cfg.seed);
        if (trend_features.empty()) {
            trend_sel = select_features(train_feats, decomposition.trend, Component::Trend, cfg.pcc_threshold,
                                        cfg.keep_fraction, sel_seed);
            trend_features = trend_sel->selected;
        }
        if (random_features.empty()) {
            random_sel = select_features(train_feats, decomposition.remainder, Component::Random,
                                         cfg.pcc_threshold, cfg.keep_fraction, sel_seed);
            random_features = random_sel->selected;
        }
        for (const auto& f : trend_features) feats.column_index(f);
        for (const auto& f : random_features) feats.column_index(f);
    });

    auto s_hat = in_stage("seasonal-naive", [&] { return seasonal_naive(decomposition.seasonal, split, horizon); });

    auto run_trend = [&] {
        return in_stage("trend-stack", [&] {
            return error_correction_stack(decomposition.trend, feats, trend_features, cfg, Component::Trend, horizon);
        });
    };
    auto run_random = [&] {
        return in_stage("random-stack", [&] {
            return error_correction_stack(decomposition.remainder, feats, random_features, cfg, Component::Random,
                                          horizon);
        });
    };
    std::optional<StackResult> trend;
    std::optional<StackResult> random;
    if (cfg.parallel) {
        auto fut = std::async(std::launch::async, run_trend);
        random = run_random();
        trend = fut.get();
    } else {
        trend = run_trend();
        random = run_random();
    }

    auto y_hat = reconstruct(s_hat, trend->forecast, random->forecast);
    ForecastBundle bundle{s_hat,         trend->forecast, random->forecast,   std::move(y_hat),
                          std::move(decomposition), std::move(trend_sel), std::move(random_sel),
                          std::move(*trend), std::move(*random), cfg.variant, split};
    return bundle;
}

namespace {

nlohmann::json stack_json(const StackResult& s) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : s.folds) {
        folds.push_back({{"train_start", f.train_start.to_string()},
                         {"train_end", f.train_end.to_string()},
                         {"predict_from", f.predict_from.to_string()},
                         {"predict_to", f.predict_to.to_string()}});
    }
    std::size_t populated = 0;
    for (const auto& v : s.stage1) populated += v.has_value() ? 1 : 0;
    nlohmann::json j{{"component", to_string(s.component)},
                     {"corrected", s.corrected},
                     {"features", s.features},
                     {"folds", folds},
                     {"stage1_rows", populated},
                     {"stage2_rows", s.stage2_rows},
                     {"gbt_train_rmse", s.gbt.train_rmse.empty() ? 0.0 : s.gbt.train_rmse.back()},
                     {"fold_final_losses", s.fold_final_losses}};
    if (s.lstm) {
        j["lstm_first_epoch_loss"] = s.lstm->epoch_losses.front();
        j["lstm_final_epoch_loss"] = s.lstm->epoch_losses.back();
    }
    return j;
}

}  // namespace

nlohmann::json diagnostics_json(const ForecastBundle& b) {
    nlohmann::json j{{"variant", to_string(b.variant)},
                     {"split", b.split.to_string()},
                     {"horizon", b.y_hat.size()},
                     {"trend", stack_json(b.trend)},
                     {"random", stack_json(b.random)}};
    if (b.trend_selection) j["trend_selection"] = to_json(*b.trend_selection);
    if (b.random_selection) j["random_selection"] = to_json(*b.random_selection);
    return j;
}

std::vector<AblationRow> run_ablation(const MonthlySeries& load, const FeatureMatrix& features,
                                      const EclfConfig& cfg, const YearMonth& split) {
    std::vector<std::future<ForecastBundle>> jobs;
    for (auto v : kAllVariants) {
        auto vc = cfg;
        vc.variant = v;
        jobs.push_back(std::async(cfg.parallel ? std::launch::async : std::launch::deferred,
                                  [&load, &features, vc, split] { return run_eclf(load, features, vc, split); }));
    }
    std::vector<AblationRow> rows;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto bundle = jobs[i].get();
        const auto& y_hat = bundle.y_hat;
        if (!load.contains(y_hat.end())) throw RangeError("load does not cover the forecast horizon");
        const Eigen::VectorXd actual = slice(load, y_hat.start(), y_hat.end()).values();
        const double p = mape(actual, y_hat.values());
        const double a = mae(actual, y_hat.values());
        rows.push_back({kAllVariants[i], std::move(bundle), p, a});
    }
    return rows;
}

}  // namespace eclf
