#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace eclf::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const KeySpec* find_key(const std::string& name) {
    for (const auto& k : RunConfig::keys()) {
        if (k.name == name) return &k;
    }
    return nullptr;
}

}  // namespace

const std::vector<KeySpec>& RunConfig::keys() {
    static const std::vector<KeySpec> specs{
        {"seed", "run", "42", "random seed"},
        {"input", "run", "", "dataset CSV (date,load,<features...>)"},
        {"out_dir", "run", "out", "directory for artifacts"},
        {"svg", "run", "false", "also write an SVG chart"},

        {"period", "stl", "12", "seasonal period"},
        {"seasonal_window", "stl", "7", "cycle-subseries LOESS window (odd, >= 7)"},
        {"trend_window", "stl", "23", "trend LOESS window (odd, > period)"},
        {"lowpass_window", "stl", "13", "low-pass LOESS window (odd, >= period)"},
        {"robust_iterations", "stl", "1", "outer robustness iterations"},
        {"inner_iterations", "stl", "2", "inner loop passes"},

        {"component", "select", "both", "trend, random or both"},
        {"pcc_threshold", "select", "0.3", "minimum |pcc| for screening"},
        {"keep_fraction", "select", "0.5", "fraction of screened features kept by importance"},
        {"trend_features", "select", "", "fixed trend features (comma list, 'preset' for the published set)"},
        {"random_features", "select", "", "fixed random features (comma list, 'preset' for the published set)"},

        {"hidden", "lstm", "50", "hidden units"},
        {"window", "lstm", "12", "lookback months"},
        {"lr", "lstm", "0.001", "Adam learning rate"},
        {"beta1", "lstm", "0.9", "Adam beta1"},
        {"beta2", "lstm", "0.999", "Adam beta2"},
        {"epsilon", "lstm", "1e-08", "Adam epsilon"},
        {"epochs", "lstm", "120", "training epochs"},
        {"batch_size", "lstm", "12", "mini-batch size"},

        {"n_estimators", "gbt", "300", "boosting rounds"},
        {"max_depth", "gbt", "2", "tree depth"},
        {"learning_rate", "gbt", "0.11", "shrinkage"},
        {"lambda", "gbt", "1", "L2 leaf penalty"},
        {"gamma", "gbt", "0", "per-leaf penalty"},
        {"min_child_weight", "gbt", "1", "minimum hessian per child"},

        {"variant", "pipeline", "ECLF", "ECLF, EC-Neither, EC-RC or EC-TC"},
        {"stack_folds", "pipeline", "4", "cross-fit folds for stage-1 predictions"},
        {"horizon", "pipeline", "12", "forecast months (1-12)"},
        {"parallel", "pipeline", "true", "train independent stacks and variants concurrently"},
        {"split", "pipeline", "", "first forecast month YYYY-MM (default: January of the final year)"},

        {"out", "synth", "", "output CSV path (default: <out_dir>/dataset.csv)"},
        {"years", "synth", "9", "years of monthly data"},
        {"noise_sd", "synth", "0.02", "noise sd as a fraction of mean load"},
        {"start", "synth", "2013-01", "first month"},

        {"fixtures", "evaluate", "", "MAPE table CSV (model,m1..mK)"},
        {"reference", "evaluate", "ECLF", "reference model"},
        {"alpha", "evaluate", "0.05", "significance level"},
    };
    return specs;
}

RunConfig::RunConfig() {
    for (const auto& k : keys()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    load_text(ss.str(), path);
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            const bool known = std::any_of(keys().begin(), keys().end(),
                                           [&](const KeySpec& k) { return k.section == section; });
            if (!known) throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto* spec = find_key(key);
        if (!spec) throw ConfigError(where + ": unknown key '" + key + "'");
        if (!section.empty() && spec->section != section) {
            throw ConfigError(where + ": key '" + key + "' belongs to [" + spec->section + "], not [" + section + "]");
        }
        values_[key] = trim(line.substr(eq + 1));
    }
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

int RunConfig::get_int(const std::string& key) const {
    const auto& s = get(key);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError(key + ": expected an integer, got '" + s + "'");
    return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const auto& s = get(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
    }
    return v;
}

double RunConfig::get_double(const std::string& key) const {
    const auto& s = get(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ConfigError(key + ": expected a number, got '" + s + "'");
    }
    return v;
}

bool RunConfig::get_bool(const std::string& key) const {
    const auto& s = get(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no" || s.empty()) return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

EclfConfig RunConfig::eclf() const {
    EclfConfig c;
    c.stl.period = get_int("period");
    c.stl.seasonal_window = get_int("seasonal_window");
    c.stl.trend_window = get_int("trend_window");
    c.stl.lowpass_window = get_int("lowpass_window");
    c.stl.robust_iterations = get_int("robust_iterations");
    c.stl.inner_iterations = get_int("inner_iterations");

    c.pcc_threshold = get_double("pcc_threshold");
    c.keep_fraction = get_double("keep_fraction");
    c.trend_features = get_list("trend_features");
    c.random_features = get_list("random_features");
    if (c.trend_features == std::vector<std::string>{"preset"}) c.trend_features = preset_trend_features();
    if (c.random_features == std::vector<std::string>{"preset"}) c.random_features = preset_random_features();

    LstmStageConfig l;
    l.hidden = get_int("hidden");
    l.window = get_int("window");
    l.adam.lr = get_double("lr");
    l.adam.beta1 = get_double("beta1");
    l.adam.beta2 = get_double("beta2");
    l.adam.epsilon = get_double("epsilon");
    l.adam.epochs = get_int("epochs");
    l.adam.batch_size = get_int("batch_size");
    c.lstm_trend = l;
    c.lstm_random = l;

    GbtConfig g;
    g.n_estimators = get_int("n_estimators");
    g.max_depth = get_int("max_depth");
    g.learning_rate = get_double("learning_rate");
    g.lambda = get_double("lambda");
    g.gamma = get_double("gamma");
    g.min_child_weight = get_double("min_child_weight");
    c.gbt_trend = g;
    c.gbt_random = g;

    c.variant = variant_from_string(get("variant"));
    c.stack_folds = get_int("stack_folds");
    c.horizon = get_int("horizon");
    c.seed = get_u64("seed");
    c.parallel = get_bool("parallel");
    c.validate();
    return c;
}

SynthConfig RunConfig::synth() const {
    SynthConfig s;
    s.seed = get_u64("seed");
    s.years = get_int("years");
    s.noise_sd = get_double("noise_sd");
    s.start = YearMonth::parse(get("start"));
    s.validate();
    return s;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& k : keys()) j[k.section][k.name] = values_.at(k.name);
    return j;
}

}  // namespace eclf::cli
