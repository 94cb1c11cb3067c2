#include "commands.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "eclf/fixtures.hpp"
#include "eclf/svg.hpp"

namespace fs = std::filesystem;

namespace eclf::cli {

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes and reads back; IoError unless the bytes on disk match.
void write_text(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        out << text;
        out.flush();
        if (!out) throw IoError("write failed for '" + path.string() + "'");
    }
    if (read_text(path) != text) throw IoError("verification failed for '" + path.string() + "'");
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

fs::path out_dir(const RunConfig& c) { return fs::path(c.get("out_dir")); }

fs::path input_path(const RunConfig& c) {
    const auto& in = c.get("input");
    if (in.empty()) throw ConfigError("input is required (--input or [run] input)");
    return fs::path(in);
}

Dataset load_dataset(const RunConfig& c) { return parse_dataset(read_text(input_path(c))); }

YearMonth split_for(const RunConfig& c, const MonthlySeries& load) {
    const auto& s = c.get("split");
    return s.empty() ? default_split(load) : YearMonth::parse(s);
}

std::string display_path(const fs::path& p, const fs::path& base) {
    const auto rel = p.lexically_relative(base);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return p.generic_string();
}

CommandResult finish(const RunConfig& c, const std::string& command, std::vector<fs::path> artifacts,
                     const std::vector<fs::path>& inputs, nlohmann::json extra = nlohmann::json::object()) {
    const auto base = out_dir(c);
    nlohmann::json arts = nlohmann::json::array();
    for (const auto& a : artifacts) {
        arts.push_back({{"path", display_path(a, base)}, {"sha256", sha256_file(a)}, {"bytes", fs::file_size(a)}});
    }
    nlohmann::json ins = nlohmann::json::array();
    for (const auto& i : inputs) ins.push_back({{"path", i.generic_string()}, {"sha256", sha256_file(i)}});
    nlohmann::json m{{"command", command},
                     {"seed", c.get_u64("seed")},
                     {"config", c.to_json()},
                     {"inputs", ins},
                     {"artifacts", arts}};
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    const auto path = base / (command + ".manifest.json");
    write_text(path, dump(m));
    return {std::move(artifacts), path};
}

std::vector<std::string> month_labels(YearMonth start, Eigen::Index n) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(start.plus(i).to_string());
    return out;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void write_svg(const fs::path& path, const std::string& svg) {
    write_text(path, svg);
}

}  // namespace

std::string sha256_file(const fs::path& path) {
    const auto bytes = read_text(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("sha256 failed for '" + path.string() + "'");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

CommandResult cmd_synth(const RunConfig& c) {
    const auto sc = c.synth();
    const auto ds = synthesize(sc);
    const fs::path out = c.get("out").empty() ? out_dir(c) / "dataset.csv" : fs::path(c.get("out"));
    write_text(out, serialize_dataset(ds));
    std::vector<fs::path> artifacts{out};
    if (c.get_bool("svg")) {
        const auto svg_path = fs::path(out).replace_extension(".svg");
        write_svg(svg_path, svg::line_chart({{"load", {{"load", "#1f77b4", to_vec(ds.load.values())}}}},
                                            month_labels(ds.load.start(), ds.load.size())));
    }
    nlohmann::json generator{{"formula",
                              "load_t = base + slope*t + profile[month] + temp_coeff*(avg_temp_t - comfort_temp)^2 + "
                              "off_day_coeff*(off_days_t - mean_off_days) + N(0, noise_sd*mean_noiseless_load)"},
                             {"base", sc.base},
                             {"slope", sc.slope},
                             {"profile", sc.profile},
                             {"temp_coeff", sc.temp_coeff},
                             {"comfort_temp", sc.comfort_temp},
                             {"off_day_coeff", sc.off_day_coeff},
                             {"mean_off_days", sc.mean_off_days},
                             {"rows", ds.load.size()}};
    return finish(c, "synth", artifacts, {}, {{"generator", generator}});
}

CommandResult cmd_decompose(const RunConfig& c) {
    const auto ds = load_dataset(c);
    const auto d = stl_decompose(ds.load, c.eclf().stl);
    std::string csv = "date,observed,seasonal,trend,remainder\n";
    for (Eigen::Index i = 0; i < ds.load.size(); ++i) {
        csv += ds.load.start().plus(i).to_string() + "," + format_number(ds.load[i]) + "," +
               format_number(d.seasonal[i]) + "," + format_number(d.trend[i]) + "," + format_number(d.remainder[i]) +
               "\n";
    }
    const auto out = out_dir(c) / "decomposition.csv";
    write_text(out, csv);
    if (c.get_bool("svg")) {
        write_svg(out_dir(c) / "decomposition.svg",
                  svg::line_chart({{"observed", {{"observed", "#1f77b4", to_vec(ds.load.values())}}},
                                   {"seasonal", {{"seasonal", "#2ca02c", to_vec(d.seasonal.values())}}},
                                   {"trend", {{"trend", "#d62728", to_vec(d.trend.values())}}},
                                   {"remainder", {{"remainder", "#7f7f7f", to_vec(d.remainder.values())}}}},
                                  month_labels(ds.load.start(), ds.load.size())));
    }
    return finish(c, "decompose", {out}, {input_path(c)});
}

CommandResult cmd_select(const RunConfig& c) {
    const auto ds = load_dataset(c);
    const auto cfg = c.eclf();
    const auto split = split_for(c, ds.load);
    if (!ds.load.contains(split.prev()) || split <= ds.load.start()) {
        throw RangeError("split " + split.to_string() + " is outside the load series");
    }
    const auto train = slice(ds.load, ds.load.start(), split.prev());
    const auto feats = ds.features.slice(ds.load.start(), split.prev());
    const auto d = stl_decompose(train, cfg.stl);
    const auto& which = c.get("component");
    std::vector<Component> comps;
    if (which == "both") {
        comps = {Component::Trend, Component::Random};
    } else {
        comps = {component_from_string(which)};
    }
    std::vector<fs::path> artifacts;
    for (auto comp : comps) {
        const auto& target = comp == Component::Trend ? d.trend : d.remainder;
        const auto sel = select_features(feats, target, comp, cfg.pcc_threshold, cfg.keep_fraction,
                                         selection_seed(cfg.seed));
        const auto out = out_dir(c) / (std::string("selection_") + to_string(comp) + ".json");
        write_text(out, dump(to_json(sel)));
        artifacts.push_back(out);
    }
    return finish(c, "select-features", artifacts, {input_path(c)}, {{"split", split.to_string()}});
}

CommandResult cmd_forecast(const RunConfig& c) {
    const auto ds = load_dataset(c);
    const auto cfg = c.eclf();
    const auto split = split_for(c, ds.load);
    const auto b = run_eclf(ds.load, ds.features, cfg, split);

    std::string csv = "date,s_hat,t_hat,r_hat,y_hat\n";
    for (Eigen::Index i = 0; i < b.y_hat.size(); ++i) {
        csv += b.y_hat.start().plus(i).to_string() + "," + format_number(b.s_hat[i]) + "," +
               format_number(b.t_hat[i]) + "," + format_number(b.r_hat[i]) + "," + format_number(b.y_hat[i]) + "\n";
    }
    const auto dir = out_dir(c);
    const auto csv_path = dir / "forecast.csv";
    write_text(csv_path, csv);

    auto diag = diagnostics_json(b);
    if (ds.load.contains(b.y_hat.end())) {
        const Eigen::VectorXd actual = slice(ds.load, b.y_hat.start(), b.y_hat.end()).values();
        diag["holdout"] = {{"mape", mape(actual, b.y_hat.values())}, {"mae", mae(actual, b.y_hat.values())}};
    }
    const auto diag_path = dir / "diagnostics.json";
    write_text(diag_path, dump(diag));

    std::vector<fs::path> artifacts{csv_path, diag_path};
    for (const auto* s : {&b.trend, &b.random}) {
        const std::string name = to_string(s->component);
        const auto gbt_path = dir / "models" / (name + "_gbt.json");
        write_text(gbt_path, dump(to_json(s->gbt)));
        artifacts.push_back(gbt_path);
        if (s->lstm) {
            const auto lstm_path = dir / "models" / (name + "_lstm.json");
            write_text(lstm_path, dump(to_json(*s->lstm)));
            artifacts.push_back(lstm_path);
        }
    }

    if (c.get_bool("svg")) {
        const auto offset = static_cast<double>(ds.load.start().months_until(b.y_hat.start()));
        write_svg(dir / "forecast.svg",
                  svg::line_chart({{"load", {{"observed", "#1f77b4", to_vec(ds.load.values())},
                                             {"y_hat", "#d62728", to_vec(b.y_hat.values()), offset}}}},
                                  month_labels(ds.load.start(), ds.load.size())));
    }
    return finish(c, "forecast", artifacts, {input_path(c)}, {{"split", split.to_string()}});
}

CommandResult cmd_ablate(const RunConfig& c) {
    const auto ds = load_dataset(c);
    const auto cfg = c.eclf();
    const auto split = split_for(c, ds.load);
    const auto rows = run_ablation(ds.load, ds.features, cfg, split);

    std::string csv = "variant,mape,mae\n";
    for (const auto& r : rows) {
        csv += std::string(to_string(r.variant)) + "," + format_number(r.mape) + "," + format_number(r.mae) + "\n";
    }
    const auto out = out_dir(c) / "ablation.csv";
    write_text(out, csv);

    if (c.get_bool("svg")) {
        const auto& first = rows.front().bundle.y_hat;
        const auto from = first.start().plus(-24) < ds.load.start() ? ds.load.start() : first.start().plus(-24);
        const auto observed = slice(ds.load, from, ds.load.end() < first.end() ? ds.load.end() : first.end());
        const auto offset = static_cast<double>(from.months_until(first.start()));
        static const char* colors[] = {"#d62728", "#ff7f0e", "#2ca02c", "#9467bd"};
        std::vector<svg::Track> tracks{{"observed", "#1f77b4", to_vec(observed.values())}};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            tracks.push_back({to_string(rows[i].variant), colors[i % 4], to_vec(rows[i].bundle.y_hat.values()), offset});
        }
        write_svg(out_dir(c) / "ablation.svg",
                  svg::line_chart({{"variants", tracks}}, month_labels(from, observed.size() + 12), 900, 320, 6));
    }
    return finish(c, "ablate", {out}, {input_path(c)}, {{"split", split.to_string()}});
}

CommandResult cmd_evaluate(const RunConfig& c) {
    const auto& name = c.get("fixtures");
    if (name.empty()) throw ConfigError("fixtures is required (--fixtures or [evaluate] fixtures)");
    std::string text;
    std::vector<fs::path> inputs;
    if (fs::exists(name)) {
        text = read_text(name);
        inputs.push_back(name);
    } else if (auto embedded = fixtures::by_name(name)) {
        text = std::string(*embedded);
    } else {
        throw IoError("fixture '" + name + "' not found");
    }
    const auto table = parse_mape_table(text);
    const auto report = build_report(table, c.get("reference"), c.get_double("alpha"));
    const auto dir = out_dir(c);
    const auto json_path = dir / "report.json";
    const auto csv_path = dir / "report.csv";
    write_text(json_path, dump(to_json(report)));
    write_text(csv_path, report_csv(report));
    return finish(c, "evaluate", {json_path, csv_path}, inputs);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::string command = "eclf";
    auto fail = [&](const std::string& kind, const std::string& message, int code) {
        err << nlohmann::json{{"error", kind}, {"command", command}, {"message", message}}.dump() << std::endl;
        return code;
    };

    CLI::App app{"Mid-term monthly load forecasting: decomposition, feature selection, error-correction stacking"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::map<std::string, std::string> overrides;
    app.add_option("--config", config_path, "key=value config file with [section] headers");
    app.add_flag_callback("--svg", [&] { overrides["svg"] = "true"; }, "also write an SVG line chart");
    for (const auto& k : RunConfig::keys()) {
        if (k.name == "svg") continue;
        auto names = "--" + k.name;
        if (k.name == "out_dir") names = "--out-dir,--out_dir";
        std::string help = k.help + " [" + k.section + "]";
        if (!k.default_value.empty()) help += " (default: " + k.default_value + ")";
        app.add_option_function<std::string>(
            names, [&overrides, key = k.name](const std::string& v) { overrides[key] = v; }, help);
    }

    using Fn = CommandResult (*)(const RunConfig&);
    const std::vector<std::tuple<std::string, std::string, Fn>> commands{
        {"synth", "write a synthetic dataset CSV", cmd_synth},
        {"decompose", "STL decomposition of the input load", cmd_decompose},
        {"select-features", "rank and select features for the trend/random components", cmd_select},
        {"forecast", "train the error-correction stacks and forecast the horizon", cmd_forecast},
        {"ablate", "run all four variants and compare holdout MAPE", cmd_ablate},
        {"evaluate", "statistical comparison of a MAPE table against a reference model", cmd_evaluate},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help, fn] : commands) subs.push_back(app.add_subcommand(name, help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail("UsageError", e.what(), 2);
    }

    std::size_t chosen = 0;
    while (chosen < subs.size() && !subs[chosen]->parsed()) ++chosen;
    if (chosen == subs.size()) return fail("UsageError", "no command given", 2);
    command = std::get<0>(commands[chosen]);

    try {
        RunConfig config;
        if (!config_path.empty()) config.load_file(config_path);
        for (const auto& [k, v] : overrides) config.set(k, v);
        const auto result = std::get<2>(commands[chosen])(config);
        for (const auto& a : result.artifacts) out << a.generic_string() << "\n";
        out << result.manifest.generic_string() << "\n";
        return 0;
    } catch (const Error& e) {
        return fail(e.kind(), e.what(), 1);
    } catch (const std::exception& e) {
        return fail("InternalError", e.what(), 1);
    }
}

}  // namespace eclf::cli
