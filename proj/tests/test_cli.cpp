#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "commands.hpp"
#include "eclf/fixtures.hpp"
#include "eclf/synth.hpp"

namespace fs = std::filesystem;
using eclf::cli::run_cli;
using eclf::cli::sha256_file;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "eclf");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("eclf_cli_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const std::vector<std::string> kFast{"--hidden", "6", "--epochs", "8", "--lr", "0.01", "--n_estimators", "40"};

std::vector<std::string> with_fast(std::vector<std::string> args) {
    args.insert(args.end(), kFast.begin(), kFast.end());
    return args;
}

fs::path synth_into(const fs::path& dir, const std::string& noise = "0.02") {
    const auto path = dir / "data.csv";
    REQUIRE(cli({"--out-dir", dir.string(), "--out", path.string(), "--noise_sd", noise, "synth"}).code == 0);
    return path;
}

void check_error_line(const Run& r, const std::string& command) {
    CHECK(r.code != 0);
    CHECK(r.err.find('\n') == r.err.size() - 1);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["command"] == command);
    CHECK(j["error"].is_string());
    CHECK(j["message"].is_string());
}

}  // namespace

TEST_CASE("synth is deterministic and well formed") {
    const auto a = scratch("synth_a");
    const auto b = scratch("synth_b");
    REQUIRE(cli({"--out-dir", a.string(), "synth"}).code == 0);
    REQUIRE(cli({"--out-dir", b.string(), "--seed", "42", "synth"}).code == 0);
    CHECK(sha256_file(a / "dataset.csv") == sha256_file(b / "dataset.csv"));
    const auto text = read(a / "dataset.csv");
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("date,load,off_days,avg_temp", 0) == 0);
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 108);
    CHECK(eclf::parse_dataset(text).load.start() == eclf::YearMonth{2013, 1});

    REQUIRE(cli({"--out-dir", b.string(), "--seed", "43", "synth"}).code == 0);
    CHECK(sha256_file(a / "dataset.csv") != sha256_file(b / "dataset.csv"));

    const auto m = nlohmann::json::parse(read(a / "synth.manifest.json"));
    CHECK(m["command"] == "synth");
    CHECK(m["seed"] == 42);
    CHECK(m["config"]["synth"]["years"] == "9");
    CHECK(m["artifacts"][0]["path"] == "dataset.csv");
    CHECK(m["artifacts"][0]["sha256"] == sha256_file(a / "dataset.csv"));
    CHECK(m["artifacts"][0]["bytes"] == fs::file_size(a / "dataset.csv"));
    CHECK(m["generator"]["rows"] == 108);
    CHECK(m["generator"]["formula"].get<std::string>().find("profile[month]") != std::string::npos);
}

TEST_CASE("noise-free synth follows the generator formula") {
    const auto dir = scratch("synth_clean");
    const auto path = synth_into(dir, "0");
    const auto ds = eclf::parse_dataset(read(path));
    const eclf::SynthConfig cfg;
    const auto temp = ds.features.column("avg_temp");
    const auto off = ds.features.column("off_days");
    for (Eigen::Index t = 0; t < ds.load.size(); ++t) {
        const auto month = ds.load.start().plus(t).month;
        CHECK(ds.load[t] == doctest::Approx(eclf::synth_noiseless_load(cfg, t, month, temp[t], off[t])).epsilon(1e-9));
    }
}

TEST_CASE("decompose and forecast artifacts are additive") {
    const auto dir = scratch("pipeline");
    const auto data = synth_into(dir);
    REQUIRE(cli({"--input", data.string(), "--out-dir", dir.string(), "decompose"}).code == 0);
    std::istringstream dec(read(dir / "decomposition.csv"));
    std::string line;
    std::getline(dec, line);
    CHECK(line == "date,observed,seasonal,trend,remainder");
    int rows = 0;
    while (std::getline(dec, line)) {
        double v[4];
        CHECK(std::sscanf(line.c_str(), "%*7s,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3]) == 4);
        CHECK(std::abs(v[0] - v[1] - v[2] - v[3]) <= 1e-6 * std::abs(v[0]));
        ++rows;
    }
    CHECK(rows == 108);

    const auto r = cli(with_fast({"--input", data.string(), "--out-dir", dir.string(), "forecast"}));
    REQUIRE(r.code == 0);
    CHECK(r.out.find("forecast.csv") != std::string::npos);
    std::istringstream fc(read(dir / "forecast.csv"));
    std::getline(fc, line);
    CHECK(line == "date,s_hat,t_hat,r_hat,y_hat");
    rows = 0;
    while (std::getline(fc, line)) {
        double v[4];
        CHECK(std::sscanf(line.c_str(), "%*7s,%lf,%lf,%lf,%lf", &v[0], &v[1], &v[2], &v[3]) == 4);
        CHECK(std::abs(v[0] + v[1] + v[2] - v[3]) <= 1e-9 * std::abs(v[3]) + 1e-9);
        ++rows;
    }
    CHECK(rows == 12);
    for (const auto* f : {"trend_gbt.json", "trend_lstm.json", "random_gbt.json", "random_lstm.json"}) {
        CHECK(fs::exists(dir / "models" / f));
    }
    const auto diag = nlohmann::json::parse(read(dir / "diagnostics.json"));
    CHECK(diag["holdout"]["mape"].get<double>() > 0.0);
    const auto m = nlohmann::json::parse(read(dir / "forecast.manifest.json"));
    CHECK(m["inputs"][0]["sha256"] == sha256_file(data));
    CHECK(m["split"] == "2021-01");
    CHECK(m["config"]["lstm"]["hidden"] == "6");
}

TEST_CASE("forecast reruns are byte identical") {
    const auto dir = scratch("rerun");
    const auto data = synth_into(dir);
    const auto a = dir / "a";
    const auto b = dir / "b";
    REQUIRE(cli(with_fast({"--input", data.string(), "--out-dir", a.string(), "forecast"})).code == 0);
    REQUIRE(cli(with_fast({"--input", data.string(), "--out-dir", b.string(), "--parallel", "false", "forecast"})).code ==
            0);
    CHECK(sha256_file(a / "forecast.csv") == sha256_file(b / "forecast.csv"));
    CHECK(sha256_file(a / "models" / "trend_gbt.json") == sha256_file(b / "models" / "trend_gbt.json"));
}

TEST_CASE("config file with command-line overrides") {
    const auto dir = scratch("config");
    const auto data = synth_into(dir);
    const auto cfg = dir / "run.cfg";
    write(cfg, "[run]\ninput = " + data.string() + "\nout_dir = " + dir.string() +
                   "\n\n[select]  # features\ncomponent = trend\nkeep_fraction = 0.25\n");
    REQUIRE(cli({"--config", cfg.string(), "--keep_fraction", "1", "select-features"}).code == 0);
    CHECK(fs::exists(dir / "selection_trend.json"));
    CHECK_FALSE(fs::exists(dir / "selection_random.json"));
    const auto sel = nlohmann::json::parse(read(dir / "selection_trend.json"));
    CHECK(sel["selected"].size() == sel["screened"].size());
    const auto m = nlohmann::json::parse(read(dir / "select-features.manifest.json"));
    CHECK(m["config"]["select"]["keep_fraction"] == "1");
}

TEST_CASE("ablate writes the four variants in order") {
    const auto dir = scratch("ablate");
    const auto data = synth_into(dir);
    REQUIRE(cli(with_fast({"--input", data.string(), "--out-dir", dir.string(), "--svg", "ablate"})).code == 0);
    std::istringstream in(read(dir / "ablation.csv"));
    std::vector<std::string> variants;
    std::string line;
    std::getline(in, line);
    CHECK(line == "variant,mape,mae");
    while (std::getline(in, line)) variants.push_back(line.substr(0, line.find(',')));
    CHECK(variants == std::vector<std::string>{"ECLF", "EC-Neither", "EC-RC", "EC-TC"});
    CHECK(read(dir / "ablation.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("evaluate on the embedded and on-disk fixtures") {
    const auto dir = scratch("evaluate");
    REQUIRE(cli({"--fixtures", "table1_d1.csv", "--out-dir", dir.string(), "evaluate"}).code == 0);
    const auto csv = read(dir / "report.csv");
    CHECK(csv.find("\nF-rank,") != std::string::npos);
    CHECK(csv.rfind("row,X-12-ARIMA,", 0) == 0);
    const auto embedded = sha256_file(dir / "report.json");
    const auto m = nlohmann::json::parse(read(dir / "evaluate.manifest.json"));
    CHECK(m["inputs"].empty());

    const auto file = dir / "table.csv";
    write(file, std::string(*eclf::fixtures::by_name("table1_d1.csv")));
    REQUIRE(cli({"--fixtures", file.string(), "--out-dir", dir.string(), "evaluate"}).code == 0);
    CHECK(sha256_file(dir / "report.json") == embedded);
    CHECK(nlohmann::json::parse(read(dir / "evaluate.manifest.json"))["inputs"].size() == 1);
}

TEST_CASE("failures are reported as one JSON line") {
    const auto dir = scratch("errors");
    auto r = cli({"--nonsense", "1", "synth"});
    CHECK(r.code == 2);
    check_error_line(r, "eclf");

    r = cli({"--input", (dir / "missing.csv").string(), "--out-dir", dir.string(), "forecast"});
    CHECK(r.code == 1);
    check_error_line(r, "forecast");
    CHECK(nlohmann::json::parse(r.err)["error"] == "IoError");

    const auto cfg = dir / "bad.cfg";
    write(cfg, "[lstm]\nn_estimators = 5\n");
    r = cli({"--config", cfg.string(), "--out-dir", dir.string(), "synth"});
    check_error_line(r, "synth");
    CHECK(nlohmann::json::parse(r.err)["error"] == "ConfigError");

    write(cfg, "[run]\ncolour = blue\n");
    check_error_line(cli({"--config", cfg.string(), "synth"}), "synth");

    r = cli({"--out-dir", dir.string(), "--variant", "EC-XX", "--input", "x.csv", "forecast"});
    check_error_line(r, "forecast");

    r = cli({"--out-dir", dir.string(), "--years", "1", "synth"});
    check_error_line(r, "synth");

    const auto gap = dir / "gap.csv";
    write(gap, "date,load,a\n2013-01,1,1\n2013-03,1,1\n");
    r = cli({"--input", gap.string(), "--out-dir", dir.string(), "decompose"});
    check_error_line(r, "decompose");
    CHECK(nlohmann::json::parse(r.err)["error"] == "GapError");

    check_error_line(cli({"--fixtures", "nope.csv", "--out-dir", dir.string(), "evaluate"}), "evaluate");
    check_error_line(cli({}), "eclf");
}
