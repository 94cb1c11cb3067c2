#include "eclf/evalstat.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace eclf {

Eigen::Index MapeTable::model_index(std::string_view name) const {
    const auto it = std::find(models.begin(), models.end(), name);
    if (it == models.end()) throw ConfigError("unknown model '" + std::string(name) + "'");
    return static_cast<Eigen::Index>(it - models.begin());
}

MapeTable parse_mape_table(std::string_view csv_text, YearMonth first_month) {
    std::vector<std::vector<std::string>> rows;
    std::size_t pos = 0;
    while (pos < csv_text.size()) {
        auto nl = csv_text.find('\n', pos);
        if (nl == std::string_view::npos) nl = csv_text.size();
        std::string line(csv_text.substr(pos, nl - pos));
        pos = nl + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t p = 0;
        while (true) {
            const auto c = line.find(',', p);
            fields.push_back(line.substr(p, c == std::string::npos ? std::string::npos : c - p));
            if (c == std::string::npos) break;
            p = c + 1;
        }
        rows.push_back(std::move(fields));
    }
    if (rows.size() < 2) throw ParseError("mape table needs a header and at least one model row");
    const auto& header = rows.front();
    if (header.empty() || header[0] != "model" || header.size() < 2) {
        throw ParseError("mape table header must be 'model,m1,...'");
    }
    const auto k = static_cast<Eigen::Index>(header.size() - 1);
    for (Eigen::Index j = 0; j < k; ++j) {
        if (header[static_cast<std::size_t>(j + 1)] != "m" + std::to_string(j + 1)) {
            throw ParseError("mape table column " + std::to_string(j + 2) + " must be m" + std::to_string(j + 1));
        }
    }
    MapeTable t;
    for (Eigen::Index j = 0; j < k; ++j) t.months.push_back(first_month.plus(j));
    t.values.resize(static_cast<Eigen::Index>(rows.size() - 1), k);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (static_cast<Eigen::Index>(f.size()) != k + 1) {
            throw ParseError("mape table row " + std::to_string(r) + " has wrong field count");
        }
        if (std::find(t.models.begin(), t.models.end(), f[0]) != t.models.end()) {
            throw DuplicateError("duplicate model '" + f[0] + "'");
        }
        t.models.push_back(f[0]);
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto& s = f[static_cast<std::size_t>(j + 1)];
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v) || v < 0.0) {
                throw ParseError("mape table row " + std::to_string(r) + ", column m" + std::to_string(j + 1) +
                                 ": invalid value '" + s + "'");
            }
            t.values(static_cast<Eigen::Index>(r - 1), j) = v;
        }
    }
    return t;
}

namespace {

void require_same_length(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size()) throw AlignmentError("sequences differ in length");
    if (a.size() == 0) throw InsufficientDataError("sequences must be nonempty");
}

}  // namespace

double mae(const Eigen::Ref<const Eigen::VectorXd>& actual, const Eigen::Ref<const Eigen::VectorXd>& forecast) {
    require_same_length(actual, forecast);
    return (actual - forecast).cwiseAbs().mean();
}

double mape(const Eigen::Ref<const Eigen::VectorXd>& actual, const Eigen::Ref<const Eigen::VectorXd>& forecast) {
    require_same_length(actual, forecast);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < actual.size(); ++i) {
        if (actual[i] == 0.0) throw DivisionByZeroError("zero actual value at index " + std::to_string(i));
        sum += std::abs((actual[i] - forecast[i]) / actual[i]);
    }
    return 100.0 * sum / static_cast<double>(actual.size());
}

WinLoss win_loss(const Eigen::Ref<const Eigen::VectorXd>& baseline_mapes,
                 const Eigen::Ref<const Eigen::VectorXd>& reference_mapes) {
    if (baseline_mapes.size() != reference_mapes.size()) throw AlignmentError("sequences differ in length");
    WinLoss wl;
    for (Eigen::Index i = 0; i < baseline_mapes.size(); ++i) {
        if (baseline_mapes[i] < reference_mapes[i]) {
            ++wl.wins;
        } else {
            ++wl.losses;
        }
    }
    return wl;
}

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& values) {
    const auto n = values.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    Eigen::VectorXd ranks(n);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (auto k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

std::map<std::string, double> friedman_rank(const MapeTable& table) {
    const auto m = table.values.rows();
    const auto k = table.values.cols();
    Eigen::VectorXd total = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j < k; ++j) total += average_ranks(table.values.col(j));
    std::map<std::string, double> out;
    for (Eigen::Index i = 0; i < m; ++i) out[table.models[static_cast<std::size_t>(i)]] = total[i] / static_cast<double>(k);
    return out;
}

WilcoxonResult wilcoxon_signed_rank(const Eigen::Ref<const Eigen::VectorXd>& baseline,
                                    const Eigen::Ref<const Eigen::VectorXd>& reference) {
    if (baseline.size() != reference.size()) throw AlignmentError("sequences differ in length");
    std::vector<double> d;
    for (Eigen::Index i = 0; i < baseline.size(); ++i) {
        const double diff = baseline[i] - reference[i];
        if (diff != 0.0) d.push_back(diff);
    }
    if (d.empty()) throw DegenerateInputError("all paired differences are zero");
    if (d.size() > 25) throw RangeError("exact signed-rank test limited to n <= 25");

    const auto n = static_cast<Eigen::Index>(d.size());
    Eigen::VectorXd abs_d(n);
    for (Eigen::Index i = 0; i < n; ++i) abs_d[i] = std::abs(d[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd ranks = average_ranks(abs_d);

    // Average ranks are multiples of 1/2, so doubled ranks are integers.
    std::vector<int> doubled(static_cast<std::size_t>(n));
    int w_minus2 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        doubled[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(2.0 * ranks[i]));
        if (d[static_cast<std::size_t>(i)] < 0.0) w_minus2 += doubled[static_cast<std::size_t>(i)];
    }
    const int total2 = std::accumulate(doubled.begin(), doubled.end(), 0);
    // counts[s] = number of sign assignments whose doubled negative rank sum is s
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(total2 + 1), 0);
    counts[0] = 1;
    for (int r : doubled) {
        for (int s = total2; s >= r; --s) counts[static_cast<std::size_t>(s)] += counts[static_cast<std::size_t>(s - r)];
    }
    WilcoxonResult res;
    res.n = static_cast<int>(n);
    res.statistic = 0.5 * w_minus2;
    for (int s = 0; s <= w_minus2; ++s) res.favourable += counts[static_cast<std::size_t>(s)];
    res.p_value = static_cast<double>(res.favourable) / std::ldexp(1.0, static_cast<int>(n));
    return res;
}

double wilcoxon_one_sided(const Eigen::Ref<const Eigen::VectorXd>& baseline,
                          const Eigen::Ref<const Eigen::VectorXd>& reference) {
    return wilcoxon_signed_rank(baseline, reference).p_value;
}

const ModelComparison& EvalReport::comparison(std::string_view model) const {
    for (const auto& c : comparisons) {
        if (c.model == model) return c;
    }
    throw ConfigError("no comparison for model '" + std::string(model) + "'");
}

EvalReport build_report(const MapeTable& table, const std::string& reference, double alpha) {
    if (std::find(table.models.begin(), table.models.end(), reference) == table.models.end()) {
        throw ConfigError("reference model '" + reference + "' not in table");
    }
    if (table.values.rows() != static_cast<Eigen::Index>(table.models.size()) ||
        table.values.cols() != static_cast<Eigen::Index>(table.months.size())) {
        throw AlignmentError("mape table grid does not match its labels");
    }
    EvalReport rep;
    rep.reference = reference;
    rep.alpha = alpha;
    rep.models = table.models;
    rep.f_rank = friedman_rank(table);
    const auto ref_idx = table.model_index(reference);
    const Eigen::VectorXd ref = table.values.row(ref_idx).transpose();
    for (std::size_t i = 0; i < table.models.size(); ++i) {
        const auto& name = table.models[i];
        const Eigen::VectorXd row = table.values.row(static_cast<Eigen::Index>(i)).transpose();
        rep.mean_mape[name] = row.mean();
        if (name == reference) continue;
        ModelComparison c;
        c.model = name;
        c.win_loss = win_loss(row, ref);
        c.p_value = wilcoxon_one_sided(row, ref);
        c.significant = c.p_value < alpha;
        rep.reference_total.wins += c.win_loss.losses;
        rep.reference_total.losses += c.win_loss.wins;
        rep.comparisons.push_back(std::move(c));
    }
    return rep;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& name : report.models) {
        nlohmann::json m{{"model", name},
                         {"mean_mape", report.mean_mape.at(name)},
                         {"f_rank", report.f_rank.at(name)}};
        if (name == report.reference) {
            m["win_loss"] = {report.reference_total.wins, report.reference_total.losses};
            m["reference"] = true;
        } else {
            const auto& c = report.comparison(name);
            m["win_loss"] = {c.win_loss.wins, c.win_loss.losses};
            m["p_value"] = c.p_value;
            m["significant"] = c.significant;
        }
        models.push_back(std::move(m));
    }
    return {{"reference", report.reference}, {"alpha", report.alpha}, {"models", models}};
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string report_csv(const EvalReport& report) {
    std::string out = "row";
    for (const auto& m : report.models) out += "," + m;
    out += "\nMean-MAPE";
    for (const auto& m : report.models) out += "," + fixed(report.mean_mape.at(m), 2);
    out += "\nWin/Loss";
    for (const auto& m : report.models) {
        const auto wl = m == report.reference ? report.reference_total : report.comparison(m).win_loss;
        out += "," + std::to_string(wl.wins) + "/" + std::to_string(wl.losses);
    }
    out += "\nF-rank";
    for (const auto& m : report.models) out += "," + fixed(report.f_rank.at(m), 3);
    out += "\nP-value";
    for (const auto& m : report.models) {
        out += "," + (m == report.reference ? std::string("-") : fixed(report.comparison(m).p_value, 4));
    }
    out += "\n";
    return out;
}

}  // namespace eclf
