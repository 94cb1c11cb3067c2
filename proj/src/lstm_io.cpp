#include <cmath>

#include "eclf/lstm.hpp"

namespace eclf {

Standardizer Standardizer::fit(const Eigen::Ref<const Eigen::MatrixXd>& x) {
    if (x.rows() == 0) throw InsufficientDataError("cannot standardize an empty matrix");
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double var = (x.col(j).array() - s.mean[j]).square().mean();
        const double sd = std::sqrt(var);
        s.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

Eigen::RowVectorXd Standardizer::apply(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    return (row - mean.transpose()).cwiseQuotient(scale.transpose());
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
    if (j.at("rows").get<Eigen::Index>() != rows || j.at("cols").get<Eigen::Index>() != cols) {
        throw ParseError("lstm tensor has unexpected shape");
    }
    const auto flat = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols) throw ParseError("lstm tensor has wrong size");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    }
    return m;
}

}  // namespace

nlohmann::json to_json(const LstmParams<double>& p) {
    return {{"hidden", p.hidden()},
            {"input_dim", p.input_dim()},
            {"w_xi", matrix_json(p.w_xi)},
            {"w_xf", matrix_json(p.w_xf)},
            {"w_xo", matrix_json(p.w_xo)},
            {"w_xc", matrix_json(p.w_xc)},
            {"w_hi", matrix_json(p.w_hi)},
            {"w_hf", matrix_json(p.w_hf)},
            {"w_ho", matrix_json(p.w_ho)},
            {"w_hc", matrix_json(p.w_hc)},
            {"b_i", matrix_json(p.b_i)},
            {"b_f", matrix_json(p.b_f)},
            {"b_o", matrix_json(p.b_o)},
            {"b_c", matrix_json(p.b_c)},
            {"w_out", matrix_json(p.w_out)},
            {"b_out", p.b_out}};
}

LstmParams<double> lstm_params_from_json(const nlohmann::json& j) {
    try {
        const auto h = j.at("hidden").get<Eigen::Index>();
        const auto d = j.at("input_dim").get<Eigen::Index>();
        auto p = LstmParams<double>::zeros(h, d);
        p.w_xi = matrix_from(j.at("w_xi"), h, d);
        p.w_xf = matrix_from(j.at("w_xf"), h, d);
        p.w_xo = matrix_from(j.at("w_xo"), h, d);
        p.w_xc = matrix_from(j.at("w_xc"), h, d);
        p.w_hi = matrix_from(j.at("w_hi"), h, h);
        p.w_hf = matrix_from(j.at("w_hf"), h, h);
        p.w_ho = matrix_from(j.at("w_ho"), h, h);
        p.w_hc = matrix_from(j.at("w_hc"), h, h);
        p.b_i = matrix_from(j.at("b_i"), h, 1);
        p.b_f = matrix_from(j.at("b_f"), h, 1);
        p.b_o = matrix_from(j.at("b_o"), h, 1);
        p.b_c = matrix_from(j.at("b_c"), h, 1);
        p.w_out = matrix_from(j.at("w_out"), 1, h);
        p.b_out = j.at("b_out").get<double>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid lstm json: ") + e.what());
    }
}

nlohmann::json to_json(const Standardizer& s) {
    return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
            {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
    const auto m = j.at("mean").get<std::vector<double>>();
    const auto s = j.at("scale").get<std::vector<double>>();
    if (m.size() != s.size()) throw ParseError("standardizer mean/scale differ in length");
    Standardizer out;
    out.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    out.scale = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    return out;
}

}  // namespace eclf
