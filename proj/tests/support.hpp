#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eclf/series.hpp"

namespace eclf::test {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

inline Eigen::VectorXd gaussian(Eigen::Index n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sd);
    Eigen::VectorXd out(n);
    for (auto& x : out) x = dist(rng);
    return out;
}

inline Eigen::VectorXd uniform(Eigen::Index n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Eigen::VectorXd out(n);
    for (auto& x : out) x = dist(rng);
    return out;
}

/// Dataset CSV text with `n` months from `start`, load = f(i), one feature per name.
template <typename LoadFn>
std::string dataset_csv(YearMonth start, int n, LoadFn load, const std::vector<std::string>& features) {
    std::string s = "date,load";
    for (const auto& f : features) s += "," + f;
    s += "\n";
    for (int i = 0; i < n; ++i) {
        s += start.plus(i).to_string() + "," + format_number(load(i));
        for (std::size_t k = 0; k < features.size(); ++k) s += "," + format_number(static_cast<double>(i * (k + 1)));
        s += "\n";
    }
    return s;
}

}  // namespace eclf::test
