#include "eclf/loess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eclf/error.hpp"

namespace eclf {

void LoessConfig::validate() const {
    if (degree < 0 || degree > 2) throw ConfigError("loess degree must be 0, 1 or 2");
    if (window <= 0 || window % 2 == 0) throw ConfigError("loess window must be odd and positive");
    if (window < degree + 2) throw ConfigError("loess window must be >= degree + 2");
}

namespace {

double tricube(double r) {
    if (r >= 1.0) return 0.0;
    const double t = 1.0 - r * r * r;
    return t * t * t;
}

// Local fit at `x0` over the block [first, first + count).
double local_fit(const Eigen::Ref<const Eigen::VectorXd>& xs, const Eigen::Ref<const Eigen::VectorXd>& ys,
                 Eigen::Index first, Eigen::Index count, double x0, double h, int degree,
                 const Eigen::VectorXd* rho) {
    Eigen::VectorXd w(count);
    for (Eigen::Index k = 0; k < count; ++k) {
        const auto i = first + k;
        const double r = h > 0.0 ? std::abs(xs[i] - x0) / h : 0.0;
        w[k] = tricube(r) * (rho ? (*rho)[i] : 1.0);
    }
    const auto ys_block = ys.segment(first, count);
    const double wsum = w.sum();
    if (!(wsum > 0.0)) return ys_block.mean();

    const double scale = h > 0.0 ? h : 1.0;
    for (int d = std::min<int>(degree, static_cast<int>(count) - 1); d >= 1; --d) {
        Eigen::MatrixXd a(count, d + 1);
        Eigen::VectorXd b(count);
        for (Eigen::Index k = 0; k < count; ++k) {
            const double sw = std::sqrt(w[k]);
            const double u = (xs[first + k] - x0) / scale;
            double p = 1.0;
            for (int j = 0; j <= d; ++j) {
                a(k, j) = sw * p;
                p *= u;
            }
            b[k] = sw * ys_block[k];
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        qr.setThreshold(1e-10);
        if (qr.rank() == d + 1) return qr.solve(b)[0];
    }
    return w.dot(ys_block) / wsum;
}

}  // namespace

Eigen::VectorXd loess_smooth(const Eigen::Ref<const Eigen::VectorXd>& xs,
                             const Eigen::Ref<const Eigen::VectorXd>& ys,
                             const Eigen::Ref<const Eigen::VectorXd>& eval_points,
                             const LoessConfig& config,
                             const std::optional<Eigen::VectorXd>& robustness_weights) {
    config.validate();
    const auto n = xs.size();
    if (n == 0) throw InsufficientDataError("loess needs at least one point");
    if (ys.size() != n) throw AlignmentError("loess xs and ys differ in length");
    for (Eigen::Index i = 1; i < n; ++i) {
        if (!(xs[i] > xs[i - 1])) throw ConfigError("loess xs must be strictly increasing");
    }
    if (robustness_weights) {
        if (robustness_weights->size() != n) throw AlignmentError("robustness weights differ in length");
        if ((robustness_weights->array() < 0.0).any() || (robustness_weights->array() > 1.0).any()) {
            throw ConfigError("robustness weights must lie in [0, 1]");
        }
    }
    const Eigen::VectorXd* rho = robustness_weights ? &*robustness_weights : nullptr;

    const Eigen::Index q = std::min<Eigen::Index>(config.window, n);
    const double spacing = n > 1 ? (xs[n - 1] - xs[0]) / static_cast<double>(n - 1) : 1.0;
    const double widen = config.window > n ? 0.5 * static_cast<double>(config.window - n) * spacing : 0.0;

    Eigen::VectorXd out(eval_points.size());
    Eigen::Index left = 0;
    for (Eigen::Index e = 0; e < eval_points.size(); ++e) {
        const double x0 = eval_points[e];
        // Slide from the start each time: evaluation points need not be sorted.
        left = 0;
        while (left + q < n && (x0 - xs[left]) > (xs[left + q] - x0)) ++left;
        const double h = std::max(std::abs(x0 - xs[left]), std::abs(xs[left + q - 1] - x0)) + widen;
        out[e] = local_fit(xs, ys, left, q, x0, h, config.degree, rho);
    }
    return out;
}

}  // namespace eclf
