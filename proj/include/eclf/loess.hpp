#pragma once

#include <optional>

#include <Eigen/Dense>

namespace eclf {

struct LoessConfig {
    int window = 7;  ///< odd, points in the local neighbourhood
    int degree = 1;  ///< 0, 1 or 2

    /// ConfigError unless window is odd and >= degree + 2.
    void validate() const;
};

/// Locally weighted polynomial regression evaluated at `eval_points`.
///
/// Each evaluation uses the `window` nearest abscissae (a contiguous block of
/// `xs`, one-sided at the boundaries) with tricube weights on distance scaled
/// by the largest distance in the block. A window larger than the data is
/// clamped to the data length and the bandwidth is widened by half the excess
/// (in units of mean spacing), so all points keep positive weight. Optional
/// robustness weights multiply the tricube weights. When the weighted system
/// is rank deficient the degree is lowered; when every weight is zero the
/// unweighted neighbourhood mean is returned.
Eigen::VectorXd loess_smooth(const Eigen::Ref<const Eigen::VectorXd>& xs,
                             const Eigen::Ref<const Eigen::VectorXd>& ys,
                             const Eigen::Ref<const Eigen::VectorXd>& eval_points,
                             const LoessConfig& config,
                             const std::optional<Eigen::VectorXd>& robustness_weights = std::nullopt);

}  // namespace eclf
