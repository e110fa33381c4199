#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sysrisk/errors.hpp"

namespace sysrisk {

// Result of minimizing the Koenker-Bassett check loss
//   sum_t rho_q(y_t - x_t . b),   rho_q(u) = u * (q - 1{u<0}).
struct QuantileFit {
    double q = 0.0;
    Eigen::VectorXd coefficients; // full design width; pruned columns are 0
    double loss = 0.0;
    int n_obs = 0;
    std::vector<int> pruned_columns; // identically-zero columns dropped
};

struct QuantRegOptions {
    enum class Method { automatic, exterior_point, smoothed };
    Method method = Method::automatic;
    // automatic switches to the smoothed path above this row count
    int smoothing_threshold = 20000;
    int max_iterations = 0; // 0 = derived from n
};

// Fits a linear quantile regression. X must contain any intercept column the
// caller wants. Throws SingularDesignError when X is rank deficient after
// zero-column pruning, SampleSizeError when rows < 10 * cols.
QuantileFit fit_quantile(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         double q, const QuantRegOptions& opts = {});

double predict(const QuantileFit& fit, const Eigen::VectorXd& x_row);
Eigen::VectorXd predict_all(const QuantileFit& fit, const Eigen::MatrixXd& X);

// The check-loss objective itself; doubles as the test oracle's metric.
double check_loss(const Eigen::VectorXd& residuals, double q);

} // namespace sysrisk
