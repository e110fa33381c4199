#pragma once

// Independent brute-force oracles used across the test suites. These stay
// deliberately naive: they share no code with the solvers they check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracles {

inline double pinball(const Eigen::VectorXd& r, double q) {
    double s = 0.0;
    for (int i = 0; i < r.size(); ++i)
        s += r[i] >= 0 ? q * r[i] : (q - 1.0) * r[i];
    return s;
}

// Quantile-regression basic solutions interpolate p observations, so the
// global minimum is found by enumerating every p-subset of rows.
inline double best_subset_loss(const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& X, double q) {
    const int n = int(X.rows()), p = int(X.cols());
    std::vector<int> idx(p);
    double best = std::numeric_limits<double>::infinity();

    std::vector<int> comb(p);
    for (int i = 0; i < p; ++i) comb[i] = i;
    while (true) {
        Eigen::MatrixXd B(p, p);
        Eigen::VectorXd yh(p);
        for (int j = 0; j < p; ++j) {
            B.row(j) = X.row(comb[j]);
            yh[j] = y[comb[j]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
        if (lu.isInvertible()) {
            Eigen::VectorXd b = lu.solve(yh);
            double loss = pinball(y - X * b, q);
            best = std::min(best, loss);
        }
        // next combination
        int i = p - 1;
        while (i >= 0 && comb[i] == n - p + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < p; ++j) comb[j] = comb[j - 1] + 1;
    }
    return best;
}

// 1-D oracle for intercept-only fits: the minimizer is attained at a data
// point, so scanning the sample values suffices.
inline double intercept_only_minimizer(const std::vector<double>& ys,
                                       double q) {
    double best_c = ys.front();
    double best = std::numeric_limits<double>::infinity();
    for (double c : ys) {
        double loss = 0.0;
        for (double v : ys) {
            double u = v - c;
            loss += u >= 0 ? q * u : (q - 1.0) * u;
        }
        if (loss < best - 1e-15) {
            best = loss;
            best_c = c;
        }
    }
    return best_c;
}

} // namespace oracles
