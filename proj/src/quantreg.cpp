#include "sysrisk/quantreg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sysrisk {

namespace {

constexpr double kZeroResidualTol = 1e-11;
constexpr double kOptimalityTol = 1e-10;

struct ExteriorResult {
    Eigen::VectorXd coef;
    double loss;
};

// First p linearly independent rows in `order` (deterministic).
std::vector<int> independent_rows(const Eigen::MatrixXd& X,
                                  const std::vector<int>& order) {
    const int n = int(X.rows()), p = int(X.cols());
    std::vector<int> basis;
    Eigen::MatrixXd ortho(p, p); // orthonormalized basis rows
    int k = 0;
    for (int i = 0; i < n && k < p; ++i) {
        int t = order[i];
        Eigen::VectorXd v = X.row(t).transpose();
        double norm0 = v.norm();
        for (int j = 0; j < k; ++j) v -= ortho.col(j).dot(v) * ortho.col(j);
        if (v.norm() > 1e-9 * std::max(1.0, norm0)) {
            ortho.col(k) = v / v.norm();
            basis.push_back(t);
            ++k;
        }
    }
    return basis;
}

// Start from the rows a least-squares fit places nearest the q-th residual
// quantile; the exterior path then needs few pivots. Falls back to row order
// for tiny problems.
std::vector<int> initial_basis(const Eigen::VectorXd& y,
                               const Eigen::MatrixXd& X, double q) {
    const int n = int(X.rows()), p = int(X.cols());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (n >= 4 * p && n > 8) {
        Eigen::VectorXd b0 = (X.transpose() * X)
                                 .ldlt()
                                 .solve(X.transpose() * y);
        Eigen::VectorXd e = y - X * b0;
        std::vector<double> sorted(e.data(), e.data() + n);
        std::nth_element(sorted.begin(),
                         sorted.begin() + int(q * (n - 1)), sorted.end());
        double target = sorted[std::size_t(q * (n - 1))];
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            double da = std::abs(e[a] - target), db = std::abs(e[b] - target);
            return da != db ? da < db : a < b;
        });
    }
    return independent_rows(X, order);
}

// Slope added by a residual leaving zero along direction coefficient c:
// the residual moves to -eps*c, so rho grows at (1-q)*c for c>0 and -q*c
// for c<0. Always nonnegative.
inline double departure_slope(double c, double q) {
    return c > 0.0 ? (1.0 - q) * c : -q * c;
}

ExteriorResult solve_exterior(const Eigen::VectorXd& y,
                              const Eigen::MatrixXd& X, double q,
                              int max_iter) {
    const int n = int(X.rows()), p = int(X.cols());
    const double yscale = std::max(1.0, y.cwiseAbs().maxCoeff());
    const double ztol = kZeroResidualTol * yscale;

    std::vector<int> basis = initial_basis(y, X, q);
    if (int(basis.size()) < p)
        throw SingularDesignError("design matrix is rank deficient");

    Eigen::MatrixXd B(p, p), Binv(p, p);
    Eigen::VectorXd b(p), r(n), wts(n), cs(n), lo(p), hi(p);
    std::vector<char> in_basis(n, 0);

    struct Crossing {
        double step;
        double gain; // |c_t|, the slope added once crossed
        int row;
    };
    std::vector<Crossing> crossings;
    crossings.reserve(n);

    for (int iter = 0; iter < max_iter; ++iter) {
        for (int j = 0; j < p; ++j) B.row(j) = X.row(basis[j]);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        Eigen::VectorXd yh(p);
        for (int j = 0; j < p; ++j) yh[j] = y[basis[j]];
        b = lu.solve(yh);
        Binv = lu.inverse();

        std::fill(in_basis.begin(), in_basis.end(), 0);
        for (int j = 0; j < p; ++j) in_basis[basis[j]] = 1;

        r.noalias() = y - X * b;
        for (int j = 0; j < p; ++j) r[basis[j]] = 0.0;

        // Reduced-cost intervals per basis direction. Rows with exactly zero
        // residual contribute a subgradient interval [q-1, q].
        std::vector<int> zero_rows;
        for (int t = 0; t < n; ++t) {
            if (in_basis[t])
                wts[t] = 0.0;
            else if (std::abs(r[t]) <= ztol) {
                wts[t] = 0.0;
                zero_rows.push_back(t);
            } else
                wts[t] = q - (r[t] < 0.0 ? 1.0 : 0.0);
        }
        Eigen::VectorXd g = X.transpose() * wts;
        lo = Binv.transpose() * g;
        hi = lo;
        for (int t : zero_rows) {
            Eigen::VectorXd c = Binv.transpose() * X.row(t).transpose();
            for (int j = 0; j < p; ++j) {
                double a = (q - 1.0) * c[j], bb = q * c[j];
                lo[j] += std::min(a, bb);
                hi[j] += std::max(a, bb);
            }
        }

        // Optimal when every direction admits a subgradient in [-q, 1-q].
        int worst = -1;
        double worst_violation = kOptimalityTol;
        int worst_sign = 0;
        for (int j = 0; j < p; ++j) {
            double v_up = lo[j] - (1.0 - q);  // >0: descend along +d_j
            double v_dn = -q - hi[j];         // >0: descend along -d_j
            if (v_up > worst_violation) {
                worst_violation = v_up;
                worst = j;
                worst_sign = +1;
            }
            if (v_dn > worst_violation) {
                worst_violation = v_dn;
                worst = j;
                worst_sign = -1;
            }
        }

        if (worst < 0) {
            // Optimal vertex. Median ties: when an edge at q = 0.5 is
            // cost-flat, the minimizer is an interval; report its midpoint.
            if (q == 0.5) {
                int flat_j = -1, flat_sign = 0, flats = 0;
                for (int j = 0; j < p; ++j) {
                    if (std::abs(lo[j] - (1.0 - q)) <= kOptimalityTol) {
                        ++flats;
                        flat_j = j;
                        flat_sign = +1;
                    } else if (std::abs(hi[j] + q) <= kOptimalityTol) {
                        ++flats;
                        flat_j = j;
                        flat_sign = -1;
                    }
                }
                if (flats == 1) {
                    Eigen::VectorXd dir = flat_sign * Binv.col(flat_j);
                    double best = std::numeric_limits<double>::infinity();
                    for (int t = 0; t < n; ++t) {
                        if (in_basis[t] || std::abs(r[t]) <= ztol) continue;
                        double c = X.row(t).dot(dir);
                        if (std::abs(c) < 1e-12) continue;
                        double step = r[t] / c;
                        if (step > 0.0 && step < best) best = step;
                    }
                    if (std::isfinite(best)) b += 0.5 * best * dir;
                }
            }
            Eigen::VectorXd res = y - X * b;
            return {b, check_loss(res, q)};
        }

        // Ratio test along the descent edge: walk residual crossings in step
        // order until the directional derivative turns nonnegative.
        Eigen::VectorXd dir = worst_sign * Binv.col(worst);
        double slope = -worst_violation; // derivative at 0+, strictly negative
        cs.noalias() = X * dir;
        crossings.clear();
        for (int t = 0; t < n; ++t) {
            if (in_basis[t] || std::abs(r[t]) <= ztol) continue;
            double c = cs[t];
            if (c == 0.0) continue;
            double step = r[t] / c;
            if (step > 0.0) crossings.push_back({step, std::abs(c), t});
        }
        std::sort(crossings.begin(), crossings.end(), [](const Crossing& a,
                                                         const Crossing& b) {
            return a.step != b.step ? a.step < b.step : a.row < b.row;
        });

        int entering = -1;
        for (const auto& c : crossings) {
            slope += c.gain;
            if (slope >= -1e-14) {
                entering = c.row;
                break;
            }
        }
        if (entering < 0)
            throw NumericError("quantile objective unbounded along an edge");
        basis[worst] = entering;
    }
    throw NumericError("quantile regression did not converge");
}

// Smoothed fallback for large samples: Newton iterations on the log-sigmoid
// smoothing of the check loss with an annealed bandwidth, then an exact
// polish through the nearest interpolation vertex.
ExteriorResult solve_smoothed(const Eigen::VectorXd& y,
                              const Eigen::MatrixXd& X, double q) {
    const int n = int(X.rows()), p = int(X.cols());
    const double yscale = std::max(1.0, y.cwiseAbs().maxCoeff());

    Eigen::VectorXd b =
        X.colPivHouseholderQr().solve(y); // least-squares start

    auto smooth_loss = [&](const Eigen::VectorXd& beta, double eps) {
        Eigen::VectorXd r = y - X * beta;
        double total = 0.0;
        for (int t = 0; t < n; ++t) {
            double u = r[t];
            // q*u + eps*log(1 + exp(-u/eps)), computed overflow-safely
            double z = -u / eps;
            double soft = z > 30.0 ? z : std::log1p(std::exp(z));
            total += q * u + eps * soft;
        }
        return total;
    };

    for (double eps = 0.05 * yscale; eps >= 1e-9 * yscale; eps *= 0.2) {
        for (int it = 0; it < 60; ++it) {
            Eigen::VectorXd r = y - X * b;
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
            Eigen::MatrixXd hess =
                Eigen::MatrixXd::Identity(p, p) * (1e-10 / yscale);
            for (int t = 0; t < n; ++t) {
                double s = 1.0 / (1.0 + std::exp(r[t] / eps)); // sigma(-u/eps)
                double w = s * (1.0 - s) / eps;
                grad += (q - s) * -X.row(t).transpose();
                hess += w * X.row(t).transpose() * X.row(t);
            }
            Eigen::VectorXd step = hess.ldlt().solve(-grad);
            double f0 = smooth_loss(b, eps);
            double alpha = 1.0;
            Eigen::VectorXd b_new = b + step;
            while (alpha > 1e-8 && smooth_loss(b_new, eps) > f0) {
                alpha *= 0.5;
                b_new = b + alpha * step;
            }
            double move = (b_new - b).cwiseAbs().maxCoeff();
            b = b_new;
            if (move < 1e-12 * yscale) break;
        }
    }

    // Polish: basic solutions interpolate p observations; snap to the vertex
    // formed by the p smallest absolute residuals when it improves the loss.
    Eigen::VectorXd r = y - X * b;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int c) { return std::abs(r[a]) < std::abs(r[c]); });
    Eigen::MatrixXd B(p, p);
    Eigen::VectorXd yh(p);
    std::vector<int> rows(order.begin(), order.begin() + p);
    for (int j = 0; j < p; ++j) {
        B.row(j) = X.row(rows[j]);
        yh[j] = y[rows[j]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    double best_loss = check_loss(y - X * b, q);
    Eigen::VectorXd best = b;
    if (lu.isInvertible()) {
        Eigen::VectorXd bv = lu.solve(yh);
        double lv = check_loss(y - X * bv, q);
        if (lv < best_loss) {
            best_loss = lv;
            best = bv;
        }
    }
    return {best, best_loss};
}

} // namespace

double check_loss(const Eigen::VectorXd& residuals, double q) {
    double total = 0.0;
    for (int t = 0; t < residuals.size(); ++t) {
        double u = residuals[t];
        total += u * (q - (u < 0.0 ? 1.0 : 0.0));
    }
    return total;
}

QuantileFit fit_quantile(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         double q, const QuantRegOptions& opts) {
    if (!(q > 0.0 && q < 1.0))
        throw ArgumentError("quantile level must lie in (0,1)");
    if (X.rows() != y.size())
        throw ArgumentError("design rows do not match response length");
    const int n = int(X.rows());
    const int p_all = int(X.cols());
    if (p_all == 0) throw ArgumentError("empty design matrix");
    // A lone quantile (intercept-only) is well defined for any n >= 1; the
    // 10-rows-per-regressor guard applies once slopes enter the design.
    int min_rows = p_all == 1 ? 1 : 10 * p_all;
    if (n < min_rows)
        throw SampleSizeError("need at least " + std::to_string(min_rows) +
                              " observations for " + std::to_string(p_all) +
                              " regressors, got " + std::to_string(n));
    if (!y.allFinite() || !X.allFinite())
        throw ArgumentError("non-finite values in regression inputs");

    // Columns that never fire (e.g. an indicator that is identically zero on
    // the window) are dropped; their coefficient is reported as zero.
    std::vector<int> keep, pruned;
    for (int j = 0; j < p_all; ++j) {
        if (X.col(j).cwiseAbs().maxCoeff() == 0.0)
            pruned.push_back(j);
        else
            keep.push_back(j);
    }
    if (keep.empty())
        throw SingularDesignError("all design columns are identically zero");

    Eigen::MatrixXd Xp(n, int(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) Xp.col(int(j)) = X.col(keep[j]);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xp);
    qr.setThreshold(1e-10);
    if (qr.rank() < Xp.cols())
        throw SingularDesignError(
            "design matrix is rank deficient after zero-column pruning");

    bool smoothed =
        opts.method == QuantRegOptions::Method::smoothed ||
        (opts.method == QuantRegOptions::Method::automatic &&
         n > opts.smoothing_threshold);

    int max_iter = opts.max_iterations > 0 ? opts.max_iterations
                                           : 200 + 20 * n;
    ExteriorResult res = smoothed ? solve_smoothed(y, Xp, q)
                                  : solve_exterior(y, Xp, q, max_iter);

    QuantileFit fit;
    fit.q = q;
    fit.coefficients = Eigen::VectorXd::Zero(p_all);
    for (std::size_t j = 0; j < keep.size(); ++j)
        fit.coefficients[keep[j]] = res.coef[int(j)];
    fit.loss = res.loss;
    fit.n_obs = n;
    fit.pruned_columns = pruned;
    return fit;
}

double predict(const QuantileFit& fit, const Eigen::VectorXd& x_row) {
    if (x_row.size() != fit.coefficients.size())
        throw ArgumentError("prediction row has wrong dimension");
    return fit.coefficients.dot(x_row);
}

Eigen::VectorXd predict_all(const QuantileFit& fit, const Eigen::MatrixXd& X) {
    if (X.cols() != fit.coefficients.size())
        throw ArgumentError("prediction matrix has wrong dimension");
    return X * fit.coefficients;
}

} // namespace sysrisk
