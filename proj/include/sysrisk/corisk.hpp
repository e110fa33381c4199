#pragma once

#include <optional>
#include <string>

#include "sysrisk/panels.hpp"
#include "sysrisk/quantreg.hpp"

namespace sysrisk {

enum class Measure { var, dcovar, dcoes, adcovar, gsv, nsv };

const char* measure_name(Measure m);
std::optional<Measure> measure_from_name(const std::string& name);

// Weekly series of one measure for one bank, in basis points with the
// distress-positive sign convention (higher = more systemic).
struct RiskSeries {
    std::string bank_id;
    Measure kind = Measure::var;
    std::vector<Date> dates;
    Eigen::VectorXd values;
};

struct CoRiskOptions {
    double q_distress = 0.01;
    double q_median = 0.50;
    int coes_grid = 10; // K tail sub-quantiles averaged into CoES
    bool exclude_conditioning_bank = false;
    // Default: the delta re-conditions the distress-quantile system equation
    // on the bank's median state, beta(q) * (VaR(q) - VaR(50%)), so an
    // uninformative bank nets out to zero. The literal form subtracts the
    // median-equation fit wholesale and keeps the system's own quantile
    // spread; it is exposed for cross-checks.
    bool literal_difference = false;
    int min_sample = 60; // weekly observations per quantile fit
};

// Shared read-only inputs for all per-bank measure computations.
struct MeasureInputs {
    const MarketPanel& market;
    const GrowthPanel& growth;
    const StateSeries& states;
};

// Both equations of the conditional-quantile system at one level q.
struct CoRiskFit {
    std::string bank_id;
    double q = 0.0;
    QuantileFit bank_eq;   // X^i on [1, M_{t-1}]
    QuantileFit system_eq; // X^system on [1, X^i (or split +/-), M_{t-1}]
    bool asymmetric = false;
};

CoRiskFit fit_corisk(const MeasureInputs& in, const std::string& bank,
                     double q, bool asymmetric,
                     const CoRiskOptions& opts = {});

// Fitted conditional q-quantile of x_i given M_{t-1}, reported as
// -fitted * 1e4 (basis points, distress positive). Output dates are the
// growth dates with a lagged state available.
RiskSeries var_series(const std::string& bank_id,
                      const std::vector<double>& x_i, const StateSeries& m,
                      double q, const CoRiskOptions& opts = {});

RiskSeries delta_covar(const MeasureInputs& in, const std::string& bank,
                       const CoRiskOptions& opts = {});
RiskSeries delta_coes(const MeasureInputs& in, const std::string& bank,
                      const CoRiskOptions& opts = {});
RiskSeries asym_delta_covar(const MeasureInputs& in, const std::string& bank,
                            const CoRiskOptions& opts = {});

// Weekly-to-quarterly reductions for the downstream panel regression.
enum class QuarterlyMode { last_week, intra_quarter_sum };
struct QuarterlySeries {
    std::string bank_id;
    Measure kind;
    std::vector<Quarter> quarters;
    Eigen::VectorXd values;
};
QuarterlySeries to_quarterly(const RiskSeries& s, QuarterlyMode mode);

} // namespace sysrisk
