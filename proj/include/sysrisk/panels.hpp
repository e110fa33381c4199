#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sysrisk/dates.hpp"

namespace sysrisk {

// Per-bank weekly balance/market series, aligned to the panel's date index.
// Missing observations (banks entering late / leaving early) are NaN and may
// only occur as leading or trailing runs.
struct BankRecord {
    std::string id;
    std::vector<double> market_equity;
    std::vector<double> total_assets;
    std::vector<double> book_equity;
};

struct MarketPanel {
    std::vector<Date> dates; // strictly increasing, weekly
    std::vector<BankRecord> banks;

    int n_banks() const { return static_cast<int>(banks.size()); }
    int n_weeks() const { return static_cast<int>(dates.size()); }
    int bank_index(const std::string& id) const; // -1 when absent

    // Market value of total financial assets A_t = me_t * ta_t / be_t;
    // NaN where any component is missing.
    std::vector<double> asset_value(int bank) const;

    // Throws ValidationError on any violated invariant, naming bank and date.
    void validate() const;
};

// Weekly growth rates X_t^i = (A_t - A_{t-1}) / A_{t-1}; dates are the
// market panel dates minus the first one. NaN where either endpoint missing.
struct GrowthPanel {
    std::vector<Date> dates;
    std::vector<std::string> bank_ids;
    Eigen::MatrixXd x;             // weeks x banks
    Eigen::MatrixXd lagged_assets; // A_{t-1} aligned to the same rows

    int n_banks() const { return static_cast<int>(bank_ids.size()); }
    int n_weeks() const { return static_cast<int>(dates.size()); }
    int bank_index(const std::string& id) const;
};

// Weekly conditioning state variables M_t. Production files carry the six
// canonical columns; the width stays flexible so degenerate designs (no
// state variables) remain expressible.
struct StateSeries {
    std::vector<Date> dates; // same index as GrowthPanel
    std::vector<std::string> names;
    Eigen::MatrixXd m; // weeks x vars

    int n_vars() const { return static_cast<int>(names.size()); }
};

// Canonical state column names, in file order.
extern const std::vector<std::string> kStateColumns;

// Quarterly explanatory variables, one matrix (quarters x banks) per field.
// NaN marks quarters before a bank enters the sample.
struct QuarterPanel {
    std::vector<Quarter> quarters; // strictly increasing, contiguous
    std::vector<std::string> bank_ids;
    std::vector<std::string> fields;
    std::vector<Eigen::MatrixXd> values;

    int n_banks() const { return static_cast<int>(bank_ids.size()); }
    int n_quarters() const { return static_cast<int>(quarters.size()); }
    int bank_index(const std::string& id) const;
    int field_index(const std::string& name) const; // -1 when absent
    const Eigen::MatrixXd& field(const std::string& name) const;

    void validate() const;
};

// Required quarter-panel fields, in file order.
extern const std::vector<std::string> kQuarterFields;
// Optional notional-amount analogues accepted by the loader.
extern const std::vector<std::string> kQuarterOptionalFields;

enum class EventKind { event, policy_action };

struct EventTimeline {
    std::vector<std::pair<Date, EventKind>> entries; // sorted by date
    bool empty() const { return entries.empty(); }
};

// --- derived-series operations ---------------------------------------------

GrowthPanel compute_growth(const MarketPanel& panel);

// Lagged-value-weighted portfolio growth over `members`:
//   X_t^S = sum_i w_{i,t-1} X_t^i,  w_{i,t-1} = A_{i,t-1} / sum_j A_{j,t-1}.
// NaN where no member has data.
std::vector<double> portfolio_growth(const GrowthPanel& growth,
                                     const std::vector<std::string>& members);
std::vector<double> portfolio_growth_idx(const GrowthPanel& growth,
                                         const std::vector<int>& members);

// (book assets - book equity + market equity) / market equity
double leverage(double book_assets, double book_equity, double market_equity);

} // namespace sysrisk
