#include "sysrisk/panels.hpp"

#include <cmath>

#include "sysrisk/errors.hpp"

namespace sysrisk {

const std::vector<std::string> kStateColumns = {
    "vix",          "liquidity_spread", "d_tbill_3m",
    "yield_slope",  "credit_spread",    "msci_return"};

const std::vector<std::string> kQuarterFields = {
    "log_market_value",
    "commercial_paper",
    "loan_to_banks",
    "total_loans",
    "non_interest_to_interest_income",
    "sp500_correlation",
    "net_balance_bank",
    "net_balance_nonbank",
    "leverage",
    "maturity_mismatch",
    "total_deposits",
    "non_performing_loans",
    "credit_derivatives",
    "interest_rate_derivatives",
    "fx_derivatives",
    "equity_derivatives",
    "commodity_derivatives"};

const std::vector<std::string> kQuarterOptionalFields = {
    "credit_notional", "interest_rate_notional", "fx_notional",
    "equity_notional", "commodity_notional"};

namespace {

bool is_missing(double v) { return std::isnan(v); }

// Missing runs may only touch the sample edges.
// Returns [first, last] observed index, or {-1,-1} if all missing.
std::pair<int, int> observed_range(const std::vector<double>& s) {
    int first = -1, last = -1;
    for (int t = 0; t < static_cast<int>(s.size()); ++t) {
        if (!is_missing(s[t])) {
            if (first < 0) first = t;
            last = t;
        }
    }
    return {first, last};
}

} // namespace

int MarketPanel::bank_index(const std::string& id) const {
    for (int i = 0; i < n_banks(); ++i)
        if (banks[i].id == id) return i;
    return -1;
}

std::vector<double> MarketPanel::asset_value(int bank) const {
    const BankRecord& b = banks[bank];
    std::vector<double> a(dates.size());
    for (std::size_t t = 0; t < dates.size(); ++t) {
        if (is_missing(b.market_equity[t]) || is_missing(b.total_assets[t]) ||
            is_missing(b.book_equity[t]))
            a[t] = std::nan("");
        else
            a[t] = b.market_equity[t] * b.total_assets[t] / b.book_equity[t];
    }
    return a;
}

void MarketPanel::validate() const {
    for (std::size_t t = 1; t < dates.size(); ++t)
        if (!(dates[t - 1] < dates[t]))
            throw ValidationError("dates not strictly increasing at " +
                                  dates[t].to_string());

    for (const auto& b : banks) {
        if (b.market_equity.size() != dates.size() ||
            b.total_assets.size() != dates.size() ||
            b.book_equity.size() != dates.size())
            throw ValidationError("bank " + b.id +
                                  ": series length differs from date index");

        auto [first, last] = observed_range(b.market_equity);
        if (first < 0)
            throw ValidationError("bank " + b.id + ": no observations");
        for (int t = first; t <= last; ++t) {
            const std::string at = " for bank " + b.id + " at " +
                                   dates[t].to_string();
            bool me = is_missing(b.market_equity[t]);
            bool ta = is_missing(b.total_assets[t]);
            bool be = is_missing(b.book_equity[t]);
            if (me || ta || be)
                throw ValidationError("interior gap" + at);
            if (b.market_equity[t] <= 0.0)
                throw ValidationError("nonpositive market_equity" + at);
            if (b.total_assets[t] <= 0.0)
                throw ValidationError("nonpositive total_assets" + at);
            if (b.book_equity[t] <= 0.0)
                throw ValidationError("nonpositive book_equity" + at);
        }
        // the three series must cover the same window
        auto [fa, la] = observed_range(b.total_assets);
        auto [fb, lb] = observed_range(b.book_equity);
        if (fa != first || la != last || fb != first || lb != last)
            throw ValidationError("bank " + b.id +
                                  ": balance series cover different windows");
    }
}

int GrowthPanel::bank_index(const std::string& id) const {
    for (int i = 0; i < n_banks(); ++i)
        if (bank_ids[i] == id) return i;
    return -1;
}

int QuarterPanel::bank_index(const std::string& id) const {
    for (int i = 0; i < n_banks(); ++i)
        if (bank_ids[i] == id) return i;
    return -1;
}

int QuarterPanel::field_index(const std::string& name) const {
    for (std::size_t i = 0; i < fields.size(); ++i)
        if (fields[i] == name) return static_cast<int>(i);
    return -1;
}

const Eigen::MatrixXd& QuarterPanel::field(const std::string& name) const {
    int i = field_index(name);
    if (i < 0) throw ArgumentError("unknown quarter field '" + name + "'");
    return values[i];
}

void QuarterPanel::validate() const {
    for (std::size_t t = 1; t < quarters.size(); ++t)
        if (quarters[t] != quarters[t - 1].next())
            throw ValidationError("quarter index not contiguous at " +
                                  quarters[t].to_string());

    int npl = field_index("non_performing_loans");
    for (std::size_t f = 0; f < fields.size(); ++f) {
        const auto& v = values[f];
        for (int t = 0; t < v.rows(); ++t)
            for (int b = 0; b < v.cols(); ++b) {
                double x = v(t, b);
                if (std::isnan(x)) continue;
                if (std::isinf(x))
                    throw ValidationError(
                        "non-finite " + fields[f] + " for bank " + bank_ids[b] +
                        " at " + quarters[t].to_string());
                bool derivative = fields[f].find("derivatives") !=
                                  std::string::npos;
                if (derivative && x < 0.0)
                    throw ValidationError(
                        "negative " + fields[f] + " for bank " + bank_ids[b] +
                        " at " + quarters[t].to_string() +
                        " (fair values are reported as absolute values)");
                if (static_cast<int>(f) == npl && (x < 0.0 || x > 1.0))
                    throw ValidationError(
                        "non_performing_loans outside [0,1] for bank " +
                        bank_ids[b] + " at " + quarters[t].to_string());
            }
    }
}

GrowthPanel compute_growth(const MarketPanel& panel) {
    GrowthPanel g;
    const int tw = panel.n_weeks();
    const int nb = panel.n_banks();
    if (tw < 2) throw ArgumentError("market panel needs at least two weeks");

    g.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    g.bank_ids.reserve(nb);
    for (const auto& b : panel.banks) g.bank_ids.push_back(b.id);

    g.x.setConstant(tw - 1, nb, std::nan(""));
    g.lagged_assets.setConstant(tw - 1, nb, std::nan(""));
    for (int b = 0; b < nb; ++b) {
        auto a = panel.asset_value(b);
        for (int t = 1; t < tw; ++t) {
            if (is_missing(a[t]) || is_missing(a[t - 1])) continue;
            g.x(t - 1, b) = (a[t] - a[t - 1]) / a[t - 1];
            g.lagged_assets(t - 1, b) = a[t - 1];
        }
    }
    return g;
}

std::vector<double> portfolio_growth_idx(const GrowthPanel& growth,
                                         const std::vector<int>& members) {
    if (members.empty())
        throw ArgumentError("portfolio_growth: empty member set");
    for (int m : members)
        if (m < 0 || m >= growth.n_banks())
            throw ArgumentError("portfolio_growth: bank index out of range");

    std::vector<double> out(growth.n_weeks(), std::nan(""));
    for (int t = 0; t < growth.n_weeks(); ++t) {
        double wsum = 0.0, acc = 0.0;
        for (int m : members) {
            double x = growth.x(t, m);
            double a = growth.lagged_assets(t, m);
            if (is_missing(x) || is_missing(a)) continue;
            wsum += a;
            acc += a * x;
        }
        if (wsum > 0.0) out[t] = acc / wsum;
    }
    return out;
}

std::vector<double> portfolio_growth(const GrowthPanel& growth,
                                     const std::vector<std::string>& members) {
    std::vector<int> idx;
    idx.reserve(members.size());
    for (const auto& id : members) {
        int i = growth.bank_index(id);
        if (i < 0)
            throw ArgumentError("portfolio_growth: unknown bank '" + id + "'");
        idx.push_back(i);
    }
    return portfolio_growth_idx(growth, idx);
}

double leverage(double book_assets, double book_equity, double market_equity) {
    if (market_equity <= 0.0)
        throw ArgumentError("leverage: market_equity must be positive");
    return (book_assets - book_equity + market_equity) / market_equity;
}

} // namespace sysrisk
