#pragma once

// Small hand-rolled panels for unit tests. The production generator lives in
// the library; tests that exercise estimators build their own data so the
// fixtures stay independent of it.

#include <random>

#include "sysrisk/panels.hpp"

namespace testdata {

struct TestSystem {
    sysrisk::MarketPanel market;
    sysrisk::GrowthPanel growth;
    sysrisk::StateSeries states;
};

inline std::vector<sysrisk::Date> weekly_dates(int weeks,
                                               sysrisk::Date start = {2002, 1,
                                                                      4}) {
    std::vector<sysrisk::Date> d;
    for (int t = 0; t < weeks; ++t) d.push_back(start.plus_days(7 * t));
    return d;
}

// One common factor plus idiosyncratic noise; states are AR(1) series that
// scale the conditional volatility so fitted quantiles genuinely depend on
// the lagged state.
inline TestSystem make_system(int n_banks, int weeks, std::uint64_t seed,
                              int n_state = 2, double factor_loading = 0.6) {
    using namespace sysrisk;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);

    TestSystem sys;
    sys.market.dates = weekly_dates(weeks);

    // states first so growth can condition on them
    StateSeries& st = sys.states;
    for (int c = 0; c < n_state; ++c) st.names.push_back("s" + std::to_string(c));
    st.m.resize(weeks - 1, n_state);
    std::vector<double> level(n_state, 0.0);
    for (int t = 0; t < weeks - 1; ++t)
        for (int c = 0; c < n_state; ++c) {
            level[c] = 0.85 * level[c] + 0.3 * N(rng);
            st.m(t, c) = level[c];
        }

    for (int b = 0; b < n_banks; ++b) {
        BankRecord rec;
        rec.id = "bank" + std::to_string(b);
        double a = 1000.0 * (n_banks - b); // descending sizes
        double lev = 8.0 + b;
        rec.market_equity.push_back(a / lev);
        rec.total_assets.push_back(a);
        rec.book_equity.push_back(a / lev);
        for (int t = 1; t < weeks; ++t) {
            double vol = 0.02 * (1.0 + 0.3 * (t > 1 ? st.m(t - 2, 0) : 0.0));
            double f = N(rng);
            double g = factor_loading * 0.015 * f + vol * N(rng);
            a *= (1.0 + g);
            rec.market_equity.push_back(a / lev);
            rec.total_assets.push_back(a);
            rec.book_equity.push_back(a / lev);
        }
        sys.market.banks.push_back(std::move(rec));
    }
    sys.market.validate();
    sys.growth = compute_growth(sys.market);
    st.dates = sys.growth.dates;
    return sys;
}

// Builds a growth panel directly from explicit growth series (equal unit
// lagged assets unless given).
inline sysrisk::GrowthPanel
growth_from_series(const std::vector<std::vector<double>>& xs,
                   const std::vector<std::vector<double>>* lagged = nullptr) {
    sysrisk::GrowthPanel g;
    int weeks = static_cast<int>(xs.front().size());
    g.dates = weekly_dates(weeks, {2002, 1, 11});
    g.x.resize(weeks, static_cast<int>(xs.size()));
    g.lagged_assets.resize(weeks, static_cast<int>(xs.size()));
    for (std::size_t b = 0; b < xs.size(); ++b) {
        g.bank_ids.push_back("bank" + std::to_string(b));
        for (int t = 0; t < weeks; ++t) {
            g.x(t, int(b)) = xs[b][std::size_t(t)];
            g.lagged_assets(t, int(b)) =
                lagged ? (*lagged)[b][std::size_t(t)] : 1.0;
        }
    }
    return g;
}

inline sysrisk::StateSeries states_for(const sysrisk::GrowthPanel& g,
                                       int n_state, std::uint64_t seed) {
    sysrisk::StateSeries st;
    st.dates = g.dates;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int c = 0; c < n_state; ++c) st.names.push_back("s" + std::to_string(c));
    st.m.resize(g.n_weeks(), n_state);
    for (int t = 0; t < g.n_weeks(); ++t)
        for (int c = 0; c < n_state; ++c) st.m(t, c) = N(rng);
    return st;
}

inline sysrisk::StateSeries empty_states(const sysrisk::GrowthPanel& g) {
    sysrisk::StateSeries st;
    st.dates = g.dates;
    st.m.resize(g.n_weeks(), 0);
    return st;
}

} // namespace testdata
