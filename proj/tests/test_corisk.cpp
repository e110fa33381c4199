#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "sysrisk/corisk.hpp"
#include "testdata.hpp"

using namespace sysrisk;

namespace {

// Generates an i.i.d. growth series and dummy panel scaffolding around it.
std::vector<double> normal_series(int n, double sd, std::uint64_t seed,
                                  double mean = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(mean, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = N(rng);
    return v;
}

double empirical_quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    double idx = q * (double(v.size()) - 1.0);
    auto lo = std::size_t(idx);
    double frac = idx - double(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] * (1 - frac) + v[lo + 1] * frac;
}

} // namespace

TEST_CASE("constant zero-noise series gives VaR = -c * 1e4 at every q") {
    auto g = testdata::growth_from_series(
        {std::vector<double>(130, 0.004)});
    auto st = testdata::states_for(g, 2, 5);
    std::vector<double> x(g.n_weeks());
    for (int t = 0; t < g.n_weeks(); ++t) x[std::size_t(t)] = g.x(t, 0);
    for (double q : {0.01, 0.25, 0.5, 0.9}) {
        auto s = var_series("bank0", x, st, q);
        REQUIRE(s.values.size() == g.n_weeks() - 1);
        for (int t = 0; t < s.values.size(); ++t)
            CHECK(s.values[t] == doctest::Approx(-40.0).epsilon(1e-9));
    }
}

TEST_CASE("VaR matches empirical quantiles when states are irrelevant") {
    int n = 520;
    auto x = normal_series(n, 0.02, 99);
    auto g = testdata::growth_from_series({x});
    auto st = testdata::states_for(g, 2, 7);

    auto v50 = var_series("b", x, st, 0.5);
    auto v01 = var_series("b", x, st, 0.01);
    double mean50 = v50.values.mean();
    double mean01 = v01.values.mean();

    CHECK(std::abs(mean50) < 30.0); // median of a centered series, in bp
    for (int t = 0; t < v01.values.size(); ++t) CHECK(v01.values[t] > 0.0);

    double expected01 = -1e4 * empirical_quantile(x, 0.01);
    CHECK(mean01 == doctest::Approx(expected01).epsilon(0.35));
}

TEST_CASE("samples under 60 weeks raise SampleSizeError") {
    auto x = normal_series(55, 0.02, 3);
    auto g = testdata::growth_from_series({x});
    auto st = testdata::states_for(g, 1, 3);
    CHECK_THROWS_AS(var_series("b", x, st, 0.05), SampleSizeError);
}

TEST_CASE("system identical to bank collapses dCoVaR to a VaR difference") {
    auto x = normal_series(250, 0.02, 17);
    auto g = testdata::growth_from_series({x});
    auto st = testdata::empty_states(g);
    MarketPanel dummy;
    MeasureInputs in{dummy, g, st};

    auto d = delta_covar(in, "bank0");
    auto v01 = var_series("bank0", x, st, 0.01);
    auto v50 = var_series("bank0", x, st, 0.50);
    REQUIRE(d.values.size() == v01.values.size());
    for (int t = 0; t < d.values.size(); ++t)
        CHECK(d.values[t] ==
              doctest::Approx(v01.values[t] - v50.values[t]).epsilon(1e-8));
}

TEST_CASE("dCoVaR is invariant to rescaling the conditioning bank") {
    // the system portfolio excludes the bank so its series can be scaled
    int n = 300;
    auto x0 = normal_series(n, 0.02, 21);
    auto x1 = normal_series(n, 0.018, 22);
    auto x2 = normal_series(n, 0.022, 23);
    auto g = testdata::growth_from_series({x0, x1, x2});
    auto st = testdata::states_for(g, 1, 9);
    MarketPanel dummy;
    CoRiskOptions opts;
    opts.exclude_conditioning_bank = true;

    MeasureInputs in{dummy, g, st};
    auto base = delta_covar(in, "bank0", opts);
    auto fit_base = fit_corisk(in, "bank0", 0.01, false, opts);
    auto var_base = var_series("bank0", x0, st, 0.01, opts);

    auto x0_scaled = x0;
    for (auto& v : x0_scaled) v *= 2.0;
    auto g2 = testdata::growth_from_series({x0_scaled, x1, x2});
    sysrisk::StateSeries st2 = st;
    MeasureInputs in2{dummy, g2, st2};
    auto scaled = delta_covar(in2, "bank0", opts);
    auto fit_scaled = fit_corisk(in2, "bank0", 0.01, false, opts);
    auto var_scaled = var_series("bank0", x0_scaled, st2, 0.01, opts);

    CHECK(fit_scaled.system_eq.coefficients[1] ==
          doctest::Approx(0.5 * fit_base.system_eq.coefficients[1])
              .epsilon(1e-8));
    for (int t = 0; t < var_base.values.size(); ++t)
        CHECK(var_scaled.values[t] ==
              doctest::Approx(2.0 * var_base.values[t]).epsilon(1e-8));
    for (int t = 0; t < base.values.size(); ++t)
        CHECK(scaled.values[t] ==
              doctest::Approx(base.values[t])
                  .epsilon(1e-8)
                  .scale(std::max(1.0, std::abs(base.values[t]))));
}

TEST_CASE("asymmetric variant equals the standard one when X never positive") {
    int n = 200;
    auto x = normal_series(n, 0.01, 31, -0.05); // all negative w.h.p.
    for (auto& v : x) v = std::min(v, -1e-4);
    auto sys = normal_series(n, 0.02, 32);
    auto g = testdata::growth_from_series({x, sys});
    // make the "system" portfolio equal bank1's series by zeroing bank0 weight
    std::vector<std::vector<double>> lagged{std::vector<double>(n, 1.0),
                                            std::vector<double>(n, 1.0)};
    auto g2 = testdata::growth_from_series({x, sys}, &lagged);
    auto st = testdata::states_for(g2, 2, 33);
    MarketPanel dummy;
    MeasureInputs in{dummy, g2, st};

    auto standard = delta_covar(in, "bank0");
    auto asym = asym_delta_covar(in, "bank0");
    REQUIRE(standard.values.size() == asym.values.size());
    for (int t = 0; t < standard.values.size(); ++t)
        CHECK(asym.values[t] == standard.values[t]); // bit-exact
}

TEST_CASE("asymmetric fit recovers split slopes on exact data") {
    // y = 2 * min(x,0) exactly, no states: beta- = 2, beta+ = 0
    int n = 260;
    auto x = normal_series(n, 0.02, 41);
    std::vector<double> y(x.size());
    for (std::size_t t = 0; t < x.size(); ++t)
        y[t] = 2.0 * std::min(x[t], 0.0);
    auto g = testdata::growth_from_series({x, y});
    auto st = testdata::empty_states(g);
    MarketPanel dummy;

    // system portfolio must equal y: zero out bank0's weight
    std::vector<std::vector<double>> lagged{std::vector<double>(n, 0.0),
                                            std::vector<double>(n, 1.0)};
    // lagged weight zero is not representable (needs positive A); instead
    // exclude the conditioning bank from the system portfolio
    CoRiskOptions opts;
    opts.exclude_conditioning_bank = true;

    MeasureInputs in{dummy, g, st};
    auto fit = fit_corisk(in, "bank0", 0.01, true, opts);
    CHECK(fit.system_eq.coefficients[1] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(fit.system_eq.coefficients[2] == doctest::Approx(2.0).epsilon(1e-8));

    auto ad = asym_delta_covar(in, "bank0", opts);
    auto v01 = var_series("bank0", x, st, 0.01);
    auto v50 = var_series("bank0", x, st, 0.50);
    for (int t = 0; t < ad.values.size(); ++t)
        CHECK(ad.values[t] ==
              doctest::Approx(2.0 * (v01.values[t] - v50.values[t]))
                  .epsilon(1e-8));
}

TEST_CASE("dCoES with a one-point grid equals dCoVaR bit-exactly") {
    int n = 220;
    auto x0 = normal_series(n, 0.02, 51);
    auto x1 = normal_series(n, 0.02, 52);
    auto g = testdata::growth_from_series({x0, x1});
    auto st = testdata::states_for(g, 1, 53);
    MarketPanel dummy;
    MeasureInputs in{dummy, g, st};

    CoRiskOptions opts;
    opts.coes_grid = 1;
    auto ces = delta_coes(in, "bank0", opts);
    auto cvar = delta_covar(in, "bank0", opts);
    REQUIRE(ces.values.size() == cvar.values.size());
    for (int t = 0; t < ces.values.size(); ++t)
        CHECK(ces.values[t] == cvar.values[t]);
}

TEST_CASE("dCoES averages the CoVaR tail grid") {
    // system == bank and no states: CoES(q) = mean over the grid of VaR
    // quantiles, and the reported tail CoES dominates the single quantile
    int n = 400;
    auto x = normal_series(n, 0.02, 61);
    auto g = testdata::growth_from_series({x});
    auto st = testdata::empty_states(g);
    MarketPanel dummy;
    MeasureInputs in{dummy, g, st};

    const int K = 5;
    CoRiskOptions opts;
    opts.coes_grid = K;
    auto d = delta_coes(in, "bank0", opts);

    Eigen::VectorXd tail_d = Eigen::VectorXd::Zero(d.values.size());
    Eigen::VectorXd tail_m = Eigen::VectorXd::Zero(d.values.size());
    for (int k = 1; k <= K; ++k) {
        tail_d += var_series("bank0", x, st, 0.01 * k / K).values;
        tail_m += var_series("bank0", x, st, 0.50 * k / K).values;
    }
    tail_d /= K;
    tail_m /= K;
    for (int t = 0; t < d.values.size(); ++t)
        CHECK(d.values[t] ==
              doctest::Approx(tail_d[t] - tail_m[t]).epsilon(1e-8));

    // tail averaging dominates the quantile in reported (distress+) units
    auto v01 = var_series("bank0", x, st, 0.01);
    CHECK(tail_d.mean() >= v01.values.mean() - 1e-9);
}

TEST_CASE("independent-noise bank has dCoVaR indistinguishable from zero") {
    const int seeds = 200;
    std::vector<double> means;
    for (int s = 0; s < seeds; ++s) {
        int n = 150;
        auto noise = normal_series(n, 0.02, 1000 + s);
        auto x1 = normal_series(n, 0.02, 5000 + s);
        auto x2 = normal_series(n, 0.02, 7000 + s);
        auto g = testdata::growth_from_series({noise, x1, x2});
        auto st = testdata::states_for(g, 1, 9000 + s);
        MarketPanel dummy;
        CoRiskOptions opts;
        opts.exclude_conditioning_bank = true;
        MeasureInputs in{dummy, g, st};
        auto d = delta_covar(in, "bank0", opts);
        means.push_back(d.values.mean());
    }
    double grand = 0.0;
    for (double m : means) grand += m;
    grand /= seeds;
    double var = 0.0;
    for (double m : means) var += (m - grand) * (m - grand);
    double se = std::sqrt(var / (seeds - 1)) / std::sqrt(double(seeds));
    CHECK(std::abs(grand) < 3.0 * se);
}

TEST_CASE("quarterly reduction: last week and intra-quarter sum") {
    RiskSeries s;
    s.bank_id = "b";
    s.kind = Measure::nsv;
    // weekly Fridays spanning 2007Q4-2008Q1
    Date d(2007, 12, 7);
    for (int i = 0; i < 10; ++i) s.dates.push_back(d.plus_days(7 * i));
    s.values.resize(10);
    for (int i = 0; i < 10; ++i) s.values[i] = i + 1.0;

    auto last = to_quarterly(s, QuarterlyMode::last_week);
    auto sum = to_quarterly(s, QuarterlyMode::intra_quarter_sum);
    REQUIRE(last.quarters.size() == 2);
    CHECK(last.quarters[0] == Quarter{2007, 4});
    CHECK(last.quarters[1] == Quarter{2008, 1});
    // 2007-12-07..28 are Q4 (4 weeks), the rest 2008Q1
    CHECK(last.values[0] == 4.0);
    CHECK(last.values[1] == 10.0);
    CHECK(sum.values[0] == doctest::Approx(1 + 2 + 3 + 4));
    CHECK(sum.values[1] == doctest::Approx(5 + 6 + 7 + 8 + 9 + 10));
}
