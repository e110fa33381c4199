#include "sysrisk/corisk.hpp"

#include <cmath>

namespace sysrisk {

const char* measure_name(Measure m) {
    switch (m) {
        case Measure::var: return "var";
        case Measure::dcovar: return "dcovar";
        case Measure::dcoes: return "dcoes";
        case Measure::adcovar: return "adcovar";
        case Measure::gsv: return "gsv";
        case Measure::nsv: return "nsv";
    }
    return "?";
}

std::optional<Measure> measure_from_name(const std::string& name) {
    for (Measure m : {Measure::var, Measure::dcovar, Measure::dcoes,
                      Measure::adcovar, Measure::gsv, Measure::nsv})
        if (name == measure_name(m)) return m;
    return std::nullopt;
}

namespace {

constexpr double kBasisPoints = 1e4;

// Rows are growth indices k = 1..T-1; the regressors are whatever extra
// columns the caller supplies plus M_{k-1}. Estimation keeps rows with a
// finite response and finite extras; prediction covers every row.
struct Design {
    std::vector<Date> dates; // output dates, growth index 1..T-1
    Eigen::MatrixXd pred;    // (T-1) x p
    Eigen::MatrixXd est;     // n_est x p
    Eigen::VectorXd y;       // n_est
};

Design build_design(const std::vector<double>& y_full, const StateSeries& m,
                    const std::vector<const std::vector<double>*>& extras,
                    int min_sample) {
    const int tg = static_cast<int>(m.dates.size());
    if (static_cast<int>(y_full.size()) != tg)
        throw ArgumentError("series length does not match state dates");
    if (tg < 2) throw SampleSizeError("need at least two weekly observations");

    const int k_state = m.n_vars();
    const int p = 1 + static_cast<int>(extras.size()) + k_state;

    Design d;
    d.dates.assign(m.dates.begin() + 1, m.dates.end());
    d.pred.resize(tg - 1, p);
    std::vector<int> est_rows;
    for (int k = 1; k < tg; ++k) {
        int row = k - 1;
        d.pred(row, 0) = 1.0;
        bool ok = std::isfinite(y_full[k]);
        for (std::size_t e = 0; e < extras.size(); ++e) {
            double v = (*extras[e])[k];
            d.pred(row, 1 + int(e)) = v;
            ok = ok && std::isfinite(v);
        }
        for (int c = 0; c < k_state; ++c)
            d.pred(row, 1 + int(extras.size()) + c) = m.m(k - 1, c);
        if (ok) est_rows.push_back(row);
    }
    if (static_cast<int>(est_rows.size()) < min_sample)
        throw SampleSizeError(
            "estimation window has " + std::to_string(est_rows.size()) +
            " usable weeks, need " + std::to_string(min_sample));

    d.est.resize(int(est_rows.size()), p);
    d.y.resize(int(est_rows.size()));
    for (std::size_t i = 0; i < est_rows.size(); ++i) {
        d.est.row(int(i)) = d.pred.row(est_rows[i]);
        d.y[int(i)] = y_full[est_rows[i] + 1];
    }
    return d;
}

std::vector<double> bank_growth(const MeasureInputs& in,
                                const std::string& bank, int* index = nullptr) {
    int b = in.growth.bank_index(bank);
    if (b < 0) throw ArgumentError("unknown bank '" + bank + "'");
    if (index) *index = b;
    std::vector<double> x(in.growth.n_weeks());
    for (int t = 0; t < in.growth.n_weeks(); ++t) x[t] = in.growth.x(t, b);
    return x;
}

std::vector<double> system_growth(const MeasureInputs& in,
                                  const std::string& bank,
                                  const CoRiskOptions& opts) {
    std::vector<int> members;
    for (int i = 0; i < in.growth.n_banks(); ++i) {
        if (opts.exclude_conditioning_bank &&
            in.growth.bank_ids[i] == bank)
            continue;
        members.push_back(i);
    }
    if (members.empty())
        throw ArgumentError("system portfolio has no members");
    return portfolio_growth_idx(in.growth, members);
}

// Raw (not sign-converted) fitted quantile series plus its fit.
struct RawSeries {
    std::vector<Date> dates;
    Eigen::VectorXd values;
    QuantileFit fit;
};

RawSeries raw_var(const std::vector<double>& x_i, const StateSeries& m,
                  double q, const CoRiskOptions& opts) {
    Design d = build_design(x_i, m, {}, opts.min_sample);
    RawSeries out;
    out.fit = fit_quantile(d.y, d.est, q);
    out.values = predict_all(out.fit, d.pred);
    out.dates = std::move(d.dates);
    return out;
}

// Eq. (B.1.2)/(B.2.2): CoVaR_t(q) = a + b * VaR_t^i(q) + g . M_{t-1}, where
// b is the plain system slope or the negative-side slope for the asymmetric
// variant.
RawSeries raw_covar(const MeasureInputs& in, const std::string& bank, double q,
                    bool asymmetric, const CoRiskOptions& opts,
                    CoRiskFit* fits_out = nullptr) {
    std::vector<double> x_i = bank_growth(in, bank);
    std::vector<double> sys = system_growth(in, bank, opts);
    RawSeries var_i = raw_var(x_i, in.states, q, opts);

    RawSeries out;
    if (!asymmetric) {
        Design d = build_design(sys, in.states, {&x_i}, opts.min_sample);
        QuantileFit sf = fit_quantile(d.y, d.est, q);
        const auto& c = sf.coefficients;
        Eigen::VectorXd gamma = c.tail(in.states.n_vars());
        Eigen::VectorXd state_part =
            d.pred.rightCols(in.states.n_vars()) * gamma;
        out.values = (c[1] * var_i.values + state_part).array() + c[0];
        out.dates = std::move(d.dates);
        out.fit = sf;
        if (fits_out) {
            fits_out->bank_id = bank;
            fits_out->q = q;
            fits_out->bank_eq = var_i.fit;
            fits_out->system_eq = sf;
            fits_out->asymmetric = false;
        }
    } else {
        std::vector<double> x_pos(x_i.size()), x_neg(x_i.size());
        for (std::size_t t = 0; t < x_i.size(); ++t) {
            double v = x_i[t];
            x_pos[t] = v >= 0.0 ? v : 0.0;
            x_neg[t] = v < 0.0 ? v : 0.0;
        }
        Design d = build_design(sys, in.states, {&x_pos, &x_neg},
                                opts.min_sample);
        QuantileFit sf = fit_quantile(d.y, d.est, q);
        const auto& c = sf.coefficients;
        Eigen::VectorXd gamma = c.tail(in.states.n_vars());
        Eigen::VectorXd state_part =
            d.pred.rightCols(in.states.n_vars()) * gamma;
        out.values = (c[2] * var_i.values + state_part).array() + c[0];
        out.dates = std::move(d.dates);
        out.fit = sf;
        if (fits_out) {
            fits_out->bank_id = bank;
            fits_out->q = q;
            fits_out->bank_eq = var_i.fit;
            fits_out->system_eq = sf;
            fits_out->asymmetric = true;
        }
    }
    return out;
}

RiskSeries convert(const std::string& bank, Measure kind,
                   std::vector<Date> dates, const Eigen::VectorXd& raw) {
    RiskSeries s;
    s.bank_id = bank;
    s.kind = kind;
    s.dates = std::move(dates);
    s.values = -kBasisPoints * raw;
    return s;
}

} // namespace

namespace {

// One tail/median quantile pair of the delta construction. The default
// conditional form changes only the bank's conditioning state between the
// two terms, so the intercept and state terms cancel:
//   delta_raw = beta_hat(qd) * (VaR_i(qd) - VaR_i(qm)).
// The literal form subtracts the qm-equation fit in full.
struct DeltaPair {
    std::vector<Date> dates;
    Eigen::VectorXd values; // raw units
};

DeltaPair raw_delta_pair(const MeasureInputs& in, const std::string& bank,
                         double qd, double qm, bool asymmetric,
                         const CoRiskOptions& opts) {
    DeltaPair out;
    if (opts.literal_difference) {
        RawSeries cd = raw_covar(in, bank, qd, asymmetric, opts);
        RawSeries cm = raw_covar(in, bank, qm, asymmetric, opts);
        out.dates = std::move(cd.dates);
        out.values = cd.values - cm.values;
        return out;
    }
    std::vector<double> x_i = bank_growth(in, bank);
    RawSeries var_d = raw_var(x_i, in.states, qd, opts);
    RawSeries var_m = raw_var(x_i, in.states, qm, opts);
    std::vector<double> sys = system_growth(in, bank, opts);
    double beta;
    if (!asymmetric) {
        Design d = build_design(sys, in.states, {&x_i}, opts.min_sample);
        beta = fit_quantile(d.y, d.est, qd).coefficients[1];
    } else {
        std::vector<double> x_pos(x_i.size()), x_neg(x_i.size());
        for (std::size_t t = 0; t < x_i.size(); ++t) {
            x_pos[t] = x_i[t] >= 0.0 ? x_i[t] : 0.0;
            x_neg[t] = x_i[t] < 0.0 ? x_i[t] : 0.0;
        }
        Design d = build_design(sys, in.states, {&x_pos, &x_neg},
                                opts.min_sample);
        beta = fit_quantile(d.y, d.est, qd).coefficients[2]; // negative side
    }
    out.dates = std::move(var_d.dates);
    out.values = beta * (var_d.values - var_m.values);
    return out;
}

} // namespace

CoRiskFit fit_corisk(const MeasureInputs& in, const std::string& bank,
                     double q, bool asymmetric, const CoRiskOptions& opts) {
    CoRiskFit fits;
    raw_covar(in, bank, q, asymmetric, opts, &fits);
    return fits;
}

RiskSeries var_series(const std::string& bank_id,
                      const std::vector<double>& x_i, const StateSeries& m,
                      double q, const CoRiskOptions& opts) {
    RawSeries raw = raw_var(x_i, m, q, opts);
    return convert(bank_id, Measure::var, std::move(raw.dates), raw.values);
}

RiskSeries delta_covar(const MeasureInputs& in, const std::string& bank,
                       const CoRiskOptions& opts) {
    DeltaPair d = raw_delta_pair(in, bank, opts.q_distress, opts.q_median,
                                 false, opts);
    return convert(bank, Measure::dcovar, std::move(d.dates), d.values);
}

RiskSeries delta_coes(const MeasureInputs& in, const std::string& bank,
                      const CoRiskOptions& opts) {
    const int K = opts.coes_grid;
    if (K < 1) throw ArgumentError("CoES grid must have at least one point");

    Eigen::VectorXd acc;
    std::vector<Date> dates;
    for (int k = 1; k <= K; ++k) {
        DeltaPair d = raw_delta_pair(in, bank, opts.q_distress * k / K,
                                     opts.q_median * k / K, false, opts);
        if (acc.size() == 0) {
            acc = d.values;
            dates = std::move(d.dates);
        } else
            acc += d.values;
    }
    return convert(bank, Measure::dcoes, std::move(dates),
                   Eigen::VectorXd(acc / double(K)));
}

RiskSeries asym_delta_covar(const MeasureInputs& in, const std::string& bank,
                            const CoRiskOptions& opts) {
    DeltaPair d = raw_delta_pair(in, bank, opts.q_distress, opts.q_median,
                                 true, opts);
    return convert(bank, Measure::adcovar, std::move(d.dates), d.values);
}

QuarterlySeries to_quarterly(const RiskSeries& s, QuarterlyMode mode) {
    QuarterlySeries out;
    out.bank_id = s.bank_id;
    out.kind = s.kind;

    std::vector<double> acc;
    for (std::size_t t = 0; t < s.dates.size(); ++t) {
        Quarter q = Quarter::of(s.dates[t]);
        if (out.quarters.empty() || out.quarters.back() != q) {
            out.quarters.push_back(q);
            acc.push_back(0.0);
        }
        if (mode == QuarterlyMode::last_week)
            acc.back() = s.values[int(t)];
        else
            acc.back() += s.values[int(t)];
    }
    out.values = Eigen::Map<Eigen::VectorXd>(acc.data(), int(acc.size()));
    return out;
}

} // namespace sysrisk
