#include "sysrisk/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sysrisk/csv.hpp"

namespace sysrisk {

namespace {

Date parse_date_field(const CsvTable& t, std::size_t row, std::size_t col) {
    try {
        return Date::parse(t.field(row, col));
    } catch (const ArgumentError& e) {
        throw ParseError(t.source, t.line_numbers[row], e.what());
    }
}

} // namespace

MarketPanel load_market_panel(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    std::size_t c_date = t.column("date");
    std::size_t c_bank = t.column("bank_id");
    std::size_t c_me = t.column("market_equity");
    std::size_t c_ta = t.column("total_assets");
    std::size_t c_be = t.column("book_equity");

    // collect the date index and per-bank observations
    std::map<Date, int> date_pos;
    std::vector<Date> dates;
    struct Obs { double me, ta, be; long line; };
    std::map<std::string, std::map<int, Obs>> per_bank;
    std::vector<std::string> bank_order;

    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        Date d = parse_date_field(t, r, c_date);
        auto [it, inserted] = date_pos.try_emplace(d, -1);
        if (inserted) dates.push_back(d);
        const std::string& id = t.field(r, c_bank);
        if (id.empty())
            throw ParseError(t.source, t.line_numbers[r], "empty bank_id");
        auto& bank = per_bank[id];
        if (bank.empty()) bank_order.push_back(id);
        Obs obs{t.number(r, c_me), t.number(r, c_ta), t.number(r, c_be),
                t.line_numbers[r]};
        if (obs.me <= 0.0 || obs.ta <= 0.0 || obs.be <= 0.0)
            throw ValidationError(
                t.source + ":" + std::to_string(obs.line) +
                ": nonpositive balance item for bank " + id + " at " +
                d.to_string());
        if (!bank.emplace(d.serial(), obs).second)
            throw ParseError(t.source, t.line_numbers[r],
                             "duplicate row for bank " + id + " at " +
                                 d.to_string());
    }

    std::sort(dates.begin(), dates.end());
    for (std::size_t i = 0; i < dates.size(); ++i) date_pos[dates[i]] = int(i);

    MarketPanel panel;
    panel.dates = dates;
    for (const auto& id : bank_order) {
        BankRecord rec;
        rec.id = id;
        rec.market_equity.assign(dates.size(), std::nan(""));
        rec.total_assets.assign(dates.size(), std::nan(""));
        rec.book_equity.assign(dates.size(), std::nan(""));
        for (const auto& [serial, obs] : per_bank[id]) {
            int pos = date_pos[dates[0].plus_days(serial - dates[0].serial())];
            rec.market_equity[pos] = obs.me;
            rec.total_assets[pos] = obs.ta;
            rec.book_equity[pos] = obs.be;
        }
        panel.banks.push_back(std::move(rec));
    }
    panel.validate();
    return panel;
}

StateSeries load_state_series(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    for (const auto& col : t.columns) {
        if (col == "date") continue;
        if (std::find(kStateColumns.begin(), kStateColumns.end(), col) ==
            kStateColumns.end())
            throw ParseError(t.source, 1, "unknown column '" + col + "'");
    }
    std::size_t c_date = t.column("date");
    std::vector<std::size_t> cols;
    for (const auto& name : kStateColumns) cols.push_back(t.column(name));

    StateSeries s;
    s.names = kStateColumns;
    s.m.resize(static_cast<int>(t.rows.size()), int(kStateColumns.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        Date d = parse_date_field(t, r, c_date);
        if (!s.dates.empty() && !(s.dates.back() < d))
            throw ValidationError(t.source + ":" +
                                  std::to_string(t.line_numbers[r]) +
                                  ": dates not strictly increasing");
        s.dates.push_back(d);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            double v = t.number(r, cols[c]);
            if (!std::isfinite(v))
                throw ValidationError(
                    t.source + ":" + std::to_string(t.line_numbers[r]) +
                    ": missing interior value in " + kStateColumns[c]);
            s.m(int(r), int(c)) = v;
        }
    }
    return s;
}

QuarterPanel load_quarter_panel(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    std::vector<std::string> fields = kQuarterFields;
    for (const auto& col : t.columns) {
        if (col == "quarter" || col == "bank_id") continue;
        bool known =
            std::find(kQuarterFields.begin(), kQuarterFields.end(), col) !=
            kQuarterFields.end();
        bool optional = std::find(kQuarterOptionalFields.begin(),
                                  kQuarterOptionalFields.end(),
                                  col) != kQuarterOptionalFields.end();
        if (!known && !optional)
            throw ParseError(t.source, 1, "unknown column '" + col + "'");
        if (optional) fields.push_back(col);
    }

    std::size_t c_quarter = t.column("quarter");
    std::size_t c_bank = t.column("bank_id");
    std::vector<std::size_t> cols;
    for (const auto& f : fields) cols.push_back(t.column(f));

    std::map<int, Quarter> quarters_seen;
    std::vector<std::string> bank_order;
    std::map<std::string, int> bank_pos;
    struct Cell { std::vector<double> v; };
    std::map<std::pair<int, int>, Cell> cells; // (quarter index, bank) -> row

    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        Quarter q;
        try {
            q = Quarter::parse(t.field(r, c_quarter));
        } catch (const ArgumentError& e) {
            throw ParseError(t.source, t.line_numbers[r], e.what());
        }
        quarters_seen.emplace(q.index(), q);
        const std::string& id = t.field(r, c_bank);
        auto [it, inserted] = bank_pos.try_emplace(id, int(bank_order.size()));
        if (inserted) bank_order.push_back(id);
        Cell cell;
        for (std::size_t c : cols) cell.v.push_back(t.number(r, c));
        if (!cells.emplace(std::make_pair(q.index(), it->second), cell).second)
            throw ParseError(t.source, t.line_numbers[r],
                             "duplicate row for bank " + id + " at " +
                                 q.to_string());
    }
    if (quarters_seen.empty())
        throw ParseError(t.source, 1, "no data rows");

    QuarterPanel panel;
    Quarter q0 = quarters_seen.begin()->second;
    Quarter qn = quarters_seen.rbegin()->second;
    for (Quarter q = q0;; q = q.next()) {
        panel.quarters.push_back(q);
        if (q == qn) break;
    }
    panel.bank_ids = bank_order;
    panel.fields = fields;
    for (std::size_t f = 0; f < fields.size(); ++f)
        panel.values.emplace_back(Eigen::MatrixXd::Constant(
            panel.n_quarters(), panel.n_banks(), std::nan("")));

    int base = q0.index();
    for (const auto& [key, cell] : cells) {
        int qi = key.first - base;
        for (std::size_t f = 0; f < fields.size(); ++f)
            panel.values[f](qi, key.second) = cell.v[f];
    }
    panel.validate();
    return panel;
}

EventTimeline load_events(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    std::size_t c_date = t.column("date");
    std::size_t c_kind = t.column("kind");

    EventTimeline timeline;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        Date d = parse_date_field(t, r, c_date);
        const std::string& kind = t.field(r, c_kind);
        EventKind k;
        if (kind == "event")
            k = EventKind::event;
        else if (kind == "policy_action" || kind == "action")
            k = EventKind::policy_action;
        else
            throw ParseError(t.source, t.line_numbers[r],
                             "unknown kind '" + kind + "'");
        timeline.entries.emplace_back(d, k);
    }
    std::stable_sort(timeline.entries.begin(), timeline.entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    return timeline;
}

void write_market_panel(const MarketPanel& panel,
                        const std::filesystem::path& path) {
    CsvWriter w(path);
    w.write_row({"date", "bank_id", "market_equity", "total_assets",
                 "book_equity"});
    for (int t = 0; t < panel.n_weeks(); ++t)
        for (const auto& b : panel.banks) {
            if (std::isnan(b.market_equity[t])) continue;
            w.write_row({panel.dates[t].to_string(), b.id,
                         format_double(b.market_equity[t]),
                         format_double(b.total_assets[t]),
                         format_double(b.book_equity[t])});
        }
}

void write_state_series(const StateSeries& s,
                        const std::filesystem::path& path) {
    CsvWriter w(path);
    std::vector<std::string> header{"date"};
    header.insert(header.end(), s.names.begin(), s.names.end());
    w.write_row(header);
    for (std::size_t t = 0; t < s.dates.size(); ++t) {
        std::vector<std::string> row{s.dates[t].to_string()};
        for (int c = 0; c < s.n_vars(); ++c)
            row.push_back(format_double(s.m(int(t), c)));
        w.write_row(row);
    }
}

void write_quarter_panel(const QuarterPanel& panel,
                         const std::filesystem::path& path) {
    CsvWriter w(path);
    std::vector<std::string> header{"quarter", "bank_id"};
    header.insert(header.end(), panel.fields.begin(), panel.fields.end());
    w.write_row(header);
    for (int t = 0; t < panel.n_quarters(); ++t)
        for (int b = 0; b < panel.n_banks(); ++b) {
            if (std::isnan(panel.values[0](t, b))) continue;
            std::vector<std::string> row{panel.quarters[t].to_string(),
                                         panel.bank_ids[b]};
            for (const auto& v : panel.values)
                row.push_back(format_double(v(t, b)));
            w.write_row(row);
        }
}

void write_events(const EventTimeline& timeline,
                  const std::filesystem::path& path) {
    CsvWriter w(path);
    w.write_row({"date", "kind"});
    for (const auto& [d, k] : timeline.entries)
        w.write_row({d.to_string(),
                     k == EventKind::event ? "event" : "policy_action"});
}

} // namespace sysrisk
