#include "sysrisk/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sysrisk/threading.hpp"

namespace sysrisk {

namespace {

constexpr double kBasisPoints = 1e4;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv_init() { return 14695981039346656037ULL; }

// Average observed asset value, the size ranking used for core selection.
double average_assets(const MarketPanel& panel, int bank) {
    auto a = panel.asset_value(bank);
    double sum = 0.0;
    int n = 0;
    for (double v : a)
        if (!std::isnan(v)) {
            sum += v;
            ++n;
        }
    return n ? sum / n : 0.0;
}

std::vector<int> size_ranking(const MarketPanel& panel) {
    std::vector<int> order(panel.n_banks());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> avg(panel.n_banks());
    for (int b = 0; b < panel.n_banks(); ++b) avg[b] = average_assets(panel, b);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (avg[a] != avg[b]) return avg[a] > avg[b];
        return panel.banks[a].id < panel.banks[b].id;
    });
    return order;
}

// Exact Shapley size-class weight 1/(N * C(N-1, k)) for |T| = k.
double shapley_weight(int n, int k) {
    double binom = 1.0;
    for (int i = 1; i <= k; ++i) binom = binom * double(n - i) / double(i);
    return 1.0 / (double(n) * binom);
}

void kahan_add(Eigen::VectorXd& acc, Eigen::VectorXd& comp,
               const Eigen::VectorXd& term) {
    for (int i = 0; i < acc.size(); ++i) {
        double y = term[i] - comp[i];
        double t = acc[i] + y;
        comp[i] = (t - acc[i]) - y;
        acc[i] = t;
    }
}

} // namespace

int SystemSpec::target_position() const {
    for (int i = 0; i < size(); ++i)
        if (members[i] == target) return i;
    throw ArgumentError("target '" + target + "' is not a system member");
}

SystemSpec build_system(const MarketPanel& panel, const std::string& target,
                        int n_system) {
    if (n_system < 1) throw ArgumentError("system size must be at least 1");
    if (panel.bank_index(target) < 0)
        throw ArgumentError("unknown target bank '" + target + "'");
    if (n_system > panel.n_banks())
        throw ArgumentError("system size exceeds panel bank count");

    SystemSpec spec;
    spec.target = target;
    spec.mode = SystemSpec::Mode::core_plus_target;

    auto order = size_ranking(panel);
    std::vector<int> chosen;
    for (int b : order) {
        if (panel.banks[b].id == target) continue;
        if (static_cast<int>(chosen.size()) == n_system - 1) break;
        chosen.push_back(b);
    }
    chosen.push_back(panel.bank_index(target));
    // keep members in size order, target at its natural rank
    std::vector<int> ordered;
    for (int b : order)
        if (std::find(chosen.begin(), chosen.end(), b) != chosen.end())
            ordered.push_back(b);
    for (int b : ordered) spec.members.push_back(panel.banks[b].id);
    return spec;
}

BankRecord build_synthetic_bank(const MarketPanel& panel,
                                const std::vector<std::string>& excluded) {
    std::vector<int> members;
    for (int b = 0; b < panel.n_banks(); ++b)
        if (std::find(excluded.begin(), excluded.end(), panel.banks[b].id) ==
            excluded.end())
            members.push_back(b);
    if (members.empty())
        throw ArgumentError("synthetic bank: nothing remains to aggregate");

    BankRecord rec;
    std::uint64_t h = fnv_init();
    for (int b : members)
        h = fnv1a(h, panel.banks[b].id.data(), panel.banks[b].id.size());
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "synthetic-%016llx",
                  static_cast<unsigned long long>(h));
    rec.id = idbuf;

    const int tw = panel.n_weeks();
    rec.market_equity.assign(tw, std::nan(""));
    rec.total_assets.assign(tw, std::nan(""));
    rec.book_equity.assign(tw, std::nan(""));
    for (int t = 0; t < tw; ++t) {
        double sum = 0.0;
        bool any = false;
        for (int b : members) {
            auto a = panel.asset_value(b); // small N; clarity over speed
            if (!std::isnan(a[t])) {
                sum += a[t];
                any = true;
            }
        }
        if (any) {
            // represent the aggregate with A = me * ta / be = sum
            rec.market_equity[t] = sum;
            rec.total_assets[t] = 1.0;
            rec.book_equity[t] = 1.0;
        }
    }
    return rec;
}

SyntheticSystem build_synthetic_system(const MarketPanel& panel,
                                       const std::string& target,
                                       int n_system) {
    if (n_system < 2)
        throw ArgumentError("synthetic system needs size at least 2");
    SystemSpec core = build_system(panel, target, n_system - 1);
    BankRecord synth = build_synthetic_bank(panel, core.members);

    SyntheticSystem out;
    out.panel = panel;
    out.panel.banks.push_back(synth);
    out.spec.target = target;
    out.spec.mode = SystemSpec::Mode::core_plus_target_plus_synthetic;
    out.spec.members = core.members;
    out.spec.members.push_back(synth.id);
    return out;
}

// --- CharacteristicCache ----------------------------------------------------

std::size_t CharacteristicCache::KeyHash::operator()(const Key& k) const {
    std::uint64_t h = fnv_init();
    for (const auto& id : k.members) {
        h = fnv1a(h, id.data(), id.size());
        h = fnv1a(h, ";", 1);
    }
    h = fnv1a(h, &k.q, sizeof k.q);
    h = fnv1a(h, &k.fp, sizeof k.fp);
    return static_cast<std::size_t>(h);
}

std::shared_ptr<const Eigen::VectorXd> CharacteristicCache::find(
    const std::vector<std::string>& member_ids, double q,
    std::uint64_t fp) const {
    Key key{member_ids, q, fp};
    std::sort(key.members.begin(), key.members.end());
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) {
        ++misses_;
        return nullptr;
    }
    ++hits_;
    return it->second;
}

void CharacteristicCache::insert(const std::vector<std::string>& member_ids,
                                 double q, std::uint64_t fp,
                                 Eigen::VectorXd coefficients) {
    Key key{member_ids, q, fp};
    std::sort(key.members.begin(), key.members.end());
    auto value = std::make_shared<const Eigen::VectorXd>(std::move(coefficients));
    std::lock_guard<std::mutex> lock(mu_);
    map_.emplace(std::move(key), std::move(value)); // insert-once: first wins
}

long CharacteristicCache::hits() const {
    std::lock_guard<std::mutex> lock(mu_);
    return hits_;
}

long CharacteristicCache::misses() const {
    std::lock_guard<std::mutex> lock(mu_);
    return misses_;
}

double CharacteristicCache::hit_rate() const {
    std::lock_guard<std::mutex> lock(mu_);
    long total = hits_ + misses_;
    return total ? double(hits_) / double(total) : 0.0;
}

void CharacteristicCache::reset_counters() {
    std::lock_guard<std::mutex> lock(mu_);
    hits_ = misses_ = 0;
}

std::size_t CharacteristicCache::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.size();
}

void CharacteristicCache::save(const std::filesystem::path& path) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write cache file '" + path.string() + "'");
    out << "sysrisk-cache v1\n";

    // deterministic order for byte-stable files
    std::vector<const std::pair<const Key, std::shared_ptr<const Eigen::VectorXd>>*>
        items;
    for (const auto& kv : map_) items.push_back(&kv);
    std::sort(items.begin(), items.end(), [](auto* a, auto* b) {
        if (a->first.fp != b->first.fp) return a->first.fp < b->first.fp;
        if (a->first.q != b->first.q) return a->first.q < b->first.q;
        return a->first.members < b->first.members;
    });
    char buf[40];
    for (auto* kv : items) {
        out << kv->first.fp << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", kv->first.q);
        out << buf << ' ' << kv->second->size() << ' ';
        for (std::size_t i = 0; i < kv->first.members.size(); ++i) {
            if (i) out << ';';
            out << kv->first.members[i];
        }
        for (int i = 0; i < kv->second->size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", (*kv->second)[i]);
            out << ' ' << buf;
        }
        out << '\n';
    }
}

void CharacteristicCache::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read cache file '" + path.string() + "'");
    std::string header;
    std::getline(in, header);
    if (header != "sysrisk-cache v1")
        throw ParseError(path.string(), 1, "unsupported cache version");

    std::lock_guard<std::mutex> lock(mu_);
    std::string line;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        Key key;
        int p = 0;
        std::string members;
        if (!(ss >> key.fp >> key.q >> p >> members))
            throw ParseError(path.string(), line_no, "malformed cache entry");
        std::istringstream ms(members);
        std::string id;
        while (std::getline(ms, id, ';')) key.members.push_back(id);
        Eigen::VectorXd coef(p);
        for (int i = 0; i < p; ++i)
            if (!(ss >> coef[i]))
                throw ParseError(path.string(), line_no,
                                 "malformed cache coefficients");
        map_.emplace(std::move(key),
                     std::make_shared<const Eigen::VectorXd>(std::move(coef)));
    }
}

// --- ShapleyContext ---------------------------------------------------------

ShapleyContext::ShapleyContext(const MeasureInputs& in,
                               const ShapleyOptions& opts,
                               CharacteristicCache* cache)
    : in_(in), opts_(opts), cache_(cache) {
    const StateSeries& m = in.states;
    const int tg = static_cast<int>(m.dates.size());
    if (tg != in.growth.n_weeks())
        throw ArgumentError("state series does not align with growth panel");
    if (tg < 2) throw SampleSizeError("need at least two weekly observations");

    dates_.assign(m.dates.begin() + 1, m.dates.end());
    pred_.resize(tg - 1, 1 + m.n_vars());
    for (int k = 1; k < tg; ++k) {
        pred_(k - 1, 0) = 1.0;
        for (int c = 0; c < m.n_vars(); ++c) pred_(k - 1, 1 + c) = m.m(k - 1, c);
    }

    // Fingerprint: the state data plus the weekly date index. Bank identity
    // is carried by ids in the cache key.
    std::uint64_t h = fnv_init();
    int nv = m.n_vars();
    h = fnv1a(h, &nv, sizeof nv);
    for (const auto& d : m.dates) {
        int s = d.serial();
        h = fnv1a(h, &s, sizeof s);
    }
    for (int t = 0; t < m.m.rows(); ++t)
        for (int c = 0; c < m.m.cols(); ++c) {
            double v = m.m(t, c);
            h = fnv1a(h, &v, sizeof v);
        }
    fingerprint_ = h;
}

Eigen::VectorXd ShapleyContext::characteristic(
    const std::vector<int>& members) const {
    if (members.empty())
        throw ArgumentError("characteristic: empty subset");

    std::vector<std::string> ids;
    ids.reserve(members.size());
    for (int b : members) {
        if (b < 0 || b >= in_.growth.n_banks())
            throw ArgumentError("characteristic: bank index out of range");
        ids.push_back(in_.growth.bank_ids[b]);
    }

    if (cache_) {
        if (auto hit = cache_->find(ids, opts_.q, fingerprint_))
            return -kBasisPoints * (pred_ * (*hit));
    }

    std::vector<double> y = portfolio_growth_idx(in_.growth, members);
    const int rows = static_cast<int>(pred_.rows());
    std::vector<int> usable;
    usable.reserve(rows);
    for (int r = 0; r < rows; ++r)
        if (std::isfinite(y[r + 1])) usable.push_back(r);
    if (static_cast<int>(usable.size()) < opts_.corisk.min_sample)
        throw SampleSizeError("characteristic: estimation window has " +
                              std::to_string(usable.size()) +
                              " usable weeks, need " +
                              std::to_string(opts_.corisk.min_sample));

    QuantileFit fit;
    if (static_cast<int>(usable.size()) == rows) {
        Eigen::VectorXd yv(rows);
        for (int r = 0; r < rows; ++r) yv[r] = y[r + 1];
        fit = fit_quantile(yv, pred_, opts_.q);
    } else {
        Eigen::MatrixXd X(int(usable.size()), pred_.cols());
        Eigen::VectorXd yv(int(usable.size()));
        for (std::size_t i = 0; i < usable.size(); ++i) {
            X.row(int(i)) = pred_.row(usable[i]);
            yv[int(i)] = y[usable[i] + 1];
        }
        fit = fit_quantile(yv, X, opts_.q);
    }

    if (cache_) cache_->insert(ids, opts_.q, fingerprint_, fit.coefficients);
    return -kBasisPoints * (pred_ * fit.coefficients);
}

// --- aggregations -----------------------------------------------------------

Eigen::VectorXd shapley_from_function(const SetFunction& theta, int n_members,
                                      int target_pos, int series_len,
                                      int threads) {
    if (n_members < 1 || n_members > 31)
        throw ArgumentError("member count out of range");
    if (target_pos < 0 || target_pos >= n_members)
        throw ArgumentError("target position out of range");

    const std::uint32_t target_bit = 1u << target_pos;
    const int n_others = n_members - 1;

    // compact mask over the non-target members -> full member mask
    std::vector<int> other_pos;
    for (int i = 0; i < n_members; ++i)
        if (i != target_pos) other_pos.push_back(i);
    auto expand = [&](std::uint32_t compact) {
        std::uint32_t full = 0;
        for (int i = 0; i < n_others; ++i)
            if (compact & (1u << i)) full |= 1u << other_pos[i];
        return full;
    };

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(series_len);
    Eigen::VectorXd comp = Eigen::VectorXd::Zero(series_len);

    // Per size class: evaluate marginals in parallel, then accumulate them in
    // ascending mask order with compensated summation. The schedule never
    // affects the result.
    std::vector<std::uint32_t> class_masks;
    std::vector<Eigen::VectorXd> marginals;
    for (int k = 0; k <= n_others; ++k) {
        class_masks.clear();
        for (std::uint32_t compact = 0; compact < (1u << n_others); ++compact)
            if (std::popcount(compact) == k) class_masks.push_back(compact);
        std::sort(class_masks.begin(), class_masks.end(),
                  [&](std::uint32_t a, std::uint32_t b) {
                      return expand(a) < expand(b);
                  });

        marginals.assign(class_masks.size(), Eigen::VectorXd());
        parallel_for(static_cast<int>(class_masks.size()), threads, [&](int i) {
            std::uint32_t full = expand(class_masks[std::size_t(i)]);
            Eigen::VectorXd with = theta(full | target_bit);
            if (full == 0)
                marginals[std::size_t(i)] = std::move(with); // theta(empty)=0
            else
                marginals[std::size_t(i)] = with - theta(full);
        });

        const double w = shapley_weight(n_members, k);
        for (const auto& m : marginals) kahan_add(acc, comp, w * m);
    }
    return acc;
}

Eigen::VectorXd brute_shapley_from_function(const SetFunction& theta,
                                            int n_members, int target_pos,
                                            int series_len) {
    if (n_members > 8)
        throw FeasibilityError(
            "brute-force Shapley enumerates n! orderings; n must be <= 8");
    if (n_members < 1 || target_pos < 0 || target_pos >= n_members)
        throw ArgumentError("bad member count or target position");

    // memoize evaluations only; the aggregation is the plain definition
    std::unordered_map<std::uint32_t, Eigen::VectorXd> memo;
    auto eval = [&](std::uint32_t mask) -> const Eigen::VectorXd& {
        auto it = memo.find(mask);
        if (it == memo.end()) it = memo.emplace(mask, theta(mask)).first;
        return it->second;
    };

    std::vector<int> perm(n_members);
    std::iota(perm.begin(), perm.end(), 0);

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(series_len);
    Eigen::VectorXd comp = Eigen::VectorXd::Zero(series_len);
    long count = 0;
    do {
        std::uint32_t prefix = 0;
        for (int pos : perm) {
            if (pos == target_pos) break;
            prefix |= 1u << pos;
        }
        Eigen::VectorXd marg = eval(prefix | (1u << target_pos));
        if (prefix != 0) marg -= eval(prefix);
        kahan_add(acc, comp, marg);
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc / double(count);
}

namespace {

SetFunction bind_characteristic(const ShapleyContext& ctx,
                                const SystemSpec& spec) {
    std::vector<int> panel_idx;
    for (const auto& id : spec.members) {
        int b = ctx.inputs().growth.bank_index(id);
        if (b < 0)
            throw ArgumentError("system member '" + id +
                                "' is not in the panel");
        panel_idx.push_back(b);
    }
    return [&ctx, panel_idx](std::uint32_t mask) {
        std::vector<int> members;
        for (std::size_t i = 0; i < panel_idx.size(); ++i)
            if (mask & (1u << i)) members.push_back(panel_idx[i]);
        return ctx.characteristic(members);
    };
}

void check_feasible(const ShapleyContext& ctx, const SystemSpec& spec) {
    if (spec.size() > ctx.options().max_system_size)
        throw FeasibilityError(
            "system size " + std::to_string(spec.size()) +
            " exceeds the cap of " +
            std::to_string(ctx.options().max_system_size) + " (2^(N-1) subsets)");
}

} // namespace

RiskSeries gross_shapley(const ShapleyContext& ctx, const SystemSpec& spec) {
    check_feasible(ctx, spec);
    SetFunction theta = bind_characteristic(ctx, spec);
    RiskSeries s;
    s.bank_id = spec.target;
    s.kind = Measure::gsv;
    s.dates = ctx.dates();
    s.values = shapley_from_function(theta, spec.size(),
                                     spec.target_position(), ctx.series_len(),
                                     ctx.options().threads);
    return s;
}

ShapleyResult net_shapley(const ShapleyContext& ctx, const SystemSpec& spec) {
    ShapleyResult res;
    res.bank_id = spec.target;
    res.n_system = spec.size();
    res.gsv = gross_shapley(ctx, spec);

    int b = ctx.inputs().growth.bank_index(spec.target);
    res.var_i.bank_id = spec.target;
    res.var_i.kind = Measure::var;
    res.var_i.dates = ctx.dates();
    res.var_i.values = ctx.characteristic({b});

    res.nsv.bank_id = spec.target;
    res.nsv.kind = Measure::nsv;
    res.nsv.dates = ctx.dates();
    res.nsv.values = res.gsv.values - res.var_i.values / double(spec.size());
    return res;
}

RiskSeries brute_shapley(const ShapleyContext& ctx, const SystemSpec& spec) {
    SetFunction theta = bind_characteristic(ctx, spec);
    RiskSeries s;
    s.bank_id = spec.target;
    s.kind = Measure::gsv;
    s.dates = ctx.dates();
    s.values = brute_shapley_from_function(
        theta, spec.size(), spec.target_position(), ctx.series_len());
    return s;
}

} // namespace sysrisk
