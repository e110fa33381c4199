#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "sysrisk/corisk.hpp"

namespace sysrisk {

// The N-bank system a target bank is studied in.
struct SystemSpec {
    enum class Mode { core_plus_target, core_plus_target_plus_synthetic };

    std::vector<std::string> members; // ordered; contains target exactly once
    std::string target;
    Mode mode = Mode::core_plus_target;

    int size() const { return static_cast<int>(members.size()); }
    int target_position() const;
};

// Core = the N-1 largest banks by average asset value A excluding the target.
SystemSpec build_system(const MarketPanel& panel, const std::string& target,
                        int n_system);

// Value-weighted aggregate of every bank outside `excluded`. The id encodes
// the composition so caches never confuse two different aggregates.
BankRecord build_synthetic_bank(const MarketPanel& panel,
                                const std::vector<std::string>& excluded);

// Variant system: N-2 largest banks, the target, and one synthetic bank
// aggregating everything else. Returns the panel augmented with that bank.
struct SyntheticSystem {
    MarketPanel panel;
    SystemSpec spec;
};
SyntheticSystem build_synthetic_system(const MarketPanel& panel,
                                       const std::string& target,
                                       int n_system);

// Memoizes the characteristic function: maps (member-id set, q, data
// fingerprint) to the fitted VaR-regression coefficients of the subset
// portfolio. Values are coefficients, not series: the series is an exact
// linear reconstruction, so hits are bit-identical to fresh evaluations.
class CharacteristicCache {
public:
    std::shared_ptr<const Eigen::VectorXd> find(
        const std::vector<std::string>& member_ids, double q,
        std::uint64_t fp) const;
    void insert(const std::vector<std::string>& member_ids, double q,
                std::uint64_t fp, Eigen::VectorXd coefficients);

    long hits() const;
    long misses() const;
    double hit_rate() const;
    void reset_counters();
    std::size_t size() const;

    // Versioned text persistence so multi-run experiments skip recomputation.
    void save(const std::filesystem::path& path) const;
    void load(const std::filesystem::path& path);

private:
    struct Key {
        std::vector<std::string> members; // sorted
        double q;
        std::uint64_t fp;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };
    mutable std::mutex mu_;
    std::unordered_map<Key, std::shared_ptr<const Eigen::VectorXd>, KeyHash>
        map_;
    mutable long hits_ = 0;
    mutable long misses_ = 0;
};

struct ShapleyOptions {
    double q = 0.01;
    int max_system_size = 20; // 2^(N-1) subsets; hard feasibility cap
    int threads = 1;
    CoRiskOptions corisk;
};

// Shared state for one measurement run: inputs, prediction design and cache.
class ShapleyContext {
public:
    ShapleyContext(const MeasureInputs& in, const ShapleyOptions& opts,
                   CharacteristicCache* cache = nullptr);

    // VaR series of the subset portfolio, sign-converted to distress-positive
    // basis points. `members` are market-panel bank indices, nonempty.
    Eigen::VectorXd characteristic(const std::vector<int>& members) const;

    const std::vector<Date>& dates() const { return dates_; }
    const MeasureInputs& inputs() const { return in_; }
    const ShapleyOptions& options() const { return opts_; }
    CharacteristicCache* cache() const { return cache_; }
    std::uint64_t fingerprint() const { return fingerprint_; }
    int series_len() const { return static_cast<int>(dates_.size()); }

private:
    MeasureInputs in_;
    ShapleyOptions opts_;
    CharacteristicCache* cache_;
    std::vector<Date> dates_;
    Eigen::MatrixXd pred_; // [1, M_{t-1}] prediction rows
    std::uint64_t fingerprint_;
};

struct ShapleyResult {
    std::string bank_id;
    RiskSeries gsv;
    RiskSeries nsv;
    RiskSeries var_i;
    int n_system = 0;
};

// Set-function form of the aggregations, shared with the tests: bit i of the
// mask selects member i; theta(empty set) is 0 by contract, never invoked.
using SetFunction = std::function<Eigen::VectorXd(std::uint32_t mask)>;

// Combinatorially weighted sum of marginal contributions over all subsets
// containing the target, accumulated per size class in ascending mask order
// with compensated summation.
Eigen::VectorXd shapley_from_function(const SetFunction& theta, int n_members,
                                      int target_pos, int series_len,
                                      int threads = 1);

// All-orderings oracle: averages the target's marginal contribution over the
// n! permutations directly.
Eigen::VectorXd brute_shapley_from_function(const SetFunction& theta,
                                            int n_members, int target_pos,
                                            int series_len);

RiskSeries gross_shapley(const ShapleyContext& ctx, const SystemSpec& spec);
ShapleyResult net_shapley(const ShapleyContext& ctx, const SystemSpec& spec);
RiskSeries brute_shapley(const ShapleyContext& ctx, const SystemSpec& spec);

} // namespace sysrisk
