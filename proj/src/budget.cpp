#include "webrecon/budget.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace webrecon {

Timestamp SystemClock::now() const {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void SystemClock::sleep_until(Timestamp t) {
    Timestamp n = now();
    if (t > n) std::this_thread::sleep_for(std::chrono::seconds(t - n));
}

void RepoRespectPolicy::validate(const std::string& repo_id) const {
    if (limit < 1) throw ConfigError("respect policy for " + repo_id + ": L must be >= 1");
    if (period <= 0) throw ConfigError("respect policy for " + repo_id + ": P must be > 0");
    if (w_min < 0 || w_max < w_min)
        throw ConfigError("respect policy for " + repo_id + ": need 0 <= w_min <= w_max");
}

RespectPolicy RespectPolicy::defaults_for(const std::vector<std::string>& repo_ids) {
    RespectPolicy p;
    for (const auto& id : repo_ids) {
        RepoRespectPolicy r;
        if (id == "yahoo")
            r.limit = 4000;
        else if (id == "msn")
            r.limit = 10000;
        else
            r.limit = 1000;  // archive and google profiles, and anything unknown
        p.per_repo[id] = r;
    }
    return p;
}

const RepoRespectPolicy& RespectPolicy::for_repo(const std::string& repo_id) const {
    auto it = per_repo.find(repo_id);
    return it == per_repo.end() ? fallback : it->second;
}

BudgetManager::BudgetManager(RespectPolicy policy, WindowMode mode)
    : policy_(std::move(policy)), mode_(mode) {
    policy_.fallback.validate("fallback");
    for (const auto& [id, p] : policy_.per_repo) p.validate(id);
}

void BudgetManager::register_repo(const std::string& repo_id) {
    std::lock_guard<std::mutex> lock(mutex_);
    ledger_.try_emplace(repo_id);
}

bool BudgetManager::has_repo(const std::string& repo_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return ledger_.count(repo_id) > 0;
}

void BudgetManager::record(const std::string& repo_id, int n, Timestamp now) {
    if (n < 1) throw std::logic_error("budget record: n must be >= 1");
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = ledger_.find(repo_id);
    if (it == ledger_.end()) throw std::logic_error("budget record: unknown repository " + repo_id);
    if (!it->second.empty() && it->second.back().at > now)
        throw std::logic_error("budget record: timestamps must be non-decreasing");
    it->second.push_back(Entry{now, n});
}

Timestamp BudgetManager::window_start(const RepoRespectPolicy& p, Timestamp now) const {
    if (mode_ == WindowMode::Fixed) {
        // Windows are aligned [k*P, (k+1)*P).
        Timestamp k = now >= 0 ? now / p.period : (now - p.period + 1) / p.period;
        return k * p.period;
    }
    return now - p.period;  // sliding: entries strictly newer than this count
}

BudgetDecision BudgetManager::check(const std::string& repo_id, Timestamp now) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = ledger_.find(repo_id);
    if (it == ledger_.end()) throw std::logic_error("budget check: unknown repository " + repo_id);
    const RepoRespectPolicy& p = policy_.for_repo(repo_id);

    const Timestamp start = window_start(p, now);
    std::int64_t count = 0;
    for (const auto& e : it->second) {
        bool in_window = mode_ == WindowMode::Fixed ? e.at >= start : e.at > start;
        if (in_window && e.at <= now) count += e.n;
    }
    if (count < p.limit) return BudgetDecision{true, 0};

    if (mode_ == WindowMode::Fixed) return BudgetDecision{false, start + p.period};

    // Sliding: find the earliest instant at which enough old entries expire.
    std::int64_t remaining = count;
    for (const auto& e : it->second) {
        if (e.at <= start || e.at > now) continue;
        remaining -= e.n;
        if (remaining < p.limit) return BudgetDecision{false, e.at + p.period};
    }
    return BudgetDecision{false, now + p.period};
}

DurationSec BudgetManager::inter_round_delay(std::mt19937_64& rng) const {
    const auto& p = policy_.fallback;
    if (p.w_max <= p.w_min) return p.w_min;
    std::uniform_int_distribution<DurationSec> dist(p.w_min, p.w_max);
    return dist(rng);
}

std::int64_t BudgetManager::total(const std::string& repo_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = ledger_.find(repo_id);
    if (it == ledger_.end()) return 0;
    std::int64_t t = 0;
    for (const auto& e : it->second) t += e.n;
    return t;
}

std::map<std::string, std::int64_t> BudgetManager::totals() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::map<std::string, std::int64_t> out;
    for (const auto& [id, entries] : ledger_) {
        std::int64_t t = 0;
        for (const auto& e : entries) t += e.n;
        out[id] = t;
    }
    return out;
}

std::int64_t BudgetManager::in_window_count(const std::string& repo_id, Timestamp now) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = ledger_.find(repo_id);
    if (it == ledger_.end()) return 0;
    const RepoRespectPolicy& p = policy_.for_repo(repo_id);
    const Timestamp start = window_start(p, now);
    std::int64_t count = 0;
    for (const auto& e : it->second) {
        bool in_window = mode_ == WindowMode::Fixed ? e.at >= start : e.at > start;
        if (in_window && e.at <= now) count += e.n;
    }
    return count;
}

bool BudgetManager::window_counts_respected() const {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [id, entries] : ledger_) {
        const RepoRespectPolicy& p = policy_.for_repo(id);
        for (size_t i = 0; i < entries.size(); ++i) {
            std::int64_t count = 0;
            for (size_t j = 0; j <= i; ++j) {
                if (entries[j].at > entries[i].at - p.period) count += entries[j].n;
            }
            if (count > p.limit) return false;
        }
    }
    return true;
}

std::map<std::string, std::vector<std::pair<Timestamp, int>>> BudgetManager::history() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::map<std::string, std::vector<std::pair<Timestamp, int>>> out;
    for (const auto& [id, entries] : ledger_) {
        auto& v = out[id];
        v.reserve(entries.size());
        for (const auto& e : entries) v.emplace_back(e.at, e.n);
    }
    return out;
}

void BudgetManager::restore_history(
    const std::map<std::string, std::vector<std::pair<Timestamp, int>>>& h) {
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& [id, entries] : h) {
        auto& v = ledger_[id];
        v.clear();
        for (const auto& [at, n] : entries) v.push_back(Entry{at, n});
    }
}

void BudgetManager::set_delay_bounds(DurationSec w_min, DurationSec w_max) {
    std::lock_guard<std::mutex> lock(mutex_);
    policy_.fallback.w_min = w_min;
    policy_.fallback.w_max = w_max;
    for (auto& [id, p] : policy_.per_repo) {
        p.w_min = w_min;
        p.w_max = w_max;
    }
}

CostBounds cost_bounds(std::int64_t r, std::int64_t i,
                       const std::vector<RepositoryDescriptor>& repos) {
    std::int64_t max_per_r = 0;
    std::int64_t max_per_i = 0;
    std::optional<std::int64_t> min_canonical_r;
    std::optional<std::int64_t> min_any_r;
    std::optional<std::int64_t> min_i;

    for (const auto& d : repos) {
        max_per_r += d.nonimage_query_cost;
        if (!min_any_r || d.nonimage_query_cost < *min_any_r) min_any_r = d.nonimage_query_cost;
        if (d.is_canonical_store &&
            (!min_canonical_r || d.nonimage_query_cost < *min_canonical_r))
            min_canonical_r = d.nonimage_query_cost;
        if (d.supports_image_query && d.image_query_cost) {
            // The worst-case image walk runs through the caches; an archive hit
            // would have ended the walk at the lower bound instead.
            if (!d.is_canonical_store) max_per_i += *d.image_query_cost;
            if (!min_i || *d.image_query_cost < *min_i) min_i = *d.image_query_cost;
        }
    }

    const std::int64_t per_r_min = min_canonical_r ? *min_canonical_r : min_any_r.value_or(0);
    CostBounds b;
    b.min = r * per_r_min + i * min_i.value_or(0);
    b.max = r * max_per_r + i * max_per_i;
    return b;
}

}  // namespace webrecon
