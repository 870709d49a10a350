#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "webrecon/repo.hpp"

namespace webrecon {

/// Seconds. All budget arithmetic runs on an injected clock so 24-hour waits
/// are testable in milliseconds.
using Timestamp = std::int64_t;
using DurationSec = std::int64_t;

class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
    virtual void sleep_until(Timestamp t) = 0;
};

/// Virtual clock: sleep is an instantaneous jump forward.
class SimClock : public Clock {
public:
    explicit SimClock(Timestamp start = 0) : now_(start) {}
    Timestamp now() const override { return now_; }
    void sleep_until(Timestamp t) override {
        if (t > now_) now_ = t;
    }
    void advance(DurationSec d) { now_ += d; }

private:
    Timestamp now_;
};

class SystemClock : public Clock {
public:
    Timestamp now() const override;
    void sleep_until(Timestamp t) override;
};

/// Limits one agent honors toward one repository: at most L queries per
/// period P, and a random delay in [w_min, w_max] between query rounds.
struct RepoRespectPolicy {
    std::int64_t limit = 1000;        // L >= 1
    DurationSec period = 24 * 3600;   // P > 0
    DurationSec w_min = 1;
    DurationSec w_max = 4;

    void validate(const std::string& repo_id) const;
};

struct RespectPolicy {
    std::map<std::string, RepoRespectPolicy> per_repo;
    // Default per-period limits for the standard profiles; anything not
    // listed falls back to 1000 per 24h.
    static RespectPolicy defaults_for(const std::vector<std::string>& repo_ids);

    const RepoRespectPolicy& for_repo(const std::string& repo_id) const;
    RepoRespectPolicy fallback;
};

enum class WindowMode { Sliding, Fixed };

struct BudgetDecision {
    bool proceed = true;
    Timestamp resume_at = 0;  // meaningful when !proceed
};

/// Per-repository query ledger plus limit checks. record/check are atomic
/// with respect to each other.
class BudgetManager {
public:
    BudgetManager(RespectPolicy policy, WindowMode mode = WindowMode::Sliding);

    void register_repo(const std::string& repo_id);
    bool has_repo(const std::string& repo_id) const;

    /// n >= 1 queries spent against repo_id at time now.
    void record(const std::string& repo_id, int n, Timestamp now);

    /// Pause iff the in-window count has reached L; resume_at is the earliest
    /// time the window count drops below L again.
    BudgetDecision check(const std::string& repo_id, Timestamp now) const;

    DurationSec inter_round_delay(std::mt19937_64& rng) const;

    std::int64_t total(const std::string& repo_id) const;
    std::map<std::string, std::int64_t> totals() const;
    std::int64_t in_window_count(const std::string& repo_id, Timestamp now) const;

    /// Audit: true when no window of length P ever held more than L queries.
    bool window_counts_respected() const;

    // Checkpoint support: the raw (timestamp, n) history per repository.
    std::map<std::string, std::vector<std::pair<Timestamp, int>>> history() const;
    void restore_history(const std::map<std::string, std::vector<std::pair<Timestamp, int>>>& h);

    const RespectPolicy& policy() const { return policy_; }
    WindowMode window_mode() const { return mode_; }
    void set_delay_bounds(DurationSec w_min, DurationSec w_max);

private:
    struct Entry {
        Timestamp at;
        int n;
    };
    Timestamp window_start(const RepoRespectPolicy& p, Timestamp now) const;

    RespectPolicy policy_;
    WindowMode mode_;
    std::map<std::string, std::vector<Entry>> ledger_;
    mutable std::mutex mutex_;
};

/// Lower and upper bounds on the total queries needed to pull r non-image and
/// i image resources from the given repositories.
///
/// Upper bound: every non-image resource found in every repository (the sum
/// of all non-image lookup costs), every image walked through the image-
/// capable caches (sum of their image costs). Lower bound: non-image found
/// canonically at an archive (its lookup cost alone), image found at the
/// first image-capable repository.
struct CostBounds {
    std::int64_t min = 0;
    std::int64_t max = 0;
};

CostBounds cost_bounds(std::int64_t r, std::int64_t i,
                       const std::vector<RepositoryDescriptor>& repos);

}  // namespace webrecon
