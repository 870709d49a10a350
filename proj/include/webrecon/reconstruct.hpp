#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "webrecon/budget.hpp"
#include "webrecon/extract.hpp"
#include "webrecon/repo.hpp"
#include "webrecon/store.hpp"

namespace webrecon {

enum class VersionPreference {
    CanonicalFirst,  // an archive's canonical non-HTML copy short-circuits the caches
    MostRecent,      // every candidate competes on cache date
};

struct RecoveryPolicy {
    VersionPreference version_preference = VersionPreference::CanonicalFirst;
    /// Query order for non-image lookups; also the deterministic tie-break
    /// order when cache dates are equal. Canonical stores should come first.
    std::vector<std::string> repo_order_nonimage;
    /// Image lookups walk this order one repository at a time, stopping at the
    /// first hit; repositories without image support are skipped.
    std::vector<std::string> repo_order_image;
    /// Preference when no candidate carries a cache date: canonical stores,
    /// then caches that normally always publish dates, then the rest.
    std::vector<std::string> undated_fallback_order;
    std::optional<std::size_t> max_resources;  // bound on processed URLs
    bool allow_html = true;
    bool allow_images = true;
    bool allow_other = true;
    ScopeRule scope;
    std::uint64_t seed = 0;
    ImageExtensions image_exts;

    /// Fills the three repository orders from descriptors (any already set is
    /// kept): archives first, then the others in registration order; the
    /// undated fallback prefers always-dated caches right after the archives.
    void fill_default_orders(const std::vector<RepositoryDescriptor>& repos);
};

struct RecoveredResource {
    std::string url;
    std::string content;
    std::string mime;
    std::string source_repo;
    std::optional<Date> source_date;
    StoredForm form = StoredForm::Canonical;
};

enum class RunOutcome { Complete, Suspended, Partial };

struct ReconstructionResult {
    std::map<std::string, RecoveredResource> recovered;
    std::set<std::string> missing;
    std::map<std::string, std::int64_t> query_ledger;
    std::vector<std::pair<std::string, std::string>> discovery_edges;
    RunOutcome outcome = RunOutcome::Complete;
    std::string error;  // set when outcome == Partial

    /// Deterministic JSON rendering; content bytes appear as 64-bit digests.
    std::string to_json() const;
};

/// Single-owner recovery engine. Queries within one URL's round run against
/// the (immutable, thread-safe) repository handles; frontier and ledger
/// mutation stay on the calling thread.
class Reconstructor {
public:
    Reconstructor(std::vector<std::shared_ptr<Repository>> repos, RecoveryPolicy policy,
                  std::shared_ptr<BudgetManager> budget, SiteStore* store,
                  std::shared_ptr<Clock> clock);

    /// When set, a budget pause suspends the run to this file (outcome
    /// Suspended) instead of sleeping through it.
    void set_checkpoint_path(std::string path) { checkpoint_path_ = std::move(path); }

    ReconstructionResult reconstruct(const Url& start_url);

    /// Continues a suspended run; the checkpoint must match this engine's
    /// policy and repositories or a ConfigError is thrown.
    ReconstructionResult resume(const std::string& checkpoint_path);

    /// recover_resource in isolation; spends queries and records them.
    std::optional<RecoveredResource> recover_resource(const Url& url);

private:
    struct Candidate {
        std::string repo_id;
        StoredResource res;
        bool canonical_store = false;
        std::size_t order_pos = 0;
    };

    ReconstructionResult run();
    std::optional<RecoveredResource> recover_image(const Url& url);
    std::optional<RecoveredResource> recover_nonimage(const Url& url);
    std::optional<Candidate> pick_candidate(std::vector<Candidate> candidates) const;
    RecoveredResource finalize(const Candidate& c) const;
    bool class_allowed(const Url& url, bool is_root) const;
    Repository* repo_by_id(const std::string& id) const;
    std::optional<Timestamp> round_pause(const Url& url) const;
    void write_checkpoint(Timestamp pause_until) const;
    std::uint64_t config_hash() const;

    std::vector<std::shared_ptr<Repository>> repos_;
    RecoveryPolicy policy_;
    std::shared_ptr<BudgetManager> budget_;
    SiteStore* store_;
    std::shared_ptr<Clock> clock_;
    std::string checkpoint_path_;

    // run state
    std::string start_url_;
    std::deque<std::string> frontier_;
    std::set<std::string> queued_;
    std::size_t processed_ = 0;
    ReconstructionResult result_;
    std::set<std::pair<std::string, std::string>> edge_set_;
    std::mt19937_64 rng_;
};

}  // namespace webrecon
