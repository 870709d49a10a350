#include "webrecon/reconstruct.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

namespace webrecon {

using nlohmann::json;

void RecoveryPolicy::fill_default_orders(const std::vector<RepositoryDescriptor>& repos) {
    auto ordered = [&](auto&& pred_first) {
        std::vector<std::string> out;
        for (const auto& d : repos)
            if (pred_first(d)) out.push_back(d.id);
        for (const auto& d : repos)
            if (!pred_first(d)) out.push_back(d.id);
        return out;
    };
    if (repo_order_nonimage.empty())
        repo_order_nonimage = ordered([](const RepositoryDescriptor& d) { return d.is_canonical_store; });
    if (repo_order_image.empty()) {
        for (const auto& id : repo_order_nonimage) {
            auto it = std::find_if(repos.begin(), repos.end(),
                                   [&](const RepositoryDescriptor& d) { return d.id == id; });
            if (it != repos.end() && it->supports_image_query) repo_order_image.push_back(id);
        }
    }
    if (undated_fallback_order.empty()) {
        auto add = [&](auto&& pred) {
            for (const auto& id : repo_order_nonimage) {
                auto it = std::find_if(repos.begin(), repos.end(),
                                       [&](const RepositoryDescriptor& d) { return d.id == id; });
                if (it != repos.end() && pred(*it)) undated_fallback_order.push_back(id);
            }
        };
        add([](const RepositoryDescriptor& d) { return d.is_canonical_store; });
        add([](const RepositoryDescriptor& d) {
            return !d.is_canonical_store && d.provides_cache_date == CacheDatePolicy::Always;
        });
        add([](const RepositoryDescriptor& d) {
            return !d.is_canonical_store && d.provides_cache_date != CacheDatePolicy::Always;
        });
    }
}

std::string ReconstructionResult::to_json() const {
    json jrec = json::object();
    for (const auto& [url, r] : recovered) {
        jrec[url] = json{
            {"mime", r.mime},
            {"repo", r.source_repo},
            {"date", r.source_date ? r.source_date->to_iso() : ""},
            {"form", to_string(r.form)},
            {"content_fnv1a64", to_hex(fnv1a64(r.content))},
            {"bytes", r.content.size()},
        };
    }
    json jledger = json::object();
    for (const auto& [id, n] : query_ledger) jledger[id] = n;
    json jedges = json::array();
    for (const auto& [a, b] : discovery_edges) jedges.push_back(json::array({a, b}));
    const char* oc = outcome == RunOutcome::Complete    ? "complete"
                     : outcome == RunOutcome::Suspended ? "suspended"
                                                        : "partial";
    json j{{"recovered", jrec},
           {"missing", std::vector<std::string>(missing.begin(), missing.end())},
           {"query_ledger", jledger},
           {"discovery_edges", jedges},
           {"outcome", oc}};
    if (!error.empty()) j["error"] = error;
    return j.dump(2) + "\n";
}

Reconstructor::Reconstructor(std::vector<std::shared_ptr<Repository>> repos, RecoveryPolicy policy,
                             std::shared_ptr<BudgetManager> budget, SiteStore* store,
                             std::shared_ptr<Clock> clock)
    : repos_(std::move(repos)),
      policy_(std::move(policy)),
      budget_(std::move(budget)),
      store_(store),
      clock_(std::move(clock)),
      rng_(policy_.seed) {
    std::vector<RepositoryDescriptor> descs;
    descs.reserve(repos_.size());
    for (const auto& r : repos_) descs.push_back(r->descriptor());
    policy_.fill_default_orders(descs);
    for (const auto& id : policy_.repo_order_nonimage) {
        if (!repo_by_id(id)) throw ConfigError("policy names unregistered repository: " + id);
    }
    for (const auto& r : repos_) budget_->register_repo(r->descriptor().id);
}

Repository* Reconstructor::repo_by_id(const std::string& id) const {
    for (const auto& r : repos_)
        if (r->descriptor().id == id) return r.get();
    return nullptr;
}

bool Reconstructor::class_allowed(const Url& url, bool is_root) const {
    if (is_root) return true;
    if (classify_url(url, policy_.image_exts) == ResourceClass::Image) return policy_.allow_images;
    std::string ext = url.extension();
    bool html_like = ext.empty() || ext == "html" || ext == "htm";
    return html_like ? policy_.allow_html : policy_.allow_other;
}

std::optional<Timestamp> Reconstructor::round_pause(const Url& url) const {
    const bool image = classify_url(url, policy_.image_exts) == ResourceClass::Image;
    const auto& order = image ? policy_.repo_order_image : policy_.repo_order_nonimage;
    Timestamp until = 0;
    bool paused = false;
    for (const auto& id : order) {
        auto d = budget_->check(id, clock_->now());
        if (!d.proceed) {
            paused = true;
            until = std::max(until, d.resume_at);
        }
    }
    return paused ? std::optional<Timestamp>(until) : std::nullopt;
}

RecoveredResource Reconstructor::finalize(const Candidate& c) const {
    const Repository* repo = nullptr;
    for (const auto& r : repos_)
        if (r->descriptor().id == c.repo_id) repo = r.get();
    StoredResource stripped = strip_repository_markup(c.res, repo->descriptor());
    RecoveredResource out;
    out.url = stripped.url;
    out.content = stripped.content;
    out.mime = stripped.mime;
    out.source_repo = c.repo_id;
    out.source_date = stripped.cache_date;
    out.form = stripped.form;
    return out;
}

std::optional<Reconstructor::Candidate> Reconstructor::pick_candidate(
    std::vector<Candidate> candidates) const {
    if (candidates.empty()) return std::nullopt;

    std::vector<Candidate*> dated;
    for (auto& c : candidates)
        if (c.res.cache_date) dated.push_back(&c);

    if (!dated.empty()) {
        Date best = dated.front()->res.cache_date.value();
        for (auto* c : dated) best = std::max(best, c->res.cache_date.value());
        std::vector<Candidate*> tied;
        for (auto* c : dated)
            if (c->res.cache_date.value() == best) tied.push_back(c);
        if (policy_.version_preference == VersionPreference::CanonicalFirst) {
            for (auto* c : tied)
                if (c->canonical_store) return *c;
        }
        Candidate* pick = tied.front();
        for (auto* c : tied)
            if (c->order_pos < pick->order_pos) pick = c;
        return *pick;
    }

    // Nothing carries a date: fixed fallback preference.
    for (const auto& id : policy_.undated_fallback_order) {
        for (auto& c : candidates)
            if (c.repo_id == id) return c;
    }
    Candidate* pick = &candidates.front();
    for (auto& c : candidates)
        if (c.order_pos < pick->order_pos) pick = &c;
    return *pick;
}

std::optional<RecoveredResource> Reconstructor::recover_image(const Url& url) {
    std::size_t pos = 0;
    for (const auto& id : policy_.repo_order_image) {
        Repository* repo = repo_by_id(id);
        ++pos;
        if (!repo || !repo->descriptor().supports_image_query) continue;
        RepoResult r = repo->query_image(url);
        budget_->record(id, r.queries_spent, clock_->now());
        result_.query_ledger[id] += r.queries_spent;
        if (r.found()) {
            // Image dates are not published by the caches; the first hit in
            // the walk order wins, no date comparison.
            Candidate c{id, std::move(*r.resource), repo->descriptor().is_canonical_store, pos};
            return finalize(c);
        }
    }
    return std::nullopt;
}

std::optional<RecoveredResource> Reconstructor::recover_nonimage(const Url& url) {
    std::vector<Candidate> candidates;
    std::vector<std::pair<std::string, std::size_t>> cache_repos;  // queried after archives

    std::size_t pos = 0;
    bool archive_hit = false;
    for (const auto& id : policy_.repo_order_nonimage) {
        ++pos;
        Repository* repo = repo_by_id(id);
        if (!repo) continue;
        if (!repo->descriptor().is_canonical_store) {
            cache_repos.emplace_back(id, pos);
            continue;
        }
        if (archive_hit) continue;  // one archive copy is enough
        RepoResult r = repo->query_nonimage(url);
        budget_->record(id, r.queries_spent, clock_->now());
        result_.query_ledger[id] += r.queries_spent;
        if (!r.found()) continue;
        archive_hit = true;
        const bool html = is_html_mime(r.resource->mime);
        Candidate c{id, std::move(*r.resource), true, pos};
        if (policy_.version_preference == VersionPreference::CanonicalFirst && !html) {
            // Canonical copy of a non-HTML resource: the caches hold at best a
            // conversion, so they are not queried at all.
            return finalize(c);
        }
        candidates.push_back(std::move(c));
    }

    for (const auto& [id, cache_pos] : cache_repos) {
        Repository* repo = repo_by_id(id);
        RepoResult r = repo->query_nonimage(url);
        budget_->record(id, r.queries_spent, clock_->now());
        result_.query_ledger[id] += r.queries_spent;
        if (r.found()) candidates.push_back(Candidate{id, std::move(*r.resource), false, cache_pos});
    }

    auto picked = pick_candidate(std::move(candidates));
    if (!picked) return std::nullopt;
    return finalize(*picked);
}

std::optional<RecoveredResource> Reconstructor::recover_resource(const Url& url) {
    if (classify_url(url, policy_.image_exts) == ResourceClass::Image) return recover_image(url);
    return recover_nonimage(url);
}

std::uint64_t Reconstructor::config_hash() const {
    std::ostringstream ss;
    ss << start_url_ << '|' << static_cast<int>(policy_.version_preference) << '|';
    for (const auto& id : policy_.repo_order_nonimage) ss << id << ',';
    ss << '|';
    for (const auto& id : policy_.repo_order_image) ss << id << ',';
    ss << '|';
    for (const auto& id : policy_.undated_fallback_order) ss << id << ',';
    ss << '|' << (policy_.max_resources ? std::to_string(*policy_.max_resources) : "-");
    ss << '|' << policy_.allow_html << policy_.allow_images << policy_.allow_other;
    ss << '|' << (policy_.scope.mode == ScopeRule::Mode::HostOnly ? "host" : "prefix");
    ss << '|' << policy_.scope.root.str() << '|' << policy_.seed;
    for (const auto& r : repos_) {
        const auto& d = r->descriptor();
        ss << '|' << d.id << ';' << d.supports_image_query << ';' << d.nonimage_query_cost << ';'
           << (d.image_query_cost ? *d.image_query_cost : -1) << ';' << d.is_canonical_store;
    }
    return fnv1a64(ss.str());
}

void Reconstructor::write_checkpoint(Timestamp pause_until) const {
    json jrec = json::array();
    for (const auto& [url, r] : result_.recovered) {
        jrec.push_back(json{
            {"url", url},
            {"mime", r.mime},
            {"repo", r.source_repo},
            {"date", r.source_date ? r.source_date->to_iso() : ""},
            {"form", to_string(r.form)},
            {"path", store_ ? store_->path_map().at(url) : ""},
        });
    }
    json jbudget = json::object();
    for (const auto& [id, entries] : budget_->history()) {
        json v = json::array();
        for (const auto& [at, n] : entries) v.push_back(json::array({at, n}));
        jbudget[id] = v;
    }
    json jedges = json::array();
    for (const auto& [a, b] : result_.discovery_edges) jedges.push_back(json::array({a, b}));

    std::ostringstream rng_state;
    rng_state << rng_;

    json j{
        {"version", 1},
        {"start_url", start_url_},
        {"config_hash", to_hex(config_hash())},
        {"virtual_now", clock_->now()},
        {"pause_until", pause_until},
        {"rng_state", rng_state.str()},
        {"frontier", std::vector<std::string>(frontier_.begin(), frontier_.end())},
        {"queued", std::vector<std::string>(queued_.begin(), queued_.end())},
        {"processed", processed_},
        {"missing", std::vector<std::string>(result_.missing.begin(), result_.missing.end())},
        {"recovered", jrec},
        {"edges", jedges},
        {"budget_history", jbudget},
    };
    write_file(checkpoint_path_, j.dump(2) + "\n");
}

ReconstructionResult Reconstructor::reconstruct(const Url& start_url) {
    start_url_ = start_url.str();
    frontier_.clear();
    queued_.clear();
    processed_ = 0;
    result_ = ReconstructionResult{};
    edge_set_.clear();
    rng_.seed(policy_.seed);

    frontier_.push_back(start_url_);
    queued_.insert(start_url_);
    return run();
}

ReconstructionResult Reconstructor::resume(const std::string& checkpoint_path) {
    json j;
    try {
        j = json::parse(read_file(checkpoint_path));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("checkpoint unreadable: ") + e.what());
    }
    start_url_ = j.at("start_url").get<std::string>();
    if (j.at("config_hash").get<std::string>() != to_hex(config_hash()))
        throw ConfigError(
            "checkpoint does not match this configuration (policy/repositories/start URL "
            "changed since suspension)");

    frontier_.clear();
    for (const auto& u : j.at("frontier")) frontier_.push_back(u.get<std::string>());
    queued_.clear();
    for (const auto& u : j.at("queued")) queued_.insert(u.get<std::string>());
    processed_ = j.at("processed").get<std::size_t>();

    result_ = ReconstructionResult{};
    for (const auto& u : j.at("missing")) result_.missing.insert(u.get<std::string>());
    if (store_) store_->load_pathmap();
    for (const auto& je : j.at("recovered")) {
        RecoveredResource r;
        r.url = je.at("url").get<std::string>();
        r.mime = je.at("mime").get<std::string>();
        r.source_repo = je.at("repo").get<std::string>();
        std::string d = je.at("date").get<std::string>();
        if (!d.empty()) r.source_date = Date::from_iso(d);
        r.form = *stored_form_from_string(je.at("form").get<std::string>());
        std::string rel = je.at("path").get<std::string>();
        if (store_ && !rel.empty())
            r.content = read_file((std::filesystem::path(store_->layout().root) / rel).string());
        result_.recovered[r.url] = std::move(r);
    }
    edge_set_.clear();
    for (const auto& je : j.at("edges")) {
        auto from = je.at(0).get<std::string>();
        auto to = je.at(1).get<std::string>();
        if (edge_set_.emplace(from, to).second) result_.discovery_edges.emplace_back(from, to);
    }

    std::map<std::string, std::vector<std::pair<Timestamp, int>>> hist;
    for (const auto& [id, entries] : j.at("budget_history").items()) {
        for (const auto& e : entries) hist[id].emplace_back(e.at(0).get<Timestamp>(), e.at(1).get<int>());
    }
    budget_->restore_history(hist);
    for (const auto& [id, entries] : hist)
        for (const auto& [at, n] : entries) result_.query_ledger[id] += n;

    std::istringstream rng_state(j.at("rng_state").get<std::string>());
    rng_state >> rng_;

    // Jump past the pause that caused the suspension, then continue.
    clock_->sleep_until(j.at("virtual_now").get<Timestamp>());
    clock_->sleep_until(j.at("pause_until").get<Timestamp>());
    return run();
}

ReconstructionResult Reconstructor::run() {
    while (!frontier_.empty()) {
        if (policy_.max_resources && processed_ >= *policy_.max_resources) break;
        const std::string url_str = frontier_.front();
        Url url = *Url::parse(url_str);

        // Budget gate, checked between rounds only.
        while (auto pause = round_pause(url)) {
            if (!checkpoint_path_.empty()) {
                write_checkpoint(*pause);
                if (store_) store_->flush_pathmap();
                result_.outcome = RunOutcome::Suspended;
                return result_;
            }
            clock_->sleep_until(*pause);
        }
        frontier_.pop_front();

        std::optional<RecoveredResource> rec;
        try {
            rec = recover_resource(url);
        } catch (const TransportError& e) {
            result_.outcome = RunOutcome::Partial;
            result_.error = e.what();
            if (store_) store_->flush_pathmap();
            return result_;
        }
        ++processed_;

        if (!rec) {
            result_.missing.insert(url.str());
            if (store_) store_->log_missing(url.str());
        } else {
            if (store_) {
                SavedResource sr{rec->url, rec->content, rec->mime, rec->form,
                                 rec->source_repo, rec->source_date};
                try {
                    store_->save(sr);
                    store_->log_recovered(sr);
                } catch (const StoreError& e) {
                    result_.outcome = RunOutcome::Partial;
                    result_.error = e.what();
                    return result_;
                }
            }
            const bool html_content = is_html_mime(rec->mime) || rec->form == StoredForm::HtmlConverted;
            if (html_content) {
                for (const Url& link : extract_links(rec->content, url)) {
                    if (!in_scope(link, policy_.scope)) continue;
                    if (!class_allowed(link, false)) continue;
                    const std::string target = link.str();
                    if (edge_set_.emplace(url.str(), target).second)
                        result_.discovery_edges.emplace_back(url.str(), target);
                    if (queued_.insert(target).second) frontier_.push_back(target);
                }
            }
            result_.recovered[rec->url] = std::move(*rec);
        }

        // Self-imposed politeness delay between query rounds.
        DurationSec delay = budget_->inter_round_delay(rng_);
        if (delay > 0) clock_->sleep_until(clock_->now() + delay);
    }

    if (store_) {
        store_->flush_pathmap();
        if (store_->layout().relativize_links) store_->relativize_links();
    }
    result_.outcome = RunOutcome::Complete;
    return result_;
}

}  // namespace webrecon
