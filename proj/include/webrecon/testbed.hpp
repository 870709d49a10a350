#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "webrecon/common.hpp"
#include "webrecon/repo.hpp"

namespace webrecon {

/// Bin-structured decaying site: B update bins, terminal day T, bin I carries
/// three images per page (other bins share three images bin-wide).
struct CollectionSpec {
    int bins = 30;          // B
    int terminal_day = 90;  // T
    int image_bin = 2;      // I
    int words_per_page = 50;
    std::uint64_t seed = 0;
    std::string name;  // collection token; derived from the seed when empty

    void validate() const;  // 1 <= I <= B, T >= B >= 1
    std::string effective_name() const;
};

struct BinCounts {
    std::int64_t html = 0;  // includes the bin index page
    std::int64_t pdf = 0;
    std::int64_t img = 0;
    std::int64_t total() const { return html + pdf + img; }
};

struct CollectionCounts {
    std::int64_t total = 0;           // includes the root index and its inline image
    std::vector<BinCounts> per_bin;   // index 0 = bin 1
};

/// Exact closed-form resource counts on day d (0 <= d <= T).
CollectionCounts collection_counts(const CollectionSpec& spec, int day);

enum class TbResourceType { RootIndex, RootImage, BinIndex, HtmlPage, PdfPage, Image };

std::string to_string(TbResourceType t);
std::optional<TbResourceType> tb_resource_type_from_string(std::string_view s);

struct ScheduledResource {
    std::string rel_path;  // site-relative, e.g. "bin-02/pg-2-5.html"
    std::string uid;       // space-separated identifier; empty on indexes/images
    int bin = 0;           // 0 for root resources
    int page = 0;          // 0 when not a numbered page
    TbResourceType type = TbResourceType::HtmlPage;
    std::string mime;
    std::optional<int> removal_day;  // nullopt = never removed
};

struct ResourceSchedule {
    CollectionSpec spec;
    std::string root_url;  // "http://<name>.test/"
    std::vector<ScheduledResource> resources;

    const ScheduledResource* find(const std::string& rel_path) const;
};

/// Builds the full schedule for the spec; deterministic in the seed.
ResourceSchedule plan_collection(const CollectionSpec& spec);

/// Content of one resource as it looks on the origin server on the given day
/// (bin indexes lose links as pages are removed; everything else is static).
std::string resource_content(const ResourceSchedule& schedule, const ScheduledResource& res,
                             int day);

/// Writes the tree as of `day` (resources with removal_day <= day are gone).
void materialize_day(const ResourceSchedule& schedule, int day, const std::string& out_dir);

/// plan + write day 0; returns the schedule.
ResourceSchedule generate_collection(const CollectionSpec& spec, const std::string& out_dir);

/// Q_b = w*b*t*s and Q_i = w*i*s: daily probe counts for w collections with
/// b bins and t text resource types across s engines / i distinct images.
std::int64_t daily_queries(std::int64_t w, std::int64_t b, std::int64_t t, std::int64_t s);
std::int64_t image_daily_queries(std::int64_t w, std::int64_t i, std::int64_t s);

/// Crawl/cache/purge behavior of one repository.
struct RepoBehavior {
    int crawl_interval = 5;         // days between crawls; first crawl on day crawl_interval
    int cache_lag = 0;              // days from live crawl to cache appearance
    int purge_lag = 0;              // days from 404 crawl to cache removal
    double availability_prob = 1.0; // per-day chance a cached resource is actually served
    std::uint64_t seed = 0;

    void validate() const;
};

struct ResourceTimeline {
    std::string rel_path;
    int t0 = 0;
    std::optional<int> t_r;   // removal from the origin; nullopt = never
    std::optional<int> t_ca;  // cache appearance; nullopt = vulnerable
    std::optional<int> t_cr;  // cache removal
    std::vector<int> live_crawl_days;
    std::vector<int> observed_available_days;
};

struct CacheTimeline {
    RepoBehavior behavior;
    int horizon = 0;
    std::vector<ResourceTimeline> resources;

    const ResourceTimeline* find(const std::string& rel_path) const;
};

/// Crawls happen every crawl_interval days; a crawl on the removal day itself
/// still sees the resource (it vanishes after that day). Deterministic in the
/// behavior seed.
CacheTimeline simulate_cache(const ResourceSchedule& schedule, const RepoBehavior& behavior,
                             int horizon);

struct LifecycleMetrics {
    std::string rel_path;
    std::optional<int> ttl_ws;  // t_r - t0; nullopt for never-removed resources
    std::optional<int> ttl_c;   // t_cr - t_ca
    std::optional<int> tur;     // t_cr - t_r
    std::optional<double> p_r;  // observed available days / ttl_c
    bool vulnerable = false;    // never cached
    bool recoverable = false;   // cached before removal with positive cache life
};

std::vector<LifecycleMetrics> lifecycle_metrics(const CacheTimeline& timeline);

struct FixtureBuildOptions {
    RepositoryDescriptor descriptor;  // profile of the repository being modeled
    Date epoch = Date{2005, 6, 1};    // day 0 of the experiment as a calendar date
};

/// Snapshot of one repository's holdings on as_of_day: every resource cached,
/// not yet purged, and actually served that day. Cache dates are t_ca mapped
/// through the epoch; stored forms follow the descriptor (canonical
/// stores keep originals; caches keep HTML canonically, conversions for PDFs,
/// thumbnails for images).
FixtureManifest timeline_to_fixture(const ResourceSchedule& schedule,
                                    const CacheTimeline& timeline, int as_of_day,
                                    const FixtureBuildOptions& options);

// JSON persistence for the testbed artifacts.
void save_schedule(const ResourceSchedule& schedule, const std::string& path);
ResourceSchedule load_schedule(const std::string& path);
void save_timeline(const CacheTimeline& timeline, const std::string& path);
CacheTimeline load_timeline(const std::string& path);
RepoBehavior load_behavior(const std::string& path);
void save_behavior(const RepoBehavior& behavior, const std::string& path);
std::string metrics_to_json(const std::vector<LifecycleMetrics>& metrics);

}  // namespace webrecon
