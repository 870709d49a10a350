#include "webrecon/testbed.hpp"

#include <algorithm>
#include <filesystem>
#include <random>

#include <nlohmann/json.hpp>

#include "webrecon/extract.hpp"

namespace webrecon {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Word pool for page text. Drawn pseudo-randomly per page so no two pages
// share phrasing, which keeps shingle comparisons meaningful.
const char* kWords[] = {
    "anchor", "autumn", "basket", "beacon", "bridge", "bucket", "butter", "candle", "canvas",
    "carbon", "castle", "cellar", "cherry", "circle", "clover", "cobalt", "copper", "cotton",
    "cradle", "crystal", "current", "dagger", "damson", "debris", "desert", "drawer", "driver",
    "editor", "embers", "engine", "fabric", "falcon", "feather", "fiddle", "filter", "flagon",
    "forest", "fossil", "galley", "garden", "garnet", "geyser", "ginger", "glacier", "goblet",
    "granite", "gravel", "hammer", "harbor", "hazel", "heather", "hollow", "hunter", "icicle",
    "indigo", "ingot", "island", "jacket", "jasper", "jungle", "kernel", "kettle", "ladder",
    "lantern", "lattice", "legend", "lentil", "lichen", "linen", "lumber", "magnet", "mantle",
    "maple", "marble", "meadow", "mirror", "mosaic", "mustard", "needle", "nickel", "nutmeg",
    "olive", "orchard", "oyster", "paddle", "parcel", "pebble", "pepper", "pillar", "pillow",
    "pine", "pistol", "planet", "plaster", "pocket", "powder", "prairie", "quartz", "quiver",
    "rabbit", "raisin", "rapids", "raven", "ribbon", "river", "rocket", "saddle", "saffron",
    "sandal", "sapphire", "scarlet", "shadow", "shelter", "shingle", "silver", "sleeve",
    "smoke", "socket", "sorrel", "spindle", "spruce", "square", "stable", "steeple", "stone",
    "summit", "sulfur", "tailor", "tallow", "tangle", "tassel", "thicket", "thimble", "timber",
    "tinder", "toffee", "trellis", "trench", "tripod", "trumpet", "tunnel", "turnip", "valley",
    "velvet", "vessel", "violet", "walnut", "walrus", "wander", "weasel", "willow", "window",
    "winter", "wobble", "yarrow", "zephyr",
};
constexpr size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);

std::string random_words(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, kWordCount - 1);
    std::string out;
    for (int i = 0; i < count; ++i) {
        if (i) out += (i % 12 == 0) ? "\n" : " ";
        out += kWords[pick(rng)];
    }
    return out;
}

int pages_in_bin(const CollectionSpec& spec, int bin) { return spec.terminal_day / bin; }

std::string bin_dir(int bin) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "bin-%02d", bin);
    return buf;
}

const char* kImageExts[3] = {"gif", "jpg", "png"};

std::string image_bytes(const std::string& name, std::uint64_t seed) {
    // Recognizable header plus deterministic noise; enough to be a unique,
    // typed, binary payload.
    std::string out;
    if (name.size() > 4 && name.substr(name.size() - 4) == ".gif")
        out = "GIF89a";
    else if (name.size() > 4 && name.substr(name.size() - 4) == ".png")
        out = std::string("\x89PNG\r\n\x1a\n", 8);
    else
        out = std::string("\xFF\xD8\xFF\xE0", 4);
    std::mt19937_64 rng(seed ^ fnv1a64(name));
    for (int i = 0; i < 48; ++i) out += static_cast<char>(rng() & 0xFF);
    return out;
}

}  // namespace

void CollectionSpec::validate() const {
    if (bins < 1) throw ConfigError("collection spec: need at least 1 bin");
    if (terminal_day < bins)
        throw ConfigError("collection spec: terminal day must be >= number of bins");
    if (image_bin < 1 || image_bin > bins)
        throw ConfigError("collection spec: image bin must be between 1 and B");
    if (words_per_page < 1) throw ConfigError("collection spec: words_per_page must be >= 1");
}

std::string CollectionSpec::effective_name() const {
    if (!name.empty()) return name;
    // Short alphanumeric token derived from the seed.
    static const char* alpha = "abcdefghjkmnpqrstuvwxyz23456789";
    std::uint64_t v = fnv1a64("collection", seed + 0x9e3779b97f4a7c15ULL);
    std::string out = "col";
    for (int i = 0; i < 6; ++i) {
        out += alpha[v % 31];
        v /= 31;
    }
    return out;
}

CollectionCounts collection_counts(const CollectionSpec& spec, int day) {
    spec.validate();
    if (day < 0 || day > spec.terminal_day)
        throw ConfigError("day out of range: " + std::to_string(day));
    CollectionCounts out;
    out.total = 2;  // root index page and its single inline image
    for (int b = 1; b <= spec.bins; ++b) {
        BinCounts bc;
        bc.html = spec.terminal_day / b - day / b + 1;
        bc.pdf = spec.terminal_day / b - day / b;
        if (b == spec.image_bin)
            bc.img = 3 * (bc.html - 1);
        else if (bc.html == 1)
            bc.img = 0;
        else
            bc.img = 3;
        out.per_bin.push_back(bc);
        out.total += bc.total();
    }
    return out;
}

std::string to_string(TbResourceType t) {
    switch (t) {
        case TbResourceType::RootIndex: return "root-index";
        case TbResourceType::RootImage: return "root-image";
        case TbResourceType::BinIndex: return "bin-index";
        case TbResourceType::HtmlPage: return "html";
        case TbResourceType::PdfPage: return "pdf";
        case TbResourceType::Image: return "image";
    }
    return "?";
}

std::optional<TbResourceType> tb_resource_type_from_string(std::string_view s) {
    if (s == "root-index") return TbResourceType::RootIndex;
    if (s == "root-image") return TbResourceType::RootImage;
    if (s == "bin-index") return TbResourceType::BinIndex;
    if (s == "html") return TbResourceType::HtmlPage;
    if (s == "pdf") return TbResourceType::PdfPage;
    if (s == "image") return TbResourceType::Image;
    return std::nullopt;
}

const ScheduledResource* ResourceSchedule::find(const std::string& rel_path) const {
    for (const auto& r : resources)
        if (r.rel_path == rel_path) return &r;
    return nullptr;
}

ResourceSchedule plan_collection(const CollectionSpec& spec) {
    spec.validate();
    ResourceSchedule sched;
    sched.spec = spec;
    sched.spec.name = spec.effective_name();
    sched.root_url = "http://" + sched.spec.name + ".test/";

    auto add = [&](ScheduledResource r) { sched.resources.push_back(std::move(r)); };

    add({"index.html", "", 0, 0, TbResourceType::RootIndex, "text/html", std::nullopt});
    add({"logo-" + sched.spec.name + ".gif", "", 0, 0, TbResourceType::RootImage, "image/gif",
         std::nullopt});

    for (int b = 1; b <= spec.bins; ++b) {
        const int pages = pages_in_bin(spec, b);
        const std::string dir = bin_dir(b);
        add({dir + "/index.html", "", b, 0, TbResourceType::BinIndex, "text/html", std::nullopt});

        // Page p is removed on day b*(pages - p + 1): highest page number
        // goes first, page 1 lives all the way to day b*pages.
        for (int p = 1; p <= pages; ++p) {
            const int removal = b * (pages - p + 1);
            char page_name[64];
            std::snprintf(page_name, sizeof(page_name), "pg-%d-%d", b, p);
            std::string uid_base = sched.spec.name + " dgrp" + std::to_string(b) + " pg" +
                                   std::to_string(b) + "-" + std::to_string(p);
            add({dir + "/" + page_name + ".html", uid_base + "-html", b, p,
                 TbResourceType::HtmlPage, "text/html", removal});
            add({dir + "/" + page_name + ".pdf", uid_base + "-pdf", b, p,
                 TbResourceType::PdfPage, "application/pdf", removal});
            if (b == spec.image_bin) {
                // Three images owned by this page, removed with it.
                for (int k = 0; k < 3; ++k) {
                    std::string img = dir + "/img-" + sched.spec.name + "-b" + std::to_string(b) +
                                      "p" + std::to_string(p) + "-" + std::to_string(k + 1) + "." +
                                      kImageExts[k];
                    add({img, "", b, p, TbResourceType::Image,
                         mime_from_extension(kImageExts[k]), removal});
                }
            }
        }
        if (b != spec.image_bin) {
            // Three images shared by every page of the bin; gone when the last
            // content page goes.
            const int shared_removal = b * pages;
            for (int k = 0; k < 3; ++k) {
                std::string img = dir + "/img-" + sched.spec.name + "-b" + std::to_string(b) +
                                  "s-" + std::to_string(k + 1) + "." + kImageExts[k];
                add({img, "", b, 0, TbResourceType::Image, mime_from_extension(kImageExts[k]),
                     shared_removal});
            }
        }
    }
    return sched;
}

std::string resource_content(const ResourceSchedule& schedule, const ScheduledResource& res,
                             int day) {
    const CollectionSpec& spec = schedule.spec;
    const std::uint64_t seed = spec.seed ^ fnv1a64(res.rel_path);

    auto present = [&](const ScheduledResource& r) {
        return !r.removal_day || *r.removal_day > day;
    };

    switch (res.type) {
        case TbResourceType::RootIndex: {
            std::string html = "<html><head><title>" + spec.name +
                               "</title></head><body>\n<img src=\"logo-" + spec.name +
                               ".gif\">\n<ul>\n";
            for (int b = 1; b <= spec.bins; ++b)
                html += "<li><a href=\"" + bin_dir(b) + "/index.html\">" + bin_dir(b) +
                        "</a></li>\n";
            html += "</ul>\n</body></html>\n";
            return html;
        }
        case TbResourceType::RootImage:
        case TbResourceType::Image:
            return image_bytes(res.rel_path, spec.seed);
        case TbResourceType::BinIndex: {
            std::string html = "<html><head><title>" + spec.name + " " + bin_dir(res.bin) +
                               "</title></head><body>\n<ul>\n";
            for (const auto& r : schedule.resources) {
                if (r.bin != res.bin || !present(r)) continue;
                if (r.type != TbResourceType::HtmlPage && r.type != TbResourceType::PdfPage)
                    continue;
                auto slash = r.rel_path.find('/');
                std::string name = r.rel_path.substr(slash + 1);
                html += "<li><a href=\"" + name + "\">" + name + "</a></li>\n";
            }
            html += "</ul>\n</body></html>\n";
            return html;
        }
        case TbResourceType::HtmlPage: {
            std::string html = "<html><head><title>" + res.uid + "</title></head><body>\n<p>" +
                               res.uid + "</p>\n";
            for (const auto& r : schedule.resources) {
                if (r.type != TbResourceType::Image || r.bin != res.bin) continue;
                const bool owned = res.bin == spec.image_bin && r.page == res.page;
                const bool shared = res.bin != spec.image_bin;
                if (!owned && !shared) continue;
                auto slash = r.rel_path.find('/');
                html += "<img src=\"" + r.rel_path.substr(slash + 1) + "\">\n";
            }
            html += "<p>\n" + random_words(seed, spec.words_per_page) + "\n</p>\n</body></html>\n";
            return html;
        }
        case TbResourceType::PdfPage:
            // Placeholder with a PDF MIME label: typed, UID-bearing text body.
            return res.uid + "\n" + random_words(seed, spec.words_per_page) + "\n";
    }
    return "";
}

void materialize_day(const ResourceSchedule& schedule, int day, const std::string& out_dir) {
    auto host = Url::parse(schedule.root_url)->host();
    for (const auto& r : schedule.resources) {
        if (r.removal_day && *r.removal_day <= day) continue;
        fs::path p = fs::path(out_dir) / host / r.rel_path;
        write_file(p.string(), resource_content(schedule, r, day));
    }
}

ResourceSchedule generate_collection(const CollectionSpec& spec, const std::string& out_dir) {
    ResourceSchedule sched = plan_collection(spec);
    materialize_day(sched, 0, out_dir);
    return sched;
}

std::int64_t daily_queries(std::int64_t w, std::int64_t b, std::int64_t t, std::int64_t s) {
    if (w < 0 || b < 0 || t < 0 || s < 0) throw ConfigError("daily_queries: negative argument");
    return w * b * t * s;
}

std::int64_t image_daily_queries(std::int64_t w, std::int64_t i, std::int64_t s) {
    if (w < 0 || i < 0 || s < 0) throw ConfigError("image_daily_queries: negative argument");
    return w * i * s;
}

void RepoBehavior::validate() const {
    if (crawl_interval < 1) throw ConfigError("behavior: crawl_interval must be >= 1");
    if (cache_lag < 0 || purge_lag < 0) throw ConfigError("behavior: lags must be >= 0");
    if (availability_prob < 0.0 || availability_prob > 1.0)
        throw ConfigError("behavior: availability_prob must be in [0,1]");
}

const ResourceTimeline* CacheTimeline::find(const std::string& rel_path) const {
    for (const auto& r : resources)
        if (r.rel_path == rel_path) return &r;
    return nullptr;
}

CacheTimeline simulate_cache(const ResourceSchedule& schedule, const RepoBehavior& behavior,
                             int horizon) {
    behavior.validate();
    if (horizon < schedule.spec.terminal_day)
        throw ConfigError("simulate_cache: horizon must reach the terminal day");

    CacheTimeline tl;
    tl.behavior = behavior;
    tl.horizon = horizon;

    for (const auto& res : schedule.resources) {
        ResourceTimeline rt;
        rt.rel_path = res.rel_path;
        rt.t0 = 0;
        rt.t_r = res.removal_day;

        bool was_cached = false;
        for (int c = behavior.crawl_interval; c <= horizon; c += behavior.crawl_interval) {
            const bool live = !rt.t_r || c <= *rt.t_r;
            if (live) {
                rt.live_crawl_days.push_back(c);
                if (!rt.t_ca) rt.t_ca = c + behavior.cache_lag;
                was_cached = true;
            } else if (was_cached && !rt.t_cr) {
                rt.t_cr = c + behavior.purge_lag;
            }
        }

        if (rt.t_ca) {
            std::mt19937_64 rng(behavior.seed ^ fnv1a64(res.rel_path));
            std::uniform_real_distribution<double> coin(0.0, 1.0);
            const int last = rt.t_cr ? *rt.t_cr - 1 : horizon;
            for (int d = *rt.t_ca; d <= last; ++d) {
                if (d > horizon) break;
                if (coin(rng) < behavior.availability_prob || behavior.availability_prob >= 1.0)
                    rt.observed_available_days.push_back(d);
            }
        }
        tl.resources.push_back(std::move(rt));
    }
    return tl;
}

std::vector<LifecycleMetrics> lifecycle_metrics(const CacheTimeline& timeline) {
    std::vector<LifecycleMetrics> out;
    for (const auto& rt : timeline.resources) {
        LifecycleMetrics m;
        m.rel_path = rt.rel_path;
        if (rt.t_r) m.ttl_ws = *rt.t_r - rt.t0;
        if (rt.t_ca && rt.t_cr) {
            m.ttl_c = *rt.t_cr - *rt.t_ca;
            if (rt.t_r) m.tur = *rt.t_cr - *rt.t_r;
            if (*m.ttl_c > 0) {
                int observed = 0;
                for (int d : rt.observed_available_days)
                    if (d >= *rt.t_ca && d < *rt.t_cr) ++observed;
                m.p_r = static_cast<double>(observed) / *m.ttl_c;
            }
        }
        m.vulnerable = !rt.t_ca.has_value();
        if (rt.t_ca) {
            const bool before_removal = !rt.t_r || *rt.t_ca < *rt.t_r;
            const bool positive_life = !m.ttl_c || *m.ttl_c > 0;
            m.recoverable = before_removal && positive_life;
        }
        out.push_back(std::move(m));
    }
    return out;
}

FixtureManifest timeline_to_fixture(const ResourceSchedule& schedule,
                                    const CacheTimeline& timeline, int as_of_day,
                                    const FixtureBuildOptions& options) {
    if (as_of_day < 0 || as_of_day > timeline.horizon)
        throw ConfigError("timeline_to_fixture: as_of_day outside the simulated horizon");

    FixtureManifest m;
    m.descriptor = options.descriptor;

    for (const auto& rt : timeline.resources) {
        if (!rt.t_ca || *rt.t_ca > as_of_day) continue;
        if (rt.t_cr && as_of_day >= *rt.t_cr) continue;
        if (std::find(rt.observed_available_days.begin(), rt.observed_available_days.end(),
                      as_of_day) == rt.observed_available_days.end())
            continue;

        const ScheduledResource* res = schedule.find(rt.rel_path);
        if (!res) continue;

        // Cached content is the origin's state at the latest crawl that had
        // already landed in the cache by as_of_day.
        int content_day = rt.live_crawl_days.front();
        for (int c : rt.live_crawl_days)
            if (c + timeline.behavior.cache_lag <= as_of_day) content_day = c;
        std::string origin = resource_content(schedule, *res, content_day);

        FixtureEntry e;
        e.url = schedule.root_url + res->rel_path;
        e.cache_date = options.epoch.plus_days(*rt.t_ca);
        e.retrievable = true;

        const bool image = res->type == TbResourceType::Image || res->type == TbResourceType::RootImage;
        if (options.descriptor.is_canonical_store) {
            e.content = origin;
            e.mime = res->mime;
            e.form = StoredForm::Canonical;
        } else if (image) {
            if (!options.descriptor.supports_image_query) continue;  // unusable holdings
            e.content = "THUMB:" + to_hex(fnv1a64(origin)) + "\n";
            e.mime = res->mime;
            e.form = StoredForm::Thumbnail;
        } else if (is_html_mime(res->mime)) {
            e.content = origin;  // wrapper markup applied at query time
            e.mime = res->mime;
            e.form = StoredForm::Canonical;
        } else {
            e.content = "<html><head><title>" + res->uid + "</title></head><body><pre>\n" +
                        origin + "</pre></body></html>\n";
            e.mime = "text/html";
            e.form = StoredForm::HtmlConverted;
        }
        m.entries.push_back(std::move(e));
    }
    m.validate();
    return m;
}

namespace {

json spec_to_json(const CollectionSpec& s) {
    return json{{"bins", s.bins},          {"terminal_day", s.terminal_day},
                {"image_bin", s.image_bin}, {"words_per_page", s.words_per_page},
                {"seed", s.seed},           {"name", s.name}};
}

CollectionSpec spec_from_json(const json& j) {
    CollectionSpec s;
    s.bins = j.at("bins").get<int>();
    s.terminal_day = j.at("terminal_day").get<int>();
    s.image_bin = j.at("image_bin").get<int>();
    s.words_per_page = j.at("words_per_page").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.name = j.value("name", std::string());
    return s;
}

}  // namespace

void save_schedule(const ResourceSchedule& schedule, const std::string& path) {
    json items = json::array();
    for (const auto& r : schedule.resources) {
        json e{{"path", r.rel_path}, {"uid", r.uid},   {"bin", r.bin},
               {"page", r.page},     {"type", to_string(r.type)}, {"mime", r.mime}};
        if (r.removal_day) e["removal_day"] = *r.removal_day;
        items.push_back(std::move(e));
    }
    json j{{"spec", spec_to_json(schedule.spec)}, {"root_url", schedule.root_url},
           {"resources", items}};
    write_file(path, j.dump(2) + "\n");
}

ResourceSchedule load_schedule(const std::string& path) {
    json j = json::parse(read_file(path));
    ResourceSchedule s;
    s.spec = spec_from_json(j.at("spec"));
    s.root_url = j.at("root_url").get<std::string>();
    for (const auto& e : j.at("resources")) {
        ScheduledResource r;
        r.rel_path = e.at("path").get<std::string>();
        r.uid = e.at("uid").get<std::string>();
        r.bin = e.at("bin").get<int>();
        r.page = e.at("page").get<int>();
        auto t = tb_resource_type_from_string(e.at("type").get<std::string>());
        if (!t) throw ConfigError("schedule: bad resource type");
        r.type = *t;
        r.mime = e.at("mime").get<std::string>();
        if (e.contains("removal_day")) r.removal_day = e.at("removal_day").get<int>();
        s.resources.push_back(std::move(r));
    }
    return s;
}

void save_timeline(const CacheTimeline& timeline, const std::string& path) {
    json items = json::array();
    for (const auto& r : timeline.resources) {
        json e{{"path", r.rel_path},
               {"t0", r.t0},
               {"live_crawls", r.live_crawl_days},
               {"observed", r.observed_available_days}};
        if (r.t_r) e["t_r"] = *r.t_r;
        if (r.t_ca) e["t_ca"] = *r.t_ca;
        if (r.t_cr) e["t_cr"] = *r.t_cr;
        items.push_back(std::move(e));
    }
    json jb{{"crawl_interval", timeline.behavior.crawl_interval},
            {"cache_lag", timeline.behavior.cache_lag},
            {"purge_lag", timeline.behavior.purge_lag},
            {"availability_prob", timeline.behavior.availability_prob},
            {"seed", timeline.behavior.seed}};
    write_file(path, json{{"behavior", jb}, {"horizon", timeline.horizon},
                          {"resources", items}}
                             .dump(2) +
                         "\n");
}

CacheTimeline load_timeline(const std::string& path) {
    json j = json::parse(read_file(path));
    CacheTimeline t;
    const json& jb = j.at("behavior");
    t.behavior.crawl_interval = jb.at("crawl_interval").get<int>();
    t.behavior.cache_lag = jb.at("cache_lag").get<int>();
    t.behavior.purge_lag = jb.at("purge_lag").get<int>();
    t.behavior.availability_prob = jb.at("availability_prob").get<double>();
    t.behavior.seed = jb.at("seed").get<std::uint64_t>();
    t.horizon = j.at("horizon").get<int>();
    for (const auto& e : j.at("resources")) {
        ResourceTimeline r;
        r.rel_path = e.at("path").get<std::string>();
        r.t0 = e.at("t0").get<int>();
        if (e.contains("t_r")) r.t_r = e.at("t_r").get<int>();
        if (e.contains("t_ca")) r.t_ca = e.at("t_ca").get<int>();
        if (e.contains("t_cr")) r.t_cr = e.at("t_cr").get<int>();
        for (const auto& d : e.at("live_crawls")) r.live_crawl_days.push_back(d.get<int>());
        for (const auto& d : e.at("observed")) r.observed_available_days.push_back(d.get<int>());
        t.resources.push_back(std::move(r));
    }
    return t;
}

RepoBehavior load_behavior(const std::string& path) {
    json j = json::parse(read_file(path));
    RepoBehavior b;
    b.crawl_interval = j.value("crawl_interval", b.crawl_interval);
    b.cache_lag = j.value("cache_lag", b.cache_lag);
    b.purge_lag = j.value("purge_lag", b.purge_lag);
    b.availability_prob = j.value("availability_prob", b.availability_prob);
    b.seed = j.value("seed", b.seed);
    b.validate();
    return b;
}

void save_behavior(const RepoBehavior& behavior, const std::string& path) {
    json j{{"crawl_interval", behavior.crawl_interval},
           {"cache_lag", behavior.cache_lag},
           {"purge_lag", behavior.purge_lag},
           {"availability_prob", behavior.availability_prob},
           {"seed", behavior.seed}};
    write_file(path, j.dump(2) + "\n");
}

std::string metrics_to_json(const std::vector<LifecycleMetrics>& metrics) {
    json items = json::array();
    for (const auto& m : metrics) {
        json e{{"path", m.rel_path},
               {"vulnerable", m.vulnerable},
               {"recoverable", m.recoverable}};
        if (m.ttl_ws) e["ttl_ws"] = *m.ttl_ws;
        if (m.ttl_c) e["ttl_c"] = *m.ttl_c;
        if (m.tur) e["tur"] = *m.tur;
        if (m.p_r) e["p_r"] = *m.p_r;
        items.push_back(std::move(e));
    }
    return json{{"resources", items}}.dump(2) + "\n";
}

}  // namespace webrecon
