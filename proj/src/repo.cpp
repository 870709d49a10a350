#include "webrecon/repo.hpp"

#include <filesystem>

#include <nlohmann/json.hpp>

#include "webrecon/extract.hpp"

namespace webrecon {

using nlohmann::json;

std::string to_string(StoredForm f) {
    switch (f) {
        case StoredForm::Canonical: return "canonical";
        case StoredForm::HtmlConverted: return "html-converted";
        case StoredForm::Thumbnail: return "thumbnail";
        case StoredForm::IndexedOnly: return "indexed-only";
    }
    return "?";
}

std::optional<StoredForm> stored_form_from_string(std::string_view s) {
    if (s == "canonical") return StoredForm::Canonical;
    if (s == "html-converted") return StoredForm::HtmlConverted;
    if (s == "thumbnail") return StoredForm::Thumbnail;
    if (s == "indexed-only") return StoredForm::IndexedOnly;
    return std::nullopt;
}

std::string to_string(CacheDatePolicy p) {
    switch (p) {
        case CacheDatePolicy::Always: return "always";
        case CacheDatePolicy::HtmlOnly: return "html-only";
        case CacheDatePolicy::Never: return "never";
    }
    return "?";
}

std::optional<CacheDatePolicy> cache_date_policy_from_string(std::string_view s) {
    if (s == "always") return CacheDatePolicy::Always;
    if (s == "html-only") return CacheDatePolicy::HtmlOnly;
    if (s == "never") return CacheDatePolicy::Never;
    return std::nullopt;
}

void RepositoryDescriptor::validate() const {
    if (id.empty()) throw ConfigError("repository descriptor needs an id");
    if (nonimage_query_cost < 1)
        throw ConfigError("repository " + id + ": nonimage_query_cost must be >= 1");
    if (!supports_image_query && image_query_cost.has_value())
        throw ConfigError("repository " + id + ": image_query_cost set but images unsupported");
    if (supports_image_query && (!image_query_cost || *image_query_cost < 1))
        throw ConfigError("repository " + id + ": image support requires image_query_cost >= 1");
}

StoredResource strip_repository_markup(const StoredResource& res, const RepositoryDescriptor& repo) {
    StoredResource out = res;
    const std::string& hdr = repo.wrap_header;
    const std::string& ftr = repo.wrap_footer;
    if (!hdr.empty() && out.content.size() >= hdr.size() &&
        out.content.compare(0, hdr.size(), hdr) == 0) {
        out.content.erase(0, hdr.size());
    }
    if (!ftr.empty() && out.content.size() >= ftr.size() &&
        out.content.compare(out.content.size() - ftr.size(), ftr.size(), ftr) == 0) {
        out.content.erase(out.content.size() - ftr.size());
    }
    return out;
}

void FixtureManifest::validate() const {
    descriptor.validate();
    std::map<std::string, int> seen;
    int idx = 0;
    for (const auto& e : entries) {
        auto u = Url::parse(e.url);
        if (!u)
            throw ConfigError("fixture " + descriptor.id + " entry " + std::to_string(idx) +
                              ": url not absolute: " + e.url);
        std::string canon = u->str();
        auto [it, inserted] = seen.emplace(canon, idx);
        if (!inserted)
            throw ConfigError("fixture " + descriptor.id + ": duplicate url " + canon +
                              " (entries " + std::to_string(it->second) + " and " +
                              std::to_string(idx) + ")");
        if (e.form == StoredForm::Thumbnail && !is_image_mime(e.mime))
            throw ConfigError("fixture " + descriptor.id + " entry " + canon +
                              ": thumbnail form requires an image MIME, got " + e.mime);
        ++idx;
    }
}

FixtureRepository::FixtureRepository(FixtureManifest manifest) : manifest_(std::move(manifest)) {
    manifest_.validate();
    for (std::size_t i = 0; i < manifest_.entries.size(); ++i) {
        by_url_.emplace(Url::parse(manifest_.entries[i].url)->str(), i);
    }
}

const FixtureEntry* FixtureRepository::lookup(const Url& url) const {
    auto it = by_url_.find(url.str());
    return it == by_url_.end() ? nullptr : &manifest_.entries[it->second];
}

RepoResult FixtureRepository::answer(const FixtureEntry* entry, int hit_cost) const {
    if (!entry) return RepoResult{std::nullopt, hit_cost};
    if (!entry->retrievable || entry->form == StoredForm::IndexedOnly) {
        // The index produced a link but the content fetch fails: the wasted
        // retrieval attempt costs one extra round-trip.
        return RepoResult{std::nullopt, hit_cost + 1};
    }
    StoredResource res;
    res.url = Url::parse(entry->url)->str();
    res.mime = entry->mime;
    res.form = entry->form;
    const std::string& hdr =
        entry->wrap_header ? *entry->wrap_header : manifest_.descriptor.wrap_header;
    const std::string& ftr =
        entry->wrap_footer ? *entry->wrap_footer : manifest_.descriptor.wrap_footer;
    res.content = hdr + entry->content + ftr;

    switch (manifest_.descriptor.provides_cache_date) {
        case CacheDatePolicy::Always:
            res.cache_date = entry->cache_date;
            break;
        case CacheDatePolicy::HtmlOnly:
            // Dates are published for genuine HTML resources only; conversions
            // and thumbnails of non-HTML originals stay undated.
            if (entry->form == StoredForm::Canonical && is_html_mime(entry->mime))
                res.cache_date = entry->cache_date;
            break;
        case CacheDatePolicy::Never:
            break;
    }
    return RepoResult{std::move(res), hit_cost};
}

RepoResult FixtureRepository::query_nonimage(const Url& url) const {
    return answer(lookup(url), manifest_.descriptor.nonimage_query_cost);
}

RepoResult FixtureRepository::query_image(const Url& url) const {
    if (!manifest_.descriptor.supports_image_query)
        throw std::logic_error("repository " + manifest_.descriptor.id +
                               " does not support image queries");
    return answer(lookup(url), *manifest_.descriptor.image_query_cost);
}

namespace {

RepositoryDescriptor descriptor_from_json(const json& j, const std::string& id) {
    RepositoryDescriptor d;
    d.id = id;
    if (j.contains("profile")) {
        d = profile_by_name(j.at("profile").get<std::string>());
        d.id = id;
    }
    if (j.contains("supports_image_query")) d.supports_image_query = j.at("supports_image_query").get<bool>();
    if (j.contains("nonimage_query_cost")) d.nonimage_query_cost = j.at("nonimage_query_cost").get<int>();
    if (j.contains("image_query_cost")) {
        const auto& v = j.at("image_query_cost");
        if (v.is_string() && v.get<std::string>() == "unsupported")
            d.image_query_cost.reset();
        else if (v.is_null())
            d.image_query_cost.reset();
        else
            d.image_query_cost = v.get<int>();
    }
    if (j.contains("is_canonical_store")) d.is_canonical_store = j.at("is_canonical_store").get<bool>();
    if (j.contains("provides_cache_date")) {
        auto p = cache_date_policy_from_string(j.at("provides_cache_date").get<std::string>());
        if (!p) throw ConfigError("repository " + id + ": bad provides_cache_date");
        d.provides_cache_date = *p;
    }
    if (j.contains("wrap_header")) d.wrap_header = j.at("wrap_header").get<std::string>();
    if (j.contains("wrap_footer")) d.wrap_footer = j.at("wrap_footer").get<std::string>();
    return d;
}

}  // namespace

FixtureManifest parse_manifest(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    FixtureManifest m;
    if (!j.contains("id")) throw ConfigError("manifest missing \"id\"");
    const std::string id = j.at("id").get<std::string>();
    m.descriptor = descriptor_from_json(j.value("descriptor", json::object()), id);

    for (const auto& je : j.value("entries", json::array())) {
        FixtureEntry e;
        if (!je.contains("url")) throw ConfigError("fixture " + id + ": entry missing \"url\"");
        e.url = je.at("url").get<std::string>();
        if (je.contains("inline_base64")) {
            e.content = base64_decode(je.at("inline_base64").get<std::string>());
        } else if (je.contains("file")) {
            std::filesystem::path p = je.at("file").get<std::string>();
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            e.content = read_file(p.string());
        } else if (je.value("retrievable", true) &&
                   je.value("form", std::string("canonical")) != "indexed-only") {
            throw ConfigError("fixture " + id + " entry " + e.url +
                              ": needs \"file\" or \"inline_base64\"");
        }
        e.mime = je.value("mime", std::string());
        if (e.mime.empty()) {
            auto u = Url::parse(e.url);
            if (u) e.mime = mime_from_extension(u->extension());
        }
        auto form = stored_form_from_string(je.value("form", std::string("canonical")));
        if (!form) throw ConfigError("fixture " + id + " entry " + e.url + ": bad form");
        e.form = *form;
        if (je.contains("cache_date") && !je.at("cache_date").is_null()) {
            auto d = Date::from_iso(je.at("cache_date").get<std::string>());
            if (!d) throw ConfigError("fixture " + id + " entry " + e.url + ": bad cache_date");
            e.cache_date = d;
        }
        e.retrievable = je.value("retrievable", true);
        if (je.contains("wrap_header")) e.wrap_header = je.at("wrap_header").get<std::string>();
        if (je.contains("wrap_footer")) e.wrap_footer = je.at("wrap_footer").get<std::string>();
        m.entries.push_back(std::move(e));
    }
    m.validate();
    return m;
}

FixtureManifest load_manifest(const std::string& path) {
    std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_manifest(read_file(path), dir.empty() ? "." : dir);
}

void save_manifest(const FixtureManifest& manifest, const std::string& path) {
    const auto& d = manifest.descriptor;
    json jd{
        {"supports_image_query", d.supports_image_query},
        {"nonimage_query_cost", d.nonimage_query_cost},
        {"is_canonical_store", d.is_canonical_store},
        {"provides_cache_date", to_string(d.provides_cache_date)},
    };
    if (d.image_query_cost)
        jd["image_query_cost"] = *d.image_query_cost;
    else
        jd["image_query_cost"] = "unsupported";
    if (!d.wrap_header.empty()) jd["wrap_header"] = d.wrap_header;
    if (!d.wrap_footer.empty()) jd["wrap_footer"] = d.wrap_footer;

    json entries = json::array();
    for (const auto& e : manifest.entries) {
        json je{
            {"url", e.url},
            {"inline_base64", base64_encode(e.content)},
            {"mime", e.mime},
            {"form", to_string(e.form)},
            {"retrievable", e.retrievable},
        };
        if (e.cache_date) je["cache_date"] = e.cache_date->to_iso();
        if (e.wrap_header) je["wrap_header"] = *e.wrap_header;
        if (e.wrap_footer) je["wrap_footer"] = *e.wrap_footer;
        entries.push_back(std::move(je));
    }
    json j{{"id", d.id}, {"descriptor", jd}, {"entries", entries}};
    write_file(path, j.dump(2) + "\n");
}

std::shared_ptr<FixtureRepository> load_fixture(const std::string& manifest_path) {
    return std::make_shared<FixtureRepository>(load_manifest(manifest_path));
}

RepositoryDescriptor archive_profile() {
    RepositoryDescriptor d;
    d.id = "archive";
    d.supports_image_query = true;
    d.nonimage_query_cost = 2;
    d.image_query_cost = 2;
    d.is_canonical_store = true;
    d.provides_cache_date = CacheDatePolicy::Always;
    return d;
}

RepositoryDescriptor google_profile() {
    RepositoryDescriptor d;
    d.id = "google";
    d.supports_image_query = true;
    d.nonimage_query_cost = 1;
    d.image_query_cost = 2;
    d.is_canonical_store = false;
    d.provides_cache_date = CacheDatePolicy::HtmlOnly;
    return d;
}

RepositoryDescriptor msn_profile() {
    RepositoryDescriptor d;
    d.id = "msn";
    d.supports_image_query = false;
    d.nonimage_query_cost = 2;
    d.is_canonical_store = false;
    d.provides_cache_date = CacheDatePolicy::Always;
    return d;
}

RepositoryDescriptor yahoo_profile() {
    RepositoryDescriptor d;
    d.id = "yahoo";
    d.supports_image_query = true;
    d.nonimage_query_cost = 2;
    d.image_query_cost = 2;
    d.is_canonical_store = false;
    d.provides_cache_date = CacheDatePolicy::Never;
    return d;
}

RepositoryDescriptor profile_by_name(std::string_view name) {
    if (name == "archive") return archive_profile();
    if (name == "google") return google_profile();
    if (name == "msn") return msn_profile();
    if (name == "yahoo") return yahoo_profile();
    throw ConfigError("unknown repository profile: " + std::string(name));
}

}  // namespace webrecon
