#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "webrecon/common.hpp"
#include "webrecon/url.hpp"

namespace webrecon {

/// How a repository holds a resource.
enum class StoredForm {
    Canonical,      // byte-identical to the original
    HtmlConverted,  // HTML rendering of a non-HTML original
    Thumbnail,      // reduced image
    IndexedOnly,    // known to the index but content not retrievable
};

std::string to_string(StoredForm f);
std::optional<StoredForm> stored_form_from_string(std::string_view s);

enum class CacheDatePolicy { Always, HtmlOnly, Never };

std::string to_string(CacheDatePolicy p);
std::optional<CacheDatePolicy> cache_date_policy_from_string(std::string_view s);

/// Observable capabilities and per-lookup costs of a web repository.
struct RepositoryDescriptor {
    std::string id;
    bool supports_image_query = false;
    int nonimage_query_cost = 1;               // round-trips per non-image lookup
    std::optional<int> image_query_cost;       // nullopt = unsupported
    bool is_canonical_store = false;           // stores byte-canonical copies of all types
    CacheDatePolicy provides_cache_date = CacheDatePolicy::Never;
    // Markup this repository adds around cached HTML; strip_repository_markup
    // removes these byte strings again.
    std::string wrap_header;
    std::string wrap_footer;

    void validate() const;  // throws ConfigError on invariant violations
};

struct StoredResource {
    std::string url;
    std::string content;
    std::string mime;
    StoredForm form = StoredForm::Canonical;
    std::optional<Date> cache_date;
};

struct RepoResult {
    std::optional<StoredResource> resource;
    int queries_spent = 0;

    bool found() const { return resource.has_value(); }
};

/// Uniform query interface. Handles are immutable after construction and safe
/// for concurrent queries.
class Repository {
public:
    virtual ~Repository() = default;
    virtual const RepositoryDescriptor& descriptor() const = 0;
    /// url must be absolute. May throw TransportError (live adapters).
    virtual RepoResult query_nonimage(const Url& url) const = 0;
    /// Calling on a repository with supports_image_query == false is a
    /// programming error and throws std::logic_error.
    virtual RepoResult query_image(const Url& url) const = 0;
};

/// Removes the repository's declared wrapper markup: the header byte string
/// when the content starts with it, the footer when it ends with it. Inputs
/// without the markers come back unchanged, so the operation is idempotent.
StoredResource strip_repository_markup(const StoredResource& res, const RepositoryDescriptor& repo);

struct FixtureEntry {
    std::string url;
    std::string content;  // original bytes (wrapper applied at query time)
    std::string mime;
    StoredForm form = StoredForm::Canonical;
    std::optional<Date> cache_date;
    bool retrievable = true;
    // Per-entry wrapper override; when unset the descriptor's wrapper applies.
    std::optional<std::string> wrap_header;
    std::optional<std::string> wrap_footer;
};

struct FixtureManifest {
    RepositoryDescriptor descriptor;
    std::vector<FixtureEntry> entries;

    void validate() const;  // absolute unique URLs, descriptor invariants
};

/// Deterministic repository backed by an in-memory manifest.
class FixtureRepository : public Repository {
public:
    explicit FixtureRepository(FixtureManifest manifest);

    const RepositoryDescriptor& descriptor() const override { return manifest_.descriptor; }
    RepoResult query_nonimage(const Url& url) const override;
    RepoResult query_image(const Url& url) const override;

    std::size_t holdings_count() const { return by_url_.size(); }

private:
    const FixtureEntry* lookup(const Url& url) const;
    RepoResult answer(const FixtureEntry* entry, int hit_cost) const;

    FixtureManifest manifest_;
    std::map<std::string, std::size_t> by_url_;  // canonical url -> entry index
};

/// Manifest JSON:
///   {"id": ..., "descriptor": {...}, "entries": [{"url", "file"|"inline_base64",
///    "mime", "form", "cache_date", "retrievable", "wrap_header", "wrap_footer"}]}
/// "file" paths are resolved relative to the manifest's directory.
FixtureManifest load_manifest(const std::string& path);
FixtureManifest parse_manifest(const std::string& json_text, const std::string& base_dir);
/// Writes entries inline (base64).
void save_manifest(const FixtureManifest& manifest, const std::string& path);

std::shared_ptr<FixtureRepository> load_fixture(const std::string& manifest_path);

/// Descriptor profiles mirroring the four repository archetypes the engine
/// is normally pointed at. ids: "archive", "google", "msn", "yahoo".
RepositoryDescriptor archive_profile();
RepositoryDescriptor google_profile();
RepositoryDescriptor msn_profile();
RepositoryDescriptor yahoo_profile();
RepositoryDescriptor profile_by_name(std::string_view name);  // throws ConfigError

}  // namespace webrecon
