#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "webrecon/common.hpp"
#include "webrecon/repo.hpp"
#include "webrecon/url.hpp"

namespace webrecon {

/// Pure URL -> relative path mapping: host directory, one directory per path
/// segment, trailing slash mapped to index.html, the query string folded into
/// the file name, and anything awkward for common filesystems percent-encoded.
/// Collision handling (case folds, dir/file clashes) happens in SiteStore,
/// which records its choices in the path map.
std::string url_to_path(const Url& url);

struct StoreLayout {
    std::string root;
    bool rename_converted_html = false;
    bool relativize_links = false;
};

struct LogEntry {
    std::string url;
    std::string mime_or_missing;  // MIME or the literal "MISSING"
    std::string source_repo;      // "-" for missing
    std::string source_date;      // ISO date or "-"
};

/// What the reconstructor hands the store for one recovered URL.
struct SavedResource {
    std::string url;
    std::string content;
    std::string mime;
    StoredForm form = StoredForm::Canonical;
    std::string source_repo;
    std::optional<Date> source_date;
};

/// Single-writer persistent site tree. Files land under layout.root at the
/// position url_to_path gives them, adjusted for collisions; every recovery
/// and miss is appended to <root>/reconstruction.log (TSV) and the URL->path
/// decisions to <root>/.pathmap.json.
class SiteStore {
public:
    explicit SiteStore(StoreLayout layout);

    /// Writes the bytes and returns the path (relative to root) they went to.
    /// HtmlConverted non-HTML resources gain a ".html" suffix when the layout
    /// asks for renaming.
    std::string save(const SavedResource& res);

    void append_log(const LogEntry& entry);
    void log_recovered(const SavedResource& res);
    void log_missing(const std::string& url);

    /// Rewrites absolute in-scope references inside saved HTML files to
    /// relative paths (pointing at renamed files where renaming happened).
    /// Returns the number of rewritten references. Running it again is a
    /// no-op. Files that fail to parse are skipped with a warning to stderr.
    std::size_t relativize_links();

    void flush_pathmap() const;

    const StoreLayout& layout() const { return layout_; }
    const std::map<std::string, std::string>& path_map() const { return path_of_url_; }
    std::string log_path() const;
    std::string pathmap_path() const;

    /// Reads a .pathmap.json written by an earlier session (resume support).
    void load_pathmap();

private:
    std::string assign_path(const Url& url, bool rename_to_html);

    StoreLayout layout_;
    std::map<std::string, std::string> path_of_url_;    // canonical url -> relative path
    std::map<std::string, std::string> taken_;          // lowercased path -> url
    std::map<std::string, bool> is_dir_;                // lowercased prefix dirs
    std::vector<std::pair<std::string, std::string>> html_saved_;  // (url, relpath)
};

/// Loads the TSV recovery log; missing file -> empty.
std::vector<LogEntry> read_log(const std::string& path);

}  // namespace webrecon
