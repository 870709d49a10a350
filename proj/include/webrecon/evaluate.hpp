#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "webrecon/url.hpp"

namespace webrecon {

struct WebGraph {
    std::vector<std::string> nodes;  // URLs, discovery (BFS) order
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::string> unreachable;  // files present on disk but not linked from the root
};

/// Crawls a stored snapshot from root_url following extracted links. The
/// snapshot must use the store layout; a .pathmap.json is honored when
/// present. Throws StoreError when the root file is absent.
WebGraph build_web_graph(const std::string& snapshot_root, const Url& root_url);

enum class ResourceCategory {
    Identical,
    Changed,
    Missing,       // attempted by the reconstruction and not found anywhere
    Added,         // recovered but not part of the original site
    Undiscovered,  // in the original site but never reached by the reconstruction
};

std::string to_string(ResourceCategory c);

/// Tree comparison keyed by canonical relative path. Files only: the
/// reconstruction log and path map are bookkeeping and excluded. When the
/// reconstruction tree carries a recovery log, original-only files split into
/// Missing (logged as MISSING) and Undiscovered (never attempted); without a
/// log every original-only file is Missing.
std::map<std::string, ResourceCategory> categorize(const std::string& original_root,
                                                   const std::string& recon_root);

/// (changed/|W|, missing/|W|, added/|W'|) with exact integer counts.
struct DifferenceVector {
    std::int64_t identical = 0;
    std::int64_t changed = 0;
    std::int64_t missing = 0;
    std::int64_t added = 0;
    std::int64_t undiscovered = 0;

    std::int64_t w_size() const { return identical + changed + missing + undiscovered; }
    std::int64_t w_prime_size() const { return identical + changed + added; }

    double changed_frac() const { return static_cast<double>(changed) / w_size(); }
    double missing_frac() const { return static_cast<double>(missing) / w_size(); }
    double added_frac() const {
        return w_prime_size() == 0 ? 0.0 : static_cast<double>(added) / w_prime_size();
    }

    /// "(0.333, 0.167, 0.200)"
    std::string render() const;
};

/// Throws ConfigError when the original side is empty (undefined vector).
DifferenceVector difference_vector(const std::map<std::string, ResourceCategory>& categories);

/// Word tokens after tag stripping and lowercase folding.
std::vector<std::string> tokenize_text(std::string_view content);

/// Jaccard similarity of size-w word-shingle sets; documents shorter than w
/// words compare whole token sequences (1.0 or 0.0).
double shingle_similarity(const std::string& a, const std::string& b, int w = 10);

/// Converts resource bytes to comparable text. HTML and plain text work out
/// of the box; other MIME types need a registered converter command (run as
/// `cmd < in > out`) and are otherwise not convertible.
class TextExtractor {
public:
    void register_converter(const std::string& mime, const std::string& command);
    bool convertible(const std::string& mime) const;
    std::optional<std::string> to_text(const std::string& bytes, const std::string& mime) const;

private:
    std::map<std::string, std::string> converters_;
};

struct ChangedPair {
    std::string key;
    std::string original;
    std::string reconstructed;
    std::string mime;
};

struct AlmostIdenticalReport {
    double rate = 0.0;          // fraction of comparable changed pairs at/above threshold
    std::int64_t compared = 0;  // text-convertible changed pairs
    std::int64_t above = 0;
    std::int64_t excluded_non_text = 0;
    std::map<std::string, double> similarity;  // per key
};

AlmostIdenticalReport almost_identical_rate(const std::vector<ChangedPair>& pairs,
                                            double threshold = 0.75, int w = 10,
                                            const TextExtractor& extractor = {});

struct MimeGroupRow {
    std::string group;  // "html", "images", "other", or an exact MIME
    std::int64_t original_count = 0;
    std::int64_t recovered_count = 0;
    int percent = 0;  // rounded; 0 when original_count == 0
};

/// Group rows (html/images/other) followed by exact-MIME rows. "Recovered"
/// counts shared URLs (identical or changed), not added ones.
std::vector<MimeGroupRow> mime_breakdown(const std::map<std::string, ResourceCategory>& categories,
                                         const std::map<std::string, std::string>& mime_by_key);

/// Annulus rendering of a difference vector: hole area fraction = missing,
/// dark arc of the non-missing core = changed share, crust band area
/// proportional to added. Deterministic byte output for identical inputs.
std::string render_recon_diagram(const DifferenceVector& v);

struct EvaluationOptions {
    std::optional<Url> root_url;  // enables graph output
    double shingle_threshold = 0.75;
    int shingle_size = 10;
    TextExtractor extractor;
};

/// Full comparison driver: categories, vector, MIME breakdown, similarity.
/// Returns the JSON report text.
std::string evaluate_to_json(const std::string& original_root, const std::string& recon_root,
                             const EvaluationOptions& options);

}  // namespace webrecon
