#pragma once

#include <set>
#include <string>
#include <vector>

#include "webrecon/url.hpp"

namespace webrecon {

enum class ResourceClass { Image, Other };

/// Extensions treated as images when classifying a URL. Configurable because
/// classification drives which repository interface gets queried.
class ImageExtensions {
public:
    ImageExtensions();  // png, gif, jpg, jpeg, bmp, ico, tif, tiff
    explicit ImageExtensions(const std::vector<std::string>& exts);

    bool contains(std::string_view ext) const;
    static ImageExtensions from_csv(const std::string& csv);

private:
    std::set<std::string> exts_;
};

ResourceClass classify_url(const Url& url, const ImageExtensions& exts = ImageExtensions());

struct ScopeRule {
    enum class Mode { HostOnly, PrefixOnly };
    Mode mode = Mode::HostOnly;
    Url root;

    /// PrefixOnly requires the root path to end in "/"; throws ConfigError otherwise.
    static ScopeRule host_only(const Url& root);
    static ScopeRule prefix_only(const Url& root);
};

bool in_scope(const Url& url, const ScopeRule& rule);

/// One extracted reference, with the byte range of the raw attribute value in
/// the source document so link rewriting can splice replacements in place.
struct LinkRef {
    Url url;
    std::size_t value_begin = 0;  // offset of the attribute value in the html bytes
    std::size_t value_end = 0;    // one past the last byte of the value
};

/// All reference-carrying attribute values in document order, resolved against
/// base (honoring the first <base href>), duplicates and fragments NOT yet
/// removed. Building block for extract_links and the link relativizer.
std::vector<LinkRef> scan_links(std::string_view html, const Url& base);

/// Absolute canonical http(s) URLs referenced by the document: a/href,
/// img/src, link/href, embed/src, script/src, frame/src, iframe/src,
/// area/href, object/data, input[type=image]/src, body/background.
/// Duplicates removed keeping first-seen order; fragments stripped.
std::vector<Url> extract_links(std::string_view html, const Url& base);

/// Best-effort MIME from a URL/path extension; empty when unknown.
std::string mime_from_extension(std::string_view ext);

bool is_html_mime(std::string_view mime);
bool is_image_mime(std::string_view mime);
bool is_textual_mime(std::string_view mime);

}  // namespace webrecon
