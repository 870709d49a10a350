#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace webrecon {

/// Parsed absolute http(s) URL. Instances produced by Url::parse are already
/// canonical: lowercased scheme and host, default port dropped, dot-segments
/// resolved, empty path replaced by "/", percent escapes upper-cased, fragment
/// removed. The query string is preserved verbatim.
class Url {
public:
    static std::optional<Url> parse(std::string_view raw);

    const std::string& scheme() const { return scheme_; }
    const std::string& host() const { return host_; }
    int port() const { return port_; }  // -1 when the default for the scheme
    const std::string& path() const { return path_; }
    const std::string& query() const { return query_; }  // without '?'; empty = none
    bool has_query() const { return has_query_; }

    std::string str() const;

    // Last path segment, e.g. "a.html" for http://s/d/a.html, "" for http://s/d/.
    std::string filename() const;
    // Lowercased extension of the last path segment without the dot; "" if none.
    std::string extension() const;

    // RFC 3986 relative reference resolution; returns nothing when the result
    // is not an http(s) URL or reference is unusable.
    std::optional<Url> resolve(std::string_view reference) const;

    bool operator==(const Url& o) const { return str() == o.str(); }
    bool operator<(const Url& o) const { return str() < o.str(); }

private:
    std::string scheme_;
    std::string host_;
    int port_ = -1;
    std::string path_ = "/";
    std::string query_;
    bool has_query_ = false;
};

/// Canonical string form of a URL, or nothing if it does not parse.
std::optional<std::string> canonicalize(std::string_view raw);

/// Dot-segment removal per RFC 3986 5.2.4, exposed for reuse by tests.
std::string remove_dot_segments(std::string_view path);

}  // namespace webrecon
