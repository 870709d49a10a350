#include "webrecon/url.hpp"

#include <cctype>

#include "webrecon/common.hpp"

namespace webrecon {

namespace {

bool is_hex(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

// Uppercase the hex digits of every valid %XX escape; encode raw spaces and
// control bytes so downstream consumers never see them.
std::string normalize_escapes(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '%' && i + 2 < s.size() && is_hex(s[i + 1]) && is_hex(s[i + 2])) {
            out += '%';
            out += static_cast<char>(std::toupper(static_cast<unsigned char>(s[i + 1])));
            out += static_cast<char>(std::toupper(static_cast<unsigned char>(s[i + 2])));
            i += 2;
        } else if (c == ' ') {
            out += "%20";
        } else if (static_cast<unsigned char>(c) < 0x20 || c == 0x7F) {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", static_cast<unsigned char>(c));
            out += buf;
        } else {
            out += c;
        }
    }
    return out;
}

bool valid_host(std::string_view h) {
    if (h.empty()) return false;
    for (char c : h) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_')) return false;
    }
    return true;
}

int default_port(std::string_view scheme) { return scheme == "https" ? 443 : 80; }

struct RawParts {
    std::string scheme, host, path, query;
    int port = -1;
    bool has_query = false;
};

// Split an absolute URL into parts; no normalization beyond fragment removal.
std::optional<RawParts> split_absolute(std::string_view raw) {
    auto frag = raw.find('#');
    if (frag != std::string_view::npos) raw = raw.substr(0, frag);

    auto colon = raw.find("://");
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    RawParts p;
    p.scheme = ascii_lower(raw.substr(0, colon));
    if (p.scheme != "http" && p.scheme != "https") return std::nullopt;

    std::string_view rest = raw.substr(colon + 3);
    size_t path_start = rest.find_first_of("/?");
    std::string_view authority = path_start == std::string_view::npos ? rest : rest.substr(0, path_start);
    std::string_view tail = path_start == std::string_view::npos ? std::string_view{} : rest.substr(path_start);

    // userinfo is out of scope for reconstruction targets; reject rather than guess
    if (authority.find('@') != std::string_view::npos) return std::nullopt;

    auto port_sep = authority.rfind(':');
    if (port_sep != std::string_view::npos) {
        std::string_view port_str = authority.substr(port_sep + 1);
        if (port_str.empty()) return std::nullopt;
        int port = 0;
        for (char c : port_str) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
            port = port * 10 + (c - '0');
            if (port > 65535) return std::nullopt;
        }
        p.port = port;
        authority = authority.substr(0, port_sep);
    }
    p.host = ascii_lower(authority);
    if (!valid_host(p.host)) return std::nullopt;

    if (!tail.empty() && tail[0] == '?') {
        p.path = "/";
        p.has_query = true;
        p.query = std::string(tail.substr(1));
    } else {
        auto q = tail.find('?');
        if (q == std::string_view::npos) {
            p.path = std::string(tail);
        } else {
            p.path = std::string(tail.substr(0, q));
            p.has_query = true;
            p.query = std::string(tail.substr(q + 1));
        }
    }
    if (p.path.empty()) p.path = "/";
    return p;
}

}  // namespace

std::string remove_dot_segments(std::string_view path) {
    std::string input(path);
    std::string output;
    while (!input.empty()) {
        if (input.rfind("../", 0) == 0) {
            input.erase(0, 3);
        } else if (input.rfind("./", 0) == 0) {
            input.erase(0, 2);
        } else if (input.rfind("/./", 0) == 0) {
            input.erase(0, 2);  // leave leading '/'
        } else if (input == "/.") {
            input = "/";
        } else if (input.rfind("/../", 0) == 0 || input == "/..") {
            if (input == "/..")
                input = "/";
            else
                input.erase(0, 3);
            auto last = output.rfind('/');
            output.erase(last == std::string::npos ? 0 : last);
        } else if (input == "." || input == "..") {
            input.clear();
        } else {
            size_t next = input.find('/', 1);
            if (next == std::string::npos) {
                output += input;
                input.clear();
            } else {
                output += input.substr(0, next);
                input.erase(0, next);
            }
        }
    }
    return output;
}

std::optional<Url> Url::parse(std::string_view raw) {
    // Trim surrounding ASCII whitespace first; markup sources are messy.
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);

    auto parts = split_absolute(raw);
    if (!parts) return std::nullopt;

    Url u;
    u.scheme_ = parts->scheme;
    u.host_ = parts->host;
    u.port_ = (parts->port == default_port(parts->scheme)) ? -1 : parts->port;
    u.path_ = normalize_escapes(remove_dot_segments(parts->path));
    if (u.path_.empty()) u.path_ = "/";
    u.has_query_ = parts->has_query;
    u.query_ = parts->query;
    return u;
}

std::string Url::str() const {
    std::string s = scheme_ + "://" + host_;
    if (port_ >= 0) s += ":" + std::to_string(port_);
    s += path_;
    if (has_query_) s += "?" + query_;
    return s;
}

std::string Url::filename() const {
    auto pos = path_.rfind('/');
    return pos == std::string::npos ? path_ : path_.substr(pos + 1);
}

std::string Url::extension() const {
    std::string name = filename();
    auto dot = name.rfind('.');
    if (dot == std::string::npos || dot + 1 == name.size()) return "";
    return ascii_lower(std::string_view(name).substr(dot + 1));
}

std::optional<Url> Url::resolve(std::string_view reference) const {
    while (!reference.empty() && std::isspace(static_cast<unsigned char>(reference.front()))) reference.remove_prefix(1);
    while (!reference.empty() && std::isspace(static_cast<unsigned char>(reference.back()))) reference.remove_suffix(1);
    if (reference.empty()) return std::nullopt;

    // Fragment-only references point inside the same document: nothing new.
    if (reference[0] == '#') return std::nullopt;

    // Absolute URL (any scheme): parse handles scheme filtering.
    auto scheme_end = reference.find(':');
    if (scheme_end != std::string_view::npos && scheme_end > 0) {
        bool scheme_like = std::isalpha(static_cast<unsigned char>(reference[0]));
        for (size_t i = 0; scheme_like && i < scheme_end; ++i) {
            char c = reference[i];
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.'))
                scheme_like = false;
        }
        if (scheme_like) return Url::parse(reference);
    }

    auto frag = reference.find('#');
    if (frag != std::string_view::npos) reference = reference.substr(0, frag);
    if (reference.empty()) return std::nullopt;

    if (reference.rfind("//", 0) == 0) {
        // Network-path reference: adopt the base scheme.
        return Url::parse(scheme_ + ":" + std::string(reference));
    }

    std::string path;
    std::string query;
    bool has_query = false;

    auto q = reference.find('?');
    std::string_view ref_path = q == std::string_view::npos ? reference : reference.substr(0, q);
    if (q != std::string_view::npos) {
        has_query = true;
        query = std::string(reference.substr(q + 1));
    }

    if (ref_path.empty()) {
        path = path_;  // query-only reference
    } else if (ref_path[0] == '/') {
        path = remove_dot_segments(ref_path);
    } else {
        // Merge with base path directory.
        auto slash = path_.rfind('/');
        std::string merged = path_.substr(0, slash + 1);
        merged += ref_path;
        path = remove_dot_segments(merged);
    }

    Url u;
    u.scheme_ = scheme_;
    u.host_ = host_;
    u.port_ = port_;
    u.path_ = normalize_escapes(path);
    if (u.path_.empty()) u.path_ = "/";
    u.has_query_ = has_query;
    u.query_ = query;
    return u;
}

std::optional<std::string> canonicalize(std::string_view raw) {
    auto u = Url::parse(raw);
    if (!u) return std::nullopt;
    return u->str();
}

}  // namespace webrecon
