#include "webrecon/extract.hpp"

#include <cctype>
#include <unordered_set>

#include "webrecon/common.hpp"

namespace webrecon {

ImageExtensions::ImageExtensions()
    : exts_{"png", "gif", "jpg", "jpeg", "bmp", "ico", "tif", "tiff"} {}

ImageExtensions::ImageExtensions(const std::vector<std::string>& exts) {
    for (const auto& e : exts) {
        std::string v = ascii_lower(e);
        if (!v.empty() && v[0] == '.') v.erase(0, 1);
        if (!v.empty()) exts_.insert(v);
    }
}

bool ImageExtensions::contains(std::string_view ext) const {
    return exts_.count(ascii_lower(ext)) > 0;
}

ImageExtensions ImageExtensions::from_csv(const std::string& csv) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    parts.push_back(cur);
    return ImageExtensions(parts);
}

ResourceClass classify_url(const Url& url, const ImageExtensions& exts) {
    return exts.contains(url.extension()) ? ResourceClass::Image : ResourceClass::Other;
}

ScopeRule ScopeRule::host_only(const Url& root) { return ScopeRule{Mode::HostOnly, root}; }

ScopeRule ScopeRule::prefix_only(const Url& root) {
    if (root.path().empty() || root.path().back() != '/')
        throw ConfigError("prefix scope root must end in '/': " + root.str());
    return ScopeRule{Mode::PrefixOnly, root};
}

bool in_scope(const Url& url, const ScopeRule& rule) {
    switch (rule.mode) {
        case ScopeRule::Mode::HostOnly:
            return url.host() == rule.root.host();
        case ScopeRule::Mode::PrefixOnly: {
            const std::string u = url.str();
            const std::string r = rule.root.str();
            return u.compare(0, r.size(), r) == 0;
        }
    }
    return false;
}

namespace {

struct Attr {
    std::string name;        // lowercased
    std::string value;       // entity-decoded
    std::size_t value_begin; // raw byte range in source
    std::size_t value_end;
};

struct Tag {
    std::string name;  // lowercased
    std::vector<Attr> attrs;
};

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out += s[i];
            continue;
        }
        size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += s[i];
            continue;
        }
        std::string_view ent = s.substr(i + 1, semi - i - 1);
        if (ent == "amp")
            out += '&';
        else if (ent == "lt")
            out += '<';
        else if (ent == "gt")
            out += '>';
        else if (ent == "quot")
            out += '"';
        else if (ent == "apos")
            out += '\'';
        else if (!ent.empty() && ent[0] == '#') {
            long code = 0;
            bool ok = true;
            if (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')) {
                for (size_t k = 2; k < ent.size() && ok; ++k) {
                    char c = ent[k];
                    if (!std::isxdigit(static_cast<unsigned char>(c))) ok = false;
                    code = code * 16 + (std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                                        : (std::tolower(c) - 'a' + 10));
                }
                ok = ok && ent.size() > 2;
            } else {
                for (size_t k = 1; k < ent.size() && ok; ++k) {
                    if (!std::isdigit(static_cast<unsigned char>(ent[k]))) ok = false;
                    code = code * 10 + (ent[k] - '0');
                }
                ok = ok && ent.size() > 1;
            }
            if (ok && code > 0 && code < 128) {
                out += static_cast<char>(code);
            } else {
                out += s.substr(i, semi - i + 1);
            }
        } else {
            out += s[i];
            continue;
        }
        i = semi;
    }
    return out;
}

// Parse one tag starting at '<'; returns one past '>' (or npos when truncated).
size_t parse_tag(std::string_view html, size_t lt, Tag& tag) {
    size_t i = lt + 1;
    if (i < html.size() && html[i] == '/') ++i;  // closing tag: name still parsed
    size_t name_start = i;
    while (i < html.size() && (std::isalnum(static_cast<unsigned char>(html[i])) || html[i] == '-' || html[i] == '!'))
        ++i;
    tag.name = ascii_lower(html.substr(name_start, i - name_start));
    tag.attrs.clear();

    while (i < html.size() && html[i] != '>') {
        if (std::isspace(static_cast<unsigned char>(html[i])) || html[i] == '/') {
            ++i;
            continue;
        }
        size_t an = i;
        while (i < html.size() && html[i] != '=' && html[i] != '>' && html[i] != '/' &&
               !std::isspace(static_cast<unsigned char>(html[i])))
            ++i;
        std::string aname = ascii_lower(html.substr(an, i - an));
        while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
        if (i < html.size() && html[i] == '=') {
            ++i;
            while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
            size_t vb, ve;
            if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
                char qc = html[i];
                vb = ++i;
                while (i < html.size() && html[i] != qc) ++i;
                ve = i;
                if (i < html.size()) ++i;  // closing quote
            } else {
                vb = i;
                while (i < html.size() && html[i] != '>' && !std::isspace(static_cast<unsigned char>(html[i])))
                    ++i;
                ve = i;
            }
            tag.attrs.push_back(Attr{aname, decode_entities(html.substr(vb, ve - vb)), vb, ve});
        } else if (!aname.empty()) {
            tag.attrs.push_back(Attr{aname, "", an, an});
        }
    }
    return i < html.size() ? i + 1 : std::string_view::npos;
}

const Attr* find_attr(const Tag& tag, std::string_view name) {
    for (const auto& a : tag.attrs)
        if (a.name == name) return &a;
    return nullptr;
}

// tag name -> attribute carrying the reference
const char* ref_attr_for(const std::string& tag) {
    if (tag == "a" || tag == "link" || tag == "area") return "href";
    if (tag == "img" || tag == "embed" || tag == "script" || tag == "frame" || tag == "iframe")
        return "src";
    if (tag == "object") return "data";
    if (tag == "body") return "background";
    return nullptr;
}

}  // namespace

std::vector<LinkRef> scan_links(std::string_view html, const Url& base) {
    // First <base href> wins for the whole document.
    Url effective_base = base;
    std::vector<LinkRef> out;

    struct Pending {
        std::string raw;
        std::size_t begin, end;
    };
    std::vector<Pending> pending;

    size_t i = 0;
    bool base_found = false;
    std::string skip_until_close;  // "script" or "style" while inside one

    while (i < html.size()) {
        size_t lt = html.find('<', i);
        if (lt == std::string_view::npos) break;

        if (html.compare(lt, 4, "<!--") == 0) {
            size_t end = html.find("-->", lt + 4);
            i = end == std::string_view::npos ? html.size() : end + 3;
            continue;
        }

        if (!skip_until_close.empty()) {
            // Only the matching close tag gets us out of raw-text content.
            if (lt + 1 < html.size() && html[lt + 1] == '/' &&
                iequals(html.substr(lt + 2, skip_until_close.size()), skip_until_close)) {
                skip_until_close.clear();
            } else {
                i = lt + 1;
                continue;
            }
        }

        Tag tag;
        size_t next = parse_tag(html, lt, tag);
        if (next == std::string_view::npos) break;
        bool closing = lt + 1 < html.size() && html[lt + 1] == '/';
        i = next;
        if (closing) continue;

        if (tag.name == "script" || tag.name == "style") {
            // src attribute on script still counts; inline content never does.
            if (tag.name == "script") {
                if (const Attr* a = find_attr(tag, "src"); a && !a->value.empty())
                    pending.push_back({a->value, a->value_begin, a->value_end});
            }
            skip_until_close = tag.name;
            continue;
        }

        if (tag.name == "base" && !base_found) {
            if (const Attr* a = find_attr(tag, "href")) {
                if (auto b = base.resolve(a->value)) {
                    effective_base = *b;
                    base_found = true;
                }
            }
            continue;
        }

        if (tag.name == "input") {
            const Attr* type = find_attr(tag, "type");
            if (type && iequals(type->value, "image")) {
                if (const Attr* a = find_attr(tag, "src"); a && !a->value.empty())
                    pending.push_back({a->value, a->value_begin, a->value_end});
            }
            continue;
        }

        if (const char* attr_name = ref_attr_for(tag.name)) {
            if (const Attr* a = find_attr(tag, attr_name); a && !a->value.empty())
                pending.push_back({a->value, a->value_begin, a->value_end});
        }
    }

    for (const auto& p : pending) {
        if (auto u = effective_base.resolve(p.raw)) out.push_back(LinkRef{*u, p.begin, p.end});
    }
    return out;
}

std::vector<Url> extract_links(std::string_view html, const Url& base) {
    std::vector<Url> out;
    std::unordered_set<std::string> seen;
    for (const auto& ref : scan_links(html, base)) {
        std::string key = ref.url.str();
        if (seen.insert(key).second) out.push_back(ref.url);
    }
    return out;
}

std::string mime_from_extension(std::string_view ext) {
    std::string e = ascii_lower(ext);
    if (e == "html" || e == "htm") return "text/html";
    if (e == "txt") return "text/plain";
    if (e == "css") return "text/css";
    if (e == "js") return "application/javascript";
    if (e == "pdf") return "application/pdf";
    if (e == "ps") return "application/postscript";
    if (e == "doc") return "application/msword";
    if (e == "xls") return "application/vnd.ms-excel";
    if (e == "ppt") return "application/vnd.ms-powerpoint";
    if (e == "xml") return "text/xml";
    if (e == "json") return "application/json";
    if (e == "png") return "image/png";
    if (e == "gif") return "image/gif";
    if (e == "jpg" || e == "jpeg") return "image/jpeg";
    if (e == "bmp") return "image/bmp";
    if (e == "ico") return "image/x-icon";
    if (e == "tif" || e == "tiff") return "image/tiff";
    if (e == "svg") return "image/svg+xml";
    return "";
}

bool is_html_mime(std::string_view mime) {
    auto semi = mime.find(';');
    std::string m = ascii_lower(semi == std::string_view::npos ? mime : mime.substr(0, semi));
    while (!m.empty() && m.back() == ' ') m.pop_back();
    return m == "text/html" || m == "application/xhtml+xml";
}

bool is_image_mime(std::string_view mime) {
    return ascii_lower(mime).rfind("image/", 0) == 0;
}

bool is_textual_mime(std::string_view mime) {
    std::string m = ascii_lower(mime);
    return m.rfind("text/", 0) == 0 || is_html_mime(m) || m == "application/javascript" ||
           m == "application/json" || m == "application/xml";
}

}  // namespace webrecon
