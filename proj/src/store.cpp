#include "webrecon/store.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "webrecon/extract.hpp"

namespace webrecon {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool path_char_allowed(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '.' || c == '_' || c == '-' || c == '~';
}

std::string encode_segment(std::string_view seg) {
    static const char hex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(seg.size());
    for (unsigned char c : seg) {
        if (path_char_allowed(static_cast<char>(c))) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

std::vector<std::string> split_path(const std::string& p) {
    std::vector<std::string> segs;
    std::string cur;
    for (size_t i = 1; i < p.size(); ++i) {  // skip leading '/'
        if (p[i] == '/') {
            segs.push_back(cur);
            cur.clear();
        } else {
            cur += p[i];
        }
    }
    segs.push_back(cur);
    return segs;
}

// "-N" suffix inserted before the final extension: abc.html -> abc-2.html.
std::string with_ordinal(const std::string& relpath, int n) {
    auto slash = relpath.rfind('/');
    std::string dir = slash == std::string::npos ? "" : relpath.substr(0, slash + 1);
    std::string name = slash == std::string::npos ? relpath : relpath.substr(slash + 1);
    auto dot = name.rfind('.');
    if (dot == std::string::npos || dot == 0)
        return dir + name + "-" + std::to_string(n);
    return dir + name.substr(0, dot) + "-" + std::to_string(n) + name.substr(dot);
}

std::string dirname_of(const std::string& relpath) {
    auto slash = relpath.rfind('/');
    return slash == std::string::npos ? "" : relpath.substr(0, slash);
}

std::string relative_ref(const std::string& from_file, const std::string& to_file) {
    std::vector<std::string> a, b;
    {
        std::string d = dirname_of(from_file);
        std::string cur;
        for (char c : d) {
            if (c == '/') {
                a.push_back(cur);
                cur.clear();
            } else
                cur += c;
        }
        if (!cur.empty()) a.push_back(cur);
    }
    {
        std::string cur;
        for (char c : to_file) {
            if (c == '/') {
                b.push_back(cur);
                cur.clear();
            } else
                cur += c;
        }
        b.push_back(cur);  // final = filename
    }
    size_t common = 0;
    while (common < a.size() && common + 1 < b.size() && a[common] == b[common]) ++common;
    std::string out;
    for (size_t i = common; i < a.size(); ++i) out += "../";
    for (size_t i = common; i < b.size(); ++i) {
        out += b[i];
        if (i + 1 < b.size()) out += "/";
    }
    return out;
}

}  // namespace

std::string url_to_path(const Url& url) {
    std::string host_dir = url.host();
    if (url.port() >= 0) host_dir += ":" + std::to_string(url.port());

    std::vector<std::string> segs = split_path(url.path());
    std::string last = segs.back();
    segs.pop_back();

    std::string out = encode_segment(host_dir);
    for (const auto& s : segs) {
        out += "/";
        // An empty interior segment ("a//b") still needs a directory name.
        out += s.empty() ? "%2F" : encode_segment(s);
    }

    if (last.empty()) last = "index.html";
    std::string file = encode_segment(last);
    if (url.has_query()) file += encode_segment("?" + url.query());
    out += "/" + file;
    return out;
}

SiteStore::SiteStore(StoreLayout layout) : layout_(std::move(layout)) {
    if (layout_.root.empty()) throw ConfigError("store layout needs a root directory");
    std::error_code ec;
    fs::create_directories(layout_.root, ec);
    if (ec) throw StoreError("cannot create store root " + layout_.root + ": " + ec.message());
}

std::string SiteStore::log_path() const { return (fs::path(layout_.root) / "reconstruction.log").string(); }

std::string SiteStore::pathmap_path() const { return (fs::path(layout_.root) / ".pathmap.json").string(); }

std::string SiteStore::assign_path(const Url& url, bool rename_to_html) {
    const std::string key = url.str();
    if (auto it = path_of_url_.find(key); it != path_of_url_.end()) return it->second;

    std::string base = url_to_path(url);
    if (rename_to_html) base += ".html";

    auto conflicts = [&](const std::string& cand) {
        std::string lc = ascii_lower(cand);
        if (taken_.count(lc)) return true;
        if (is_dir_.count(lc)) return true;  // a directory already uses this name
        // Any ancestor directory of cand that is already a file.
        std::string prefix;
        for (char c : lc) {
            if (c == '/' && taken_.count(prefix)) return true;
            prefix += c;
        }
        return false;
    };

    std::string cand = base;
    for (int n = 1; conflicts(cand); ++n) cand = with_ordinal(base, n);

    path_of_url_[key] = cand;
    std::string lc = ascii_lower(cand);
    taken_[lc] = key;
    std::string prefix;
    for (char c : lc) {
        if (c == '/') is_dir_[prefix] = true;
        prefix += c;
    }
    return cand;
}

std::string SiteStore::save(const SavedResource& res) {
    auto url = Url::parse(res.url);
    if (!url) throw StoreError("save: not an absolute URL: " + res.url);

    const bool rename = layout_.rename_converted_html && res.form == StoredForm::HtmlConverted &&
                        !is_html_mime(mime_from_extension(url->extension()));
    std::string rel = assign_path(*url, rename);
    std::string full = (fs::path(layout_.root) / rel).string();
    write_file(full, res.content);

    if (is_html_mime(res.mime) || res.form == StoredForm::HtmlConverted) {
        html_saved_.emplace_back(url->str(), rel);
    }
    return rel;
}

void SiteStore::append_log(const LogEntry& entry) {
    std::ofstream out(log_path(), std::ios::app | std::ios::binary);
    if (!out) throw StoreError("cannot open log " + log_path());
    out << entry.url << '\t' << entry.mime_or_missing << '\t' << entry.source_repo << '\t'
        << entry.source_date << '\n';
    if (!out) throw StoreError("log append failed: " + log_path());
}

void SiteStore::log_recovered(const SavedResource& res) {
    append_log(LogEntry{res.url, res.mime.empty() ? "application/octet-stream" : res.mime,
                        res.source_repo,
                        res.source_date ? res.source_date->to_iso() : "-"});
}

void SiteStore::log_missing(const std::string& url) {
    append_log(LogEntry{url, "MISSING", "-", "-"});
}

std::size_t SiteStore::relativize_links() {
    std::size_t rewritten = 0;
    for (const auto& [page_url, rel] : html_saved_) {
        auto base = Url::parse(page_url);
        if (!base) continue;
        std::string full = (fs::path(layout_.root) / rel).string();
        std::string content;
        try {
            content = read_file(full);
        } catch (const StoreError& e) {
            std::cerr << "warning: relativize skipped " << rel << ": " << e.what() << "\n";
            continue;
        }

        struct Edit {
            std::size_t begin, end;
            std::string text;
        };
        std::vector<Edit> edits;
        for (const auto& ref : scan_links(content, *base)) {
            auto it = path_of_url_.find(ref.url.str());
            if (it == path_of_url_.end()) continue;  // unstored or out of scope
            std::string want = relative_ref(rel, it->second);
            std::string current = content.substr(ref.value_begin, ref.value_end - ref.value_begin);
            if (current == want) continue;
            edits.push_back(Edit{ref.value_begin, ref.value_end, want});
        }
        if (edits.empty()) continue;
        std::sort(edits.begin(), edits.end(),
                  [](const Edit& x, const Edit& y) { return x.begin > y.begin; });
        for (const auto& e : edits) {
            content.replace(e.begin, e.end - e.begin, e.text);
            ++rewritten;
        }
        write_file(full, content);
    }
    return rewritten;
}

void SiteStore::flush_pathmap() const {
    json entries = json::array();
    for (const auto& [url, path] : path_of_url_) {
        bool html = false;
        for (const auto& [hu, hp] : html_saved_) {
            if (hu == url) {
                html = true;
                break;
            }
        }
        entries.push_back(json{{"url", url}, {"path", path}, {"html", html}});
    }
    write_file(pathmap_path(), json{{"entries", entries}}.dump(2) + "\n");
}

void SiteStore::load_pathmap() {
    std::string text;
    try {
        text = read_file(pathmap_path());
    } catch (const StoreError&) {
        return;  // nothing saved yet
    }
    json j = json::parse(text);
    for (const auto& e : j.value("entries", json::array())) {
        std::string url = e.at("url").get<std::string>();
        std::string path = e.at("path").get<std::string>();
        path_of_url_[url] = path;
        std::string lc = ascii_lower(path);
        taken_[lc] = url;
        std::string prefix;
        for (char c : lc) {
            if (c == '/') is_dir_[prefix] = true;
            prefix += c;
        }
        if (e.value("html", false)) html_saved_.emplace_back(url, path);
    }
}

std::vector<LogEntry> read_log(const std::string& path) {
    std::vector<LogEntry> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        LogEntry e;
        size_t t1 = line.find('\t');
        size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        size_t t3 = t2 == std::string::npos ? std::string::npos : line.find('\t', t2 + 1);
        if (t3 == std::string::npos) continue;
        e.url = line.substr(0, t1);
        e.mime_or_missing = line.substr(t1 + 1, t2 - t1 - 1);
        e.source_repo = line.substr(t2 + 1, t3 - t2 - 1);
        e.source_date = line.substr(t3 + 1);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace webrecon
