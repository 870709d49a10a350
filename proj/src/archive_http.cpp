#include "webrecon/archive_http.hpp"

#include <algorithm>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "webrecon/extract.hpp"

namespace webrecon {

using nlohmann::json;

struct CdxArchiveRepository::Impl {
    httplib::Client client;
    explicit Impl(const std::string& base) : client(base) {
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(30, 0);
    }
};

namespace {

std::string percent_encode(const std::string& s) {
    static const char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

std::optional<Date> date_from_cdx_timestamp(const std::string& ts) {
    if (ts.size() < 8) return std::nullopt;
    return Date::from_iso(ts.substr(0, 4) + "-" + ts.substr(4, 2) + "-" + ts.substr(6, 2));
}

struct Capture {
    std::string timestamp;
    std::string archive_url;
};

}  // namespace

CdxArchiveRepository::CdxArchiveRepository(std::string base_url, RepositoryDescriptor descriptor)
    : base_url_(std::move(base_url)), descriptor_(std::move(descriptor)) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    descriptor_.validate();
    impl_ = std::make_unique<Impl>(base_url_);
}

CdxArchiveRepository::~CdxArchiveRepository() = default;

RepoResult CdxArchiveRepository::lookup(const Url& url) const {
    std::lock_guard<std::mutex> lock(mutex_);
    int spent = 0;

    auto index_res = impl_->client.Get("/cdx?url=" + percent_encode(url.str()));
    ++spent;
    if (!index_res)
        throw TransportError("archive " + descriptor_.id + ": index request failed for " +
                             url.str());
    if (index_res->status == 404) return RepoResult{std::nullopt, spent};
    if (index_res->status != 200)
        throw TransportError("archive " + descriptor_.id + ": index returned status " +
                             std::to_string(index_res->status));

    std::vector<Capture> captures;
    try {
        json j = json::parse(index_res->body);
        for (const auto& row : j) {
            Capture c;
            c.timestamp = row.value("timestamp", std::string());
            c.archive_url = row.value("archive_url", std::string());
            if (!c.archive_url.empty()) captures.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw TransportError(std::string("archive index response unparseable: ") + e.what());
    }
    // Most recent capture first; older versions are retried when the newest
    // turns out not to be retrievable.
    std::stable_sort(captures.begin(), captures.end(),
                     [](const Capture& a, const Capture& b) { return a.timestamp > b.timestamp; });

    for (const auto& cap : captures) {
        std::string path = cap.archive_url;
        if (path.rfind("http://", 0) == 0 || path.rfind("https://", 0) == 0) {
            auto u = Url::parse(path);
            if (!u) continue;
            path = u->path() + (u->has_query() ? "?" + u->query() : "");
        }
        if (path.empty() || path[0] != '/') path = "/" + path;
        auto res = impl_->client.Get(path);
        ++spent;
        if (!res)
            throw TransportError("archive " + descriptor_.id + ": fetch failed for " + path);
        if (res->status != 200) continue;  // not retrievable; try an older capture

        StoredResource out;
        out.url = url.str();
        out.content = res->body;
        out.mime = res->get_header_value("Content-Type");
        if (out.mime.empty()) out.mime = mime_from_extension(url.extension());
        auto semi = out.mime.find(';');
        if (semi != std::string::npos) out.mime = out.mime.substr(0, semi);
        out.form = is_image_mime(out.mime) && !descriptor_.is_canonical_store
                       ? StoredForm::Thumbnail
                       : StoredForm::Canonical;
        out.cache_date = date_from_cdx_timestamp(cap.timestamp);
        return RepoResult{std::move(out), spent};
    }
    return RepoResult{std::nullopt, spent};
}

RepoResult CdxArchiveRepository::query_nonimage(const Url& url) const { return lookup(url); }

RepoResult CdxArchiveRepository::query_image(const Url& url) const {
    if (!descriptor_.supports_image_query)
        throw std::logic_error("repository " + descriptor_.id + " does not support image queries");
    return lookup(url);
}

}  // namespace webrecon
