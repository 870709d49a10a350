#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "webrecon/repo.hpp"

namespace webrecon {

/// Adapter for an archive exposing a CDX-style lookup API:
///
///   GET <base>/cdx?url=<percent-encoded target URL>
///     -> JSON array, newest or oldest first, of
///        {"timestamp": "YYYYMMDDhhmmss", "url": <original>, "archive_url": <copy>}
///   GET <archive_url>            (resolved against <base> when relative)
///     -> the archived bytes; Content-Type is the resource MIME.
///
/// Each HTTP request counts as one query. Captures are tried newest first;
/// a capture answering with a non-200 status costs its request and the next
/// older capture is tried, so retrieving content that needs a retry spends
/// more than the 2-query minimum. Connection errors raise TransportError,
/// which is retryable and distinct from a NotFound answer.
class CdxArchiveRepository : public Repository {
public:
    /// base_url like "http://archive.example:8090"; descriptor defaults to the
    /// archive profile with the given id.
    CdxArchiveRepository(std::string base_url, RepositoryDescriptor descriptor = archive_profile());
    ~CdxArchiveRepository() override;

    const RepositoryDescriptor& descriptor() const override { return descriptor_; }
    RepoResult query_nonimage(const Url& url) const override;
    RepoResult query_image(const Url& url) const override;

private:
    RepoResult lookup(const Url& url) const;

    std::string base_url_;
    RepositoryDescriptor descriptor_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
    mutable std::mutex mutex_;  // serializes connection reuse
};

}  // namespace webrecon
