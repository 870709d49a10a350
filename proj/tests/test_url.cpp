#include <doctest.h>

#include <random>

#include "webrecon/url.hpp"

using namespace webrecon;

TEST_CASE("canonicalize normalizes scheme, host, port and dot segments") {
    CHECK(canonicalize("HTTP://S:80/a/../b") == "http://s/b");
    CHECK(canonicalize("http://s") == "http://s/");
    CHECK(canonicalize("https://Example.COM:443/x") == "https://example.com/x");
    CHECK(canonicalize("http://h:8080/p") == "http://h:8080/p");
    CHECK(canonicalize("http://s/a/./b/../c") == "http://s/a/c");
    CHECK(canonicalize("http://s/%3f") == "http://s/%3F");
    CHECK(canonicalize("http://s/a#frag") == "http://s/a");
    CHECK(canonicalize("http://s/p?A=b&C=d") == "http://s/p?A=b&C=d");  // query verbatim
}

TEST_CASE("canonicalize rejects invalid input") {
    CHECK_FALSE(canonicalize("not a url").has_value());
    CHECK_FALSE(canonicalize("ftp://host/file").has_value());
    CHECK_FALSE(canonicalize("http://").has_value());
    CHECK_FALSE(canonicalize("http://host:99999/").has_value());
    CHECK_FALSE(canonicalize("mailto:x@y").has_value());
    CHECK_FALSE(canonicalize("javascript:alert(1)").has_value());
}

namespace {

std::string random_url(std::mt19937_64& rng) {
    static const char* hosts[] = {"example.com", "S.Example.ORG", "h", "a-b.c_d.net"};
    static const char* segs[] = {"a", "B", "x.html", "..", ".", "img%2f1", "p q", "%3f", "dir"};
    std::uniform_int_distribution<int> h(0, 3), s(0, 8), n(0, 4), coin(0, 1);
    std::string u = coin(rng) ? "HTTP://" : "http://";
    u += hosts[h(rng)];
    if (coin(rng)) u += coin(rng) ? ":80" : ":8080";
    int parts = n(rng);
    for (int i = 0; i < parts; ++i) u += std::string("/") + segs[s(rng)];
    if (coin(rng)) u += "/";
    if (coin(rng)) u += "?k=v%2f2";
    if (coin(rng)) u += "#frag";
    return u;
}

}  // namespace

TEST_CASE("canonicalize is idempotent over generated URLs") {
    std::mt19937_64 rng(42);
    int valid = 0;
    for (int i = 0; i < 2000; ++i) {
        std::string raw = random_url(rng);
        auto once = canonicalize(raw);
        if (!once) continue;
        ++valid;
        auto twice = canonicalize(*once);
        REQUIRE(twice.has_value());
        CHECK(*twice == *once);
    }
    CHECK(valid > 1000);  // generator must actually produce parseable URLs
}

TEST_CASE("remove_dot_segments handles the awkward shapes") {
    CHECK(remove_dot_segments("/a/b/c/./../../g") == "/a/g");
    CHECK(remove_dot_segments("/a/..") == "/");
    CHECK(remove_dot_segments("/..") == "/");
    CHECK(remove_dot_segments("/a/.") == "/a/");
    CHECK(remove_dot_segments("/a//b") == "/a//b");
}

TEST_CASE("resolve follows RFC 3986 for the golden reference table") {
    Url base = *Url::parse("http://h/b/c/d;p?q");
    auto res = [&](const char* ref) {
        auto u = base.resolve(ref);
        return u ? u->str() : std::string("<none>");
    };
    CHECK(res("g") == "http://h/b/c/g");
    CHECK(res("./g") == "http://h/b/c/g");
    CHECK(res("g/") == "http://h/b/c/g/");
    CHECK(res("/g") == "http://h/g");
    CHECK(res("//other/x") == "http://other/x");
    CHECK(res("?y") == "http://h/b/c/d;p?y");
    CHECK(res("g?y") == "http://h/b/c/g?y");
    CHECK(res("#s") == "<none>");  // fragment-only: same document
    CHECK(res("g#s") == "http://h/b/c/g");
    CHECK(res(";x") == "http://h/b/c/;x");
    CHECK(res("") == "<none>");
    CHECK(res(".") == "http://h/b/c/");
    CHECK(res("./") == "http://h/b/c/");
    CHECK(res("..") == "http://h/b/");
    CHECK(res("../") == "http://h/b/");
    CHECK(res("../g") == "http://h/b/g");
    CHECK(res("../..") == "http://h/");
    CHECK(res("../../") == "http://h/");
    CHECK(res("../../g") == "http://h/g");
    CHECK(res("../../../g") == "http://h/g");  // excess dots clamp at root
    CHECK(res("http://x/y") == "http://x/y");
    CHECK(res("mailto:a@b") == "<none>");
}

TEST_CASE("filename and extension") {
    Url u = *Url::parse("http://s/d/Pic.JPG");
    CHECK(u.filename() == "Pic.JPG");
    CHECK(u.extension() == "jpg");
    CHECK(Url::parse("http://s/d/")->filename() == "");
    CHECK(Url::parse("http://s/noext")->extension() == "");
    CHECK(Url::parse("http://s/tar.")->extension() == "");
}
