#include <doctest.h>

#include "webrecon/common.hpp"
#include "webrecon/extract.hpp"

using namespace webrecon;

namespace {

std::vector<std::string> links(const std::string& html, const std::string& base) {
    std::vector<std::string> out;
    for (const auto& u : extract_links(html, *Url::parse(base))) out.push_back(u.str());
    return out;
}

}  // namespace

TEST_CASE("classify_url keys off the extension, case-insensitively") {
    CHECK(classify_url(*Url::parse("http://s/pics/x.JPG")) == ResourceClass::Image);
    CHECK(classify_url(*Url::parse("http://s/doc.pdf")) == ResourceClass::Other);
    CHECK(classify_url(*Url::parse("http://s/page")) == ResourceClass::Other);
    CHECK(classify_url(*Url::parse("http://s/a.png")) == ResourceClass::Image);
    CHECK(classify_url(*Url::parse("http://s/a.tiff")) == ResourceClass::Image);
    CHECK(classify_url(*Url::parse("http://s/a.html")) == ResourceClass::Other);

    ImageExtensions custom({"webp"});
    CHECK(classify_url(*Url::parse("http://s/a.webp"), custom) == ResourceClass::Image);
    CHECK(classify_url(*Url::parse("http://s/a.png"), custom) == ResourceClass::Other);
    CHECK(ImageExtensions::from_csv("png, .GIF").contains("gif"));
}

TEST_CASE("extract_links resolves relative references against the base") {
    auto out = links("<a href=\"a.html\"><img src=\"b.png\">", "http://s/d/");
    REQUIRE(out.size() == 2);
    CHECK(out[0] == "http://s/d/a.html");
    CHECK(out[1] == "http://s/d/b.png");
}

TEST_CASE("fragment-only links vanish") {
    CHECK(links("<a href=\"#top\">up</a>", "http://s/").empty());
    CHECK(links("<a href=\"p.html#sec\">x</a>", "http://s/") ==
          std::vector<std::string>{"http://s/p.html"});
}

TEST_CASE("duplicates are removed keeping first-seen order") {
    std::string html =
        "<a href='one.html'>1</a>"
        "<img src='two.png'>"
        "<a href='one.html'>again</a>"
        "<a href='three.pdf'>3</a>"
        "<img src='two.png'>";
    auto out = links(html, "http://s/");
    REQUIRE(out.size() == 3);
    CHECK(out[0] == "http://s/one.html");
    CHECK(out[1] == "http://s/two.png");
    CHECK(out[2] == "http://s/three.pdf");
}

TEST_CASE("the whole reference attribute family is scanned") {
    std::string html =
        "<link href=\"style.css\" rel=stylesheet>"
        "<script src=\"app.js\"></script>"
        "<frame src=\"f.html\"><iframe src=\"i.html\"></iframe>"
        "<area href=\"map.html\"><object data=\"o.pdf\"></object>"
        "<embed src=\"e.swf\">"
        "<input type=image src=\"btn.gif\">"
        "<input type=text src=\"never.gif\">"
        "<body background=\"bg.jpg\">";
    auto out = links(html, "http://s/");
    CHECK(out == std::vector<std::string>{
                     "http://s/style.css", "http://s/app.js", "http://s/f.html",
                     "http://s/i.html", "http://s/map.html", "http://s/o.pdf",
                     "http://s/e.swf", "http://s/btn.gif", "http://s/bg.jpg"});
}

TEST_CASE("base href wins, comments and script bodies are skipped") {
    std::string html =
        "<base href=\"http://other.org/dir/\">"
        "<!-- <a href=\"ghost.html\">never</a> -->"
        "<script>var s = '<a href=\"fake.html\">';</script>"
        "<style>.x { background: url(css.png); }</style>"
        "<a href=\"real.html\">r</a>";
    auto out = links(html, "http://s/");
    CHECK(out == std::vector<std::string>{"http://other.org/dir/real.html"});
}

TEST_CASE("entity-encoded ampersands decode before resolution") {
    auto out = links("<a href=\"p?a=1&amp;b=2\">x</a>", "http://s/");
    CHECK(out == std::vector<std::string>{"http://s/p?a=1&b=2"});
}

TEST_CASE("non-http schemes never come back") {
    std::string html =
        "<a href=\"mailto:x@y\">m</a><a href=\"javascript:void(0)\">j</a>"
        "<a href=\"ftp://h/f\">f</a><a href=\"ok.html\">o</a>";
    CHECK(links(html, "http://s/") == std::vector<std::string>{"http://s/ok.html"});
}

TEST_CASE("golden table: relative-only document resolves as hand-computed") {
    const std::string base = "http://foo.edu/abc/sub/";
    struct Row {
        const char* ref;
        const char* expect;
    } rows[] = {
        {"x.html", "http://foo.edu/abc/sub/x.html"},
        {"./y.css", "http://foo.edu/abc/sub/y.css"},
        {"../up.html", "http://foo.edu/abc/up.html"},
        {"../../root.html", "http://foo.edu/root.html"},
        {"../../../clamp.html", "http://foo.edu/clamp.html"},
        {"/abs.html", "http://foo.edu/abs.html"},
        {"dir/", "http://foo.edu/abc/sub/dir/"},
        {"dir/z.png", "http://foo.edu/abc/sub/dir/z.png"},
        {"a/./b.gif", "http://foo.edu/abc/sub/a/b.gif"},
        {"a/../b.gif", "http://foo.edu/abc/sub/b.gif"},
        {"?q=1", "http://foo.edu/abc/sub/?q=1"},
        {"x.html?q=1", "http://foo.edu/abc/sub/x.html?q=1"},
        {"x.html#top", "http://foo.edu/abc/sub/x.html"},
        {"//foo.edu/net.html", "http://foo.edu/net.html"},
        {"UPPER.HTML", "http://foo.edu/abc/sub/UPPER.HTML"},
        {"sp ace.html", "http://foo.edu/abc/sub/sp%20ace.html"},
        {"%7Euser/p.html", "http://foo.edu/abc/sub/%7Euser/p.html"},
        {"x.y.z.html", "http://foo.edu/abc/sub/x.y.z.html"},
        {"trailing/.", "http://foo.edu/abc/sub/trailing/"},
        {".hidden", "http://foo.edu/abc/sub/.hidden"},
    };
    int i = 0;
    for (const auto& row : rows) {
        CAPTURE(i);
        CAPTURE(row.ref);
        std::string html = std::string("<a href=\"") + row.ref + "\">t</a>";
        auto out = links(html, base);
        REQUIRE(out.size() == 1);
        CHECK(out[0] == row.expect);
        ++i;
    }
}

TEST_CASE("in_scope: host and prefix rules") {
    Url root = *Url::parse("http://foo.edu/abc/");
    ScopeRule prefix = ScopeRule::prefix_only(root);
    CHECK(in_scope(*Url::parse("http://foo.edu/abc/x.html"), prefix));
    CHECK(in_scope(*Url::parse("http://foo.edu/abc/deep/y.png"), prefix));
    CHECK_FALSE(in_scope(*Url::parse("http://foo.edu/other/"), prefix));
    CHECK_FALSE(in_scope(*Url::parse("http://bar.edu/abc/x.html"), prefix));

    ScopeRule host = ScopeRule::host_only(root);
    CHECK(in_scope(*Url::parse("http://foo.edu/anything"), host));
    CHECK(in_scope(*Url::parse("http://foo.edu/"), host));
    CHECK_FALSE(in_scope(*Url::parse("http://bar.edu/abc/"), host));

    CHECK_THROWS_AS(ScopeRule::prefix_only(*Url::parse("http://foo.edu/abc")), ConfigError);
}

TEST_CASE("mime helpers") {
    CHECK(mime_from_extension("html") == "text/html");
    CHECK(mime_from_extension("JPG") == "image/jpeg");
    CHECK(mime_from_extension("weird") == "");
    CHECK(is_html_mime("text/html; charset=utf-8"));
    CHECK(is_image_mime("image/png"));
    CHECK_FALSE(is_image_mime("text/html"));
    CHECK(is_textual_mime("text/plain"));
    CHECK_FALSE(is_textual_mime("application/pdf"));
}
