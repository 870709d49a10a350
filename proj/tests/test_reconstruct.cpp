#include <doctest.h>

#include <filesystem>

#include "webrecon/reconstruct.hpp"

using namespace webrecon;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

FixtureEntry entry(const std::string& url, const std::string& content, const std::string& mime,
                   StoredForm form = StoredForm::Canonical,
                   std::optional<Date> date = std::nullopt) {
    FixtureEntry e;
    e.url = url;
    e.content = content;
    e.mime = mime;
    e.form = form;
    e.cache_date = date;
    return e;
}

std::shared_ptr<FixtureRepository> repo_of(RepositoryDescriptor d,
                                           std::vector<FixtureEntry> entries) {
    FixtureManifest m;
    m.descriptor = std::move(d);
    m.entries = std::move(entries);
    return std::make_shared<FixtureRepository>(std::move(m));
}

struct Rig {
    std::vector<std::shared_ptr<Repository>> repos;
    std::shared_ptr<BudgetManager> budget;
    std::shared_ptr<SimClock> clock;
    std::unique_ptr<SiteStore> store;
    std::unique_ptr<Reconstructor> engine;

    Rig(std::vector<std::shared_ptr<Repository>> r, RecoveryPolicy policy, const fs::path& out,
        std::int64_t limit = 1000000) {
        repos = std::move(r);
        std::vector<std::string> ids;
        for (const auto& rp : repos) ids.push_back(rp->descriptor().id);
        RespectPolicy rp = RespectPolicy::defaults_for(ids);
        for (auto& [id, p] : rp.per_repo) {
            p.limit = limit;
            p.w_min = p.w_max = 0;
        }
        rp.fallback.w_min = rp.fallback.w_max = 0;
        budget = std::make_shared<BudgetManager>(rp);
        clock = std::make_shared<SimClock>(0);
        store = std::make_unique<SiteStore>(StoreLayout{out.string(), false, false});
        engine = std::make_unique<Reconstructor>(repos, policy, budget, store.get(), clock);
    }
};

RecoveryPolicy host_policy(const std::string& root) {
    RecoveryPolicy p;
    p.scope = ScopeRule::host_only(*Url::parse(root));
    return p;
}

}  // namespace

TEST_CASE("canonical archive copy of a non-HTML resource stops the cache queries") {
    auto archive = repo_of(archive_profile(),
                           {entry("http://w.test/r.pdf", "%PDF canonical", "application/pdf",
                                  StoredForm::Canonical, Date{2005, 5, 1})});
    auto google = repo_of(google_profile(),
                          {entry("http://w.test/r.pdf", "<html>conv</html>", "text/html",
                                 StoredForm::HtmlConverted, Date{2005, 8, 1})});
    auto msn = repo_of(msn_profile(),
                       {entry("http://w.test/r.pdf", "<html>conv2</html>", "text/html",
                              StoredForm::HtmlConverted, Date{2005, 8, 2})});

    auto dir = fresh_dir("webrecon-rc-canonical");
    Rig rig({archive, google, msn}, host_policy("http://w.test/"), dir);
    auto rec = rig.engine->recover_resource(*Url::parse("http://w.test/r.pdf"));

    REQUIRE(rec.has_value());
    CHECK(rec->source_repo == "archive");
    CHECK(rec->content == "%PDF canonical");
    CHECK(rig.budget->total("archive") == 2);
    CHECK(rig.budget->total("google") == 0);
    CHECK(rig.budget->total("msn") == 0);
    fs::remove_all(dir);
}

TEST_CASE("most-recent preference lets a newer conversion beat the canonical copy") {
    auto archive = repo_of(archive_profile(),
                           {entry("http://w.test/r.pdf", "%PDF canonical", "application/pdf",
                                  StoredForm::Canonical, Date{2005, 5, 1})});
    auto msn = repo_of(msn_profile(),
                       {entry("http://w.test/r.pdf", "<html>conv</html>", "text/html",
                              StoredForm::HtmlConverted, Date{2005, 8, 2})});

    auto dir = fresh_dir("webrecon-rc-mostrecent");
    RecoveryPolicy p = host_policy("http://w.test/");
    p.version_preference = VersionPreference::MostRecent;
    Rig rig({archive, msn}, p, dir);
    auto rec = rig.engine->recover_resource(*Url::parse("http://w.test/r.pdf"));

    REQUIRE(rec.has_value());
    CHECK(rec->source_repo == "msn");
    CHECK(rig.budget->total("msn") == 2);  // caches were queried this time
    fs::remove_all(dir);
}

TEST_CASE("dated candidates beat undated ones; the always-dated cache wins by default") {
    // No archive copy; two caches answer without dates, one with.
    auto google = repo_of(google_profile(),
                          {entry("http://w.test/r.doc", "<html>g</html>", "text/html",
                                 StoredForm::HtmlConverted, Date{2005, 8, 20})});  // withheld: not real HTML
    auto yahoo = repo_of(yahoo_profile(),
                         {entry("http://w.test/r.doc", "<html>y</html>", "text/html",
                                StoredForm::HtmlConverted, Date{2005, 8, 21})});  // withheld: never dates
    auto msn = repo_of(msn_profile(),
                       {entry("http://w.test/r.doc", "<html>m</html>", "text/html",
                              StoredForm::HtmlConverted, Date{2005, 7, 1})});
    auto archive = repo_of(archive_profile(), {});

    auto dir = fresh_dir("webrecon-rc-msnwins");
    Rig rig({archive, google, msn, yahoo}, host_policy("http://w.test/"), dir);
    auto rec = rig.engine->recover_resource(*Url::parse("http://w.test/r.doc"));

    REQUIRE(rec.has_value());
    CHECK(rec->source_repo == "msn");  // only candidate that actually shows a date
    fs::remove_all(dir);
}

TEST_CASE("among dated HTML candidates the newest date wins") {
    auto archive = repo_of(archive_profile(), {});
    auto google = repo_of(google_profile(),
                          {entry("http://w.test/p.html", "<html>g</html>", "text/html",
                                 StoredForm::Canonical, Date{2005, 8, 10})});
    auto msn = repo_of(msn_profile(),
                       {entry("http://w.test/p.html", "<html>m</html>", "text/html",
                              StoredForm::Canonical, Date{2005, 8, 12})});
    auto yahoo = repo_of(yahoo_profile(),
                         {entry("http://w.test/p.html", "<html>y</html>", "text/html",
                                StoredForm::Canonical)});

    auto dir = fresh_dir("webrecon-rc-maxdate");
    Rig rig({archive, google, msn, yahoo}, host_policy("http://w.test/"), dir);
    auto rec = rig.engine->recover_resource(*Url::parse("http://w.test/p.html"));

    REQUIRE(rec.has_value());
    CHECK(rec->source_repo == "msn");
    CHECK(rec->content == "<html>m</html>");
    fs::remove_all(dir);
}

TEST_CASE("with no dates anywhere the fallback order ends at the always-dated cache") {
    auto archive = repo_of(archive_profile(), {});
    auto google = repo_of(google_profile(), {entry("http://w.test/x.doc", "<html>g</html>",
                                                   "text/html", StoredForm::HtmlConverted)});
    auto yahoo = repo_of(yahoo_profile(), {entry("http://w.test/x.doc", "<html>y</html>",
                                                 "text/html", StoredForm::HtmlConverted)});
    auto msn = repo_of(msn_profile(), {entry("http://w.test/x.doc", "<html>m</html>",
                                             "text/html", StoredForm::HtmlConverted)});

    auto dir = fresh_dir("webrecon-rc-fallback");
    Rig rig({archive, google, msn, yahoo}, host_policy("http://w.test/"), dir);
    auto rec = rig.engine->recover_resource(*Url::parse("http://w.test/x.doc"));
    REQUIRE(rec.has_value());
    CHECK(rec->source_repo == "msn");
    fs::remove_all(dir);
}

TEST_CASE("image lookups walk archive first, then image caches one at a time") {
    auto archive = repo_of(archive_profile(), {});
    auto google = repo_of(google_profile(),
                          {entry("http://w.test/i.png", "THUMB-g", "image/png",
                                 StoredForm::Thumbnail)});
    auto yahoo = repo_of(yahoo_profile(),
                         {entry("http://w.test/i.png", "THUMB-y", "image/png",
                                StoredForm::Thumbnail)});
    auto msn = repo_of(msn_profile(), {});

    auto dir = fresh_dir("webrecon-rc-image");
    Rig rig({archive, google, msn, yahoo}, host_policy("http://w.test/"), dir);
    auto rec = rig.engine->recover_resource(*Url::parse("http://w.test/i.png"));

    REQUIRE(rec.has_value());
    CHECK(rec->source_repo == "google");  // first image-capable cache with a copy
    CHECK(rig.budget->total("archive") == 2);
    CHECK(rig.budget->total("google") == 2);
    CHECK(rig.budget->total("yahoo") == 0);  // never reached
    CHECK(rig.budget->total("msn") == 0);    // cannot serve images at all
    fs::remove_all(dir);
}

namespace {

// Original site: A(index) -> B, C, E; B -> D; C -> F. Repositories hold
// A, E, G byte-identically, an older B' that references G instead of D, an
// older C' that still references the unrecoverable F.
struct StoryFixture {
    std::string host = "http://w.test/";
    std::string a_orig =
        "<html><body><a href=\"b.html\">b</a><a href=\"c.html\">c</a>"
        "<img src=\"e.gif\"></body></html>";
    std::string b_orig = "<html><body>current B <a href=\"d.pdf\">d</a></body></html>";
    std::string b_old = "<html><body>older B <img src=\"g.gif\"></body></html>";
    std::string c_orig = "<html><body>current C <img src=\"f.png\"></body></html>";
    std::string c_old = "<html><body>older C <img src=\"f.png\"></body></html>";

    std::shared_ptr<Repository> archive() const {
        return repo_of(archive_profile(),
                       {entry(host, a_orig, "text/html", StoredForm::Canonical, Date{2005, 8, 1}),
                        entry(host + "e.gif", "EBYTES", "image/gif"),
                        entry(host + "g.gif", "GBYTES", "image/gif")});
    }
    std::shared_ptr<Repository> google() const {
        return repo_of(google_profile(),
                       {entry(host + "b.html", b_old, "text/html", StoredForm::Canonical,
                              Date{2005, 7, 1}),
                        entry(host + "c.html", c_old, "text/html", StoredForm::Canonical,
                              Date{2005, 7, 2})});
    }
};

}  // namespace

TEST_CASE("story fixture reconstructs to the expected recovered and missing sets") {
    StoryFixture fx;
    auto dir = fresh_dir("webrecon-rc-story");
    Rig rig({fx.archive(), fx.google()}, host_policy(fx.host), dir);
    auto result = rig.engine->reconstruct(*Url::parse(fx.host));

    CHECK(result.outcome == RunOutcome::Complete);
    REQUIRE(result.recovered.size() == 5);
    CHECK(result.recovered.count("http://w.test/index.html") == 0);  // keyed by start URL form
    CHECK(result.recovered.count("http://w.test/") == 1);
    CHECK(result.recovered.count("http://w.test/b.html") == 1);
    CHECK(result.recovered.count("http://w.test/c.html") == 1);
    CHECK(result.recovered.count("http://w.test/e.gif") == 1);
    CHECK(result.recovered.count("http://w.test/g.gif") == 1);
    CHECK(result.missing == std::set<std::string>{"http://w.test/f.png"});

    CHECK(result.recovered.at("http://w.test/b.html").content == fx.b_old);

    // Provenance: the claimed source actually held each URL.
    CHECK(result.recovered.at("http://w.test/").source_repo == "archive");
    CHECK(result.recovered.at("http://w.test/b.html").source_repo == "google");
    CHECK(result.recovered.at("http://w.test/g.gif").source_repo == "archive");

    // Every non-root processed URL is the target of at least one edge.
    std::set<std::string> targets;
    for (const auto& [from, to] : result.discovery_edges) targets.insert(to);
    for (const auto& [url, r] : result.recovered)
        if (url != fx.host) CHECK(targets.count(url) == 1);
    for (const auto& url : result.missing) CHECK(targets.count(url) == 1);
    fs::remove_all(dir);
}

TEST_CASE("'/' and '/index.html' stay distinct URLs") {
    auto archive = repo_of(archive_profile(),
                           {entry("http://w.test/index.html", "<html>x</html>", "text/html")});
    auto dir = fresh_dir("webrecon-rc-story2");
    Rig rig({archive}, host_policy("http://w.test/"), dir);
    CHECK_FALSE(rig.engine->recover_resource(*Url::parse("http://w.test/")).has_value());
    CHECK(rig.engine->recover_resource(*Url::parse("http://w.test/index.html")).has_value());
    fs::remove_all(dir);
}

TEST_CASE("empty repositories leave only the start URL, missing") {
    auto archive = repo_of(archive_profile(), {});
    auto dir = fresh_dir("webrecon-rc-empty");
    Rig rig({archive}, host_policy("http://w.test/"), dir);
    auto result = rig.engine->reconstruct(*Url::parse("http://w.test/"));
    CHECK(result.recovered.empty());
    CHECK(result.missing == std::set<std::string>{"http://w.test/"});
    fs::remove_all(dir);
}

TEST_CASE("complete holdings recover the full closure with nothing missing") {
    std::string host = "http://w.test/";
    std::vector<FixtureEntry> entries{
        entry(host, "<html><a href=\"p1.html\">1</a><a href=\"p2.html\">2</a></html>",
              "text/html"),
        entry(host + "p1.html", "<html><img src=\"i.gif\"></html>", "text/html"),
        entry(host + "p2.html", "<html>leaf</html>", "text/html"),
        entry(host + "i.gif", "GIFDATA", "image/gif"),
    };
    auto archive = repo_of(archive_profile(), entries);
    auto dir = fresh_dir("webrecon-rc-complete");
    Rig rig({archive}, host_policy(host), dir);
    auto result = rig.engine->reconstruct(*Url::parse(host));
    CHECK(result.recovered.size() == 4);
    CHECK(result.missing.empty());
    fs::remove_all(dir);
}

TEST_CASE("max_resources truncates the crawl") {
    std::string host = "http://w.test/";
    std::string root = "<html>";
    std::vector<FixtureEntry> entries;
    for (int i = 0; i < 10; ++i) {
        std::string name = "p" + std::to_string(i) + ".html";
        root += "<a href=\"" + name + "\">x</a>";
        entries.push_back(entry(host + name, "<html>leaf</html>", "text/html"));
    }
    entries.push_back(entry(host, root + "</html>", "text/html"));

    auto dir = fresh_dir("webrecon-rc-max");
    RecoveryPolicy policy = host_policy(host);
    policy.max_resources = 4;
    Rig rig({repo_of(archive_profile(), entries)}, policy, dir);
    auto result = rig.engine->reconstruct(*Url::parse(host));
    CHECK(result.recovered.size() + result.missing.size() == 4);
    fs::remove_all(dir);
}

TEST_CASE("type filters keep disallowed classes out of the frontier") {
    std::string host = "http://w.test/";
    std::vector<FixtureEntry> entries{
        entry(host, "<html><a href=\"p.html\">p</a><img src=\"i.gif\"><a href=\"d.pdf\">d</a></html>",
              "text/html"),
        entry(host + "p.html", "<html>page</html>", "text/html"),
        entry(host + "i.gif", "GIF", "image/gif"),
        entry(host + "d.pdf", "%PDF", "application/pdf"),
    };
    auto dir = fresh_dir("webrecon-rc-types");
    RecoveryPolicy policy = host_policy(host);
    policy.allow_images = false;
    policy.allow_other = false;
    Rig rig({repo_of(archive_profile(), entries)}, policy, dir);
    auto result = rig.engine->reconstruct(*Url::parse(host));
    CHECK(result.recovered.size() == 2);  // root + p.html
    CHECK(result.recovered.count(host + "i.gif") == 0);
    CHECK(result.missing.empty());
    fs::remove_all(dir);
}

namespace {

std::vector<FixtureEntry> chain_site(const std::string& host, int pages) {
    std::vector<FixtureEntry> entries;
    std::string root = "<html>";
    for (int i = 1; i <= pages; ++i) {
        std::string name = "p" + std::to_string(i) + ".html";
        root += "<a href=\"" + name + "\">" + name + "</a>";
        entries.push_back(entry(host + name, "<html>page " + std::to_string(i) + "</html>",
                                "text/html", StoredForm::Canonical, Date{2005, 8, 1}));
    }
    entries.push_back(entry(host, root + "</html>", "text/html", StoredForm::Canonical,
                            Date{2005, 8, 1}));
    return entries;
}

}  // namespace

TEST_CASE("suspension and resume reproduce the uninterrupted run exactly") {
    const std::string host = "http://big.test/";
    auto entries = chain_site(host, 29);  // 30 URLs altogether

    // Uninterrupted baseline: generous budget, virtual clock sleeps through.
    auto base_dir = fresh_dir("webrecon-rc-base");
    Rig base({repo_of(google_profile(), entries)}, host_policy(host), base_dir, 5);
    auto expected = base.engine->reconstruct(*Url::parse(host));
    CHECK(expected.outcome == RunOutcome::Complete);
    CHECK(expected.recovered.size() == 30);

    // Suspending variant: same budget, but pause -> checkpoint -> new engine.
    auto sus_dir = fresh_dir("webrecon-rc-sus");
    std::string ckpt = (sus_dir / "checkpoint.json").string();

    int resumes = 0;
    ReconstructionResult result;
    {
        Rig rig({repo_of(google_profile(), entries)}, host_policy(host), sus_dir / "site", 5);
        rig.engine->set_checkpoint_path(ckpt);
        result = rig.engine->reconstruct(*Url::parse(host));
    }
    while (result.outcome == RunOutcome::Suspended) {
        ++resumes;
        REQUIRE(resumes < 20);
        Rig rig({repo_of(google_profile(), entries)}, host_policy(host), sus_dir / "site", 5);
        rig.engine->set_checkpoint_path(ckpt);
        result = rig.engine->resume(ckpt);
    }

    CHECK(resumes >= 1);
    CHECK(result.outcome == RunOutcome::Complete);
    CHECK(result.to_json() == expected.to_json());

    // Store artifacts agree too (the baseline wrote into base_dir directly).
    CHECK(read_file((base_dir / "reconstruction.log").string()) ==
          read_file((sus_dir / "site" / "reconstruction.log").string()));
    fs::remove_all(base_dir);
    fs::remove_all(sus_dir);
}

TEST_CASE("a suspended run leaves the in-window ledger exactly at the limit") {
    const std::string host = "http://big.test/";
    auto entries = chain_site(host, 19);  // 20 URLs
    auto dir = fresh_dir("webrecon-rc-window");
    Rig rig({repo_of(google_profile(), entries)}, host_policy(host), dir, 5);
    rig.engine->set_checkpoint_path((dir / "ck.json").string());
    auto result = rig.engine->reconstruct(*Url::parse(host));
    CHECK(result.outcome == RunOutcome::Suspended);
    CHECK(rig.budget->in_window_count("google", rig.clock->now()) == 5);
    CHECK(rig.budget->window_counts_respected());
    fs::remove_all(dir);
}

TEST_CASE("resume validates its inputs") {
    auto dir = fresh_dir("webrecon-rc-resumeerr");
    auto entries = chain_site("http://big.test/", 3);
    Rig rig({repo_of(google_profile(), entries)}, host_policy("http://big.test/"), dir);
    CHECK_THROWS_AS(rig.engine->resume((dir / "absent.json").string()), std::exception);

    // Checkpoint from a different policy must be refused.
    Rig writer({repo_of(google_profile(), entries)}, host_policy("http://big.test/"),
               dir / "w", 2);
    writer.engine->set_checkpoint_path((dir / "ck.json").string());
    auto r = writer.engine->reconstruct(*Url::parse("http://big.test/"));
    REQUIRE(r.outcome == RunOutcome::Suspended);

    RecoveryPolicy other = host_policy("http://big.test/");
    other.version_preference = VersionPreference::MostRecent;
    Rig reader({repo_of(google_profile(), entries)}, other, dir / "w", 2);
    reader.engine->set_checkpoint_path((dir / "ck.json").string());
    CHECK_THROWS_AS(reader.engine->resume((dir / "ck.json").string()), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("no URL is queried against the same repository twice") {
    // Pages link to each other and back to the root; per-repo totals must
    // still be one lookup per URL.
    std::string host = "http://w.test/";
    std::vector<FixtureEntry> entries{
        entry(host, "<html><a href=\"a.html\">a</a></html>", "text/html"),
        entry(host + "a.html",
              "<html><a href=\"/\">root</a><a href=\"b.html\">b</a></html>", "text/html"),
        entry(host + "b.html", "<html><a href=\"a.html\">back</a></html>", "text/html"),
    };
    auto dir = fresh_dir("webrecon-rc-singlevisit");
    Rig rig({repo_of(google_profile(), entries)}, host_policy(host), dir);
    auto result = rig.engine->reconstruct(*Url::parse(host));
    CHECK(result.recovered.size() == 3);
    CHECK(rig.budget->total("google") == 3);  // cost 1 per URL, three URLs
    fs::remove_all(dir);
}
