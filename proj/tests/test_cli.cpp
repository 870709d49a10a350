#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "webrecon/cli.hpp"
#include "webrecon/repo.hpp"
#include "webrecon/store.hpp"

using namespace webrecon;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string write_small_fixture(const fs::path& dir) {
    FixtureManifest m;
    m.descriptor = archive_profile();
    auto add = [&](const std::string& url, const std::string& content, const std::string& mime) {
        FixtureEntry e;
        e.url = url;
        e.content = content;
        e.mime = mime;
        e.cache_date = Date{2005, 8, 1};
        m.entries.push_back(e);
    };
    add("http://site.test/", "<html><a href=\"p.html\">p</a><img src=\"i.gif\"></html>",
        "text/html");
    add("http://site.test/p.html", "<html>page</html>", "text/html");
    add("http://site.test/i.gif", "GIF", "image/gif");
    std::string path = (dir / "archive.json").string();
    save_manifest(m, path);
    return path;
}

}  // namespace

TEST_CASE("reconstruct: happy path prints totals and exits 0") {
    auto dir = fresh_dir("webrecon-cli-happy");
    std::string fixture = write_small_fixture(dir);
    auto r = run_cli({"reconstruct", "http://site.test/", "--fixture", fixture, "--out",
                      (dir / "site").string(), "--no-delay"});
    CAPTURE(r.err);
    CHECK(r.code == 0);
    CHECK(r.out.find("recovered: 3") != std::string::npos);
    CHECK(r.out.find("missing: 0") != std::string::npos);
    CHECK(r.out.find("queries[archive]:") != std::string::npos);
    CHECK(fs::exists(dir / "site" / "site.test" / "index.html"));
    CHECK(fs::exists(dir / "site" / "reconstruction.log"));
    CHECK(fs::exists(dir / "site" / "result.json"));
    fs::remove_all(dir);
}

TEST_CASE("reconstruct: refusing to run with no repositories") {
    auto r = run_cli({"reconstruct", "http://site.test/"});
    CHECK(r.code == 2);
    CHECK(r.err.find("no repositories") != std::string::npos);
}

TEST_CASE("reconstruct: malformed start URL or unknown flag exit 2") {
    CHECK(run_cli({"reconstruct", "::bad::", "--fixture", "x.json"}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("reconstruct: budget exhaustion suspends with a checkpoint, resume finishes") {
    auto dir = fresh_dir("webrecon-cli-budget");

    FixtureManifest m;
    m.descriptor = google_profile();
    std::string root = "<html>";
    for (int i = 0; i < 9; ++i) {
        std::string name = "p" + std::to_string(i) + ".html";
        root += "<a href=\"" + name + "\">x</a>";
        FixtureEntry e;
        e.url = "http://site.test/" + name;
        e.content = "<html>leaf</html>";
        e.mime = "text/html";
        m.entries.push_back(e);
    }
    FixtureEntry r0;
    r0.url = "http://site.test/";
    r0.content = root + "</html>";
    r0.mime = "text/html";
    m.entries.push_back(r0);
    std::string fixture = (dir / "google.json").string();
    save_manifest(m, fixture);

    std::string ckpt = (dir / "ck.json").string();
    std::vector<std::string> args{"reconstruct",  "http://site.test/", "--fixture", fixture,
                                  "--out",        (dir / "site").string(), "--no-delay",
                                  "--limit",      "google=3",          "--checkpoint", ckpt};
    auto first = run_cli(args);
    CHECK(first.code == 3);
    CHECK(fs::exists(ckpt));
    CHECK(first.out.find("suspended") != std::string::npos);

    int guard = 0;
    CliResult last = first;
    auto resume_args = args;
    resume_args.push_back("--resume");
    while (last.code == 3) {
        REQUIRE(++guard < 10);
        last = run_cli(resume_args);
    }
    CHECK(last.code == 0);
    CHECK(last.out.find("recovered: 10") != std::string::npos);
    CHECK(read_log((dir / "site" / "reconstruction.log").string()).size() == 10);
    fs::remove_all(dir);
}

TEST_CASE("eval: story directories give the known vector and an SVG") {
    auto dir = fresh_dir("webrecon-cli-eval");
    auto orig = dir / "orig";
    auto recon = dir / "recon";
    write_file((orig / "w.test/index.html").string(), "<a href=\"b.html\">b</a>");
    write_file((orig / "w.test/b.html").string(), "B");
    write_file((recon / "w.test/index.html").string(), "<a href=\"b.html\">b</a>");
    write_file((recon / "w.test/b.html").string(), "B-older");

    auto r = run_cli({"eval", "--original", orig.string(), "--recon", recon.string(),
                      "--root-url", "http://w.test/", "--report", (dir / "report.json").string(),
                      "--diagram", (dir / "d.svg").string()});
    CAPTURE(r.err);
    CHECK(r.code == 0);
    CHECK(r.out.find("vector: (0.500, 0.000, 0.000)") != std::string::npos);

    json report = json::parse(read_file((dir / "report.json").string()));
    CHECK(report["vector"]["changed"] == "0.500");
    CHECK(report["counts"]["original"] == 2);
    CHECK(report["graphs"]["original"]["nodes"] == 2);

    std::string svg = read_file((dir / "d.svg").string());
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);

    auto identical = run_cli({"eval", "--original", orig.string(), "--recon", orig.string(),
                              "--report", (dir / "r2.json").string()});
    CHECK(identical.out.find("vector: (0.000, 0.000, 0.000)") != std::string::npos);

    CHECK(run_cli({"eval", "--original", (dir / "nope").string(), "--recon", recon.string()})
              .code == 2);
    fs::remove_all(dir);
}

TEST_CASE("testbed gen reports the closed-form file count") {
    auto dir = fresh_dir("webrecon-cli-gen");
    auto r = run_cli({"testbed", "gen", "--bins", "30", "--terminal", "90", "--image-bin", "2",
                      "--seed", "5", "--out", (dir / "site").string(), "--schedule",
                      (dir / "schedule.json").string()});
    CAPTURE(r.err);
    CHECK(r.code == 0);
    CHECK(r.out.find("files[day 0]: 954") != std::string::npos);
    CHECK(fs::exists(dir / "schedule.json"));
    fs::remove_all(dir);
}

TEST_CASE("testbed simulate writes timeline and metrics") {
    auto dir = fresh_dir("webrecon-cli-sim");
    run_cli({"testbed", "gen", "--bins", "3", "--terminal", "9", "--image-bin", "2", "--seed",
             "5", "--schedule", (dir / "schedule.json").string()});
    write_file((dir / "behavior.json").string(),
               R"({"crawl_interval": 2, "cache_lag": 0, "purge_lag": 0, "availability_prob": 1.0, "seed": 1})");
    auto r = run_cli({"testbed", "simulate", "--schedule", (dir / "schedule.json").string(),
                      "--behavior", (dir / "behavior.json").string(), "--horizon", "20", "--out",
                      (dir / "timeline.json").string(), "--metrics", (dir / "metrics.json").string()});
    CAPTURE(r.err);
    CHECK(r.code == 0);
    json metrics = json::parse(read_file((dir / "metrics.json").string()));
    bool has_ttl = false, has_tur = false;
    for (const auto& e : metrics["resources"]) {
        if (e.contains("ttl_c")) has_ttl = true;
        if (e.contains("tur")) has_tur = true;
    }
    CHECK(has_ttl);
    CHECK(has_tur);
    fs::remove_all(dir);
}

TEST_CASE("end-to-end: gen, simulate, fixture, reconstruct, eval") {
    auto dir = fresh_dir("webrecon-cli-e2e");
    auto sched = (dir / "schedule.json").string();

    auto gen = run_cli({"testbed", "gen", "--bins", "3", "--terminal", "9", "--image-bin", "2",
                        "--seed", "11", "--schedule", sched});
    REQUIRE(gen.code == 0);

    write_file((dir / "behavior.json").string(),
               R"({"crawl_interval": 1, "cache_lag": 0, "purge_lag": 3, "availability_prob": 1.0, "seed": 2})");
    auto sim = run_cli({"testbed", "simulate", "--schedule", sched, "--behavior",
                        (dir / "behavior.json").string(), "--horizon", "16", "--out",
                        (dir / "timeline.json").string()});
    REQUIRE(sim.code == 0);

    auto fx = run_cli({"testbed", "fixture", "--schedule", sched, "--timeline",
                       (dir / "timeline.json").string(), "--day", "10", "--profile", "archive",
                       "--out", (dir / "archive.json").string()});
    REQUIRE(fx.code == 0);

    // The origin as the owner last saw it: day 9 (fully decayed to indexes).
    auto snap = run_cli({"testbed", "snapshot", "--schedule", sched, "--day", "9", "--out",
                         (dir / "original").string()});
    REQUIRE(snap.code == 0);

    json schedule = json::parse(read_file(sched));
    std::string root_url = schedule["root_url"];
    auto rec = run_cli({"reconstruct", root_url, "--fixture", (dir / "archive.json").string(),
                        "--out", (dir / "recon").string(), "--no-delay"});
    CAPTURE(rec.err);
    REQUIRE(rec.code == 0);

    auto ev = run_cli({"eval", "--original", (dir / "original").string(), "--recon",
                       (dir / "recon").string(), "--root-url", root_url, "--report",
                       (dir / "report.json").string()});
    CAPTURE(ev.err);
    REQUIRE(ev.code == 0);
    json report = json::parse(read_file((dir / "report.json").string()));
    CHECK(report["counts"]["original"].get<int>() > 0);
    fs::remove_all(dir);
}
