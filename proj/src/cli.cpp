#include "webrecon/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "webrecon/archive_http.hpp"
#include "webrecon/budget.hpp"
#include "webrecon/evaluate.hpp"
#include "webrecon/reconstruct.hpp"
#include "webrecon/repo.hpp"
#include "webrecon/store.hpp"
#include "webrecon/testbed.hpp"

namespace webrecon::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSuspended = 3;
constexpr int kExitPartial = 4;

struct ReconstructArgs {
    std::string start_url;
    std::vector<std::string> fixtures;
    std::string archive_url;
    std::string out_dir = "site";
    bool most_recent = false;
    std::string scope = "host";
    std::size_t max_resources = 0;
    std::string types = "html,images,other";
    std::string image_exts;
    bool rename_converted = false;
    bool relativize = false;
    bool no_delay = false;
    std::uint64_t seed = 0;
    std::string checkpoint;
    bool resume = false;
    std::string window = "sliding";
    std::vector<std::string> limits;  // repo=N
    std::string result_path;
};

std::optional<std::pair<std::string, std::int64_t>> parse_limit(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos) return std::nullopt;
    try {
        return std::make_pair(s.substr(0, eq), std::stoll(s.substr(eq + 1)));
    } catch (...) {
        return std::nullopt;
    }
}

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out, std::ostream& err) {
    auto start = Url::parse(a.start_url);
    if (!start) {
        err << "error: start URL does not parse: " << a.start_url << "\n";
        return kExitConfig;
    }

    std::vector<std::shared_ptr<Repository>> repos;
    for (const auto& f : a.fixtures) repos.push_back(load_fixture(f));
    std::string archive_url = a.archive_url;
    if (archive_url.empty()) {
        if (const char* env = std::getenv("WEBRECON_ARCHIVE_URL")) archive_url = env;
    }
    if (!archive_url.empty())
        repos.push_back(std::make_shared<CdxArchiveRepository>(archive_url));
    if (repos.empty()) {
        err << "error: no repositories registered (use --fixture and/or --archive-url)\n";
        return kExitConfig;
    }

    RecoveryPolicy policy;
    policy.version_preference =
        a.most_recent ? VersionPreference::MostRecent : VersionPreference::CanonicalFirst;
    policy.seed = a.seed;
    if (a.max_resources > 0) policy.max_resources = a.max_resources;
    if (!a.image_exts.empty()) policy.image_exts = ImageExtensions::from_csv(a.image_exts);

    policy.allow_html = a.types.find("html") != std::string::npos;
    policy.allow_images = a.types.find("images") != std::string::npos;
    policy.allow_other = a.types.find("other") != std::string::npos;

    if (a.scope == "host") {
        policy.scope = ScopeRule::host_only(*start);
    } else if (a.scope == "prefix") {
        std::string dir = start->str();
        if (dir.back() != '/') dir.erase(dir.rfind('/') + 1);
        policy.scope = ScopeRule::prefix_only(*Url::parse(dir));
    } else {
        err << "error: --scope must be host or prefix\n";
        return kExitConfig;
    }

    std::vector<std::string> repo_ids;
    for (const auto& r : repos) repo_ids.push_back(r->descriptor().id);
    RespectPolicy respect = RespectPolicy::defaults_for(repo_ids);
    for (const auto& s : a.limits) {
        auto lim = parse_limit(s);
        if (!lim) {
            err << "error: --limit takes repo=N, got: " << s << "\n";
            return kExitConfig;
        }
        respect.per_repo[lim->first].limit = lim->second;
    }
    WindowMode mode = a.window == "fixed" ? WindowMode::Fixed : WindowMode::Sliding;
    auto budget = std::make_shared<BudgetManager>(respect, mode);

    std::shared_ptr<Clock> clock;
    if (a.no_delay) {
        clock = std::make_shared<SimClock>(0);
        budget->set_delay_bounds(0, 0);
    } else {
        clock = std::make_shared<SystemClock>();
    }

    StoreLayout layout{a.out_dir, a.rename_converted, a.relativize};
    SiteStore store(layout);

    Reconstructor engine(repos, policy, budget, &store, clock);
    if (!a.checkpoint.empty()) engine.set_checkpoint_path(a.checkpoint);

    ReconstructionResult result;
    if (a.resume) {
        if (a.checkpoint.empty() || !fs::exists(a.checkpoint)) {
            err << "error: --resume needs an existing --checkpoint file\n";
            return kExitConfig;
        }
        result = engine.resume(a.checkpoint);
    } else {
        result = engine.reconstruct(*start);
    }

    std::string result_path =
        a.result_path.empty() ? (fs::path(a.out_dir) / "result.json").string() : a.result_path;
    write_file(result_path, result.to_json());

    out << "recovered: " << result.recovered.size() << "\n";
    out << "missing: " << result.missing.size() << "\n";
    for (const auto& [id, n] : result.query_ledger) out << "queries[" << id << "]: " << n << "\n";
    out << "result: " << result_path << "\n";

    switch (result.outcome) {
        case RunOutcome::Complete:
            return kExitOk;
        case RunOutcome::Suspended:
            out << "suspended: checkpoint written to " << a.checkpoint << "\n";
            return kExitSuspended;
        case RunOutcome::Partial:
            err << "partial result: " << result.error << "\n";
            return kExitPartial;
    }
    return kExitOk;
}

struct EvalArgs {
    std::string original;
    std::string recon;
    std::string root_url;
    std::string report = "report.json";
    std::string diagram;
    double threshold = 0.75;
    int shingle_size = 10;
    std::vector<std::string> converters;  // mime=command
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    if (!fs::exists(a.original) || !fs::exists(a.recon)) {
        err << "error: original and reconstruction directories must exist\n";
        return kExitConfig;
    }
    EvaluationOptions options;
    options.shingle_threshold = a.threshold;
    options.shingle_size = a.shingle_size;
    if (!a.root_url.empty()) {
        auto u = Url::parse(a.root_url);
        if (!u) {
            err << "error: bad --root-url\n";
            return kExitConfig;
        }
        options.root_url = u;
    }
    for (const auto& c : a.converters) {
        auto eq = c.find('=');
        if (eq == std::string::npos) {
            err << "error: --converter takes mime=command\n";
            return kExitConfig;
        }
        options.extractor.register_converter(c.substr(0, eq), c.substr(eq + 1));
    }

    std::string report = evaluate_to_json(a.original, a.recon, options);
    write_file(a.report, report);
    out << "report: " << a.report << "\n";

    if (!a.diagram.empty()) {
        auto categories = categorize(a.original, a.recon);
        DifferenceVector v = difference_vector(categories);
        write_file(a.diagram, render_recon_diagram(v));
        out << "diagram: " << a.diagram << "\n";
        out << "vector: " << v.render() << "\n";
    } else {
        auto categories = categorize(a.original, a.recon);
        out << "vector: " << difference_vector(categories).render() << "\n";
    }
    return kExitOk;
}

struct GenArgs {
    int bins = 30;
    int terminal = 90;
    int image_bin = 2;
    int words = 50;
    std::uint64_t seed = 0;
    std::string name;
    std::string out_dir;
    std::string schedule_path;
    int day = 0;
};

int cmd_testbed_gen(const GenArgs& a, std::ostream& out, std::ostream&) {
    CollectionSpec spec{a.bins, a.terminal, a.image_bin, a.words, a.seed, a.name};
    spec.validate();
    ResourceSchedule sched = plan_collection(spec);
    if (!a.out_dir.empty()) materialize_day(sched, a.day, a.out_dir);
    if (!a.schedule_path.empty()) save_schedule(sched, a.schedule_path);

    auto counts = collection_counts(spec, a.day);
    out << "collection: " << sched.spec.name << "\n";
    out << "root_url: " << sched.root_url << "\n";
    out << "files[day " << a.day << "]: " << counts.total << "\n";
    if (!a.schedule_path.empty()) out << "schedule: " << a.schedule_path << "\n";
    return kExitOk;
}

struct SimArgs {
    std::string schedule_path;
    std::string behavior_path;
    int horizon = 120;
    std::string timeline_path;
    std::string metrics_path;
};

int cmd_testbed_simulate(const SimArgs& a, std::ostream& out, std::ostream& err) {
    if (a.schedule_path.empty() || a.behavior_path.empty()) {
        err << "error: --schedule and --behavior are required\n";
        return kExitConfig;
    }
    ResourceSchedule sched = load_schedule(a.schedule_path);
    RepoBehavior behavior = load_behavior(a.behavior_path);
    CacheTimeline tl = simulate_cache(sched, behavior, a.horizon);
    if (!a.timeline_path.empty()) save_timeline(tl, a.timeline_path);
    if (!a.metrics_path.empty()) write_file(a.metrics_path, metrics_to_json(lifecycle_metrics(tl)));

    std::size_t cached = 0, vulnerable = 0;
    for (const auto& m : lifecycle_metrics(tl)) {
        if (m.vulnerable)
            ++vulnerable;
        else
            ++cached;
    }
    out << "resources: " << tl.resources.size() << "\n";
    out << "cached: " << cached << "\n";
    out << "vulnerable: " << vulnerable << "\n";
    if (!a.timeline_path.empty()) out << "timeline: " << a.timeline_path << "\n";
    if (!a.metrics_path.empty()) out << "metrics: " << a.metrics_path << "\n";
    return kExitOk;
}

struct FixtureArgs {
    std::string schedule_path;
    std::string timeline_path;
    int day = 0;
    std::string profile = "archive";
    std::string repo_id;
    std::string epoch = "2005-06-01";
    std::string out_path;
};

int cmd_testbed_fixture(const FixtureArgs& a, std::ostream& out, std::ostream& err) {
    if (a.schedule_path.empty() || a.timeline_path.empty() || a.out_path.empty()) {
        err << "error: --schedule, --timeline and --out are required\n";
        return kExitConfig;
    }
    ResourceSchedule sched = load_schedule(a.schedule_path);
    CacheTimeline tl = load_timeline(a.timeline_path);
    FixtureBuildOptions options;
    options.descriptor = profile_by_name(a.profile);
    if (!a.repo_id.empty()) options.descriptor.id = a.repo_id;
    auto epoch = Date::from_iso(a.epoch);
    if (!epoch) {
        err << "error: bad --epoch date\n";
        return kExitConfig;
    }
    options.epoch = *epoch;
    FixtureManifest m = timeline_to_fixture(sched, tl, a.day, options);
    save_manifest(m, a.out_path);
    out << "entries: " << m.entries.size() << "\n";
    out << "manifest: " << a.out_path << "\n";
    return kExitOk;
}

struct SnapshotArgs {
    std::string schedule_path;
    int day = 0;
    std::string out_dir;
};

int cmd_testbed_snapshot(const SnapshotArgs& a, std::ostream& out, std::ostream& err) {
    if (a.schedule_path.empty() || a.out_dir.empty()) {
        err << "error: --schedule and --out are required\n";
        return kExitConfig;
    }
    ResourceSchedule sched = load_schedule(a.schedule_path);
    materialize_day(sched, a.day, a.out_dir);
    auto counts = collection_counts(sched.spec, a.day);
    out << "files[day " << a.day << "]: " << counts.total << "\n";
    out << "snapshot: " << a.out_dir << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"website reconstruction from web repositories"};
    app.require_subcommand(1);

    ReconstructArgs ra;
    auto* rec = app.add_subcommand("reconstruct", "recover a site from repositories");
    rec->add_option("start_url", ra.start_url, "root URL of the lost site")->required();
    rec->add_option("--fixture", ra.fixtures, "fixture repository manifest (repeatable)");
    rec->add_option("--archive-url", ra.archive_url,
                    "base URL of a CDX-style archive (env WEBRECON_ARCHIVE_URL)");
    rec->add_option("--out", ra.out_dir, "output directory");
    rec->add_flag("--most-recent", ra.most_recent, "prefer newest copies over canonical ones");
    rec->add_option("--scope", ra.scope, "host|prefix");
    rec->add_option("--max-resources", ra.max_resources, "stop after this many URLs");
    rec->add_option("--types", ra.types, "comma list from html,images,other");
    rec->add_option("--image-exts", ra.image_exts, "override image extension list");
    rec->add_flag("--rename-converted", ra.rename_converted, "save conversions as <name>.html");
    rec->add_flag("--relativize", ra.relativize, "rewrite stored links to relative paths");
    rec->add_flag("--no-delay", ra.no_delay, "virtual clock, no politeness waits");
    rec->add_option("--seed", ra.seed, "deterministic run seed");
    rec->add_option("--checkpoint", ra.checkpoint, "suspend to this file on budget pause");
    rec->add_flag("--resume", ra.resume, "continue from --checkpoint");
    rec->add_option("--window", ra.window, "budget window: sliding|fixed");
    rec->add_option("--limit", ra.limits, "per-repo query limit repo=N (repeatable)");
    rec->add_option("--result", ra.result_path, "where to write result.json");

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "compare an original snapshot with a reconstruction");
    ev->add_option("--original", ea.original)->required();
    ev->add_option("--recon", ea.recon)->required();
    ev->add_option("--root-url", ea.root_url, "site root URL (enables graph stats)");
    ev->add_option("--report", ea.report, "JSON report path");
    ev->add_option("--diagram", ea.diagram, "write an SVG reconstruction diagram here");
    ev->add_option("--threshold", ea.threshold, "almost-identical similarity threshold");
    ev->add_option("--shingle-size", ea.shingle_size, "words per shingle");
    ev->add_option("--converter", ea.converters, "mime=command text converter (repeatable)");

    auto* tb = app.add_subcommand("testbed", "synthetic decaying collection tooling");
    tb->require_subcommand(1);

    GenArgs ga;
    auto* gen = tb->add_subcommand("gen", "generate a collection");
    gen->add_option("--bins", ga.bins);
    gen->add_option("--terminal", ga.terminal);
    gen->add_option("--image-bin", ga.image_bin);
    gen->add_option("--words", ga.words);
    gen->add_option("--seed", ga.seed);
    gen->add_option("--name", ga.name);
    gen->add_option("--out", ga.out_dir, "materialize the site tree here");
    gen->add_option("--schedule", ga.schedule_path, "write the schedule JSON here");
    gen->add_option("--day", ga.day, "materialize as of this day");

    SimArgs sa;
    auto* sim = tb->add_subcommand("simulate", "run the crawl/cache/purge simulation");
    sim->add_option("--schedule", sa.schedule_path);
    sim->add_option("--behavior", sa.behavior_path);
    sim->add_option("--horizon", sa.horizon);
    sim->add_option("--out", sa.timeline_path, "timeline JSON");
    sim->add_option("--metrics", sa.metrics_path, "lifecycle metrics JSON");

    FixtureArgs fa;
    auto* fx = tb->add_subcommand("fixture", "snapshot a simulated cache into a manifest");
    fx->add_option("--schedule", fa.schedule_path);
    fx->add_option("--timeline", fa.timeline_path);
    fx->add_option("--day", fa.day);
    fx->add_option("--profile", fa.profile, "archive|google|msn|yahoo");
    fx->add_option("--repo-id", fa.repo_id, "override the repository id");
    fx->add_option("--epoch", fa.epoch, "calendar date of simulation day 0");
    fx->add_option("--out", fa.out_path);

    SnapshotArgs na;
    auto* snap = tb->add_subcommand("snapshot", "materialize the origin site as of a day");
    snap->add_option("--schedule", na.schedule_path);
    snap->add_option("--day", na.day);
    snap->add_option("--out", na.out_dir);

    std::vector<std::string> argv(args);
    try {
        std::vector<const char*> cargv;
        cargv.push_back("webrecon");
        for (const auto& s : argv) cargv.push_back(s.c_str());
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (rec->parsed()) return cmd_reconstruct(ra, out, err);
        if (ev->parsed()) return cmd_eval(ea, out, err);
        if (tb->parsed()) {
            if (gen->parsed()) return cmd_testbed_gen(ga, out, err);
            if (sim->parsed()) return cmd_testbed_simulate(sa, out, err);
            if (fx->parsed()) return cmd_testbed_fixture(fa, out, err);
            if (snap->parsed()) return cmd_testbed_snapshot(na, out, err);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const TransportError& e) {
        err << "transport error: " << e.what() << "\n";
        return kExitPartial;
    } catch (const StoreError& e) {
        err << "store error: " << e.what() << "\n";
        return kExitPartial;
    }
    err << "error: no subcommand\n";
    return kExitConfig;
}

}  // namespace webrecon::cli
