#include "webrecon/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "webrecon/common.hpp"
#include "webrecon/extract.hpp"
#include "webrecon/store.hpp"

namespace webrecon {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool bookkeeping_file(const std::string& rel) {
    return rel == "reconstruction.log" || rel == ".pathmap.json";
}

// Snapshot files keyed by canonical relative path (what url_to_path would
// name them). A path map redirects keys for renamed/collided files.
std::map<std::string, std::string> snapshot_files(const std::string& root) {
    std::map<std::string, std::string> out;  // key -> absolute path
    fs::path rootp(root);
    if (!fs::exists(rootp)) throw StoreError("snapshot directory missing: " + root);

    std::map<std::string, std::string> claimed;  // actual rel path -> key
    fs::path pm = rootp / ".pathmap.json";
    if (fs::exists(pm)) {
        json j = json::parse(read_file(pm.string()));
        for (const auto& e : j.value("entries", json::array())) {
            std::string url_s = e.at("url").get<std::string>();
            std::string actual = e.at("path").get<std::string>();
            auto u = Url::parse(url_s);
            if (!u) continue;
            claimed[actual] = url_to_path(*u);
        }
    }

    for (auto it = fs::recursive_directory_iterator(rootp); it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file()) continue;
        std::string rel = fs::relative(it->path(), rootp).generic_string();
        if (bookkeeping_file(rel)) continue;
        auto cl = claimed.find(rel);
        std::string key = cl != claimed.end() ? cl->second : rel;
        out[key] = it->path().string();
    }
    return out;
}

std::optional<std::string> find_snapshot_file(const std::string& root, const Url& url) {
    fs::path rootp(root);
    fs::path pm = rootp / ".pathmap.json";
    if (fs::exists(pm)) {
        json j = json::parse(read_file(pm.string()));
        for (const auto& e : j.value("entries", json::array())) {
            if (e.at("url").get<std::string>() == url.str()) {
                fs::path p = rootp / e.at("path").get<std::string>();
                if (fs::exists(p)) return p.string();
            }
        }
    }
    fs::path p = rootp / url_to_path(url);
    if (fs::exists(p)) return p.string();
    return std::nullopt;
}

std::string mime_for_key(const std::string& key) {
    auto dot = key.rfind('.');
    auto slash = key.rfind('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return "application/octet-stream";
    std::string m = mime_from_extension(std::string_view(key).substr(dot + 1));
    return m.empty() ? "application/octet-stream" : m;
}

}  // namespace

WebGraph build_web_graph(const std::string& snapshot_root, const Url& root_url) {
    WebGraph g;
    auto root_file = find_snapshot_file(snapshot_root, root_url);
    if (!root_file) throw StoreError("root resource not found in snapshot: " + root_url.str());

    ScopeRule scope = ScopeRule::host_only(root_url);
    std::set<std::string> visited;
    std::vector<std::string> frontier{root_url.str()};
    visited.insert(root_url.str());
    std::set<std::string> node_files;

    while (!frontier.empty()) {
        std::string cur = frontier.front();
        frontier.erase(frontier.begin());
        Url cur_url = *Url::parse(cur);
        auto file = find_snapshot_file(snapshot_root, cur_url);
        if (!file) continue;  // dangling link: not a node
        g.nodes.push_back(cur);
        node_files.insert(fs::relative(*file, snapshot_root).generic_string());

        if (!is_html_mime(mime_for_key(url_to_path(cur_url)))) continue;
        std::string content = read_file(*file);
        for (const Url& link : extract_links(content, cur_url)) {
            if (!in_scope(link, scope)) continue;
            if (!find_snapshot_file(snapshot_root, link)) continue;
            g.edges.emplace_back(cur, link.str());
            if (visited.insert(link.str()).second) frontier.push_back(link.str());
        }
    }

    for (auto it = fs::recursive_directory_iterator(snapshot_root);
         it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file()) continue;
        std::string rel = fs::relative(it->path(), snapshot_root).generic_string();
        if (bookkeeping_file(rel) || node_files.count(rel)) continue;
        g.unreachable.push_back(rel);
    }
    std::sort(g.unreachable.begin(), g.unreachable.end());
    return g;
}

std::string to_string(ResourceCategory c) {
    switch (c) {
        case ResourceCategory::Identical: return "identical";
        case ResourceCategory::Changed: return "changed";
        case ResourceCategory::Missing: return "missing";
        case ResourceCategory::Added: return "added";
        case ResourceCategory::Undiscovered: return "undiscovered";
    }
    return "?";
}

std::map<std::string, ResourceCategory> categorize(const std::string& original_root,
                                                   const std::string& recon_root) {
    auto original = snapshot_files(original_root);
    auto recon = snapshot_files(recon_root);

    // URLs the reconstruction attempted but found nowhere, keyed like files.
    std::set<std::string> logged_missing;
    bool have_log = false;
    {
        fs::path lp = fs::path(recon_root) / "reconstruction.log";
        if (fs::exists(lp)) {
            have_log = true;
            for (const auto& e : read_log(lp.string())) {
                if (e.mime_or_missing != "MISSING") continue;
                if (auto u = Url::parse(e.url)) logged_missing.insert(url_to_path(*u));
            }
        }
    }

    std::map<std::string, ResourceCategory> out;
    for (const auto& [key, opath] : original) {
        auto rit = recon.find(key);
        if (rit == recon.end()) {
            if (have_log && !logged_missing.count(key))
                out[key] = ResourceCategory::Undiscovered;
            else
                out[key] = ResourceCategory::Missing;
            continue;
        }
        out[key] = read_file(opath) == read_file(rit->second) ? ResourceCategory::Identical
                                                              : ResourceCategory::Changed;
    }
    for (const auto& [key, rpath] : recon) {
        if (!original.count(key)) out[key] = ResourceCategory::Added;
    }
    return out;
}

std::string DifferenceVector::render() const {
    return "(" + format_fixed(changed_frac(), 3) + ", " + format_fixed(missing_frac(), 3) + ", " +
           format_fixed(added_frac(), 3) + ")";
}

DifferenceVector difference_vector(const std::map<std::string, ResourceCategory>& categories) {
    DifferenceVector v;
    for (const auto& [key, c] : categories) {
        switch (c) {
            case ResourceCategory::Identical: ++v.identical; break;
            case ResourceCategory::Changed: ++v.changed; break;
            case ResourceCategory::Missing: ++v.missing; break;
            case ResourceCategory::Added: ++v.added; break;
            case ResourceCategory::Undiscovered: ++v.undiscovered; break;
        }
    }
    if (v.w_size() == 0)
        throw ConfigError("difference vector undefined: original site has no resources");
    return v;
}

std::vector<std::string> tokenize_text(std::string_view content) {
    std::string text;
    text.reserve(content.size());
    bool in_tag = false;
    for (size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        if (c == '<') {
            in_tag = true;
            text += ' ';
        } else if (in_tag) {
            if (c == '>') in_tag = false;
        } else {
            text += c;
        }
    }
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) tokens.push_back(cur);
            cur.clear();
        } else {
            cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c;
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

double shingle_similarity(const std::string& a, const std::string& b, int w) {
    std::vector<std::string> ta = tokenize_text(a);
    std::vector<std::string> tb = tokenize_text(b);
    if (ta.size() < static_cast<size_t>(w) || tb.size() < static_cast<size_t>(w))
        return ta == tb ? 1.0 : 0.0;

    auto shingle_set = [&](const std::vector<std::string>& t) {
        std::unordered_set<std::string> s;
        for (size_t i = 0; i + w <= t.size(); ++i) {
            std::string key;
            for (int k = 0; k < w; ++k) {
                key += t[i + k];
                key += '\x1f';
            }
            s.insert(std::move(key));
        }
        return s;
    };
    auto sa = shingle_set(ta);
    auto sb = shingle_set(tb);
    size_t inter = 0;
    for (const auto& s : sa)
        if (sb.count(s)) ++inter;
    size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

void TextExtractor::register_converter(const std::string& mime, const std::string& command) {
    converters_[ascii_lower(mime)] = command;
}

bool TextExtractor::convertible(const std::string& mime) const {
    return is_textual_mime(mime) || converters_.count(ascii_lower(mime)) > 0;
}

std::optional<std::string> TextExtractor::to_text(const std::string& bytes,
                                                  const std::string& mime) const {
    if (is_textual_mime(mime)) return bytes;
    auto it = converters_.find(ascii_lower(mime));
    if (it == converters_.end()) return std::nullopt;

    fs::path dir = fs::temp_directory_path() / ("webrecon-conv-" + to_hex(fnv1a64(bytes)));
    fs::create_directories(dir);
    fs::path in = dir / "in.bin", out = dir / "out.txt";
    write_file(in.string(), bytes);
    std::string cmd = it->second + " < " + in.string() + " > " + out.string() + " 2>/dev/null";
    int rc = std::system(cmd.c_str());
    std::optional<std::string> result;
    if (rc == 0 && fs::exists(out)) result = read_file(out.string());
    std::error_code ec;
    fs::remove_all(dir, ec);
    return result;
}

AlmostIdenticalReport almost_identical_rate(const std::vector<ChangedPair>& pairs,
                                            double threshold, int w,
                                            const TextExtractor& extractor) {
    AlmostIdenticalReport rep;
    for (const auto& p : pairs) {
        auto ta = extractor.to_text(p.original, p.mime);
        auto tb = extractor.to_text(p.reconstructed, p.mime);
        if (!ta || !tb) {
            ++rep.excluded_non_text;
            continue;
        }
        double sim = shingle_similarity(*ta, *tb, w);
        rep.similarity[p.key] = sim;
        ++rep.compared;
        if (sim >= threshold) ++rep.above;
    }
    rep.rate = rep.compared == 0 ? 0.0 : static_cast<double>(rep.above) / rep.compared;
    return rep;
}

std::vector<MimeGroupRow> mime_breakdown(const std::map<std::string, ResourceCategory>& categories,
                                         const std::map<std::string, std::string>& mime_by_key) {
    auto group_of = [](const std::string& mime) -> std::string {
        if (is_html_mime(mime)) return "html";
        if (is_image_mime(mime)) return "images";
        return "other";
    };

    std::map<std::string, MimeGroupRow> groups;
    std::map<std::string, MimeGroupRow> exact;
    for (const std::string g : {"html", "images", "other"}) groups[g].group = g;

    for (const auto& [key, cat] : categories) {
        if (cat == ResourceCategory::Added) continue;  // not part of the original site
        auto mit = mime_by_key.find(key);
        std::string mime = mit == mime_by_key.end() ? mime_for_key(key) : mit->second;
        bool recovered = cat == ResourceCategory::Identical || cat == ResourceCategory::Changed;

        auto& g = groups[group_of(mime)];
        ++g.original_count;
        if (recovered) ++g.recovered_count;
        auto& e = exact[mime];
        e.group = mime;
        ++e.original_count;
        if (recovered) ++e.recovered_count;
    }

    std::vector<MimeGroupRow> out;
    for (const std::string g : {"html", "images", "other"}) {
        MimeGroupRow row = groups[g];
        if (row.original_count > 0)
            row.percent = static_cast<int>(
                std::llround(100.0 * row.recovered_count / row.original_count));
        out.push_back(row);
    }
    for (auto& [mime, row] : exact) {
        if (row.original_count > 0)
            row.percent = static_cast<int>(
                std::llround(100.0 * row.recovered_count / row.original_count));
        out.push_back(row);
    }
    return out;
}

std::string render_recon_diagram(const DifferenceVector& v) {
    // Geometry constants; all derived values formatted to 3 decimals so the
    // output is byte-stable.
    constexpr double kCoreRadius = 80.0;
    constexpr double kCx = 120.0, kCy = 120.0;
    const char* kCrustColor = "#c8a165";
    const char* kCoreColor = "#d9d9d9";
    const char* kChangedColor = "#6e6e6e";

    const double missing = v.missing_frac();
    const double added = v.added_frac();
    const std::int64_t live = v.identical + v.changed;
    const double changed_of_core = live > 0 ? static_cast<double>(v.changed) / live : 0.0;

    const double hole_r = kCoreRadius * std::sqrt(missing);
    const double crust_r = kCoreRadius * std::sqrt(1.0 + added);

    auto f = [](double x) { return format_fixed(x, 3); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"240\" height=\"260\" "
           "viewBox=\"0 0 240 260\">\n";
    svg += "<!-- reconstruction diagram; core radius " + f(kCoreRadius) +
           ", hole r = core*sqrt(missing), crust r = core*sqrt(1+added), dark arc = "
           "changed share of recovered core -->\n";
    if (crust_r > kCoreRadius)
        svg += "<circle cx=\"" + f(kCx) + "\" cy=\"" + f(kCy) + "\" r=\"" + f(crust_r) +
               "\" fill=\"" + kCrustColor + "\"/>\n";
    svg += "<circle cx=\"" + f(kCx) + "\" cy=\"" + f(kCy) + "\" r=\"" + f(kCoreRadius) +
           "\" fill=\"" + kCoreColor + "\"/>\n";

    if (changed_of_core >= 0.999999) {
        svg += "<circle cx=\"" + f(kCx) + "\" cy=\"" + f(kCy) + "\" r=\"" + f(kCoreRadius) +
               "\" fill=\"" + kChangedColor + "\"/>\n";
    } else if (changed_of_core > 0.0) {
        const double ang = 2.0 * 3.14159265358979323846 * changed_of_core;
        const double x1 = kCx, y1 = kCy - kCoreRadius;
        const double x2 = kCx + kCoreRadius * std::sin(ang);
        const double y2 = kCy - kCoreRadius * std::cos(ang);
        const int large = ang > 3.14159265358979323846 ? 1 : 0;
        svg += "<path d=\"M " + f(kCx) + " " + f(kCy) + " L " + f(x1) + " " + f(y1) + " A " +
               f(kCoreRadius) + " " + f(kCoreRadius) + " 0 " + std::to_string(large) +
               " 1 " + f(x2) + " " + f(y2) + " Z\" fill=\"" + std::string(kChangedColor) +
               "\"/>\n";
    }
    if (hole_r > 0.0)
        svg += "<circle cx=\"" + f(kCx) + "\" cy=\"" + f(kCy) + "\" r=\"" + f(hole_r) +
               "\" fill=\"#ffffff\"/>\n";

    svg += "<text x=\"120\" y=\"245\" font-family=\"monospace\" font-size=\"13\" "
           "text-anchor=\"middle\">" +
           v.render() + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

std::string evaluate_to_json(const std::string& original_root, const std::string& recon_root,
                             const EvaluationOptions& options) {
    auto categories = categorize(original_root, recon_root);
    DifferenceVector v = difference_vector(categories);

    auto original = snapshot_files(original_root);
    auto recon = snapshot_files(recon_root);

    std::map<std::string, std::string> mimes;
    for (const auto& [key, cat] : categories) mimes[key] = mime_for_key(key);

    std::vector<ChangedPair> changed_pairs;
    for (const auto& [key, cat] : categories) {
        if (cat != ResourceCategory::Changed) continue;
        changed_pairs.push_back(
            ChangedPair{key, read_file(original.at(key)), read_file(recon.at(key)), mimes[key]});
    }
    auto almost = almost_identical_rate(changed_pairs, options.shingle_threshold,
                                        options.shingle_size, options.extractor);
    auto breakdown = mime_breakdown(categories, mimes);

    json jrows = json::object();
    for (const auto& [key, cat] : categories) {
        json row{{"category", to_string(cat)}, {"mime", mimes[key]}};
        auto sit = almost.similarity.find(key);
        if (sit != almost.similarity.end()) row["similarity"] = sit->second;
        jrows[key] = row;
    }
    json jbreak = json::array();
    for (const auto& r : breakdown) {
        jbreak.push_back(json{{"group", r.group},
                              {"original", r.original_count},
                              {"recovered", r.recovered_count},
                              {"percent", r.percent}});
    }
    json j{
        {"vector",
         {{"changed", format_fixed(v.changed_frac(), 3)},
          {"missing", format_fixed(v.missing_frac(), 3)},
          {"added", format_fixed(v.added_frac(), 3)},
          {"rendered", v.render()}}},
        {"counts",
         {{"original", v.w_size()},
          {"reconstructed", v.w_prime_size()},
          {"identical", v.identical},
          {"changed", v.changed},
          {"missing", v.missing},
          {"added", v.added},
          {"undiscovered", v.undiscovered}}},
        {"mime_breakdown", jbreak},
        {"almost_identical",
         {{"rate", almost.rate},
          {"threshold", options.shingle_threshold},
          {"shingle_size", options.shingle_size},
          {"compared", almost.compared},
          {"above", almost.above},
          {"excluded_non_text", almost.excluded_non_text},
          // denominator: text-convertible changed pairs only
          {"denominator", "changed-text-pairs"}}},
        {"resources", jrows},
    };

    if (options.root_url) {
        WebGraph og = build_web_graph(original_root, *options.root_url);
        WebGraph rg = build_web_graph(recon_root, *options.root_url);
        j["graphs"] = {
            {"original", {{"nodes", og.nodes.size()}, {"edges", og.edges.size()}, {"unreachable", og.unreachable.size()}}},
            {"reconstructed", {{"nodes", rg.nodes.size()}, {"edges", rg.edges.size()}, {"unreachable", rg.unreachable.size()}}},
        };
    }
    return j.dump(2) + "\n";
}

}  // namespace webrecon
