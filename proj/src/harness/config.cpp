#include "stereonocs/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "stereonocs/error.hpp"

namespace stereonocs::harness {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::InvalidConfig, where + ": " + what);
}

double to_double(const std::string& where, const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) bad(where, "expected a number, got '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& where, const std::string& s) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) bad(where, "expected an unsigned integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& where, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    bad(where, "expected true or false, got '" + s + "'");
}

Range to_range(const std::string& where, const std::string& s) {
    const auto parts = split_list(s);
    if (parts.size() != 2) bad(where, "expected 'low, high'");
    return {to_double(where, parts[0]), to_double(where, parts[1])};
}

std::vector<double> to_doubles(const std::string& where, const std::string& s) {
    std::vector<double> out;
    for (const auto& p : split_list(s)) out.push_back(to_double(where, p));
    if (out.empty()) bad(where, "empty list");
    return out;
}

using Handler = std::function<void(const std::string& where, const std::string& value)>;

void dispatch(const IniDocument& doc, const std::map<std::string, std::map<std::string, Handler>>& table) {
    for (const auto& [section, keys] : doc.sections) {
        const auto sec = table.find(section);
        if (sec == table.end()) bad("[" + section + "]", "unknown section");
        for (const auto& [key, value] : keys) {
            const auto h = sec->second.find(key);
            if (h == sec->second.end()) bad("[" + section + "] " + key, "unknown key");
            h->second("[" + section + "] " + key, value);
        }
    }
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

IniDocument parse_ini(std::istream& in) {
    IniDocument doc;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']') bad(where, "unterminated section header");
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            if (section.empty()) bad(where, "empty section name");
            if (!doc.sections.emplace(section, std::map<std::string, std::string>{}).second) {
                bad(where, "duplicate section [" + section + "]");
            }
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) bad(where, "expected 'key = value'");
        if (section.empty()) bad(where, "key outside of a section");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) bad(where, "empty key");
        if (!doc.sections[section].emplace(key, value).second) bad(where, "duplicate key '" + key + "'");
    }
    return doc;
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::decoupled: return "decoupled";
        case Method::decoupled_front: return "decoupled_front";
        case Method::joint: return "joint";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "decoupled") return Method::decoupled;
    if (name == "decoupled_front") return Method::decoupled_front;
    if (name == "joint") return Method::joint;
    throw Error(ErrorCode::InvalidConfig, "unknown method '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
    if (categories.empty()) throw Error(ErrorCode::InvalidConfig, "no categories selected");
    if (methods.empty()) throw Error(ErrorCode::InvalidConfig, "no methods selected");
    if (levels.empty()) throw Error(ErrorCode::InvalidConfig, "empty noise sweep");
    if (jobs < 1) throw Error(ErrorCode::InvalidConfig, "jobs must be >= 1");
    for (const auto& n : levels) n.validate();
    for (Category c : categories) scene_for(c).validate();
    solver.ransac.validate();
    if (!(solver.match_eps > 0.0)) throw Error(ErrorCode::InvalidConfig, "match_eps must be positive");
}

SceneConfig ExperimentConfig::scene_for(Category c) const {
    SceneConfig s = scene;
    s.category = c;
    s.shape = shapes.at(c);
    return s;
}

ExperimentConfig parse_experiment_config(std::istream& in) {
    const IniDocument doc = parse_ini(in);
    ExperimentConfig cfg;
    std::map<std::string, std::map<std::string, Handler>> table;

    auto& sc = cfg.scene;
    table["scene"] = {
        {"categories",
         [&](auto& w, auto& v) {
             cfg.categories.clear();
             for (const auto& n : split_list(v)) {
                 try {
                     cfg.categories.push_back(parse_category(n));
                 } catch (const Error& e) {
                     bad(w, e.what());
                 }
             }
         }},
        {"distance", [&](auto& w, auto& v) { sc.distance = to_range(w, v); }},
        {"yaw_deg", [&](auto& w, auto& v) { sc.yaw_deg = to_range(w, v); }},
        {"pitch_deg", [&](auto& w, auto& v) { sc.pitch_deg = to_range(w, v); }},
        {"roll_deg", [&](auto& w, auto& v) { sc.roll_deg = to_range(w, v); }},
        {"lateral_jitter", [&](auto& w, auto& v) { sc.lateral_jitter = to_double(w, v); }},
        {"baseline", [&](auto& w, auto& v) { sc.baseline = to_double(w, v); }},
        {"focal", [&](auto& w, auto& v) { sc.focal = to_double(w, v); }},
        {"width", [&](auto& w, auto& v) { sc.width = static_cast<int>(to_u64(w, v)); }},
        {"height", [&](auto& w, auto& v) { sc.height = static_cast<int>(to_u64(w, v)); }},
        {"max_retries", [&](auto& w, auto& v) { sc.max_retries = static_cast<int>(to_u64(w, v)); }},
    };

    for (Category c : {Category::bottle, Category::mug, Category::cup}) {
        ShapeRanges& r = cfg.shapes[c];
        table["shape." + std::string(to_string(c))] = {
            {"height", [&r](auto& w, auto& v) { r.height = to_range(w, v); }},
            {"radius", [&r](auto& w, auto& v) { r.radius = to_range(w, v); }},
            {"neck_radius_ratio", [&r](auto& w, auto& v) { r.neck_radius_ratio = to_range(w, v); }},
            {"neck_fraction", [&r](auto& w, auto& v) { r.neck_fraction = to_range(w, v); }},
            {"top_radius_ratio", [&r](auto& w, auto& v) { r.top_radius_ratio = to_range(w, v); }},
            {"wall", [&r](auto& w, auto& v) { r.wall = to_range(w, v); }},
            {"handle_radius_ratio", [&r](auto& w, auto& v) { r.handle_radius_ratio = to_range(w, v); }},
            {"handle_tube_ratio", [&r](auto& w, auto& v) { r.handle_tube_ratio = to_range(w, v); }},
        };
    }

    std::vector<double> sigma{0.0}, dropout{0.0}, erosion{0.0}, outlier{0.0};
    table["noise"] = {
        {"sigma", [&](auto& w, auto& v) { sigma = to_doubles(w, v); }},
        {"dropout", [&](auto& w, auto& v) { dropout = to_doubles(w, v); }},
        {"erosion_radius", [&](auto& w, auto& v) { erosion = to_doubles(w, v); }},
        {"outlier_rate", [&](auto& w, auto& v) { outlier = to_doubles(w, v); }},
    };

    auto& so = cfg.solver;
    table["solver"] = {
        {"match_eps", [&](auto& w, auto& v) { so.match_eps = to_double(w, v); }},
        {"scale_pairs", [&](auto& w, auto& v) { so.scale.pair_budget = to_u64(w, v); }},
        {"min_nocs_separation", [&](auto& w, auto& v) { so.scale.min_nocs_separation = to_double(w, v); }},
        {"trimmed_scale", [&](auto& w, auto& v) { so.scale.trimmed = to_bool(w, v); }},
        {"ransac_iterations", [&](auto& w, auto& v) { so.ransac.max_iterations = to_u64(w, v); }},
        {"ransac_threshold", [&](auto& w, auto& v) { so.ransac.inlier_threshold = to_double(w, v); }},
        {"ransac_confidence", [&](auto& w, auto& v) { so.ransac.confidence = to_double(w, v); }},
        {"back_for_scale", [&](auto& w, auto& v) { so.back_for_scale = to_bool(w, v); }},
        {"back_for_depth_target", [&](auto& w, auto& v) { so.back_for_depth_target = to_bool(w, v); }},
    };

    table["experiment"] = {
        {"trials", [&](auto& w, auto& v) { cfg.trials = to_u64(w, v); }},
        {"seed", [&](auto& w, auto& v) { cfg.seed = to_u64(w, v); }},
        {"jobs", [&](auto& w, auto& v) { cfg.jobs = static_cast<int>(to_u64(w, v)); }},
        {"out", [&](auto&, auto& v) { cfg.out_dir = v; }},
        {"record_timing", [&](auto& w, auto& v) { cfg.record_timing = to_bool(w, v); }},
        {"methods",
         [&](auto& w, auto& v) {
             cfg.methods.clear();
             for (const auto& n : split_list(v)) {
                 try {
                     cfg.methods.push_back(parse_method(n));
                 } catch (const Error& e) {
                     bad(w, e.what());
                 }
             }
         }},
    };

    dispatch(doc, table);

    const std::size_t n = std::max({sigma.size(), dropout.size(), erosion.size(), outlier.size()});
    auto pick = [n](const std::vector<double>& v, std::size_t i, const char* name) {
        if (v.size() != 1 && v.size() != n) bad(std::string("[noise] ") + name, "list length must be 1 or match the sweep");
        return v.size() == 1 ? v[0] : v[i];
    };
    cfg.levels.clear();
    for (std::size_t i = 0; i < n; ++i) {
        NoiseModel m;
        m.sigma = pick(sigma, i, "sigma");
        m.dropout = pick(dropout, i, "dropout");
        const double er = pick(erosion, i, "erosion_radius");
        if (er != std::floor(er)) bad("[noise] erosion_radius", "must be an integer");
        m.erosion_radius = static_cast<int>(er);
        m.outlier_rate = pick(outlier, i, "outlier_rate");
        cfg.levels.push_back(m);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return parse_experiment_config(in);
}

void write_experiment_config(const ExperimentConfig& cfg, std::ostream& out) {
    auto range = [](const Range& r) { return fmt_double(r.first) + ", " + fmt_double(r.second); };
    auto join = [](const auto& items, auto&& f) {
        std::string s;
        for (const auto& x : items) s += (s.empty() ? "" : ", ") + f(x);
        return s;
    };

    const SceneConfig& sc = cfg.scene;
    out << "[scene]\n"
        << "categories = " << join(cfg.categories, [](Category c) { return std::string(to_string(c)); }) << '\n'
        << "distance = " << range(sc.distance) << '\n'
        << "yaw_deg = " << range(sc.yaw_deg) << '\n'
        << "pitch_deg = " << range(sc.pitch_deg) << '\n'
        << "roll_deg = " << range(sc.roll_deg) << '\n'
        << "lateral_jitter = " << fmt_double(sc.lateral_jitter) << '\n'
        << "baseline = " << fmt_double(sc.baseline) << '\n'
        << "focal = " << fmt_double(sc.focal) << '\n'
        << "width = " << sc.width << '\n'
        << "height = " << sc.height << '\n'
        << "max_retries = " << sc.max_retries << "\n\n";

    for (const auto& [c, r] : cfg.shapes) {
        out << "[shape." << to_string(c) << "]\n"
            << "height = " << range(r.height) << '\n'
            << "radius = " << range(r.radius) << '\n'
            << "neck_radius_ratio = " << range(r.neck_radius_ratio) << '\n'
            << "neck_fraction = " << range(r.neck_fraction) << '\n'
            << "top_radius_ratio = " << range(r.top_radius_ratio) << '\n'
            << "wall = " << range(r.wall) << '\n'
            << "handle_radius_ratio = " << range(r.handle_radius_ratio) << '\n'
            << "handle_tube_ratio = " << range(r.handle_tube_ratio) << "\n\n";
    }

    out << "[noise]\n"
        << "sigma = " << join(cfg.levels, [](const NoiseModel& m) { return fmt_double(m.sigma); }) << '\n'
        << "dropout = " << join(cfg.levels, [](const NoiseModel& m) { return fmt_double(m.dropout); }) << '\n'
        << "erosion_radius = " << join(cfg.levels, [](const NoiseModel& m) { return std::to_string(m.erosion_radius); })
        << '\n'
        << "outlier_rate = " << join(cfg.levels, [](const NoiseModel& m) { return fmt_double(m.outlier_rate); })
        << "\n\n";

    const DecoupledConfig& so = cfg.solver;
    out << "[solver]\n"
        << "match_eps = " << fmt_double(so.match_eps) << '\n'
        << "scale_pairs = " << so.scale.pair_budget << '\n'
        << "min_nocs_separation = " << fmt_double(so.scale.min_nocs_separation) << '\n'
        << "trimmed_scale = " << (so.scale.trimmed ? "true" : "false") << '\n'
        << "ransac_iterations = " << so.ransac.max_iterations << '\n'
        << "ransac_threshold = " << fmt_double(so.ransac.inlier_threshold) << '\n'
        << "ransac_confidence = " << fmt_double(so.ransac.confidence) << '\n'
        << "back_for_scale = " << (so.back_for_scale ? "true" : "false") << '\n'
        << "back_for_depth_target = " << (so.back_for_depth_target ? "true" : "false") << "\n\n";

    out << "[experiment]\n"
        << "trials = " << cfg.trials << '\n'
        << "seed = " << cfg.seed << '\n'
        << "jobs = " << cfg.jobs << '\n'
        << "out = " << cfg.out_dir.string() << '\n'
        << "record_timing = " << (cfg.record_timing ? "true" : "false") << '\n'
        << "methods = " << join(cfg.methods, [](Method m) { return std::string(to_string(m)); }) << '\n';
}

}  // namespace stereonocs::harness
