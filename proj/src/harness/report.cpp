#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "stereonocs/error.hpp"
#include "stereonocs/harness/experiment.hpp"

namespace stereonocs::harness {

namespace {

std::string num(double v, const char* f = "%.10g") {
    if (std::isnan(v)) return "nan";
    char buf[48];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_cell(const std::string& s, int row) {
    if (s == "nan") return std::nan("");
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidConfig, "row " + std::to_string(row) + ": bad number '" + s + "'");
}

}  // namespace

void write_trials_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
    out << kTrialCsvHeader << '\n';
    const double nan = std::nan("");
    for (const auto& r : records) {
        out << r.trial_id << ',' << r.seed << ',' << to_string(r.category) << ',' << to_string(r.method) << ','
            << num(r.noise.sigma) << ',' << num(r.noise.dropout) << ',' << num(r.ok() || r.s_true > 0 ? r.s_true : nan)
            << ',' << num(r.ok() ? r.s_est : nan) << ',' << num(r.ok() ? r.rot_err_deg : nan) << ','
            << num(r.ok() ? r.trans_err_m : nan) << ',' << num(r.ok() ? r.iou : nan) << ',' << num(r.runtime_ms, "%.3f")
            << ',' << r.status << '\n';
    }
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
    out << "category,method,symmetry,noise_sigma,dropout,erosion_radius,outlier_rate,trials,failures,"
           "iou25,iou50,deg10_cm5,deg10_cm10,deg10\n";
    for (const auto& s : rows) {
        const auto& r = s.report;
        out << to_string(s.category) << ',' << to_string(s.method) << ',' << s.symmetry << ',' << num(s.noise.sigma)
            << ',' << num(s.noise.dropout) << ',' << s.noise.erosion_radius << ',' << num(s.noise.outlier_rate) << ','
            << r.trials << ',' << r.failures << ',' << num(r.iou25, "%.4f") << ',' << num(r.iou50, "%.4f") << ','
            << num(r.deg10_cm5, "%.4f") << ',' << num(r.deg10_cm10, "%.4f") << ',' << num(r.deg10, "%.4f") << '\n';
    }
}

void write_summary_svg(const std::vector<SummaryRow>& rows, std::ostream& out) {
    constexpr double W = 640, H = 420, L = 70, R = 200, T = 40, B = 60;
    double xmax = 0.0;
    for (const auto& s : rows) xmax = std::max(xmax, s.noise.sigma);
    if (xmax <= 0.0) xmax = 1.0;
    auto px = [&](double x) { return L + (W - L - R) * x / xmax; };
    auto py = [&](double y) { return H - B - (H - T - B) * y; };

    // One curve per (category, method, symmetry), in first-seen order.
    std::vector<std::string> keys;
    std::map<std::string, std::vector<std::pair<double, double>>> curves;
    for (const auto& s : rows) {
        std::string key = std::string(to_string(s.category)) + " / " + std::string(to_string(s.method));
        if (s.category == Category::mug) key += " (" + s.symmetry + ")";
        if (!curves.count(key)) keys.push_back(key);
        curves[key].emplace_back(s.noise.sigma, s.report.deg10_cm5);
    }

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
        << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << L << "\" y=\"24\" font-size=\"14\">10deg 5cm mAP vs NOCS noise sigma</text>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << px(xmax) << "\" y2=\"" << py(0)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << L << "\" y2=\"" << py(1) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double y = k / 4.0, x = xmax * k / 4.0;
        out << "<text x=\"" << L - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << num(y, "%.2f") << "</text>\n";
        out << "<line x1=\"" << L << "\" y1=\"" << py(y) << "\" x2=\"" << px(xmax) << "\" y2=\"" << py(y)
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << px(x) << "\" y=\"" << py(0) + 18 << "\" text-anchor=\"middle\">" << num(x, "%.4g")
            << "</text>\n";
    }
    out << "<text x=\"" << px(xmax / 2) << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">sigma (NOCS units)</text>\n";

    for (std::size_t i = 0; i < keys.size(); ++i) {
        auto pts = curves[keys[i]];
        std::sort(pts.begin(), pts.end());
        const char* color = palette[i % std::size(palette)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : pts) out << num(px(x), "%.2f") << ',' << num(py(y), "%.2f") << ' ';
        out << "\"/>\n";
        for (const auto& [x, y] : pts) {
            out << "<circle cx=\"" << num(px(x), "%.2f") << "\" cy=\"" << num(py(y), "%.2f") << "\" r=\"3\" fill=\""
                << color << "\"/>\n";
        }
        const double ly = T + 16 + 18.0 * static_cast<double>(i);
        out << "<line x1=\"" << W - R + 16 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly - 4
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << W - R + 42 << "\" y=\"" << ly << "\">" << keys[i] << "</text>\n";
    }
    out << "</svg>\n";
}

void write_experiment_outputs(const ExperimentResult& result, const ExperimentConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + cfg.out_dir.string() + ": " + ec.message());
    auto open = [&](const char* name) {
        std::ofstream f(cfg.out_dir / name, std::ios::binary);
        if (!f) throw Error(ErrorCode::Io, "cannot write " + (cfg.out_dir / name).string());
        return f;
    };
    {
        auto f = open("trials.csv");
        write_trials_csv(result.records, f);
    }
    {
        auto f = open("summary.csv");
        write_summary_csv(result.summary, f);
    }
    {
        auto f = open("summary.svg");
        write_summary_svg(result.summary, f);
    }
    {
        auto f = open("config.ini");
        write_experiment_config(cfg, f);
    }
}

std::vector<CsvTrial> read_trials_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::InvalidConfig, "empty trial CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTrialCsvHeader) throw Error(ErrorCode::InvalidConfig, "unexpected trial CSV header");

    std::vector<CsvTrial> rows;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 13) throw Error(ErrorCode::InvalidConfig, "row " + std::to_string(row) + ": expected 13 fields");
        CsvTrial t;
        t.category = c[2];
        t.method = c[3];
        t.noise_sigma = parse_cell(c[4], row);
        t.dropout = parse_cell(c[5], row);
        t.errors.failed = c[12] != "ok";
        if (!t.errors.failed) {
            t.errors.rot_err_deg = parse_cell(c[8], row);
            t.errors.trans_err_m = parse_cell(c[9], row);
            t.errors.iou = parse_cell(c[10], row);
        }
        rows.push_back(t);
    }
    return rows;
}

std::vector<CsvGroupReport> evaluate_trials(const std::vector<CsvTrial>& rows) {
    std::vector<CsvGroupReport> out;
    std::vector<std::vector<TrialErrors>> groups;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const CsvGroupReport& g) {
            return g.category == r.category && g.method == r.method && g.noise_sigma == r.noise_sigma &&
                   g.dropout == r.dropout;
        });
        if (it == out.end()) {
            out.push_back({r.category, r.method, r.noise_sigma, r.dropout, {}});
            groups.emplace_back();
            it = out.end() - 1;
        }
        groups[static_cast<std::size_t>(it - out.begin())].push_back(r.errors);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].report = map_at_thresholds(groups[i]);
    return out;
}

}  // namespace stereonocs::harness
