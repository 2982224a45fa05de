// Command-line front end: scene generation, rendering, pose estimation,
// evaluation and the synthetic benchmark.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "stereonocs/error.hpp"
#include "stereonocs/harness/experiment.hpp"

namespace fs = std::filesystem;
using namespace stereonocs;
using namespace stereonocs::harness;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string config;
    std::string out = ".";
    int jobs = 1;
    bool quiet = false;
};

ExperimentConfig base_config(const Globals& g) {
    return g.config.empty() ? ExperimentConfig{} : load_experiment_config(g.config);
}

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + p.string() + ": " + ec.message());
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + p.string());
    return in;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
    return out;
}

// "r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz s"
std::string format_pose(const Pose& p) {
    std::string s;
    char buf[32];
    const Mat3& r = p.rotation.matrix();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g ", r(i, j));
            s += buf;
        }
    }
    for (int i = 0; i < 3; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g ", p.translation[i]);
        s += buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", p.scale);
    return s + buf;
}

Scene load_scene_dir(const fs::path& dir) {
    auto in = open_in(dir / "scene.ini");
    Scene s = read_scene_ini(in);
    s.object.mesh = read_obj(dir / "mesh.obj");
    return s;
}

void cmd_gen(const Globals& g, const std::string& category) {
    ExperimentConfig cfg = base_config(g);
    const Scene s = sample_scene(cfg.scene_for(parse_category(category)), g.seed);
    ensure_dir(g.out);
    write_obj(s.object.mesh, fs::path(g.out) / "mesh.obj");
    auto out = open_out(fs::path(g.out) / "scene.ini");
    write_scene_ini(s, out);
    if (!g.quiet) std::cout << "wrote " << (fs::path(g.out) / "mesh.obj").string() << " and scene.ini\n";
}

void cmd_render(const Globals& g, const std::string& in_dir, const std::string& category, double sigma,
                double dropout) {
    std::optional<Scene> scene;
    if (!in_dir.empty()) {
        scene = load_scene_dir(in_dir);
    } else {
        scene = sample_scene(base_config(g).scene_for(parse_category(category)), g.seed);
    }
    NoiseModel noise;
    noise.sigma = sigma;
    noise.dropout = dropout;
    const StereoMaps maps = corrupt(render_scene_nocs(*scene, g.jobs).maps(), noise, mix_seed(g.seed, 1000));

    ensure_dir(g.out);
    const fs::path out(g.out);
    write_nocs_map(maps.left_front, out / "left_front.nocs");
    write_nocs_map(maps.left_back, out / "left_back.nocs");
    write_nocs_map(maps.right_front, out / "right_front.nocs");
    write_nocs_map(maps.right_back, out / "right_back.nocs");
    if (in_dir.empty()) {
        write_obj(scene->object.mesh, out / "mesh.obj");
        auto f = open_out(out / "scene.ini");
        write_scene_ini(*scene, f);
    }
    if (!g.quiet) {
        std::cout << "left mask " << maps.left_front.masked_count() << " px, right mask "
                  << maps.right_front.masked_count() << " px\n";
    }
}

void cmd_estimate(const Globals& g, const std::string& maps_dir, const std::string& rig_path, const std::string& method) {
    const fs::path dir(maps_dir);
    StereoMaps maps{read_nocs_map(dir / "left_front.nocs"), read_nocs_map(dir / "left_back.nocs"),
                    read_nocs_map(dir / "right_front.nocs"), read_nocs_map(dir / "right_back.nocs")};
    auto in = open_in(rig_path.empty() ? dir / "scene.ini" : fs::path(rig_path));
    const StereoRig rig = read_rig_ini(in);
    const ExperimentConfig cfg = base_config(g);
    const Pose pose = estimate_with(parse_method(method), maps, rig, cfg.solver, g.seed);
    std::cout << format_pose(pose) << '\n';
}

void print_report_header() {
    std::printf("%-8s %-16s %-8s %8s %8s %6s %7s %7s %9s %10s %7s\n", "category", "method", "symmetry", "sigma",
                "dropout", "trials", "3D25", "3D50", "10deg5cm", "10deg10cm", "10deg");
}

void print_report(const std::string& cat, const std::string& method, const std::string& sym, double sigma,
                  double dropout, const EvalReport& r) {
    std::printf("%-8s %-16s %-8s %8.4g %8.4g %6zu %7.3f %7.3f %9.3f %10.3f %7.3f\n", cat.c_str(), method.c_str(),
                sym.c_str(), sigma, dropout, r.trials, r.iou25, r.iou50, r.deg10_cm5, r.deg10_cm10, r.deg10);
}

void cmd_eval(const Globals& g, const std::string& csv) {
    auto in = open_in(csv.empty() ? fs::path(g.out) / "trials.csv" : fs::path(csv));
    const auto groups = evaluate_trials(read_trials_csv(in));
    print_report_header();
    for (const auto& gr : groups) print_report(gr.category, gr.method, "-", gr.noise_sigma, gr.dropout, gr.report);
}

void cmd_bench(const Globals& g, const CLI::App& app) {
    ExperimentConfig cfg = base_config(g);
    if (app.count("--seed")) cfg.seed = g.seed;
    if (app.count("--jobs")) cfg.jobs = g.jobs;
    if (app.count("--out")) cfg.out_dir = g.out;
    const ExperimentResult res = run_experiment(cfg);
    write_experiment_outputs(res, cfg);
    if (g.quiet) return;
    print_report_header();
    for (const auto& s : res.summary) {
        print_report(std::string(to_string(s.category)), std::string(to_string(s.method)), s.symmetry, s.noise.sigma,
                     s.noise.dropout, s.report);
    }
    std::cout << "outputs in " << cfg.out_dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stereo NOCS pose estimation toolkit"};
    app.fallthrough();
    app.require_subcommand(1);

    Globals g;
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--config", g.config, "Experiment config file");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    std::string category = "bottle";
    auto* gen = app.add_subcommand("gen", "Sample a scene; write mesh.obj and scene.ini");
    gen->add_option("--category", category, "bottle, mug or cup");

    std::string in_dir;
    double sigma = 0.0, dropout = 0.0;
    auto* render = app.add_subcommand("render", "Render the four NOCS maps of a scene");
    render->add_option("--in", in_dir, "Directory written by gen (otherwise sample from --seed)");
    render->add_option("--category", category, "bottle, mug or cup");
    render->add_option("--sigma", sigma, "Gaussian NOCS noise");
    render->add_option("--dropout", dropout, "Pixel dropout rate");

    std::string maps_dir, rig_path, method = "decoupled";
    auto* estimate = app.add_subcommand("estimate", "Estimate a pose from four NOCS maps");
    estimate->add_option("--maps", maps_dir, "Directory with *_front.nocs / *_back.nocs")->required();
    estimate->add_option("--rig", rig_path, "Rig file ([left], [right], [extrinsics]); default maps/scene.ini");
    estimate->add_option("--method", method, "decoupled, decoupled_front or joint");
    estimate->footer("Output: r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz s (R row-major, t in meters)");

    std::string csv;
    auto* eval = app.add_subcommand("eval", "Recompute mAP tables from a trial CSV");
    eval->add_option("--csv", csv, "Trial CSV (default <out>/trials.csv)");

    auto* bench = app.add_subcommand("bench", "Run the synthetic benchmark");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) cmd_gen(g, category);
        if (render->parsed()) cmd_render(g, in_dir, category, sigma, dropout);
        if (estimate->parsed()) cmd_estimate(g, maps_dir, rig_path, method);
        if (eval->parsed()) cmd_eval(g, csv);
        if (bench->parsed()) cmd_bench(g, app);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
