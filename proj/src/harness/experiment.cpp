#include "stereonocs/harness/experiment.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "stereonocs/error.hpp"

namespace stereonocs::harness {

std::uint64_t mix_seed(std::uint64_t state, std::uint64_t index) {
    std::uint64_t z = state + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, Category c, std::size_t index) {
    return mix_seed(mix_seed(master, static_cast<std::uint64_t>(c)), index);
}

SymmetrySpec default_symmetry(Category c) {
    return c == Category::mug ? SymmetrySpec::none() : SymmetrySpec::continuous(Vec3::UnitY());
}

TrialErrors TrialRecord::errors(bool axial) const {
    TrialErrors e;
    e.failed = !ok();
    if (!e.failed) {
        e.iou = iou;
        e.rot_err_deg = axial ? rot_err_axial_deg : rot_err_deg;
        e.trans_err_m = trans_err_m;
    }
    return e;
}

Pose estimate_with(Method m, const StereoMaps& maps, const StereoRig& rig, const DecoupledConfig& solver,
                   std::uint64_t seed) {
    DecoupledConfig cfg = solver;
    cfg.ransac.seed = seed;
    cfg.scale.seed = mix_seed(seed, 1);
    switch (m) {
        case Method::decoupled:
            cfg.back_for_pnp = true;
            return estimate_pose_decoupled(maps.left_front, maps.left_back, maps.right_front, maps.right_back, rig, cfg)
                .pose;
        case Method::decoupled_front:
            cfg.back_for_pnp = false;
            return estimate_pose_decoupled(maps.left_front, maps.left_back, maps.right_front, maps.right_back, rig, cfg)
                .pose;
        case Method::joint:
            return estimate_pose_joint(maps.left_front, maps.right_front, rig, cfg.match_eps).pose;
    }
    throw Error(ErrorCode::InvalidParams, "unknown method");
}

namespace {

std::string status_of(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) return std::string(to_string(err->code()));
    return "Exception";
}

// All records of one (category, trial) work item.
std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, Category c, std::size_t index) {
    const std::uint64_t seed = trial_seed(cfg.seed, c, index);
    std::vector<TrialRecord> out;
    auto blank = [&](std::size_t level, Method m) {
        TrialRecord r;
        r.trial_id = index;
        r.seed = seed;
        r.category = c;
        r.method = m;
        r.level = level;
        r.noise = cfg.levels[level];
        return r;
    };

    std::optional<Scene> scene;
    std::optional<SceneRender> render;
    std::string scene_status;
    try {
        scene = sample_scene(cfg.scene_for(c), seed);
        render = render_scene_nocs(*scene, 1);
    } catch (const std::exception& e) {
        scene_status = status_of(e);
    }

    for (std::size_t level = 0; level < cfg.levels.size(); ++level) {
        const std::uint64_t noise_seed = mix_seed(seed, 1000 + level);
        std::optional<StereoMaps> maps;
        if (render) maps = corrupt(render->maps(), cfg.levels[level], noise_seed);
        for (Method m : cfg.methods) {
            TrialRecord r = blank(level, m);
            if (!scene) {
                r.status = scene_status;
                out.push_back(std::move(r));
                continue;
            }
            r.s_true = scene->pose.scale;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const Pose est = estimate_with(m, *maps, scene->rig, cfg.solver, noise_seed);
                r.estimate = est;
                r.s_est = est.scale;
                r.rot_err_deg = rotation_error_deg(est.rotation, scene->pose.rotation, default_symmetry(c));
                r.rot_err_axial_deg = rotation_error_deg(est.rotation, scene->pose.rotation, SymmetrySpec::continuous());
                r.trans_err_m = translation_error_m(est, scene->pose);
                r.iou = iou_3d(box_from_pose(est, scene->nocs_extents), box_from_pose(scene->pose, scene->nocs_extents));
            } catch (const std::exception& e) {
                r.status = status_of(e);
            }
            if (cfg.record_timing) {
                r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t items = cfg.categories.size() * cfg.trials;
    std::vector<std::vector<TrialRecord>> per_item(items);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < items; i = next++) {
            per_item[i] = run_trial(cfg, cfg.categories[i / cfg.trials], i % cfg.trials);
        }
    };
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(items)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    ExperimentResult res;
    for (auto& v : per_item) {
        for (auto& r : v) res.records.push_back(std::move(r));
    }
    res.summary = summarize(res.records, cfg);
    return res;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, const ExperimentConfig& cfg) {
    std::vector<SummaryRow> rows;
    for (Category c : cfg.categories) {
        for (Method m : cfg.methods) {
            for (std::size_t level = 0; level < cfg.levels.size(); ++level) {
                std::vector<TrialErrors> plain, axial;
                for (const auto& r : records) {
                    if (r.category != c || r.method != m || r.level != level) continue;
                    plain.push_back(r.errors(false));
                    axial.push_back(r.errors(true));
                }
                if (plain.empty()) continue;
                const bool symmetric = default_symmetry(c).kind != SymmetrySpec::Kind::none;
                rows.push_back({c, m, symmetric ? "axial" : "none", level, cfg.levels[level], map_at_thresholds(plain)});
                // Mugs are reported both ways.
                if (!symmetric) rows.push_back({c, m, "axial", level, cfg.levels[level], map_at_thresholds(axial)});
            }
        }
    }
    return rows;
}

}  // namespace stereonocs::harness
