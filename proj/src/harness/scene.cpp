#include "stereonocs/harness/scene.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "stereonocs/error.hpp"
#include "stereonocs/harness/config.hpp"

namespace stereonocs::harness {

void SceneConfig::validate() const {
    shape.validate();
    auto ordered = [](const Range& r) { return std::isfinite(r.first) && std::isfinite(r.second) && r.first <= r.second; };
    if (!ordered(distance) || !(distance.first > 0.0)) throw Error(ErrorCode::InvalidConfig, "distance range must be positive");
    if (!ordered(yaw_deg) || !ordered(pitch_deg) || !ordered(roll_deg)) {
        throw Error(ErrorCode::InvalidConfig, "angle ranges must be ordered");
    }
    if (!(lateral_jitter >= 0.0)) throw Error(ErrorCode::InvalidConfig, "lateral jitter must be >= 0");
    if (!(baseline > 0.0) || !(focal > 0.0)) throw Error(ErrorCode::InvalidConfig, "baseline and focal must be positive");
    if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidConfig, "image size must be positive");
    if (max_retries <= 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be positive");
}

CameraIntrinsics SceneConfig::intrinsics() const {
    return {focal, focal, 0.5 * (width - 1), 0.5 * (height - 1), width, height};
}

Rotation scene_rotation(double yaw_deg, double pitch_deg, double roll_deg) {
    return Rotation::about_x(deg_to_rad(pitch_deg)) * Rotation::about_z(deg_to_rad(roll_deg)) *
           Rotation::about_x(kPi) * Rotation::about_y(deg_to_rad(yaw_deg));
}

bool scene_in_frustum(const Scene& s) {
    // Test the tight box of the NOCS mesh, not the whole unit cube.
    const AlignedBox3 box = s.object.mesh.bounds();
    for (int c = 0; c < 8; ++c) {
        const Vec3 q((c & 1) ? box.max.x() : box.min.x(), (c & 2) ? box.max.y() : box.min.y(),
                     (c & 4) ? box.max.z() : box.min.z());
        for (const auto& [pose, K] : {std::pair{s.pose, s.rig.left}, std::pair{s.rig.right_pose(s.pose), s.rig.right}}) {
            const Vec3 x = pose.apply(q);
            if (!(x.z() > kMinDepth)) return false;
            const Pixel p = project_point(x, K);
            if (p.u < 0.0 || p.u > K.width - 1 || p.v < 0.0 || p.v > K.height - 1) return false;
        }
    }
    return true;
}

Scene sample_scene(const SceneConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    auto draw = [&rng](const Range& r) { return std::uniform_real_distribution<double>(r.first, r.second)(rng); };

    Scene s;
    s.seed = seed;
    s.category = cfg.category;
    s.shape = sample_shape_params(cfg.category, cfg.shape, rng);
    s.object = normalize_mesh_to_nocs(generate_parametric_mesh(cfg.category, s.shape));
    s.nocs_extents = s.object.mesh.bounds().extents();
    const CameraIntrinsics K = cfg.intrinsics();
    s.rig = StereoRig::rectified(K, cfg.baseline);
    const double scale = s.object.normalization.diagonal;
    const Vec3 tight_center = s.object.mesh.bounds().center();

    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
        const Rotation r = scene_rotation(draw(cfg.yaw_deg), draw(cfg.pitch_deg), draw(cfg.roll_deg));
        const double d = draw(cfg.distance);
        const double jx = cfg.lateral_jitter * (2.0 * draw({0.0, 1.0}) - 1.0);
        const double jy = cfg.lateral_jitter * (2.0 * draw({0.0, 1.0}) - 1.0);
        // Center the object between the two cameras.
        const Vec3 center(0.5 * cfg.baseline + jx * d, jy * d, d);
        s.pose = Pose(scale, r, center - scale * (r * tight_center));
        if (scene_in_frustum(s)) return s;
    }
    throw Error(ErrorCode::FrustumPlacementFailed,
                "no placement inside both frusta after " + std::to_string(cfg.max_retries) + " attempts");
}

SceneRender render_scene_nocs(const Scene& scene, int jobs) {
    const MeshRaycaster caster(scene.object.mesh);
    RenderOptions opts;
    opts.jobs = jobs;
    return {render_nocs_views(caster, scene.pose, scene.rig.left, opts),
            render_nocs_views(caster, scene.rig.right_pose(scene.pose), scene.rig.right, opts)};
}

// --- text I/O ---------------------------------------------------------------

namespace {

std::string numbers(const double* v, int n) {
    std::string s;
    char buf[32];
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        s += (i ? " " : "") + std::string(buf);
    }
    return s;
}

std::string numbers(const Vec3& v) { return numbers(v.data(), 3); }

std::string numbers(const Mat3& m) {
    const Eigen::Matrix<double, 3, 3, Eigen::RowMajor> r = m;
    return numbers(r.data(), 9);
}

void write_camera(const char* name, const CameraIntrinsics& K, std::ostream& out) {
    const double v[4] = {K.fx, K.fy, K.cx, K.cy};
    out << '[' << name << "]\n"
        << "fx = " << numbers(v, 1) << "\nfy = " << numbers(v + 1, 1) << "\ncx = " << numbers(v + 2, 1)
        << "\ncy = " << numbers(v + 3, 1) << "\nwidth = " << K.width << "\nheight = " << K.height << "\n\n";
}

class SectionReader {
public:
    SectionReader(const IniDocument& doc, const std::string& name) : name_(name) {
        const auto it = doc.sections.find(name);
        if (it == doc.sections.end()) throw Error(ErrorCode::InvalidConfig, "missing section [" + name + "]");
        keys_ = it->second;
    }

    std::string text(const std::string& key) {
        const auto it = keys_.find(key);
        if (it == keys_.end()) throw Error(ErrorCode::InvalidConfig, "[" + name_ + "] missing key '" + key + "'");
        std::string v = it->second;
        keys_.erase(it);
        return v;
    }

    std::vector<double> values(const std::string& key, std::size_t n) {
        std::istringstream in(text(key));
        std::vector<double> out;
        double x;
        while (in >> x) out.push_back(x);
        if (!in.eof() || out.size() != n) {
            throw Error(ErrorCode::InvalidConfig, "[" + name_ + "] " + key + ": expected " + std::to_string(n) + " numbers");
        }
        return out;
    }

    double value(const std::string& key) { return values(key, 1)[0]; }
    Vec3 vec(const std::string& key) {
        const auto v = values(key, 3);
        return {v[0], v[1], v[2]};
    }
    Mat3 mat(const std::string& key) {
        const auto v = values(key, 9);
        Mat3 m;
        m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
        return m;
    }

    void finish() const {
        if (!keys_.empty()) throw Error(ErrorCode::InvalidConfig, "[" + name_ + "] unknown key '" + keys_.begin()->first + "'");
    }

private:
    std::string name_;
    std::map<std::string, std::string> keys_;
};

CameraIntrinsics read_camera(const IniDocument& doc, const std::string& name) {
    SectionReader r(doc, name);
    CameraIntrinsics K(r.value("fx"), r.value("fy"), r.value("cx"), r.value("cy"), static_cast<int>(r.value("width")),
                       static_cast<int>(r.value("height")));
    r.finish();
    return K;
}

StereoRig rig_from(const IniDocument& doc) {
    const CameraIntrinsics kl = read_camera(doc, "left");
    const CameraIntrinsics kr = read_camera(doc, "right");
    SectionReader e(doc, "extrinsics");
    const Mat3 r = e.mat("rotation");
    const Vec3 t = e.vec("translation");
    e.finish();
    try {
        return StereoRig(kl, kr, Rotation(r), t);
    } catch (const Error& err) {
        throw Error(ErrorCode::InvalidConfig, err.what());
    }
}

}  // namespace

void write_scene_ini(const Scene& s, std::ostream& out) {
    out << "[scene]\n"
        << "category = " << to_string(s.category) << "\n"
        << "seed = " << s.seed << "\n"
        << "scale = " << numbers(&s.pose.scale, 1) << "\n"
        << "rotation = " << numbers(s.pose.rotation.matrix()) << "\n"
        << "translation = " << numbers(s.pose.translation) << "\n"
        << "nocs_center = " << numbers(s.object.normalization.center) << "\n"
        << "nocs_diagonal = " << numbers(&s.object.normalization.diagonal, 1) << "\n"
        << "nocs_extents = " << numbers(s.nocs_extents) << "\n\n";
    write_camera("left", s.rig.left, out);
    write_camera("right", s.rig.right, out);
    out << "[extrinsics]\n"
        << "rotation = " << numbers(s.rig.r_lr.matrix()) << "\n"
        << "translation = " << numbers(s.rig.t_lr) << "\n";
}

Scene read_scene_ini(std::istream& in) {
    const IniDocument doc = parse_ini(in);
    for (const auto& [name, keys] : doc.sections) {
        if (name != "scene" && name != "left" && name != "right" && name != "extrinsics") {
            throw Error(ErrorCode::InvalidConfig, "unknown section [" + name + "]");
        }
    }
    Scene s;
    SectionReader r(doc, "scene");
    s.category = parse_category(r.text("category"));
    s.seed = std::stoull(r.text("seed"));
    const double scale = r.value("scale");
    const Mat3 rot = r.mat("rotation");
    const Vec3 t = r.vec("translation");
    s.object.normalization.center = r.vec("nocs_center");
    s.object.normalization.diagonal = r.value("nocs_diagonal");
    s.nocs_extents = r.vec("nocs_extents");
    r.finish();
    try {
        s.pose = Pose(scale, Rotation(rot), t);
    } catch (const Error& err) {
        throw Error(ErrorCode::InvalidConfig, err.what());
    }
    s.rig = rig_from(doc);
    return s;
}

StereoRig read_rig_ini(std::istream& in) {
    const IniDocument doc = parse_ini(in);
    return rig_from(doc);
}

}  // namespace stereonocs::harness
