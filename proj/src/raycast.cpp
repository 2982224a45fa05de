#include "stereonocs/raycast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stereonocs/error.hpp"
#include "stereonocs/simd/kernels.hpp"

namespace stereonocs {

namespace {

constexpr std::uint32_t kLeafSize = 8;

struct RawHit {
    double t;
    double u;
    double v;
    std::uint32_t triangle;
};

bool ray_hits_box(const Vec3& o, const Vec3& d, const AlignedBox3& box) {
    double t_near = 0.0;
    double t_far = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < box.min[a] || o[a] > box.max[a]) return false;
            continue;
        }
        double t0 = (box.min[a] - o[a]) / d[a];
        double t1 = (box.max[a] - o[a]) / d[a];
        if (t0 > t1) std::swap(t0, t1);
        t_near = std::max(t_near, t0);
        t_far = std::min(t_far, t1);
        if (t_near > t_far) return false;
    }
    return true;
}

HitList finalize(const Ray& ray, const TriangleMesh& mesh, std::vector<RawHit>& raw) {
    std::sort(raw.begin(), raw.end(), [](const RawHit& a, const RawHit& b) {
        return a.t < b.t || (a.t == b.t && a.triangle < b.triangle);
    });
    HitList hits;
    hits.reserve(raw.size());
    for (const RawHit& h : raw) {
        if (!hits.empty() && h.t - hits.back().distance <= kHitMergeTolerance) continue;
        const auto& tri = mesh.triangles[h.triangle];
        const NocsPoint q = (1.0 - h.u - h.v) * mesh.vertices[tri[0]] + h.u * mesh.vertices[tri[1]] +
                            h.v * mesh.vertices[tri[2]];
        hits.push_back({h.t, ray.at(h.t), q, h.triangle});
    }
    return hits;
}

simd::RayDesc describe(const Ray& ray) {
    const Vec3& o = ray.origin();
    const Vec3& d = ray.direction();
    return {o.x(), o.y(), o.z(), d.x(), d.y(), d.z()};
}

}  // namespace

Ray::Ray(const Vec3& origin, const Vec3& unit_direction) : origin_(origin), direction_(unit_direction) {
    if (!origin.allFinite() || !unit_direction.allFinite() || std::abs(unit_direction.norm() - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidParams, "ray direction must be a finite unit vector");
    }
}

Ray Ray::toward(const Vec3& origin, const Vec3& direction) { return Ray(origin, direction.normalized()); }

MeshRaycaster::MeshRaycaster(TriangleMesh mesh) : mesh_(std::move(mesh)) {
    mesh_.validate();
    const auto n = static_cast<std::uint32_t>(mesh_.triangles.size());
    std::vector<Vec3> centroids(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        centroids[i] = (mesh_.vertex(i, 0) + mesh_.vertex(i, 1) + mesh_.vertex(i, 2)) / 3.0;
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    nodes_.reserve(2 * (n / kLeafSize + 1));
    build(order, 0, n, centroids);

    slot_triangle_ = order;
    for (auto* arr : {&v0x_, &v0y_, &v0z_, &e1x_, &e1y_, &e1z_, &e2x_, &e2y_, &e2z_}) arr->resize(n);
    for (std::uint32_t s = 0; s < n; ++s) {
        const std::uint32_t t = order[s];
        const Vec3 v0 = mesh_.vertex(t, 0);
        const Vec3 e1 = mesh_.vertex(t, 1) - v0;
        const Vec3 e2 = mesh_.vertex(t, 2) - v0;
        v0x_[s] = v0.x(), v0y_[s] = v0.y(), v0z_[s] = v0.z();
        e1x_[s] = e1.x(), e1y_[s] = e1.y(), e1z_[s] = e1.z();
        e2x_[s] = e2.x(), e2y_[s] = e2.y(), e2z_[s] = e2.z();
    }
}

std::uint32_t MeshRaycaster::build(std::vector<std::uint32_t>& order, std::uint32_t begin, std::uint32_t end,
                                   const std::vector<Vec3>& centroids) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();

    AlignedBox3 box;
    AlignedBox3 centroid_box;
    for (std::uint32_t i = begin; i < end; ++i) {
        for (int c = 0; c < 3; ++c) box.extend(mesh_.vertex(order[i], c));
        centroid_box.extend(centroids[order[i]]);
    }
    // Pad so that rounding in the slab test can never cull a triangle the
    // kernel would report.
    const double pad = 1e-9 * std::max(1.0, std::max(box.min.cwiseAbs().maxCoeff(), box.max.cwiseAbs().maxCoeff()));
    box.min.array() -= pad;
    box.max.array() += pad;
    nodes_[index].box = box;

    if (end - begin <= kLeafSize) {
        nodes_[index].first = begin;
        nodes_[index].count = end - begin;
        return index;
    }

    int axis = 0;
    centroid_box.extents().maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         return centroids[a][axis] < centroids[b][axis] ||
                                (centroids[a][axis] == centroids[b][axis] && a < b);
                     });
    const std::uint32_t left = build(order, begin, mid, centroids);
    const std::uint32_t right = build(order, mid, end, centroids);
    nodes_[index].first = left;
    nodes_[index].right = right;
    nodes_[index].count = 0;
    return index;
}

HitList MeshRaycaster::intersect(const Ray& ray) const {
    const simd::RayDesc desc = describe(ray);
    std::vector<RawHit> raw;
    double t[kLeafSize], u[kLeafSize], v[kLeafSize];
    std::uint8_t hit[kLeafSize];

    std::uint32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const std::uint32_t ni = stack[--top];
        const Node& node = nodes_[ni];
        if (!ray_hits_box(ray.origin(), ray.direction(), node.box)) continue;
        if (node.count > 0) {
            const std::uint32_t s = node.first;
            simd::TriangleSoA block{v0x_.data() + s, v0y_.data() + s, v0z_.data() + s,
                                    e1x_.data() + s, e1y_.data() + s, e1z_.data() + s,
                                    e2x_.data() + s, e2y_.data() + s, e2z_.data() + s, node.count};
            simd::intersect_triangles(desc, block, kMinHitDistance, t, u, v, hit);
            for (std::uint32_t k = 0; k < node.count; ++k) {
                if (hit[k]) raw.push_back({t[k], u[k], v[k], slot_triangle_[s + k]});
            }
            continue;
        }
        stack[top++] = node.right;
        stack[top++] = node.first;
    }
    return finalize(ray, mesh_, raw);
}

HitList ray_mesh_intersections_bruteforce(const Ray& ray, const TriangleMesh& mesh) {
    mesh.validate();
    const simd::RayDesc desc = describe(ray);
    std::vector<RawHit> raw;
    for (std::uint32_t i = 0; i < mesh.triangles.size(); ++i) {
        const Vec3 v0 = mesh.vertex(i, 0);
        const Vec3 e1 = mesh.vertex(i, 1) - v0;
        const Vec3 e2 = mesh.vertex(i, 2) - v0;
        const double v0x = v0.x(), v0y = v0.y(), v0z = v0.z();
        const double e1x = e1.x(), e1y = e1.y(), e1z = e1.z();
        const double e2x = e2.x(), e2y = e2.y(), e2z = e2.z();
        simd::TriangleSoA one{&v0x, &v0y, &v0z, &e1x, &e1y, &e1z, &e2x, &e2y, &e2z, 1};
        double t, u, v;
        std::uint8_t hit;
        simd::scalar::intersect_triangles(desc, one, kMinHitDistance, &t, &u, &v, &hit);
        if (hit) raw.push_back({t, u, v, i});
    }
    return finalize(ray, mesh, raw);
}

HitList ray_mesh_intersections(const Ray& ray, const TriangleMesh& mesh) {
    return MeshRaycaster(mesh).intersect(ray);
}

}  // namespace stereonocs
