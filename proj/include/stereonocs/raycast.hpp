#pragma once

#include <cstdint>
#include <vector>

#include "stereonocs/mesh.hpp"

namespace stereonocs {

/// Half-line with unit direction (checked to 1e-12 on construction).
class Ray {
public:
    Ray(const Vec3& origin, const Vec3& unit_direction);
    /// Normalizes `direction` first.
    static Ray toward(const Vec3& origin, const Vec3& direction);

    const Vec3& origin() const { return origin_; }
    const Vec3& direction() const { return direction_; }
    Vec3 at(double distance) const { return origin_ + distance * direction_; }

private:
    Vec3 origin_;
    Vec3 direction_;
};

struct RayHit {
    double distance;     // along the ray, in the ray's units
    Vec3 point;          // surface point in mesh coordinates
    NocsPoint nocs;      // barycentric interpolation of the hit triangle's vertices
    std::uint32_t triangle;
};

/// Hits sorted by strictly increasing distance, all beyond kMinHitDistance,
/// with hits closer than kHitMergeTolerance to the previous one dropped.
using HitList = std::vector<RayHit>;

inline constexpr double kMinHitDistance = 1e-9;
inline constexpr double kHitMergeTolerance = 1e-9;

/// Bounding-volume hierarchy over a triangle mesh. Leaves hold triangles in
/// structure-of-arrays blocks that are tested with the SIMD triangle kernel.
/// The mesh is copied; a raycaster is immutable after construction and safe
/// to share between threads.
class MeshRaycaster {
public:
    explicit MeshRaycaster(TriangleMesh mesh);

    HitList intersect(const Ray& ray) const;
    const TriangleMesh& mesh() const { return mesh_; }
    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        AlignedBox3 box;
        std::uint32_t first = 0;  // left child (inner) or first triangle slot (leaf)
        std::uint32_t right = 0;
        std::uint32_t count = 0;  // 0 for inner nodes
    };

    std::uint32_t build(std::vector<std::uint32_t>& order, std::uint32_t begin, std::uint32_t end,
                        const std::vector<Vec3>& centroids);

    TriangleMesh mesh_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> slot_triangle_;  // SoA slot -> original triangle index
    std::vector<double> v0x_, v0y_, v0z_, e1x_, e1y_, e1z_, e2x_, e2y_, e2z_;
};

/// Reference path: tests every triangle with the scalar kernel, no hierarchy.
HitList ray_mesh_intersections_bruteforce(const Ray& ray, const TriangleMesh& mesh);

/// Convenience wrapper building a throwaway hierarchy.
HitList ray_mesh_intersections(const Ray& ray, const TriangleMesh& mesh);

}  // namespace stereonocs
