#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <vector>

#include "stereonocs/geometry.hpp"

namespace stereonocs {

struct AlignedBox3 {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Vec3& p) {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    Vec3 center() const { return 0.5 * (min + max); }
    Vec3 extents() const { return max - min; }
    double diagonal() const { return extents().norm(); }
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;

    /// Throws InvalidMesh unless indices are in range, there is at least one
    /// triangle and all vertices are finite.
    void validate() const;
    AlignedBox3 bounds() const;
    Vec3 vertex(std::size_t tri, int corner) const { return vertices[triangles[tri][corner]]; }

    /// Appends another mesh (indices rebased).
    void append(const TriangleMesh& other);
};

/// Maps metric mesh coordinates into NOCS: q = (x - center) / diagonal + 0.5.
struct NocsNormalization {
    Vec3 center = Vec3::Zero();  // meters
    double diagonal = 1.0;       // meters

    NocsPoint to_nocs(const Vec3& x) const { return (x - center) / diagonal + Vec3::Constant(0.5); }
    Vec3 to_metric(const NocsPoint& q) const { return (q - Vec3::Constant(0.5)) * diagonal + center; }
};

struct NormalizedMesh {
    TriangleMesh mesh;
    NocsNormalization normalization;
};

/// Centers the tight bounding box at (0.5,0.5,0.5) and scales its diagonal to 1.
/// Throws DegenerateMesh when the diagonal is below 1e-12.
NormalizedMesh normalize_mesh_to_nocs(const TriangleMesh& mesh);

/// Every undirected edge is used by exactly two triangles.
bool is_watertight(const TriangleMesh& mesh);

/// Reads `v` and triangular `f` records of a Wavefront OBJ. Face references
/// may carry texture/normal indices (`f 1/2/3 ...`) and negative indices.
/// Faces with more than three vertices are rejected with InvalidMesh.
TriangleMesh read_obj(std::istream& in);
TriangleMesh read_obj(const std::filesystem::path& path);
void write_obj(const TriangleMesh& mesh, std::ostream& out);
void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace stereonocs
