#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "stereonocs/geometry.hpp"
#include "stereonocs/raycast.hpp"

namespace stereonocs {

enum class NocsView : std::uint8_t { front = 0, back = 1 };

/// Dense per-pixel NOCS coordinates with an object mask. Coordinates are
/// stored as 32-bit floats (the on-disk precision). Background pixels hold
/// (0,0,0).
class NocsMap {
public:
    NocsMap() = default;
    NocsMap(int height, int width, NocsView view);

    int height() const { return height_; }
    int width() const { return width_; }
    NocsView view() const { return view_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }

    bool masked(int row, int col) const { return mask_[index(row, col)] != 0; }
    NocsPoint at(int row, int col) const;
    /// Marks the pixel as object and stores q (rounded to float).
    void set(int row, int col, const NocsPoint& q);
    void clear(int row, int col);

    std::size_t masked_count() const;

    // Raw storage, row-major; coords are x,y,z interleaved; mask is 0/1.
    const std::vector<float>& coords() const { return coords_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    std::vector<float>& coords() { return coords_; }
    std::vector<std::uint8_t>& mask() { return mask_; }

    bool operator==(const NocsMap& o) const;

private:
    std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width_ + col; }

    int height_ = 0;
    int width_ = 0;
    NocsView view_ = NocsView::front;
    std::vector<float> coords_;
    std::vector<std::uint8_t> mask_;
};

struct RenderOptions {
    int jobs = 1;
};

/// Front and back maps from one pass; they share the hit test, so their masks
/// are identical. Distances are camera-frame (meters) to the nearest and
/// farthest hit, 0 for background.
struct NocsRender {
    NocsMap front;
    NocsMap back;
    std::vector<double> front_distance;
    std::vector<double> back_distance;
};

/// Casts one ray through every pixel center, intersects it with the NOCS mesh
/// placed by `pose`, and records the NOCS coordinate of the nearest (front)
/// and farthest (back) hit.
NocsRender render_nocs_views(const MeshRaycaster& nocs_mesh, const Pose& pose, const CameraIntrinsics& K,
                             const RenderOptions& opts = {});

NocsMap render_front_nocs(const TriangleMesh& nocs_mesh, const Pose& pose, const CameraIntrinsics& K);
NocsMap render_back_nocs(const TriangleMesh& nocs_mesh, const Pose& pose, const CameraIntrinsics& K);

// Binary format, little-endian:
//   "NOCS" | u8 version (1) | u32 height | u32 width | u8 view (0 front, 1 back)
//   | height*width*3 f32 (row-major, xyz interleaved) | height*width u8 mask (0 or 255)
inline constexpr std::uint8_t kNocsFormatVersion = 1;

void write_nocs_map(const NocsMap& map, std::ostream& out);
void write_nocs_map(const NocsMap& map, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_nocs_map(const NocsMap& map);

/// Throws BadMagic, VersionMismatch, TruncatedFile or MalformedFile.
NocsMap decode_nocs_map(const std::vector<std::uint8_t>& bytes);
NocsMap read_nocs_map(std::istream& in);
NocsMap read_nocs_map(const std::filesystem::path& path);

}  // namespace stereonocs
