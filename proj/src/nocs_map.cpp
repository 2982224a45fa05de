#include "stereonocs/nocs_map.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <thread>

#include "stereonocs/error.hpp"

namespace stereonocs {

NocsMap::NocsMap(int height, int width, NocsView view) : height_(height), width_(width), view_(view) {
    if (height < 0 || width < 0) throw Error(ErrorCode::InvalidParams, "negative map size");
    coords_.assign(pixel_count() * 3, 0.0f);
    mask_.assign(pixel_count(), 0);
}

NocsPoint NocsMap::at(int row, int col) const {
    const std::size_t i = 3 * index(row, col);
    return {coords_[i], coords_[i + 1], coords_[i + 2]};
}

void NocsMap::set(int row, int col, const NocsPoint& q) {
    const std::size_t i = index(row, col);
    coords_[3 * i] = static_cast<float>(q.x());
    coords_[3 * i + 1] = static_cast<float>(q.y());
    coords_[3 * i + 2] = static_cast<float>(q.z());
    mask_[i] = 1;
}

void NocsMap::clear(int row, int col) {
    const std::size_t i = index(row, col);
    coords_[3 * i] = coords_[3 * i + 1] = coords_[3 * i + 2] = 0.0f;
    mask_[i] = 0;
}

std::size_t NocsMap::masked_count() const {
    return static_cast<std::size_t>(std::count_if(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; }));
}

bool NocsMap::operator==(const NocsMap& o) const {
    if (height_ != o.height_ || width_ != o.width_ || view_ != o.view_ || mask_ != o.mask_) return false;
    // Bitwise comparison so that NaN payloads and signed zeros count.
    return coords_.size() == o.coords_.size() &&
           std::memcmp(coords_.data(), o.coords_.data(), coords_.size() * sizeof(float)) == 0;
}

namespace {

NocsPoint clamp_unit(const NocsPoint& q) { return q.cwiseMax(0.0).cwiseMin(1.0); }

struct PixelRect {
    int row0, row1, col0, col1;  // half-open
};

// Pixels whose rays can hit the mesh lie inside the projection of its bounds.
PixelRect candidate_rect(const TriangleMesh& mesh, const Pose& pose, const CameraIntrinsics& K) {
    const PixelRect full{0, K.height, 0, K.width};
    const AlignedBox3 box = mesh.bounds();
    double umin = INFINITY, umax = -INFINITY, vmin = INFINITY, vmax = -INFINITY;
    for (int c = 0; c < 8; ++c) {
        const Vec3 corner((c & 1) ? box.max.x() : box.min.x(), (c & 2) ? box.max.y() : box.min.y(),
                          (c & 4) ? box.max.z() : box.min.z());
        const Vec3 x = pose.apply(corner);
        if (!(x.z() > kMinDepth)) return full;
        const Pixel p = project_point(x, K);
        umin = std::min(umin, p.u), umax = std::max(umax, p.u);
        vmin = std::min(vmin, p.v), vmax = std::max(vmax, p.v);
    }
    auto lo = [](double x, int n) { return std::clamp(static_cast<int>(std::floor(x)) - 1, 0, n); };
    auto hi = [](double x, int n) { return std::clamp(static_cast<int>(std::ceil(x)) + 2, 0, n); };
    return {lo(vmin, K.height), hi(vmax, K.height), lo(umin, K.width), hi(umax, K.width)};
}

}  // namespace

NocsRender render_nocs_views(const MeshRaycaster& caster, const Pose& pose, const CameraIntrinsics& K,
                             const RenderOptions& opts) {
    if (K.width <= 0 || K.height <= 0) throw Error(ErrorCode::InvalidParams, "intrinsics carry no image size");
    NocsRender out{NocsMap(K.height, K.width, NocsView::front), NocsMap(K.height, K.width, NocsView::back),
                   std::vector<double>(static_cast<std::size_t>(K.height) * K.width, 0.0),
                   std::vector<double>(static_cast<std::size_t>(K.height) * K.width, 0.0)};

    // Rays are cast in the object's NOCS frame: o' = R^T (0 - t) / s and
    // d' = R^T d. Distances along d' are camera distances divided by s.
    const Mat3 rt = pose.rotation.matrix().transpose();
    const Vec3 origin = -(rt * pose.translation) / pose.scale;
    const PixelRect rect = candidate_rect(caster.mesh(), pose, K);

    auto render_rows = [&](int r0, int r1) {
        for (int row = r0; row < r1; ++row) {
            for (int col = rect.col0; col < rect.col1; ++col) {
                const Vec3 dir_cam = pixel_ray_direction({static_cast<double>(col), static_cast<double>(row)}, K);
                const Ray ray(origin, (rt * dir_cam).normalized());
                const HitList hits = caster.intersect(ray);
                if (hits.empty()) continue;
                const std::size_t i = static_cast<std::size_t>(row) * K.width + col;
                out.front.set(row, col, clamp_unit(hits.front().nocs));
                out.back.set(row, col, clamp_unit(hits.back().nocs));
                out.front_distance[i] = pose.scale * hits.front().distance;
                out.back_distance[i] = pose.scale * hits.back().distance;
            }
        }
    };

    const int jobs = std::max(1, std::min(opts.jobs, rect.row1 - rect.row0));
    if (jobs == 1) {
        render_rows(rect.row0, rect.row1);
    } else {
        std::vector<std::thread> workers;
        const int rows = rect.row1 - rect.row0;
        for (int j = 0; j < jobs; ++j) {
            workers.emplace_back(render_rows, rect.row0 + rows * j / jobs, rect.row0 + rows * (j + 1) / jobs);
        }
        for (auto& w : workers) w.join();
    }
    return out;
}

NocsMap render_front_nocs(const TriangleMesh& nocs_mesh, const Pose& pose, const CameraIntrinsics& K) {
    return render_nocs_views(MeshRaycaster(nocs_mesh), pose, K).front;
}

NocsMap render_back_nocs(const TriangleMesh& nocs_mesh, const Pose& pose, const CameraIntrinsics& K) {
    return render_nocs_views(MeshRaycaster(nocs_mesh), pose, K).back;
}

// --- binary I/O -----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'N', 'O', 'C', 'S'};
constexpr std::size_t kHeaderSize = 4 + 1 + 4 + 4 + 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode_nocs_map(const NocsMap& map) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + map.pixel_count() * 13);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    out.push_back(kNocsFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(map.height()));
    put_u32(out, static_cast<std::uint32_t>(map.width()));
    out.push_back(static_cast<std::uint8_t>(map.view()));
    for (float f : map.coords()) put_u32(out, std::bit_cast<std::uint32_t>(f));
    for (std::uint8_t m : map.mask()) out.push_back(m ? 255 : 0);
    return out;
}

NocsMap decode_nocs_map(const std::vector<std::uint8_t>& bytes) {
    const std::size_t magic_len = std::min<std::size_t>(bytes.size(), 4);
    if (!std::equal(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(magic_len), kMagic)) {
        throw Error(ErrorCode::BadMagic, "missing NOCS magic");
    }
    if (bytes.size() < 5) throw Error(ErrorCode::TruncatedFile, "file ends inside the header");
    if (bytes[4] != kNocsFormatVersion) {
        throw Error(ErrorCode::VersionMismatch, "unsupported version " + std::to_string(bytes[4]));
    }
    if (bytes.size() < kHeaderSize) throw Error(ErrorCode::TruncatedFile, "file ends inside the header");
    const std::uint32_t height = get_u32(bytes.data() + 5);
    const std::uint32_t width = get_u32(bytes.data() + 9);
    const std::uint8_t view = bytes[13];
    if (view > 1) throw Error(ErrorCode::MalformedFile, "unknown view tag " + std::to_string(view));
    if (height > (1u << 15) || width > (1u << 15)) throw Error(ErrorCode::MalformedFile, "implausible map size");

    const std::size_t pixels = static_cast<std::size_t>(height) * width;
    const std::size_t expected = kHeaderSize + pixels * 12 + pixels;
    if (bytes.size() < expected) throw Error(ErrorCode::TruncatedFile, "file ends inside the payload");
    if (bytes.size() > expected) throw Error(ErrorCode::MalformedFile, "trailing bytes after payload");

    NocsMap map(static_cast<int>(height), static_cast<int>(width), static_cast<NocsView>(view));
    const std::uint8_t* p = bytes.data() + kHeaderSize;
    for (std::size_t i = 0; i < pixels * 3; ++i, p += 4) map.coords()[i] = std::bit_cast<float>(get_u32(p));
    for (std::size_t i = 0; i < pixels; ++i, ++p) {
        if (*p != 0 && *p != 255) throw Error(ErrorCode::MalformedFile, "mask byte must be 0 or 255");
        map.mask()[i] = *p ? 1 : 0;
    }
    return map;
}

void write_nocs_map(const NocsMap& map, std::ostream& out) {
    const auto bytes = encode_nocs_map(map);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed");
}

void write_nocs_map(const NocsMap& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    write_nocs_map(map, out);
}

NocsMap read_nocs_map(std::istream& in) {
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_nocs_map(bytes);
}

NocsMap read_nocs_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return read_nocs_map(in);
}

}  // namespace stereonocs
