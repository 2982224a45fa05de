#include <doctest.h>

#include <cstring>
#include <sstream>

#include "stereonocs/error.hpp"
#include "stereonocs/nocs_map.hpp"
#include "test_support.hpp"

using namespace stereonocs;
using namespace stereonocs::testing;

namespace {

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_nocs_map(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("decode succeeded");
    return ErrorCode::Io;
}

struct SphereScene {
    NormalizedMesh sphere = normalize_mesh_to_nocs(uv_sphere(0.05, 24, 48));
    CameraIntrinsics K{300, 300, 32, 32, 65, 65};
    // Sphere center (NOCS 0.5) one meter in front of the camera.
    Pose pose{sphere.normalization.diagonal, Rotation(), Vec3(0, 0, 1) - sphere.normalization.diagonal * Vec3::Constant(0.5)};
};

}  // namespace

TEST_CASE("sphere: front is the near pole, back the antipode") {
    SphereScene s;
    const NocsRender r = render_nocs_views(MeshRaycaster(s.sphere.mesh), s.pose, s.K);
    const double rn = 0.5 / std::sqrt(3.0);  // sphere radius in NOCS units (cube-shaped bounds)
    REQUIRE(r.front.masked(32, 32));
    CHECK((r.front.at(32, 32) - Vec3(0.5, 0.5, 0.5 - rn)).norm() < 1e-6);
    CHECK((r.back.at(32, 32) - Vec3(0.5, 0.5, 0.5 + rn)).norm() < 1e-6);
    CHECK(!r.front.masked(0, 0));
    CHECK(r.front.view() == NocsView::front);
    CHECK(r.back.view() == NocsView::back);
}

TEST_CASE("rendered maps satisfy the per-pixel invariants") {
    SphereScene s;
    std::mt19937_64 rng(4);
    s.pose.rotation = random_rotation(rng);
    s.pose.translation = Vec3(0.01, -0.02, 0.9) - s.pose.scale * (s.pose.rotation * Vec3::Constant(0.5));
    const NocsRender r = render_nocs_views(MeshRaycaster(s.sphere.mesh), s.pose, s.K);
    CHECK(r.front.mask() == r.back.mask());
    std::size_t masked = 0;
    for (int row = 0; row < s.K.height; ++row) {
        for (int col = 0; col < s.K.width; ++col) {
            const std::size_t i = static_cast<std::size_t>(row) * s.K.width + col;
            if (!r.front.masked(row, col)) {
                CHECK(r.front.at(row, col) == Vec3::Zero());
                CHECK(r.back.at(row, col) == Vec3::Zero());
                continue;
            }
            ++masked;
            CHECK(r.back_distance[i] >= r.front_distance[i]);
            for (const NocsMap* m : {&r.front, &r.back}) {
                const NocsPoint q = m->at(row, col);
                CHECK((q.array() >= 0.0).all());
                CHECK((q.array() <= 1.0).all());
                const Pixel p = project_nocs_point(q, s.pose, s.K);
                CHECK(std::hypot(p.u - col, p.v - row) <= 0.5);
            }
        }
    }
    CHECK(masked > 100);
}

TEST_CASE("a single-hit surface gives identical front and back maps") {
    TriangleMesh tri;
    tri.vertices = {Vec3(0, 0, 0.5), Vec3(1, 0, 0.5), Vec3(0, 1, 0.5)};
    tri.triangles = {{0, 1, 2}};
    const NocsRender r = render_nocs_views(MeshRaycaster(tri), Pose(0.1, Rotation(), {-0.05, -0.05, 0.5}),
                                           CameraIntrinsics(200, 200, 15.5, 15.5, 32, 32));
    CHECK(r.front.masked_count() > 0);
    CHECK(r.front.coords() == r.back.coords());
    CHECK(r.front_distance == r.back_distance);
}

TEST_CASE("rendering does not depend on the thread count") {
    SphereScene s;
    const MeshRaycaster rc(s.sphere.mesh);
    const NocsRender a = render_nocs_views(rc, s.pose, s.K, {1});
    const NocsRender b = render_nocs_views(rc, s.pose, s.K, {3});
    CHECK(a.front == b.front);
    CHECK(a.back == b.back);
    CHECK(a.front_distance == b.front_distance);
}

TEST_CASE("binary round-trip is bit-exact") {
    std::mt19937_64 rng(8);
    NocsMap m(7, 9, NocsView::back);
    for (int r = 0; r < 7; ++r) {
        for (int c = 0; c < 9; ++c) {
            if (rng() % 3) m.set(r, c, uniform_vec(rng, 0, 1));
        }
    }
    // Payloads that a value comparison would miss.
    m.coords()[0] = -0.0f;
    std::uint32_t nan_bits = 0x7fc00123u;
    std::memcpy(&m.coords()[1], &nan_bits, 4);

    std::stringstream buf;
    write_nocs_map(m, buf);
    const NocsMap back = read_nocs_map(buf);
    CHECK(back == m);
    CHECK(encode_nocs_map(back) == encode_nocs_map(m));
}

TEST_CASE("malformed files are rejected with specific codes") {
    NocsMap m(2, 3, NocsView::front);
    m.set(1, 1, {0.25, 0.5, 0.75});
    const auto good = encode_nocs_map(m);
    CHECK(decode_nocs_map(good) == m);

    auto bad = good;
    bad[0] = 'X';
    CHECK(decode_error(bad) == ErrorCode::BadMagic);

    bad = good;
    bad[4] = 2;
    CHECK(decode_error(bad) == ErrorCode::VersionMismatch);

    bad = good;
    bad.resize(good.size() - 5);
    CHECK(decode_error(bad) == ErrorCode::TruncatedFile);
    bad.resize(8);
    CHECK(decode_error(bad) == ErrorCode::TruncatedFile);

    bad = good;
    bad[13] = 7;  // view tag
    CHECK(decode_error(bad) == ErrorCode::MalformedFile);

    bad = good;
    bad.back() = 3;  // mask byte
    CHECK(decode_error(bad) == ErrorCode::MalformedFile);
}
