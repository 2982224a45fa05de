#include "stereonocs/harness/shapes.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "stereonocs/error.hpp"

namespace stereonocs::harness {

std::string_view to_string(Category c) {
    switch (c) {
        case Category::bottle: return "bottle";
        case Category::mug: return "mug";
        case Category::cup: return "cup";
    }
    return "unknown";
}

Category parse_category(std::string_view name) {
    if (name == "bottle") return Category::bottle;
    if (name == "mug") return Category::mug;
    if (name == "cup") return Category::cup;
    throw Error(ErrorCode::InvalidConfig, "unknown category '" + std::string(name) + "'");
}

ShapeRanges ShapeRanges::defaults(Category c) {
    ShapeRanges r;
    switch (c) {
        case Category::bottle:
            r.height = {0.16, 0.28};
            r.radius = {0.028, 0.045};
            break;
        case Category::mug:
            r.height = {0.08, 0.12};
            r.radius = {0.035, 0.05};
            break;
        case Category::cup:
            r.height = {0.08, 0.14};
            r.radius = {0.025, 0.035};
            r.wall = {0.003, 0.006};
            break;
    }
    return r;
}

void ShapeRanges::validate() const {
    for (const Range* rg : {&height, &radius, &neck_radius_ratio, &neck_fraction, &top_radius_ratio, &wall,
                            &handle_radius_ratio, &handle_tube_ratio}) {
        if (!(rg->first > 0.0) || !(rg->first <= rg->second) || !std::isfinite(rg->second)) {
            throw Error(ErrorCode::InvalidConfig, "shape ranges must be positive and ordered");
        }
    }
}

ShapeParams sample_shape_params(Category c, const ShapeRanges& r, std::mt19937_64& rng) {
    auto draw = [&rng](const Range& range) { return std::uniform_real_distribution<double>(range.first, range.second)(rng); };
    ShapeParams p;
    p.height = draw(r.height);
    p.radius = draw(r.radius);
    switch (c) {
        case Category::bottle:
            p.neck_radius = p.radius * draw(r.neck_radius_ratio);
            p.neck_fraction = draw(r.neck_fraction);
            break;
        case Category::cup:
            p.top_radius = p.radius * draw(r.top_radius_ratio);
            p.wall = draw(r.wall);
            break;
        case Category::mug:
            p.wall = draw(r.wall);
            p.handle_radius = p.height * draw(r.handle_radius_ratio);
            p.handle_tube = p.wall * draw(r.handle_tube_ratio);
            break;
    }
    return p;
}

namespace {

struct ProfilePoint {
    double r, y;
};

// Revolves a profile about +y. The profile runs from a point on the axis to
// another point on the axis; intermediate points become rings, the end points
// become poles, so the result is closed.
TriangleMesh revolve(const std::vector<ProfilePoint>& profile, int segments) {
    TriangleMesh m;
    const auto n = static_cast<std::uint32_t>(segments);
    const std::size_t rings = profile.size() - 2;
    m.vertices.push_back({0.0, profile.front().y, 0.0});
    for (std::size_t k = 1; k + 1 < profile.size(); ++k) {
        for (std::uint32_t j = 0; j < n; ++j) {
            const double a = 2.0 * kPi * j / n;
            m.vertices.push_back({profile[k].r * std::cos(a), profile[k].y, profile[k].r * std::sin(a)});
        }
    }
    const auto top = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.push_back({0.0, profile.back().y, 0.0});

    auto ring = [n](std::size_t k, std::uint32_t j) { return 1 + static_cast<std::uint32_t>(k) * n + j % n; };
    for (std::uint32_t j = 0; j < n; ++j) m.triangles.push_back({0, ring(0, j), ring(0, j + 1)});
    for (std::size_t k = 0; k + 1 < rings; ++k) {
        for (std::uint32_t j = 0; j < n; ++j) {
            m.triangles.push_back({ring(k, j), ring(k + 1, j), ring(k + 1, j + 1)});
            m.triangles.push_back({ring(k, j), ring(k + 1, j + 1), ring(k, j + 1)});
        }
    }
    for (std::uint32_t j = 0; j < n; ++j) m.triangles.push_back({top, ring(rings - 1, j + 1), ring(rings - 1, j)});
    return m;
}

// Tube of radius `tube` along an arc in the x-y plane, closed by flat end caps.
TriangleMesh torus_segment(const Vec3& center, double major, double tube, double a0, double a1, int stations,
                           int sides) {
    TriangleMesh m;
    const auto ns = static_cast<std::uint32_t>(sides);
    for (int i = 0; i <= stations; ++i) {
        const double a = a0 + (a1 - a0) * i / stations;
        const Vec3 radial(std::cos(a), std::sin(a), 0.0);
        for (int j = 0; j < sides; ++j) {
            const double b = 2.0 * kPi * j / sides;
            m.vertices.push_back(center + (major + tube * std::cos(b)) * radial + Vec3(0.0, 0.0, tube * std::sin(b)));
        }
    }
    const auto ring = [ns](int i, std::uint32_t j) { return static_cast<std::uint32_t>(i) * ns + j % ns; };
    for (int i = 0; i < stations; ++i) {
        for (std::uint32_t j = 0; j < ns; ++j) {
            m.triangles.push_back({ring(i, j), ring(i, j + 1), ring(i + 1, j + 1)});
            m.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i + 1, j)});
        }
    }
    for (int end : {0, stations}) {
        const double a = a0 + (a1 - a0) * end / stations;
        const auto c = static_cast<std::uint32_t>(m.vertices.size());
        m.vertices.push_back(center + major * Vec3(std::cos(a), std::sin(a), 0.0));
        for (std::uint32_t j = 0; j < ns; ++j) {
            if (end == 0) {
                m.triangles.push_back({c, ring(end, j + 1), ring(end, j)});
            } else {
                m.triangles.push_back({c, ring(end, j), ring(end, j + 1)});
            }
        }
    }
    return m;
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

}  // namespace

TriangleMesh generate_parametric_mesh(Category c, const ShapeParams& p) {
    require(p.segments >= 8 && p.segments % 4 == 0, "segments must be a multiple of 4, at least 8");
    require(p.height > 0.0 && p.radius > 0.0, "height and radius must be positive");

    switch (c) {
        case Category::bottle: {
            require(p.neck_radius > 0.0 && p.neck_radius <= p.radius, "neck radius must lie in (0, radius]");
            require(p.neck_fraction > 0.0 && p.neck_fraction < 0.8, "neck fraction must lie in (0, 0.8)");
            const double body = p.height * (1.0 - p.neck_fraction);
            const double shoulder = 0.35 * p.height * p.neck_fraction;
            std::vector<ProfilePoint> prof{{0.0, 0.0}, {p.radius, 0.0}, {p.radius, body}};
            // Cosine shoulder between the body and the neck.
            for (int k = 1; k <= 6; ++k) {
                const double f = k / 6.0;
                const double w = 0.5 - 0.5 * std::cos(kPi * f);
                prof.push_back({p.radius + (p.neck_radius - p.radius) * w, body + shoulder * f});
            }
            prof.push_back({p.neck_radius, p.height});
            prof.push_back({0.0, p.height});
            return revolve(prof, p.segments);
        }
        case Category::cup: {
            require(p.top_radius > 0.0, "top radius must be positive");
            require(p.wall > 0.0 && p.wall < 0.5 * std::min(p.radius, p.top_radius) && p.wall < 0.5 * p.height,
                    "wall too thick for the cup");
            const std::vector<ProfilePoint> prof{{0.0, 0.0},
                                                 {p.radius, 0.0},
                                                 {p.top_radius, p.height},
                                                 {p.top_radius - p.wall, p.height},
                                                 {p.radius - p.wall, p.wall},
                                                 {0.0, p.wall}};
            return revolve(prof, p.segments);
        }
        case Category::mug: {
            require(p.wall > 0.0 && p.wall < 0.5 * p.radius && p.wall < 0.5 * p.height, "wall too thick for the mug");
            require(p.handle_tube > 0.0 && p.handle_tube <= 0.4 * p.wall, "handle tube must be at most 0.4 * wall");
            require(p.handle_radius > p.handle_tube && p.handle_radius + p.handle_tube < 0.5 * p.height - p.wall,
                    "handle does not fit between the mug's bottom and rim");
            const std::vector<ProfilePoint> prof{{0.0, 0.0},
                                                 {p.radius, 0.0},
                                                 {p.radius, p.height},
                                                 {p.radius - p.wall, p.height},
                                                 {p.radius - p.wall, p.wall},
                                                 {0.0, p.wall}};
            TriangleMesh body = revolve(prof, p.segments);
            // The arc starts and ends on the wall's mid-surface, so both end caps are buried in the wall.
            const Vec3 center(p.radius - 0.5 * p.wall, 0.5 * p.height, 0.0);
            body.append(torus_segment(center, p.handle_radius, p.handle_tube, -0.5 * kPi, 0.5 * kPi, 24, 12));
            return body;
        }
    }
    throw Error(ErrorCode::InvalidParams, "unknown category");
}

}  // namespace stereonocs::harness
