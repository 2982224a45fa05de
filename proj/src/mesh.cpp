#include "stereonocs/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "stereonocs/error.hpp"

namespace stereonocs {

void TriangleMesh::validate() const {
    if (triangles.empty()) throw Error(ErrorCode::InvalidMesh, "mesh has no triangles");
    for (const auto& v : vertices) {
        if (!v.allFinite()) throw Error(ErrorCode::InvalidMesh, "non-finite vertex");
    }
    for (const auto& t : triangles) {
        for (auto idx : t) {
            if (idx >= vertices.size()) throw Error(ErrorCode::InvalidMesh, "triangle index out of range");
        }
    }
}

AlignedBox3 TriangleMesh::bounds() const {
    AlignedBox3 box;
    for (const auto& v : vertices) box.extend(v);
    return box;
}

void TriangleMesh::append(const TriangleMesh& other) {
    const auto base = static_cast<std::uint32_t>(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    for (const auto& t : other.triangles) triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

NormalizedMesh normalize_mesh_to_nocs(const TriangleMesh& mesh) {
    mesh.validate();
    const AlignedBox3 box = mesh.bounds();
    const double diag = box.diagonal();
    if (!(diag >= 1e-12)) throw Error(ErrorCode::DegenerateMesh, "bounding box diagonal below 1e-12");

    NormalizedMesh out;
    out.normalization = {box.center(), diag};
    out.mesh.triangles = mesh.triangles;
    out.mesh.vertices.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) out.mesh.vertices.push_back(out.normalization.to_nocs(v));
    return out;
}

bool is_watertight(const TriangleMesh& mesh) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> uses;
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            auto a = t[k];
            auto b = t[(k + 1) % 3];
            if (a == b) return false;
            if (a > b) std::swap(a, b);
            ++uses[{a, b}];
        }
    }
    return std::all_of(uses.begin(), uses.end(), [](const auto& e) { return e.second == 2; });
}

namespace {

std::uint32_t parse_face_index(const std::string& token, std::size_t vertex_count, int line_no) {
    const std::string head = token.substr(0, token.find('/'));
    long long idx = 0;
    const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
    if (ec != std::errc() || ptr != head.data() + head.size() || idx == 0) {
        throw Error(ErrorCode::InvalidMesh, "bad face index '" + token + "' on line " + std::to_string(line_no));
    }
    const long long resolved = idx > 0 ? idx - 1 : static_cast<long long>(vertex_count) + idx;
    if (resolved < 0 || resolved >= static_cast<long long>(vertex_count)) {
        throw Error(ErrorCode::InvalidMesh, "face index out of range on line " + std::to_string(line_no));
    }
    return static_cast<std::uint32_t>(resolved);
}

}  // namespace

TriangleMesh read_obj(std::istream& in) {
    TriangleMesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z())) {
                throw Error(ErrorCode::InvalidMesh, "malformed vertex on line " + std::to_string(line_no));
            }
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<std::string> refs;
            for (std::string tok; ls >> tok;) refs.push_back(tok);
            if (refs.size() > 3) {
                throw Error(ErrorCode::InvalidMesh, "face with " + std::to_string(refs.size()) +
                                                        " vertices on line " + std::to_string(line_no) +
                                                        "; only triangles are supported");
            }
            if (refs.size() < 3) throw Error(ErrorCode::InvalidMesh, "face with fewer than 3 vertices");
            std::array<std::uint32_t, 3> tri{};
            for (int k = 0; k < 3; ++k) tri[k] = parse_face_index(refs[k], mesh.vertices.size(), line_no);
            mesh.triangles.push_back(tri);
        }
        // vn, vt, usemtl, o, g, s ... are ignored
    }
    mesh.validate();
    return mesh;
}

TriangleMesh read_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return read_obj(in);
}

void write_obj(const TriangleMesh& mesh, std::ostream& out) {
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    write_obj(mesh, out);
}

}  // namespace stereonocs
