#include "drapegeom/scene.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace drapegeom {

namespace {
constexpr double kPi = std::numbers::pi;
}

TriMesh make_plane_grid(int nx, int ny, double edge) {
    if (nx < 2 || ny < 2) throw InvalidConfig("plane grid needs nx, ny >= 2");
    std::vector<Vec3> pos;
    pos.reserve(static_cast<std::size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) pos.emplace_back(ix * edge, iy * edge, 0.0);

    std::vector<Tri> tris;
    tris.reserve(2u * (nx - 1) * (ny - 1));
    for (int iy = 0; iy + 1 < ny; ++iy) {
        for (int ix = 0; ix + 1 < nx; ++ix) {
            const int v00 = iy * nx + ix;
            const int v10 = v00 + 1;
            const int v01 = v00 + nx;
            const int v11 = v01 + 1;
            tris.push_back({v00, v10, v11});
            tris.push_back({v00, v11, v01});
        }
    }
    return build_mesh(std::move(pos), std::move(tris));
}

TriMesh make_wrinkled_plane(int nx, int ny, double edge, double amplitude, double wavelength,
                            int axis) {
    if (amplitude < 0.0) throw InvalidConfig("wrinkle amplitude must be >= 0");
    if (axis != 0 && axis != 1) throw InvalidConfig("wrinkle axis must be 0 or 1");
    TriMesh mesh = make_plane_grid(nx, ny, edge);
    if (amplitude == 0.0) return mesh;
    if (wavelength <= 0.0) throw InvalidConfig("wrinkle wavelength must be > 0");
    std::vector<Vec3> pos = mesh.positions;
    for (Vec3& p : pos) p.z() = amplitude * std::sin(2.0 * kPi * p[axis] / wavelength);
    return with_positions(mesh, std::move(pos));
}

TriMesh make_icosphere(int subdiv, double radius) {
    if (subdiv < 0 || subdiv > 8) throw InvalidConfig("icosphere subdiv out of range [0,8]");
    if (radius <= 0.0) throw InvalidConfig("icosphere radius must be > 0");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> pos = {
        {-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    std::vector<Tri> tris = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int s = 0; s < subdiv; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(pos.size());
            pos.push_back(0.5 * (pos[a] + pos[b]));
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Tri> next;
        next.reserve(tris.size() * 4);
        for (const Tri& f : tris) {
            const int ab = mid(f.a, f.b);
            const int bc = mid(f.b, f.c);
            const int ca = mid(f.c, f.a);
            next.push_back({f.a, ab, ca});
            next.push_back({f.b, bc, ab});
            next.push_back({f.c, ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }
    for (Vec3& p : pos) p *= radius / p.norm();
    return build_mesh(std::move(pos), std::move(tris));
}

TriMesh make_cylinder(int nCirc, int nLen, double radius, double length) {
    if (nCirc < 3 || nLen < 2) throw InvalidConfig("cylinder needs nCirc >= 3, nLen >= 2");
    if (radius <= 0.0 || length <= 0.0)
        throw InvalidConfig("cylinder radius/length must be > 0");
    std::vector<Vec3> pos;
    pos.reserve(static_cast<std::size_t>(nCirc) * nLen);
    for (int iz = 0; iz < nLen; ++iz) {
        const double z = length * iz / (nLen - 1);
        for (int ic = 0; ic < nCirc; ++ic) {
            const double th = 2.0 * kPi * ic / nCirc;
            pos.emplace_back(radius * std::cos(th), radius * std::sin(th), z);
        }
    }
    std::vector<Tri> tris;
    tris.reserve(2u * nCirc * (nLen - 1));
    for (int iz = 0; iz + 1 < nLen; ++iz) {
        for (int ic = 0; ic < nCirc; ++ic) {
            const int a = iz * nCirc + ic;
            const int b = iz * nCirc + (ic + 1) % nCirc;
            const int c = (iz + 1) * nCirc + (ic + 1) % nCirc;
            const int d = (iz + 1) * nCirc + ic;
            tris.push_back({a, b, c});
            tris.push_back({a, c, d});
        }
    }
    return build_mesh(std::move(pos), std::move(tris));
}

TriMesh make_capsule(double radius, double length, int res) {
    if (res < 6) throw InvalidConfig("capsule needs res >= 6");
    if (radius <= 0.0 || length < 0.0)
        throw InvalidConfig("capsule radius must be > 0, length >= 0");
    const int hemiRings = std::max(2, res / 2);

    // Ring parameters along x: (x, ring radius), poles handled separately.
    std::vector<std::pair<double, double>> rings;
    for (int i = 1; i <= hemiRings; ++i) {
        const double alpha = 0.5 * kPi * i / hemiRings;
        rings.emplace_back(-0.5 * length - radius * std::cos(alpha),
                           radius * std::sin(alpha));
    }
    // Interior cylinder rings between the hemisphere equators.
    const int cylRings = std::max(1, static_cast<int>(std::round(length / (kPi * radius / hemiRings))));
    for (int i = 1; i < cylRings; ++i)
        rings.emplace_back(-0.5 * length + length * i / cylRings, radius);
    if (length > 0.0) rings.emplace_back(0.5 * length, radius);
    for (int i = hemiRings - 1; i >= 1; --i) {
        const double alpha = 0.5 * kPi * i / hemiRings;
        rings.emplace_back(0.5 * length + radius * std::cos(alpha), radius * std::sin(alpha));
    }
    std::sort(rings.begin(), rings.end());

    std::vector<Vec3> pos;
    pos.emplace_back(-0.5 * length - radius, 0.0, 0.0);  // -x pole = vertex 0
    for (const auto& [x, r] : rings) {
        for (int ic = 0; ic < res; ++ic) {
            const double th = 2.0 * kPi * ic / res;
            pos.emplace_back(x, r * std::cos(th), r * std::sin(th));
        }
    }
    const int topPole = static_cast<int>(pos.size());
    pos.emplace_back(0.5 * length + radius, 0.0, 0.0);

    auto ringVert = [&](int ring, int ic) { return 1 + ring * res + ((ic % res) + res) % res; };
    std::vector<Tri> tris;
    const int nRings = static_cast<int>(rings.size());
    for (int ic = 0; ic < res; ++ic) tris.push_back({0, ringVert(0, ic + 1), ringVert(0, ic)});
    for (int m = 0; m + 1 < nRings; ++m) {
        for (int ic = 0; ic < res; ++ic) {
            const int a = ringVert(m, ic);
            const int b = ringVert(m, ic + 1);
            const int c = ringVert(m + 1, ic + 1);
            const int d = ringVert(m + 1, ic);
            tris.push_back({a, b, c});
            tris.push_back({a, c, d});
        }
    }
    for (int ic = 0; ic < res; ++ic)
        tris.push_back({topPole, ringVert(nRings - 1, ic), ringVert(nRings - 1, ic + 1)});
    return build_mesh(std::move(pos), std::move(tris));
}

DrapeScene make_capsule_drape(double bodyRadius, double bodyLength, int bodyRes, int clothNx,
                              int clothNy, double clothEdge, double gap) {
    DrapeScene scene;
    scene.body = make_capsule(bodyRadius, bodyLength, bodyRes);
    TriMesh cloth = make_plane_grid(clothNx, clothNy, clothEdge);
    std::vector<Vec3> pos = cloth.positions;
    const double cx = 0.5 * (clothNx - 1) * clothEdge;
    const double cy = 0.5 * (clothNy - 1) * clothEdge;
    for (Vec3& p : pos) p += Vec3(-cx, -cy, bodyRadius + gap);
    scene.cloth = with_positions(cloth, std::move(pos));
    return scene;
}

TriMesh perturb_positions(const TriMesh& mesh, double amplitude, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-amplitude, amplitude);
    std::vector<Vec3> pos = mesh.positions;
    for (Vec3& p : pos) {
        const double dx = d(rng), dy = d(rng), dz = d(rng);
        p += Vec3(dx, dy, dz);
    }
    return with_positions(mesh, std::move(pos));
}

TriMesh transform_mesh(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation) {
    std::vector<Vec3> pos = mesh.positions;
    for (Vec3& p : pos) p = rotation * p + translation;
    return with_positions(mesh, std::move(pos));
}

Mat3 random_rotation(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Vec3 axis;
    do {
        axis = Vec3(d(rng), d(rng), d(rng));
    } while (axis.squaredNorm() < 1e-8);
    axis.normalize();
    const double angle = kPi * d(rng);
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

namespace {
double need(const SceneSpec& spec, const std::string& key) {
    auto it = spec.params.find(key);
    if (it == spec.params.end())
        throw InvalidConfig("scene spec '" + spec.generator + "' missing parameter '" + key +
                            "'");
    return it->second;
}
double get_or(const SceneSpec& spec, const std::string& key, double fallback) {
    auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
}
}  // namespace

TriMesh generate(const SceneSpec& spec) {
    const std::string& g = spec.generator;
    if (g == "planeGrid")
        return make_plane_grid(static_cast<int>(need(spec, "nx")),
                               static_cast<int>(need(spec, "ny")), need(spec, "edge"));
    if (g == "wrinkledPlane")
        return make_wrinkled_plane(static_cast<int>(need(spec, "nx")),
                                   static_cast<int>(need(spec, "ny")), need(spec, "edge"),
                                   need(spec, "amplitude"), need(spec, "wavelength"),
                                   static_cast<int>(get_or(spec, "axis", 0)));
    if (g == "icosphere")
        return make_icosphere(static_cast<int>(need(spec, "subdiv")), need(spec, "radius"));
    if (g == "cylinder")
        return make_cylinder(static_cast<int>(need(spec, "n_circ")),
                             static_cast<int>(need(spec, "n_len")), need(spec, "radius"),
                             need(spec, "length"));
    if (g == "capsule")
        return make_capsule(need(spec, "radius"), need(spec, "length"),
                            static_cast<int>(need(spec, "res")));
    throw InvalidConfig("unknown generator '" + g + "'");
}

DrapeScene generate_pair(const SceneSpec& spec) {
    if (spec.generator != "capsuleDrape")
        throw InvalidConfig("generate_pair supports capsuleDrape only");
    return make_capsule_drape(need(spec, "body_radius"), need(spec, "body_length"),
                              static_cast<int>(need(spec, "body_res")),
                              static_cast<int>(need(spec, "cloth_nx")),
                              static_cast<int>(need(spec, "cloth_ny")),
                              need(spec, "cloth_edge"), need(spec, "gap"));
}

}  // namespace drapegeom
