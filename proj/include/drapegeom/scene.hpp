#pragma once

// Deterministic synthetic scenes: grids, wrinkled grids, icospheres, tubes,
// capsules and a capsule-plus-cloth drape stand-in for body/garment pairs.

#include <cstdint>
#include <map>
#include <string>

#include "drapegeom/mesh.hpp"

namespace drapegeom {

// nx x ny vertices in the z=0 plane, spacing `edge`, CCW with +z normals.
TriMesh make_plane_grid(int nx, int ny, double edge);

// Plane grid with z = amplitude * sin(2*pi*u / wavelength); axis 0 -> u=x,
// axis 1 -> u=y. amplitude 0 reproduces make_plane_grid exactly.
TriMesh make_wrinkled_plane(int nx, int ny, double edge, double amplitude, double wavelength,
                            int axis = 0);

// Icosahedron subdivided `subdiv` times, projected to `radius`.
// 10*4^subdiv + 2 vertices.
TriMesh make_icosphere(int subdiv, double radius);

// Open tube along z, length L starting at z=0. nCirc segments around,
// nLen vertex rings. Outward normals; the two rims are boundary.
TriMesh make_cylinder(int nCirc, int nLen, double radius, double length);

// Closed capsule along x: cylinder of length L capped by hemispheres,
// `res` segments around, res/2 rings per hemisphere. Genus 0.
TriMesh make_capsule(double radius, double length, int res);

struct DrapeScene {
    TriMesh cloth;
    TriMesh body;
};

// Cloth grid centered above the capsule crest at height z = bodyRadius + gap.
// Negative gap pushes the cloth into the body.
DrapeScene make_capsule_drape(double bodyRadius, double bodyLength, int bodyRes, int clothNx,
                              int clothNy, double clothEdge, double gap);

// Uniform per-coordinate jitter in [-amplitude, amplitude], deterministic
// under the seed. Topology unchanged.
TriMesh perturb_positions(const TriMesh& mesh, double amplitude, std::uint64_t seed);

// Rigid motion helpers for invariance tests and scene dressing.
TriMesh transform_mesh(const TriMesh& mesh, const Mat3& rotation, const Vec3& translation);
Mat3 random_rotation(std::uint64_t seed);

// Key-value scene description for the CLI `gen` subcommand.
struct SceneSpec {
    std::string generator;
    std::map<std::string, double> params;
    std::int64_t seed = 0;
};

// Dispatches on spec.generator: planeGrid, wrinkledPlane, icosphere, cylinder,
// capsule. Throws InvalidConfig for unknown generators or missing params.
TriMesh generate(const SceneSpec& spec);

// capsuleDrape only.
DrapeScene generate_pair(const SceneSpec& spec);

}  // namespace drapegeom
