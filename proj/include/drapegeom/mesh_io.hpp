#pragma once

// Mesh and field I/O.
//
//   OBJ  ASCII, 1-based indices, `v`/`f` records. Polygons fan-triangulate
//        with a warning; materials and normals are ignored with a warning.
//        Positions written with 9 significant digits.
//   PLY  binary little-endian; float64 positions by default (lossless
//        round trip) plus optional named per-vertex scalar properties and an
//        optional min-max color ramp.
//   CSV  per-vertex field export, header "vertex_index,x,y,z,<field>...".

#include <span>
#include <string>
#include <vector>

#include "drapegeom/mesh.hpp"

namespace drapegeom {

struct NamedField {
    std::string name;
    std::vector<double> values;  // one per vertex
};

struct LoadResult {
    TriMesh mesh;
    std::vector<std::string> warnings;
    std::vector<NamedField> fields;  // extra per-vertex scalar properties (PLY)
};

LoadResult load_obj(const std::string& path);
LoadResult load_ply(const std::string& path);

// Dispatch by extension (.obj / .ply, case-insensitive).
LoadResult load_mesh(const std::string& path);

void save_obj(const std::string& path, const TriMesh& mesh);

struct PlyWriteOptions {
    bool float64 = true;      // float32 otherwise
    bool colorRamp = false;   // per-vertex uchar RGB from min-max of fields[0]
};

void save_ply(const std::string& path, const TriMesh& mesh,
              std::span<const NamedField> fields = {}, PlyWriteOptions options = {});

void save_mesh(const std::string& path, const TriMesh& mesh);  // by extension

void save_field_csv(const std::string& path, const TriMesh& mesh,
                    std::span<const NamedField> fields);

}  // namespace drapegeom
