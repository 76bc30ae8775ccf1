#include "drapegeom/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace drapegeom {

namespace {

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) tokens.push_back(tok);
    return tokens;
}

}  // namespace

LoadResult load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    LoadResult out;
    std::vector<Vec3> positions;
    std::vector<Tri> tris;
    bool materialWarned = false, polygonWarned = false, attributeWarned = false;

    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        lineNo++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto tokens = split_ws(line);
        if (tokens.empty() || tokens[0][0] == '#') continue;
        const std::string& rec = tokens[0];

        if (rec == "v") {
            if (tokens.size() < 4) throw ParseError("vertex record needs 3 coordinates", lineNo);
            try {
                positions.emplace_back(std::stod(tokens[1]), std::stod(tokens[2]),
                                       std::stod(tokens[3]));
            } catch (const std::exception&) {
                throw ParseError("bad vertex coordinate", lineNo);
            }
        } else if (rec == "f") {
            if (tokens.size() < 4) throw ParseError("face record needs >= 3 indices", lineNo);
            std::vector<int> corners;
            for (std::size_t t = 1; t < tokens.size(); ++t) {
                // "i", "i/t", "i/t/n", "i//n" -- only the position index matters
                const std::string head = tokens[t].substr(0, tokens[t].find('/'));
                int idx = 0;
                const auto res = std::from_chars(head.data(), head.data() + head.size(), idx);
                if (res.ec != std::errc() || res.ptr != head.data() + head.size())
                    throw ParseError("bad face index '" + tokens[t] + "'", lineNo);
                if (idx == 0)
                    throw ParseError("face index 0 is invalid (OBJ indices are 1-based)",
                                     lineNo);
                if (idx < 0) idx = static_cast<int>(positions.size()) + idx + 1;  // relative
                if (idx < 1 || idx > static_cast<int>(positions.size()))
                    throw ParseError("face index " + std::to_string(idx) + " out of range",
                                     lineNo);
                corners.push_back(idx - 1);
            }
            if (corners.size() > 3 && !polygonWarned) {
                out.warnings.push_back("polygon faces fan-triangulated");
                polygonWarned = true;
            }
            for (std::size_t c = 1; c + 1 < corners.size(); ++c)
                tris.push_back({corners[0], corners[c], corners[c + 1]});
        } else if (rec == "mtllib" || rec == "usemtl") {
            if (!materialWarned) {
                out.warnings.push_back("materials ignored");
                materialWarned = true;
            }
        } else if (rec == "vn" || rec == "vt" || rec == "o" || rec == "g" || rec == "s") {
            if (!attributeWarned) {
                out.warnings.push_back("normals/texcoords/groups ignored");
                attributeWarned = true;
            }
        }
        // anything else silently skipped
    }
    if (tris.empty()) throw ParseError("no faces in OBJ file '" + path + "'");
    out.mesh = build_mesh(std::move(positions), std::move(tris));
    return out;
}

void save_obj(const std::string& path, const TriMesh& mesh) {
    std::ofstream outFile(path);
    if (!outFile) throw IoError("cannot write '" + path + "'");
    char buf[128];
    for (const Vec3& p : mesh.positions) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
        outFile << buf;
    }
    for (const Tri& t : mesh.triangles)
        outFile << "f " << t.a + 1 << ' ' << t.b + 1 << ' ' << t.c + 1 << '\n';
    if (!outFile) throw IoError("write failed for '" + path + "'");
}

// --- PLY ---------------------------------------------------------------------

namespace {

enum class PlyType { f32, f64, i8, u8, i16, u16, i32, u32 };

std::size_t type_size(PlyType t) {
    switch (t) {
        case PlyType::f32: return 4;
        case PlyType::f64: return 8;
        case PlyType::i8:
        case PlyType::u8: return 1;
        case PlyType::i16:
        case PlyType::u16: return 2;
        case PlyType::i32:
        case PlyType::u32: return 4;
    }
    return 0;
}

PlyType parse_type(const std::string& name, std::size_t lineNo) {
    if (name == "float" || name == "float32") return PlyType::f32;
    if (name == "double" || name == "float64") return PlyType::f64;
    if (name == "char" || name == "int8") return PlyType::i8;
    if (name == "uchar" || name == "uint8") return PlyType::u8;
    if (name == "short" || name == "int16") return PlyType::i16;
    if (name == "ushort" || name == "uint16") return PlyType::u16;
    if (name == "int" || name == "int32") return PlyType::i32;
    if (name == "uint" || name == "uint32") return PlyType::u32;
    throw ParseError("unsupported PLY type '" + name + "'", lineNo);
}

double read_scalar(std::ifstream& in, PlyType t, const std::string& path) {
    unsigned char raw[8];
    if (!in.read(reinterpret_cast<char*>(raw), static_cast<std::streamsize>(type_size(t))))
        throw ParseError("unexpected end of PLY payload in '" + path + "'");
    switch (t) {
        case PlyType::f32: { float v; std::memcpy(&v, raw, 4); return v; }
        case PlyType::f64: { double v; std::memcpy(&v, raw, 8); return v; }
        case PlyType::i8: { std::int8_t v; std::memcpy(&v, raw, 1); return v; }
        case PlyType::u8: { std::uint8_t v; std::memcpy(&v, raw, 1); return v; }
        case PlyType::i16: { std::int16_t v; std::memcpy(&v, raw, 2); return v; }
        case PlyType::u16: { std::uint16_t v; std::memcpy(&v, raw, 2); return v; }
        case PlyType::i32: { std::int32_t v; std::memcpy(&v, raw, 4); return v; }
        case PlyType::u32: { std::uint32_t v; std::memcpy(&v, raw, 4); return v; }
    }
    return 0.0;
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::f64;
    bool isList = false;
    PlyType countType = PlyType::u8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

}  // namespace

LoadResult load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string line;
    std::size_t lineNo = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line)) throw ParseError("unexpected end of PLY header", lineNo);
        lineNo++;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };

    next_line();
    if (line != "ply") throw ParseError("not a PLY file", lineNo);

    std::vector<PlyElement> elements;
    bool formatSeen = false;
    while (true) {
        next_line();
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens[0] == "comment" || tokens[0] == "obj_info") continue;
        if (tokens[0] == "format") {
            if (tokens.size() < 2 || tokens[1] != "binary_little_endian")
                throw ParseError("only binary_little_endian PLY is supported", lineNo);
            formatSeen = true;
        } else if (tokens[0] == "element") {
            if (tokens.size() < 3) throw ParseError("malformed element line", lineNo);
            elements.push_back({tokens[1], std::stoul(tokens[2]), {}});
        } else if (tokens[0] == "property") {
            if (elements.empty()) throw ParseError("property before element", lineNo);
            if (tokens.size() >= 5 && tokens[1] == "list") {
                elements.back().properties.push_back(
                    {tokens[4], parse_type(tokens[3], lineNo), true, parse_type(tokens[2], lineNo)});
            } else if (tokens.size() >= 3) {
                elements.back().properties.push_back({tokens[2], parse_type(tokens[1], lineNo)});
            } else {
                throw ParseError("malformed property line", lineNo);
            }
        } else if (tokens[0] == "end_header") {
            break;
        } else {
            throw ParseError("unexpected header line '" + tokens[0] + "'", lineNo);
        }
    }
    if (!formatSeen) throw ParseError("PLY header has no format line");

    LoadResult out;
    std::vector<Vec3> positions;
    std::vector<Tri> tris;

    for (const PlyElement& elem : elements) {
        if (elem.name == "vertex") {
            int ix = -1, iy = -1, iz = -1;
            for (std::size_t p = 0; p < elem.properties.size(); ++p) {
                if (elem.properties[p].isList)
                    throw ParseError("list property on vertex element is unsupported");
                if (elem.properties[p].name == "x") ix = static_cast<int>(p);
                if (elem.properties[p].name == "y") iy = static_cast<int>(p);
                if (elem.properties[p].name == "z") iz = static_cast<int>(p);
            }
            if (ix < 0 || iy < 0 || iz < 0)
                throw ParseError("vertex element lacks x/y/z properties");
            std::vector<NamedField> extras;
            for (std::size_t p = 0; p < elem.properties.size(); ++p) {
                const auto& prop = elem.properties[p];
                if (prop.name != "x" && prop.name != "y" && prop.name != "z")
                    extras.push_back({prop.name, {}});
            }
            positions.reserve(elem.count);
            std::vector<double> row(elem.properties.size());
            for (std::size_t v = 0; v < elem.count; ++v) {
                for (std::size_t p = 0; p < elem.properties.size(); ++p)
                    row[p] = read_scalar(in, elem.properties[p].type, path);
                positions.emplace_back(row[ix], row[iy], row[iz]);
                std::size_t e = 0;
                for (std::size_t p = 0; p < elem.properties.size(); ++p) {
                    const auto& prop = elem.properties[p];
                    if (prop.name == "x" || prop.name == "y" || prop.name == "z") continue;
                    extras[e++].values.push_back(row[p]);
                }
            }
            out.fields = std::move(extras);
        } else if (elem.name == "face") {
            if (elem.properties.size() != 1 || !elem.properties[0].isList ||
                (elem.properties[0].name != "vertex_indices" &&
                 elem.properties[0].name != "vertex_index"))
                throw ParseError("face element must be a single vertex_indices list");
            const auto& prop = elem.properties[0];
            bool polygonWarned = false;
            for (std::size_t f = 0; f < elem.count; ++f) {
                const int n = static_cast<int>(read_scalar(in, prop.countType, path));
                if (n < 3) throw ParseError("face with fewer than 3 indices");
                std::vector<int> corners(n);
                for (int c = 0; c < n; ++c)
                    corners[c] = static_cast<int>(read_scalar(in, prop.type, path));
                if (n > 3 && !polygonWarned) {
                    out.warnings.push_back("polygon faces fan-triangulated");
                    polygonWarned = true;
                }
                for (int c = 1; c + 1 < n; ++c)
                    tris.push_back({corners[0], corners[c], corners[c + 1]});
            }
        } else {
            // skip unknown fixed-size elements
            std::size_t rowSize = 0;
            for (const auto& prop : elem.properties) {
                if (prop.isList)
                    throw ParseError("cannot skip unknown element with list property");
                rowSize += type_size(prop.type);
            }
            in.seekg(static_cast<std::streamoff>(rowSize * elem.count), std::ios::cur);
        }
    }
    if (tris.empty()) throw ParseError("no faces in PLY file '" + path + "'");
    out.mesh = build_mesh(std::move(positions), std::move(tris));
    return out;
}

void save_ply(const std::string& path, const TriMesh& mesh,
              std::span<const NamedField> fields, PlyWriteOptions options) {
    for (const NamedField& f : fields)
        if (f.values.size() != mesh.vertexCount())
            throw InvalidConfig("PLY field '" + f.name + "' is not per-vertex");

    std::ofstream outFile(path, std::ios::binary);
    if (!outFile) throw IoError("cannot write '" + path + "'");

    const char* scalar = options.float64 ? "double" : "float";
    outFile << "ply\nformat binary_little_endian 1.0\ncomment " << "drapegeom" << "\n";
    outFile << "element vertex " << mesh.vertexCount() << "\n";
    outFile << "property " << scalar << " x\nproperty " << scalar << " y\nproperty " << scalar
            << " z\n";
    for (const NamedField& f : fields) outFile << "property double " << f.name << "\n";
    if (options.colorRamp && !fields.empty())
        outFile << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    outFile << "element face " << mesh.faceCount() << "\n";
    outFile << "property list uchar int vertex_indices\nend_header\n";

    double lo = 0.0, hi = 1.0;
    if (options.colorRamp && !fields.empty() && !fields[0].values.empty()) {
        lo = *std::min_element(fields[0].values.begin(), fields[0].values.end());
        hi = *std::max_element(fields[0].values.begin(), fields[0].values.end());
        if (hi <= lo) hi = lo + 1.0;
    }

    auto put_scalar = [&](double v) {
        if (options.float64) {
            outFile.write(reinterpret_cast<const char*>(&v), 8);
        } else {
            const float f = static_cast<float>(v);
            outFile.write(reinterpret_cast<const char*>(&f), 4);
        }
    };
    for (std::size_t v = 0; v < mesh.vertexCount(); ++v) {
        put_scalar(mesh.positions[v].x());
        put_scalar(mesh.positions[v].y());
        put_scalar(mesh.positions[v].z());
        for (const NamedField& f : fields)
            outFile.write(reinterpret_cast<const char*>(&f.values[v]), 8);
        if (options.colorRamp && !fields.empty()) {
            const double t = (fields[0].values[v] - lo) / (hi - lo);
            // blue -> red ramp
            const unsigned char rgb[3] = {static_cast<unsigned char>(255.0 * t), 0,
                                          static_cast<unsigned char>(255.0 * (1.0 - t))};
            outFile.write(reinterpret_cast<const char*>(rgb), 3);
        }
    }
    for (const Tri& t : mesh.triangles) {
        const unsigned char n = 3;
        outFile.write(reinterpret_cast<const char*>(&n), 1);
        const std::int32_t idx[3] = {t.a, t.b, t.c};
        outFile.write(reinterpret_cast<const char*>(idx), 12);
    }
    if (!outFile) throw IoError("write failed for '" + path + "'");
}

LoadResult load_mesh(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "obj") return load_obj(path);
    if (ext == "ply") return load_ply(path);
    throw IoError("unsupported mesh extension '" + ext + "' (expected .obj or .ply)");
}

void save_mesh(const std::string& path, const TriMesh& mesh) {
    const std::string ext = lower_ext(path);
    if (ext == "obj") return save_obj(path, mesh);
    if (ext == "ply") return save_ply(path, mesh);
    throw IoError("unsupported mesh extension '" + ext + "' (expected .obj or .ply)");
}

void save_field_csv(const std::string& path, const TriMesh& mesh,
                    std::span<const NamedField> fields) {
    for (const NamedField& f : fields)
        if (f.values.size() != mesh.vertexCount())
            throw InvalidConfig("CSV field '" + f.name + "' is not per-vertex");
    std::ofstream outFile(path);
    if (!outFile) throw IoError("cannot write '" + path + "'");
    outFile << "vertex_index,x,y,z";
    for (const NamedField& f : fields) outFile << ',' << f.name;
    outFile << '\n';
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        outFile << buf;
    };
    for (std::size_t v = 0; v < mesh.vertexCount(); ++v) {
        outFile << v << ',';
        put(mesh.positions[v].x());
        outFile << ',';
        put(mesh.positions[v].y());
        outFile << ',';
        put(mesh.positions[v].z());
        for (const NamedField& f : fields) {
            outFile << ',';
            put(f.values[v]);
        }
        outFile << '\n';
    }
    if (!outFile) throw IoError("write failed for '" + path + "'");
}

}  // namespace drapegeom
