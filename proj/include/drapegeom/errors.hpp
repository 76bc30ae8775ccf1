#pragma once

#include <stdexcept>
#include <string>

namespace drapegeom {

// Base for everything this library throws. Soft conditions (zero-area faces,
// non-manifold edges, degenerate neighborhoods) are reported through flags
// and counters instead; only contract violations throw.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IndexOutOfRange : Error { using Error::Error; };
struct DegenerateTriangle : Error { using Error::Error; };
struct NoEdges : Error { using Error::Error; };
struct EmptyPointSet : Error { using Error::Error; };
struct KTooLarge : Error { using Error::Error; };
struct VertexCountMismatch : Error { using Error::Error; };
struct FaceCountMismatch : Error { using Error::Error; };
struct EmptyTwoRing : Error { using Error::Error; };
struct TopologyMismatch : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct DegenerateScene : Error { using Error::Error; };
struct DegenerateBoundingBox : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };

// I/O failures carry the offending location when known.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
    explicit ParseError(const std::string& what) : Error(what), line(0) {}
    std::size_t line;
};

struct IoError : Error { using Error::Error; };

}  // namespace drapegeom
