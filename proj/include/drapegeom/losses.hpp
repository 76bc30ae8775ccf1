#pragma once

// Draping loss terms between a predicted mesh, a ground-truth mesh and an
// optional body mesh, plus their weighted compositions.
//
// Discrete selections (nearest-body correspondences, K-NN memberships, the
// d_tol gate) are captured in snapshot structs. The plain l_* entry points
// build a fresh snapshot per call; gradients and the refiner evaluate through
// the same snapshots so values agree bitwise.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drapegeom/curvature.hpp"
#include "drapegeom/mesh.hpp"
#include "drapegeom/spatial.hpp"

namespace drapegeom {

// All loss weights and tolerances in one validated record. Defaults are the
// canonical configuration; they appear here once and nowhere else.
struct LossWeights {
    double lambda_pen = 1.0;
    double lambda_norm = 0.3;
    double lambda_bend = 0.5;
    double lambda_p = 0.1;
    double lambda_mc = 10.0;
    double lambda_rq8 = 500.0;
    double lambda_rq16 = 50.0;
    double lambda_rq32 = 10.0;
    double d_tol = 0.05;                  // cm, ground-truth proximity gate
    double body_offset_fraction = 0.20;   // of the body's average edge length
    std::optional<double> mc_clamp_threshold;  // per-vertex cap on the MC term

    void validate() const;  // throws InvalidConfig
};

enum class Recipe { P, MC_TOT, RQ_TOT, MCRQ_TOT };

enum class LossTerm { vert, pen, norm, bend, rq, mc };

std::string term_name(LossTerm t);
std::string recipe_name(Recipe r);
Recipe parse_recipe(const std::string& name);

// The K scales evaluated by the RQ recipes.
inline constexpr int kRqScales[3] = {8, 16, 32};

struct LossCounters {
    long cotClamps = 0;       // cotangent clamps while building kappa_MC fields
    long mcDropped = 0;       // per-vertex MC terms over the clamp threshold
    long normSkipped = 0;     // faces excluded from l_norm (either mesh zero-area)
    long rqSkipped = 0;       // vertices degenerate on either mesh in l_rq
    long bendDegenerate = 0;  // coincident two-ring pairs (zero gradient)
    long gradZeroArea = 0;    // faces contributing zero normal gradient

    void add(const LossCounters& o);
};

struct LossReport {
    std::map<std::string, double> perTerm;           // raw term values
    std::map<std::string, double> effectiveWeights;  // weight applied per term
    double total = 0.0;
    LossCounters counters;
    std::optional<CorrespondenceSet> correspondence;  // snapshot used by l_pen
};

// --- frozen snapshots ------------------------------------------------------

// Interpenetration state: correspondences from predicted positions, body
// points offset along their normals, and the d_tol gate from ground-truth
// proximity, all fixed at snapshot time.
struct PenSnapshot {
    CorrespondenceSet corr;
    std::vector<Vec3> offsetPoints;   // per body vertex
    std::vector<Vec3> bodyNormals;    // per body vertex
    std::vector<char> gate;           // per garment vertex
    std::size_t garmentCount = 0;
};

PenSnapshot make_pen_snapshot(const TriMesh& pred, const TriMesh& gt, const TriMesh& body,
                              const LossWeights& weights);

// K-NN memberships on both meshes plus the ground-truth RQ values, which do
// not change while the snapshot is held.
struct RqSnapshot {
    RqNeighborhoods predNbhd, gtNbhd;
    double epsSqPred = 0.0, epsSqGt = 0.0;
    RqValues gtValues;
};

RqSnapshot make_rq_snapshot(const TriMesh& pred, const TriMesh& gt, int K);

// Ground-truth caches (fixed for a pred/gt pair).
struct GtCaches {
    FacetNormals gtNormals;
    std::vector<double> gtTwoRingDist;   // aligned with tables.twoEdgePairs
    CurvatureField gtMc;
};

GtCaches make_gt_caches(const TriMesh& gt);

// Everything frozen for one evaluation window.
struct SceneSnapshot {
    std::optional<PenSnapshot> pen;
    std::map<int, RqSnapshot> rq;  // keyed by K
    GtCaches gt;
};

SceneSnapshot make_snapshot(const TriMesh& pred, const TriMesh& gt, const TriMesh* body,
                            const LossWeights& weights, bool needPen,
                            std::span<const int> rqKs);

// --- term evaluation under a snapshot --------------------------------------

double eval_vert(const TriMesh& pred, const TriMesh& gt);
double eval_pen(std::span<const Vec3> predPositions, const PenSnapshot& snap);
double eval_norm(const TriMesh& pred, const FacetNormals& gtNormals,
                 LossCounters* counters = nullptr);
double eval_bend(const TriMesh& pred, std::span<const double> gtTwoRingDist,
                 LossCounters* counters = nullptr);
double eval_rq(std::span<const Vec3> predPositions, const RqSnapshot& snap,
               LossCounters* counters = nullptr);
double eval_mc(const TriMesh& pred, const CurvatureField& gtMc,
               const std::optional<double>& clampThreshold,
               LossCounters* counters = nullptr);

// --- public one-shot terms --------------------------------------------------

double l_vert(const TriMesh& pred, const TriMesh& gt);
double l_pen(const TriMesh& pred, const TriMesh& gt, const TriMesh& body,
             const LossWeights& weights);
double l_norm(const TriMesh& pred, const TriMesh& gt, LossCounters* counters = nullptr);
double l_bend(const TriMesh& pred, const TriMesh& gt, LossCounters* counters = nullptr);
double l_rq(const TriMesh& pred, const TriMesh& gt, int K, LossCounters* counters = nullptr);
double l_mc(const TriMesh& pred, const TriMesh& gt, const LossWeights& weights,
            LossCounters* counters = nullptr);

// Effective weight of each leaf term under a recipe. Terms absent from the
// recipe (or pen without a body) are omitted.
std::map<std::string, double> effective_weights(Recipe recipe, const LossWeights& weights,
                                                bool hasBody);

LossReport compose(const TriMesh& pred, const TriMesh& gt, const TriMesh* body,
                   const LossWeights& weights, Recipe recipe);

// Same, but under a caller-held snapshot (used by the refiner's frozen
// windows and by grad_compose).
LossReport compose_frozen(const TriMesh& pred, const TriMesh& gt, const TriMesh* body,
                          const LossWeights& weights, Recipe recipe,
                          const SceneSnapshot& snap);

// Topology guards shared by the terms.
void require_same_vertex_count(const TriMesh& a, const TriMesh& b);
void require_same_topology(const TriMesh& a, const TriMesh& b);

}  // namespace drapegeom
