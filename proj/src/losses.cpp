#include "drapegeom/losses.hpp"

#include <algorithm>
#include <cmath>

#include "drapegeom/parallel.hpp"

namespace drapegeom {

void LossWeights::validate() const {
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidConfig(std::string(name) + " must be finite and >= 0");
    };
    nonneg(lambda_pen, "lambda_pen");
    nonneg(lambda_norm, "lambda_norm");
    nonneg(lambda_bend, "lambda_bend");
    nonneg(lambda_p, "lambda_p");
    nonneg(lambda_mc, "lambda_mc");
    nonneg(lambda_rq8, "lambda_rq8");
    nonneg(lambda_rq16, "lambda_rq16");
    nonneg(lambda_rq32, "lambda_rq32");
    nonneg(d_tol, "d_tol");
    if (!(body_offset_fraction >= 0.0 && body_offset_fraction <= 1.0))
        throw InvalidConfig("body_offset_fraction must be in [0,1]");
    if (mc_clamp_threshold && !(*mc_clamp_threshold >= 0.0))
        throw InvalidConfig("mc_clamp_threshold must be >= 0");
}

void LossCounters::add(const LossCounters& o) {
    cotClamps += o.cotClamps;
    mcDropped += o.mcDropped;
    normSkipped += o.normSkipped;
    rqSkipped += o.rqSkipped;
    bendDegenerate += o.bendDegenerate;
    gradZeroArea += o.gradZeroArea;
}

std::string term_name(LossTerm t) {
    switch (t) {
        case LossTerm::vert: return "vert";
        case LossTerm::pen: return "pen";
        case LossTerm::norm: return "norm";
        case LossTerm::bend: return "bend";
        case LossTerm::rq: return "rq";
        case LossTerm::mc: return "mc";
    }
    return "?";
}

std::string recipe_name(Recipe r) {
    switch (r) {
        case Recipe::P: return "p";
        case Recipe::MC_TOT: return "mc";
        case Recipe::RQ_TOT: return "rq";
        case Recipe::MCRQ_TOT: return "mcrq";
    }
    return "?";
}

Recipe parse_recipe(const std::string& name) {
    if (name == "p") return Recipe::P;
    if (name == "mc") return Recipe::MC_TOT;
    if (name == "rq") return Recipe::RQ_TOT;
    if (name == "mcrq") return Recipe::MCRQ_TOT;
    throw InvalidConfig("unknown recipe '" + name + "' (expected p|mc|rq|mcrq)");
}

void require_same_vertex_count(const TriMesh& a, const TriMesh& b) {
    if (a.vertexCount() != b.vertexCount())
        throw VertexCountMismatch("meshes have " + std::to_string(a.vertexCount()) + " vs " +
                                  std::to_string(b.vertexCount()) + " vertices");
}

void require_same_topology(const TriMesh& a, const TriMesh& b) {
    require_same_vertex_count(a, b);
    if (a.faceCount() != b.faceCount())
        throw TopologyMismatch("meshes have different face counts");
    for (std::size_t f = 0; f < a.faceCount(); ++f) {
        const Tri& ta = a.triangles[f];
        const Tri& tb = b.triangles[f];
        if (ta.a != tb.a || ta.b != tb.b || ta.c != tb.c)
            throw TopologyMismatch("face " + std::to_string(f) + " differs");
    }
}

// --- snapshots --------------------------------------------------------------

PenSnapshot make_pen_snapshot(const TriMesh& pred, const TriMesh& gt, const TriMesh& body,
                              const LossWeights& weights) {
    require_same_vertex_count(pred, gt);
    PenSnapshot snap;
    snap.garmentCount = pred.vertexCount();
    snap.corr = nearest_correspondences(pred, body);

    const VertexNormals vn = vertex_normals(body);
    const double offset = weights.body_offset_fraction * average_edge_length(body);
    snap.bodyNormals = vn.normals;
    snap.offsetPoints.resize(body.vertexCount());
    for (std::size_t i = 0; i < body.vertexCount(); ++i)
        snap.offsetPoints[i] = body.positions[i] + offset * vn.normals[i];

    snap.gate.assign(pred.vertexCount(), 0);
    for (std::size_t j = 0; j < pred.vertexCount(); ++j)
        snap.gate[j] = (pred.positions[j] - gt.positions[j]).norm() < weights.d_tol ? 1 : 0;
    return snap;
}

RqSnapshot make_rq_snapshot(const TriMesh& pred, const TriMesh& gt, int K) {
    require_same_vertex_count(pred, gt);
    RqSnapshot snap;
    snap.predNbhd = make_rq_neighborhoods(pred, K);
    snap.gtNbhd = make_rq_neighborhoods(gt, K);
    snap.epsSqPred = rq_eps_squared(average_edge_length(pred));
    snap.epsSqGt = rq_eps_squared(average_edge_length(gt));
    snap.gtValues = rayleigh_values(gt.positions, snap.gtNbhd, snap.epsSqGt);
    return snap;
}

GtCaches make_gt_caches(const TriMesh& gt) {
    GtCaches c;
    c.gtNormals = facet_normals(gt);
    const auto& pairs = gt.tables.twoEdgePairs;
    c.gtTwoRingDist.resize(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p)
        c.gtTwoRingDist[p] =
            (gt.positions[pairs[p].first] - gt.positions[pairs[p].second]).norm();
    c.gtMc = mean_curvature_normal(gt);
    return c;
}

SceneSnapshot make_snapshot(const TriMesh& pred, const TriMesh& gt, const TriMesh* body,
                            const LossWeights& weights, bool needPen,
                            std::span<const int> rqKs) {
    SceneSnapshot snap;
    if (needPen && body != nullptr) snap.pen = make_pen_snapshot(pred, gt, *body, weights);
    for (const int K : rqKs) snap.rq.emplace(K, make_rq_snapshot(pred, gt, K));
    snap.gt = make_gt_caches(gt);
    return snap;
}

// --- term evaluation --------------------------------------------------------

double eval_vert(const TriMesh& pred, const TriMesh& gt) {
    require_same_vertex_count(pred, gt);
    const std::size_t n = pred.vertexCount();
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i)
        terms[i] = (gt.positions[i] - pred.positions[i]).squaredNorm();
    return pairwise_sum(terms) / static_cast<double>(n);
}

double eval_pen(std::span<const Vec3> predPositions, const PenSnapshot& snap) {
    const std::size_t n = snap.garmentCount;
    std::vector<double> terms(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (!snap.gate[j]) continue;
        const int bodyIdx = snap.corr.pairs[j].second;
        const double signedDist =
            snap.bodyNormals[bodyIdx].dot(predPositions[j] - snap.offsetPoints[bodyIdx]);
        terms[j] = std::max(0.0, -signedDist);
    }
    return pairwise_sum(terms) / static_cast<double>(n);
}

double eval_norm(const TriMesh& pred, const FacetNormals& gtNormals, LossCounters* counters) {
    const FacetNormals pn = facet_normals(pred);
    const std::size_t nf = pred.faceCount();
    if (gtNormals.normals.size() != nf)
        throw FaceCountMismatch("l_norm: face counts differ");
    std::vector<double> terms;
    terms.reserve(nf);
    long skipped = 0;
    for (std::size_t f = 0; f < nf; ++f) {
        if (pn.zeroArea[f] || gtNormals.zeroArea[f]) {
            skipped++;
            continue;
        }
        // 1 - g.n == |g - n|^2 / 2 for unit vectors; the difference form is
        // exact at identity and has no cancellation near zero
        const double oneMinusDot =
            0.5 * (gtNormals.normals[f] - pn.normals[f]).squaredNorm();
        terms.push_back(oneMinusDot * oneMinusDot);
    }
    if (counters) counters->normSkipped += skipped;
    if (terms.empty()) return 0.0;
    return pairwise_sum(terms) / static_cast<double>(terms.size());
}

double eval_bend(const TriMesh& pred, std::span<const double> gtTwoRingDist,
                 LossCounters* counters) {
    const auto& pairs = pred.tables.twoEdgePairs;
    if (pairs.empty()) throw EmptyTwoRing("mesh has no two-edge pairs");
    if (gtTwoRingDist.size() != pairs.size())
        throw TopologyMismatch("l_bend: two-ring tables differ");
    std::vector<double> terms(pairs.size());
    long degenerate = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const double dp =
            (pred.positions[pairs[p].first] - pred.positions[pairs[p].second]).norm();
        if (dp <= 0.0) degenerate++;
        terms[p] = std::abs(dp - gtTwoRingDist[p]);
    }
    if (counters) counters->bendDegenerate += degenerate;
    return pairwise_sum(terms) / static_cast<double>(pairs.size());
}

double eval_rq(std::span<const Vec3> predPositions, const RqSnapshot& snap,
               LossCounters* counters) {
    const RqValues pv = rayleigh_values(predPositions, snap.predNbhd, snap.epsSqPred);
    const RqValues& gv = snap.gtValues;
    const std::size_t n = pv.rqMin.size();
    std::vector<double> terms;
    terms.reserve(n);
    long skipped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pv.degenerate[i] || gv.degenerate[i]) {
            skipped++;
            continue;
        }
        const double dmin = pv.rqMin[i] - gv.rqMin[i];
        const double dmax = pv.rqMax[i] - gv.rqMax[i];
        terms.push_back(dmin * dmin + dmax * dmax);
    }
    if (counters) counters->rqSkipped += skipped;
    if (terms.empty()) return 0.0;
    return pairwise_sum(terms) / static_cast<double>(terms.size());
}

double eval_mc(const TriMesh& pred, const CurvatureField& gtMc,
               const std::optional<double>& clampThreshold, LossCounters* counters) {
    const CurvatureField pm = mean_curvature_normal(pred);
    if (counters) counters->cotClamps += pm.clampEvents + gtMc.clampEvents;
    const std::size_t n = pred.vertexCount();
    if (gtMc.vectors.size() != n) throw VertexCountMismatch("l_mc: vertex counts differ");

    std::vector<double> terms;
    terms.reserve(n);
    long dropped = 0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pm.flagged[i] || gtMc.flagged[i]) continue;  // boundary/degenerate
        used++;
        const double t = (pm.vectors[i] - gtMc.vectors[i]).squaredNorm();
        if (clampThreshold && t > *clampThreshold) {
            dropped++;
            continue;  // turned off, still counted in the denominator
        }
        terms.push_back(t);
    }
    if (counters) counters->mcDropped += dropped;
    if (used == 0) return 0.0;
    return pairwise_sum(terms) / static_cast<double>(used);
}

// --- one-shot fronts ---------------------------------------------------------

double l_vert(const TriMesh& pred, const TriMesh& gt) { return eval_vert(pred, gt); }

double l_pen(const TriMesh& pred, const TriMesh& gt, const TriMesh& body,
             const LossWeights& weights) {
    const PenSnapshot snap = make_pen_snapshot(pred, gt, body, weights);
    return eval_pen(pred.positions, snap);
}

double l_norm(const TriMesh& pred, const TriMesh& gt, LossCounters* counters) {
    if (pred.faceCount() != gt.faceCount())
        throw FaceCountMismatch("l_norm: face counts differ");
    return eval_norm(pred, facet_normals(gt), counters);
}

double l_bend(const TriMesh& pred, const TriMesh& gt, LossCounters* counters) {
    require_same_topology(pred, gt);
    const auto& pairs = gt.tables.twoEdgePairs;
    std::vector<double> gtDist(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p)
        gtDist[p] = (gt.positions[pairs[p].first] - gt.positions[pairs[p].second]).norm();
    return eval_bend(pred, gtDist, counters);
}

double l_rq(const TriMesh& pred, const TriMesh& gt, int K, LossCounters* counters) {
    const RqSnapshot snap = make_rq_snapshot(pred, gt, K);
    return eval_rq(pred.positions, snap, counters);
}

double l_mc(const TriMesh& pred, const TriMesh& gt, const LossWeights& weights,
            LossCounters* counters) {
    require_same_topology(pred, gt);
    return eval_mc(pred, mean_curvature_normal(gt), weights.mc_clamp_threshold, counters);
}

// --- composition -------------------------------------------------------------

std::map<std::string, double> effective_weights(Recipe recipe, const LossWeights& w,
                                                bool hasBody) {
    std::map<std::string, double> ew;
    const double p = (recipe == Recipe::P) ? 1.0 : w.lambda_p;
    ew["vert"] = p;
    if (hasBody) ew["pen"] = p * w.lambda_pen;
    ew["norm"] = p * w.lambda_norm;
    ew["bend"] = p * w.lambda_bend;
    if (recipe == Recipe::MC_TOT || recipe == Recipe::MCRQ_TOT) ew["mc"] = w.lambda_mc;
    if (recipe == Recipe::RQ_TOT || recipe == Recipe::MCRQ_TOT) {
        ew["rq8"] = w.lambda_rq8;
        ew["rq16"] = w.lambda_rq16;
        ew["rq32"] = w.lambda_rq32;
    }
    return ew;
}

LossReport compose_frozen(const TriMesh& pred, const TriMesh& gt, const TriMesh* body,
                          const LossWeights& weights, Recipe recipe,
                          const SceneSnapshot& snap) {
    weights.validate();
    LossReport report;
    const bool hasBody = body != nullptr && snap.pen.has_value();
    report.effectiveWeights = effective_weights(recipe, weights, hasBody);

    report.perTerm["vert"] = eval_vert(pred, gt);
    if (hasBody) {
        report.perTerm["pen"] = eval_pen(pred.positions, *snap.pen);
        report.correspondence = snap.pen->corr;
    }
    report.perTerm["norm"] = eval_norm(pred, snap.gt.gtNormals, &report.counters);
    report.perTerm["bend"] = eval_bend(pred, snap.gt.gtTwoRingDist, &report.counters);

    if (recipe == Recipe::MC_TOT || recipe == Recipe::MCRQ_TOT)
        report.perTerm["mc"] =
            eval_mc(pred, snap.gt.gtMc, weights.mc_clamp_threshold, &report.counters);
    if (recipe == Recipe::RQ_TOT || recipe == Recipe::MCRQ_TOT) {
        for (const int K : kRqScales)
            report.perTerm["rq" + std::to_string(K)] =
                eval_rq(pred.positions, snap.rq.at(K), &report.counters);
    }

    double total = 0.0;
    for (const auto& [name, w] : report.effectiveWeights) total += w * report.perTerm.at(name);
    report.total = total;
    return report;
}

LossReport compose(const TriMesh& pred, const TriMesh& gt, const TriMesh* body,
                   const LossWeights& weights, Recipe recipe) {
    require_same_topology(pred, gt);
    const bool needRq = recipe == Recipe::RQ_TOT || recipe == Recipe::MCRQ_TOT;
    const SceneSnapshot snap =
        make_snapshot(pred, gt, body, weights, /*needPen=*/body != nullptr,
                      needRq ? std::span<const int>(kRqScales) : std::span<const int>());
    return compose_frozen(pred, gt, body, weights, recipe, snap);
}

}  // namespace drapegeom
