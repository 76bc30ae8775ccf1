#include "drapegeom/grad.hpp"

#include <algorithm>
#include <cmath>

#include "drapegeom/curvature.hpp"
#include "drapegeom/parallel.hpp"

namespace drapegeom {

bool GradField::allFinite() const {
    for (const Vec3& g : perVertex)
        if (!g.allFinite()) return false;
    return true;
}

namespace {

// d/du and d/dv of cot(angle between u and v) = (u.v)/|u x v|.
struct CotGrad {
    double cot = 0.0;
    Vec3 dU = Vec3::Zero(), dV = Vec3::Zero();
    bool degenerate = false;
};

CotGrad cot_gradient(const Vec3& u, const Vec3& v) {
    CotGrad out;
    const Vec3 w = u.cross(v);
    const double s = w.norm();
    if (s <= 1e-300) {
        out.degenerate = true;
        return out;
    }
    const double c = u.dot(v);
    out.cot = c / s;
    const double s3 = s * s * s;
    out.dU = v / s - c * (v.squaredNorm() * u - c * v) / s3;
    out.dV = u / s - c * (u.squaredNorm() * v - c * u) / s3;
    return out;
}

void add_grad_vert(const TriMesh& pred, const TriMesh& gt, GradField& grad,
                   double weight = 1.0) {
    const double scale = 2.0 * weight / static_cast<double>(pred.vertexCount());
    for (std::size_t i = 0; i < pred.vertexCount(); ++i)
        grad.perVertex[i] += scale * (pred.positions[i] - gt.positions[i]);
}

void add_grad_pen(const TriMesh& pred, const PenSnapshot& snap, GradField& grad,
                  double weight = 1.0) {
    const double scale = weight / static_cast<double>(snap.garmentCount);
    for (std::size_t j = 0; j < snap.garmentCount; ++j) {
        if (!snap.gate[j]) continue;
        const int bodyIdx = snap.corr.pairs[j].second;
        const Vec3& nb = snap.bodyNormals[bodyIdx];
        const double signedDist = nb.dot(pred.positions[j] - snap.offsetPoints[bodyIdx]);
        if (signedDist < 0.0) grad.perVertex[j] += scale * (-nb);
    }
}

void add_grad_norm(const TriMesh& pred, const FacetNormals& gtNormals, GradField& grad,
                   double weight = 1.0) {
    const FacetNormals pn = facet_normals(pred);
    const std::size_t nf = pred.faceCount();
    std::size_t kept = 0;
    for (std::size_t f = 0; f < nf; ++f)
        if (!pn.zeroArea[f] && !gtNormals.zeroArea[f]) kept++;
    if (kept == 0) return;
    const double scale = weight / static_cast<double>(kept);

    for (std::size_t f = 0; f < nf; ++f) {
        if (pn.zeroArea[f] || gtNormals.zeroArea[f]) {
            grad.counters.gradZeroArea++;
            continue;
        }
        const Tri& t = pred.triangles[f];
        const Vec3& pa = pred.positions[t.a];
        const Vec3& pb = pred.positions[t.b];
        const Vec3& pc = pred.positions[t.c];
        const Vec3 w = (pb - pa).cross(pc - pa);
        const double s = w.norm();
        const Vec3 n = pn.normals[f];
        const Vec3& g = gtNormals.normals[f];

        const double oneMinusDot = 0.5 * (g - n).squaredNorm();  // matches eval_norm
        const Vec3 dtdn = -2.0 * oneMinusDot * g;
        const Vec3 pd = dtdn - n * n.dot(dtdn);
        grad.perVertex[t.a] += scale * pd.cross(pc - pb) / s;
        grad.perVertex[t.b] += scale * pd.cross(pa - pc) / s;
        grad.perVertex[t.c] += scale * pd.cross(pb - pa) / s;
    }
}

void add_grad_bend(const TriMesh& pred, std::span<const double> gtTwoRingDist,
                   GradField& grad, double weight = 1.0) {
    const auto& pairs = pred.tables.twoEdgePairs;
    const double scale = weight / static_cast<double>(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const int i = pairs[p].first;
        const int k = pairs[p].second;
        const Vec3 d = pred.positions[i] - pred.positions[k];
        const double dp = d.norm();
        if (dp <= 0.0) {
            grad.counters.bendDegenerate++;
            continue;
        }
        const double diff = dp - gtTwoRingDist[p];
        if (diff == 0.0) continue;  // kink; subgradient 0
        const double sgn = diff > 0.0 ? 1.0 : -1.0;
        const Vec3 u = d / dp;
        grad.perVertex[i] += scale * sgn * u;
        grad.perVertex[k] -= scale * sgn * u;
    }
}

void add_grad_rq(const TriMesh& pred, const RqSnapshot& snap, GradField& grad,
                 double weight = 1.0) {
    const RqValues pv = rayleigh_values(pred.positions, snap.predNbhd, snap.epsSqPred);
    const RqValues& gv = snap.gtValues;
    const std::size_t n = pv.rqMin.size();
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (!pv.degenerate[i] && !gv.degenerate[i]) used++;
    if (used == 0) return;
    const double scale = weight / static_cast<double>(used);
    const double K = static_cast<double>(snap.predNbhd.K);

    for (std::size_t v = 0; v < n; ++v) {
        if (pv.degenerate[v] || gv.degenerate[v]) continue;
        const auto& nb = snap.predNbhd.neighbors[v];

        Vec3 mean = Vec3::Zero();
        for (const int j : nb) mean += pred.positions[j];
        mean /= K;
        Mat3 sigma = Mat3::Zero();
        for (const int j : nb) {
            const Vec3 gl = pred.positions[j] - mean;
            sigma += gl * gl.transpose();
        }
        sigma /= K;

        const double resMin = 2.0 * scale * (pv.rqMin[v] - gv.rqMin[v]);
        const double resMax = 2.0 * scale * (pv.rqMax[v] - gv.rqMax[v]);
        const int sels[2] = {pv.argMin[v], pv.argMax[v]};
        const double res[2] = {resMin, resMax};

        for (int side = 0; side < 2; ++side) {
            if (res[side] == 0.0) continue;
            const int sel = sels[side];
            const Vec3 g = pred.positions[sel] - mean;
            const double den = g.squaredNorm();
            const Vec3 sg = sigma * g;
            const double q = g.dot(sg) / den;
            const Vec3 a = 2.0 * (sg - q * g) / den;

            // dq = a . d g_sel + sum_l b_l . d g_l with the centering terms
            // collapsing because the g_l sum to zero.
            grad.perVertex[sel] += res[side] * a;
            const Vec3 aOverK = a / K;
            for (const int l : nb) {
                const Vec3 gl = pred.positions[l] - mean;
                const Vec3 bl = (2.0 * gl.dot(g) / (K * den)) * g;
                grad.perVertex[l] += res[side] * (bl - aOverK);
            }
        }
    }
}

// Mixed-area gradient of one face corner, frozen at the branch active for the
// current positions. pi is the corner vertex, (pj, pk) the other two in CCW
// order. Adds coeff * d(a_corner)/dx into the three gradient slots.
void accumulate_mixed_area_grad(const Vec3& pi, const Vec3& pj, const Vec3& pk, double coeff,
                                Vec3& gi, Vec3& gj, Vec3& gk) {
    const Vec3 w = (pj - pi).cross(pk - pi);
    const double s = w.norm();
    if (s <= 1e-300) return;  // degenerate face, value pinned at ~0

    const double di = (pj - pi).dot(pk - pi);
    const double dj = (pk - pj).dot(pi - pj);
    const double dk = (pi - pk).dot(pj - pk);

    if (di < 0.0 || dj < 0.0 || dk < 0.0) {
        const double frac = (di < 0.0) ? 0.5 : 0.25;  // corner share of the face area
        const double c = coeff * frac * 0.5 / s;      // area = s/2
        gi += c * w.cross(pk - pj);
        gj += c * w.cross(pi - pk);
        gk += c * w.cross(pj - pi);
        return;
    }

    // Voronoi: a = (|e_ij|^2 cot(theta_k) + |e_ik|^2 cot(theta_j)) / 8
    const Vec3 eij = pj - pi;
    const Vec3 eik = pk - pi;
    const double lij = eij.squaredNorm();
    const double lik = eik.squaredNorm();
    const CotGrad ck = cot_gradient(pi - pk, pj - pk);  // angle at k: dU->pi, dV->pj
    const CotGrad cj = cot_gradient(pi - pj, pk - pj);  // angle at j: dU->pi, dV->pk
    if (ck.degenerate || cj.degenerate) return;

    const double c8 = coeff * 0.125;
    gi += c8 * (-2.0 * eij * ck.cot + lij * ck.dU - 2.0 * eik * cj.cot + lik * cj.dU);
    gj += c8 * (2.0 * eij * ck.cot + lij * ck.dV - lik * (cj.dU + cj.dV));
    gk += c8 * (-lij * (ck.dU + ck.dV) + 2.0 * eik * cj.cot + lik * cj.dV);
}

void add_grad_mc(const TriMesh& pred, const CurvatureField& gtMc,
                 const std::optional<double>& clampThreshold, GradField& grad,
                 double weight = 1.0) {
    const CurvatureField pm = mean_curvature_normal(pred);
    const auto areas = mixed_area(pred);
    const std::size_t n = pred.vertexCount();

    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (!pm.flagged[i] && !gtMc.flagged[i]) used++;
    if (used == 0) return;
    const double scale = weight / static_cast<double>(used);

    for (std::size_t i = 0; i < n; ++i) {
        if (pm.flagged[i] || gtMc.flagged[i]) continue;
        const Vec3 diff = pm.vectors[i] - gtMc.vectors[i];
        if (clampThreshold && diff.squaredNorm() > *clampThreshold) continue;  // dropped

        const Vec3 y = 2.0 * scale * diff;
        // kappa = S / (2A): S-terms carry 1/(2A); the area term carries
        // -(y . kappa)/A with the half already inside kappa.
        const double invA2 = 0.5 / areas[i];
        const Vec3& xi = pred.positions[i];

        // S term: direct position dependence and the cotangent weights.
        double wSum = 0.0;
        for (const RingEdge& re : pred.tables.ringEdges[i]) {
            const Vec3& xj = pred.positions[re.neighbor];
            double wij = 0.0;
            for (int sfc = 0; sfc < re.faceCount; ++sfc) {
                const int o = re.opposite[sfc];
                const Vec3& xo = pred.positions[o];
                const CotGrad cg = cot_gradient(xi - xo, xj - xo);
                double cot = cg.cot;
                bool saturated = cg.degenerate;
                if (cot > kCotClamp) {
                    cot = kCotClamp;
                    saturated = true;
                } else if (cot < -kCotClamp) {
                    cot = -kCotClamp;
                    saturated = true;
                } else if (cg.degenerate) {
                    cot = (xi - xo).dot(xj - xo) >= 0.0 ? kCotClamp : -kCotClamp;
                }
                wij += cot;
                if (!saturated) {
                    // d(cot)/dx flows into S through the (x_j - x_i) factor
                    const double coeffW = y.dot(xj - xi) * invA2;
                    grad.perVertex[i] += coeffW * cg.dU;
                    grad.perVertex[re.neighbor] += coeffW * cg.dV;
                    grad.perVertex[o] -= coeffW * (cg.dU + cg.dV);
                }
            }
            grad.perVertex[re.neighbor] += (wij * invA2) * y;
            grad.perVertex[i] -= (wij * invA2) * y;
            wSum += wij;
        }
        (void)wSum;

        // A term: kappa = S/A, so dA flows in with coefficient -(y . kappa)/A.
        const double coeffA = -y.dot(pm.vectors[i]) / areas[i];
        for (const FaceCorner& fc : pred.tables.faceRing[i]) {
            const Tri& t = pred.triangles[fc.face];
            const int ji = t[(fc.corner + 1) % 3];
            const int ki = t[(fc.corner + 2) % 3];
            accumulate_mixed_area_grad(xi, pred.positions[ji], pred.positions[ki], coeffA,
                                       grad.perVertex[i], grad.perVertex[ji],
                                       grad.perVertex[ki]);
        }
    }
}

}  // namespace

std::pair<double, GradField> grad_term_frozen(LossTerm term, const TriMesh& pred,
                                              const TriMesh& gt, const TriMesh* body,
                                              const LossWeights& weights,
                                              const SceneSnapshot& snap, int K) {
    GradField grad;
    grad.resize(pred.vertexCount());
    double value = 0.0;
    switch (term) {
        case LossTerm::vert:
            value = eval_vert(pred, gt);
            add_grad_vert(pred, gt, grad);
            break;
        case LossTerm::pen: {
            if (!snap.pen) throw InvalidConfig("pen gradient requires a body mesh");
            value = eval_pen(pred.positions, *snap.pen);
            add_grad_pen(pred, *snap.pen, grad);
            break;
        }
        case LossTerm::norm:
            value = eval_norm(pred, snap.gt.gtNormals, &grad.counters);
            add_grad_norm(pred, snap.gt.gtNormals, grad);
            break;
        case LossTerm::bend:
            value = eval_bend(pred, snap.gt.gtTwoRingDist, &grad.counters);
            add_grad_bend(pred, snap.gt.gtTwoRingDist, grad);
            break;
        case LossTerm::rq: {
            const RqSnapshot& rq = snap.rq.at(K);
            value = eval_rq(pred.positions, rq, &grad.counters);
            add_grad_rq(pred, rq, grad);
            break;
        }
        case LossTerm::mc:
            value = eval_mc(pred, snap.gt.gtMc, weights.mc_clamp_threshold, &grad.counters);
            add_grad_mc(pred, snap.gt.gtMc, weights.mc_clamp_threshold, grad);
            break;
    }
    (void)body;
    return {value, std::move(grad)};
}

std::pair<double, GradField> grad_term(LossTerm term, const TriMesh& pred, const TriMesh& gt,
                                       const TriMesh* body, const LossWeights& weights,
                                       int K) {
    const bool needPen = term == LossTerm::pen;
    std::vector<int> ks;
    if (term == LossTerm::rq) ks.push_back(K);
    const SceneSnapshot snap = make_snapshot(pred, gt, body, weights, needPen, ks);
    return grad_term_frozen(term, pred, gt, body, weights, snap, K);
}

std::pair<LossReport, GradField> grad_compose_frozen(const TriMesh& pred, const TriMesh& gt,
                                                     const TriMesh* body,
                                                     const LossWeights& weights, Recipe recipe,
                                                     const SceneSnapshot& snap) {
    LossReport report = compose_frozen(pred, gt, body, weights, recipe, snap);
    GradField grad;
    grad.resize(pred.vertexCount());
    const auto& ew = report.effectiveWeights;

    add_grad_vert(pred, gt, grad, ew.at("vert"));
    if (auto it = ew.find("pen"); it != ew.end() && snap.pen)
        add_grad_pen(pred, *snap.pen, grad, it->second);
    add_grad_norm(pred, snap.gt.gtNormals, grad, ew.at("norm"));
    add_grad_bend(pred, snap.gt.gtTwoRingDist, grad, ew.at("bend"));
    if (auto it = ew.find("mc"); it != ew.end())
        add_grad_mc(pred, snap.gt.gtMc, weights.mc_clamp_threshold, grad, it->second);
    for (const int K : kRqScales) {
        auto it = ew.find("rq" + std::to_string(K));
        if (it != ew.end()) add_grad_rq(pred, snap.rq.at(K), grad, it->second);
    }
    return {std::move(report), std::move(grad)};
}

std::pair<LossReport, GradField> grad_compose(const TriMesh& pred, const TriMesh& gt,
                                              const TriMesh* body, const LossWeights& weights,
                                              Recipe recipe) {
    require_same_topology(pred, gt);
    const bool needRq = recipe == Recipe::RQ_TOT || recipe == Recipe::MCRQ_TOT;
    const SceneSnapshot snap =
        make_snapshot(pred, gt, body, weights, body != nullptr,
                      needRq ? std::span<const int>(kRqScales) : std::span<const int>());
    return grad_compose_frozen(pred, gt, body, weights, recipe, snap);
}

}  // namespace drapegeom
