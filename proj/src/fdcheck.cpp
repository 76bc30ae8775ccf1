#include <algorithm>
#include <cmath>
#include <random>

#include "drapegeom/grad.hpp"
#include "drapegeom/scene.hpp"

// Central-difference verification of the analytic gradients. A sampled
// coordinate only counts when every frozen selection (correspondence, gate,
// ReLU activity, K-NN membership, argmin/argmax, obtuse branch, clamp state)
// is identical at x-h, x and x+h; coordinates that straddle a branch boundary
// are resampled. This makes the finite difference an oracle for the
// piecewise-smooth branch the analytic gradient differentiates.

namespace drapegeom {

namespace {

struct FdScene {
    TriMesh pred, gt;
    std::optional<TriMesh> body;
};

std::vector<LossTerm> terms_of(const FdTarget& target, bool hasBody) {
    if (target.term) return {*target.term};
    std::vector<LossTerm> terms = {LossTerm::vert, LossTerm::norm, LossTerm::bend};
    if (hasBody) terms.push_back(LossTerm::pen);
    if (*target.recipe == Recipe::MC_TOT || *target.recipe == Recipe::MCRQ_TOT)
        terms.push_back(LossTerm::mc);
    if (*target.recipe == Recipe::RQ_TOT || *target.recipe == Recipe::MCRQ_TOT)
        terms.push_back(LossTerm::rq);
    return terms;
}

std::vector<int> rq_scales_of(const FdTarget& target) {
    if (target.term) {
        if (*target.term == LossTerm::rq) return {target.K};
        return {};
    }
    if (*target.recipe == Recipe::RQ_TOT || *target.recipe == Recipe::MCRQ_TOT)
        return {kRqScales[0], kRqScales[1], kRqScales[2]};
    return {};
}

// Flattened fingerprint of every discrete selection the target depends on.
struct SelectionState {
    std::vector<int> ints;
    bool operator==(const SelectionState&) const = default;

    void put(int v) { ints.push_back(v); }
    void put(char v) { ints.push_back(v); }
    void put(long v) { ints.push_back(static_cast<int>(v)); }
};

void capture_pen(const TriMesh& pred, const TriMesh& gt, const TriMesh& body,
                 const LossWeights& w, SelectionState& st) {
    const PenSnapshot snap = make_pen_snapshot(pred, gt, body, w);
    for (std::size_t j = 0; j < snap.garmentCount; ++j) {
        st.put(snap.corr.pairs[j].second);
        st.put(snap.gate[j]);
        const int bi = snap.corr.pairs[j].second;
        const double sd = snap.bodyNormals[bi].dot(pred.positions[j] - snap.offsetPoints[bi]);
        st.put(sd < 0.0 ? 1 : 0);
    }
}

void capture_norm(const TriMesh& pred, SelectionState& st) {
    const FacetNormals fn = facet_normals(pred);
    for (const char z : fn.zeroArea) st.put(z);
}

void capture_bend(const TriMesh& pred, const TriMesh& gt, SelectionState& st) {
    const auto& pairs = pred.tables.twoEdgePairs;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const double dp =
            (pred.positions[pairs[p].first] - pred.positions[pairs[p].second]).norm();
        const double dg =
            (gt.positions[pairs[p].first] - gt.positions[pairs[p].second]).norm();
        st.put(dp <= 0.0 ? 2 : (dp - dg > 0.0 ? 1 : (dp - dg < 0.0 ? -1 : 0)));
    }
}

void capture_rq(const TriMesh& pred, const TriMesh& gt, int K, SelectionState& st) {
    const RqSnapshot snap = make_rq_snapshot(pred, gt, K);
    for (const auto& nb : snap.predNbhd.neighbors)
        for (const int j : nb) st.put(j);
    const RqValues pv = rayleigh_values(pred.positions, snap.predNbhd, snap.epsSqPred);
    for (std::size_t v = 0; v < pv.rqMin.size(); ++v) {
        st.put(pv.degenerate[v]);
        st.put(pv.argMin[v]);
        st.put(pv.argMax[v]);
    }
}

void capture_mc(const TriMesh& pred, const TriMesh& gt, const LossWeights& w,
                SelectionState& st) {
    // obtuse/degenerate branch per face and clamp state per corner cotangent
    for (const Tri& t : pred.triangles) {
        const Vec3& pa = pred.positions[t.a];
        const Vec3& pb = pred.positions[t.b];
        const Vec3& pc = pred.positions[t.c];
        const double s = (pb - pa).cross(pc - pa).norm();
        if (s <= 1e-300) {
            st.put(9);
            continue;
        }
        const double da = (pb - pa).dot(pc - pa);
        const double db = (pc - pb).dot(pa - pb);
        const double dc = (pa - pc).dot(pb - pc);
        st.put((da < 0.0 ? 1 : 0) | (db < 0.0 ? 2 : 0) | (dc < 0.0 ? 4 : 0));
        st.put(std::abs(da / s) > kCotClamp ? 1 : 0);
        st.put(std::abs(db / s) > kCotClamp ? 1 : 0);
        st.put(std::abs(dc / s) > kCotClamp ? 1 : 0);
    }
    const CurvatureField pm = mean_curvature_normal(pred);
    const CurvatureField gm = mean_curvature_normal(gt);
    for (std::size_t i = 0; i < pm.flagged.size(); ++i) {
        const bool skip = pm.flagged[i] || gm.flagged[i];
        st.put(skip ? 1 : 0);
        if (!skip && w.mc_clamp_threshold) {
            const double t = (pm.vectors[i] - gm.vectors[i]).squaredNorm();
            st.put(t > *w.mc_clamp_threshold ? 1 : 0);
        }
    }
}

SelectionState capture_state(const FdTarget& target, const FdScene& scene,
                             const LossWeights& w) {
    SelectionState st;
    const bool hasBody = scene.body.has_value();
    for (const LossTerm term : terms_of(target, hasBody)) {
        switch (term) {
            case LossTerm::vert: break;
            case LossTerm::pen:
                if (hasBody) capture_pen(scene.pred, scene.gt, *scene.body, w, st);
                break;
            case LossTerm::norm: capture_norm(scene.pred, st); break;
            case LossTerm::bend: capture_bend(scene.pred, scene.gt, st); break;
            case LossTerm::rq:
                for (const int K : rq_scales_of(target)) capture_rq(scene.pred, scene.gt, K, st);
                break;
            case LossTerm::mc: capture_mc(scene.pred, scene.gt, w, st); break;
        }
    }
    return st;
}

double value_of(const FdTarget& target, const FdScene& scene, const LossWeights& w) {
    const TriMesh* body = scene.body ? &*scene.body : nullptr;
    if (target.recipe) return compose(scene.pred, scene.gt, body, w, *target.recipe).total;
    switch (*target.term) {
        case LossTerm::vert: return l_vert(scene.pred, scene.gt);
        case LossTerm::pen:
            if (!body) throw InvalidConfig("pen target requires a body");
            return l_pen(scene.pred, scene.gt, *body, w);
        case LossTerm::norm: return l_norm(scene.pred, scene.gt);
        case LossTerm::bend: return l_bend(scene.pred, scene.gt);
        case LossTerm::rq: return l_rq(scene.pred, scene.gt, target.K);
        case LossTerm::mc: return l_mc(scene.pred, scene.gt, w);
    }
    return 0.0;
}

GradField grad_of(const FdTarget& target, const FdScene& scene, const LossWeights& w) {
    const TriMesh* body = scene.body ? &*scene.body : nullptr;
    if (target.recipe) return grad_compose(scene.pred, scene.gt, body, w, *target.recipe).second;
    return grad_term(*target.term, scene.pred, scene.gt, body, w, target.K).second;
}

bool needs_body(const FdTarget& target) {
    if (target.term) return *target.term == LossTerm::pen;
    return true;  // recipes exercise the pen path
}

// Random well-conditioned scene: a jittered wrinkled grid pair, optionally
// resting near a capsule so roughly half of the garment penetrates the offset
// surface with healthy margins.
FdScene random_scene(std::mt19937_64& rng, bool withBody) {
    const std::uint64_t s1 = rng();
    const std::uint64_t s2 = rng();
    FdScene scene;
    const int n = 7;
    const TriMesh base = make_wrinkled_plane(n, n, 1.0, 0.25, 3.5, 0);
    scene.gt = perturb_positions(base, 0.05, s1);
    scene.pred = perturb_positions(scene.gt, 0.018, s2);  // keeps every d_tol gate on
    if (withBody) {
        TriMesh body = make_capsule(8.0, 10.0, 20);
        std::vector<Vec3> pos = body.positions;
        // crest slightly above the cloth midplane so about half the vertices violate
        for (Vec3& p : pos) p += Vec3(3.0, 3.0, -8.0 + 0.05);
        scene.body = with_positions(body, std::move(pos));
    }
    return scene;
}

bool scene_acceptable(const FdTarget& target, const FdScene& scene, const LossWeights& w) {
    if (!scene.pred.validation.zeroAreaFaces.empty() ||
        !scene.gt.validation.zeroAreaFaces.empty())
        return false;
    const bool hasBody = scene.body.has_value();
    for (const LossTerm term : terms_of(target, hasBody)) {
        if (term == LossTerm::mc) {
            if (mean_curvature_normal(scene.pred).clampEvents != 0) return false;
            if (mean_curvature_normal(scene.gt).clampEvents != 0) return false;
        }
        if (term == LossTerm::rq) {
            for (const int K : rq_scales_of(target)) {
                const CurvatureField f = rayleigh_curvature(scene.pred, K);
                for (const char fl : f.flagged)
                    if (fl) return false;
            }
        }
        if (term == LossTerm::pen && hasBody) {
            // need at least one active violation so the gradient is nontrivial
            const PenSnapshot snap = make_pen_snapshot(scene.pred, scene.gt, *scene.body, w);
            if (eval_pen(scene.pred.positions, snap) <= 0.0) return false;
        }
    }
    return true;
}

}  // namespace

FdReport finite_difference_check(const FdTarget& target, const FdOptions& options) {
    if (!(options.h > 0.0)) throw InvalidConfig("fd check: h must be > 0");
    if (bool(target.term) == bool(target.recipe))
        throw InvalidConfig("fd check: exactly one of term/recipe required");

    LossWeights weights;  // canonical defaults
    std::mt19937_64 rng(options.seed);
    FdReport report;

    for (int trial = 0; trial < options.trials; ++trial) {
        FdScene scene;
        bool ok = false;
        for (int attempt = 0; attempt < options.sceneBudget; ++attempt) {
            scene = random_scene(rng, needs_body(target));
            if (scene_acceptable(target, scene, weights)) {
                ok = true;
                break;
            }
            report.resampledScenes++;
        }
        if (!ok) throw DegenerateScene("fd check: scene resample budget exhausted");

        const SelectionState base = capture_state(target, scene, weights);
        const GradField grad = grad_of(target, scene, weights);
        const std::size_t nv = scene.pred.vertexCount();
        std::uniform_int_distribution<std::size_t> pickVert(0, nv - 1);
        std::uniform_int_distribution<int> pickAxis(0, 2);

        int done = 0;
        int resamples = 0;
        while (done < options.coordsPerScene) {
            if (resamples > options.resampleBudget)
                throw DegenerateScene("fd check: coordinate resample budget exhausted");
            const std::size_t v = pickVert(rng);
            const int axis = pickAxis(rng);

            auto shifted = [&](double delta) {
                std::vector<Vec3> pos = scene.pred.positions;
                pos[v][axis] += delta;
                FdScene s2{with_positions(scene.pred, std::move(pos)), scene.gt, scene.body};
                return s2;
            };
            const FdScene plus = shifted(options.h);
            const FdScene minus = shifted(-options.h);
            if (!(capture_state(target, plus, weights) == base) ||
                !(capture_state(target, minus, weights) == base)) {
                resamples++;
                report.resampledCoordinates++;
                continue;  // straddles a branch boundary
            }

            const double numeric =
                (value_of(target, plus, weights) - value_of(target, minus, weights)) /
                (2.0 * options.h);
            const double analytic = grad.perVertex[v][axis];
            const double diff = std::abs(numeric - analytic);
            report.coordinateChecks++;
            done++;
            if (diff <= 1e-9) continue;  // absolute fallback near zero
            const double scale = std::max(std::abs(numeric), std::abs(analytic));
            report.maxRelError = std::max(report.maxRelError, diff / scale);
        }
        report.scenes++;
    }
    return report;
}

}  // namespace drapegeom
