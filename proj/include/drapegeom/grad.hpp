#pragma once

// Analytic gradients of every loss term with respect to predicted vertex
// positions. All discrete selections (correspondences, K-NN membership,
// indicator gates, ReLU activity, argmin/argmax neighbors, obtuse-area
// branches, cotangent clamps) are differentiated as frozen constants: the
// piecewise-smooth branch active at the evaluation point, exactly as autodiff
// through index selection behaves. Snapshots refresh between optimizer steps,
// never within a step.

#include <cstdint>
#include <optional>
#include <utility>

#include "drapegeom/losses.hpp"

namespace drapegeom {

struct GradField {
    std::vector<Vec3> perVertex;  // loss-units per cm
    LossCounters counters;

    void resize(std::size_t n) { perVertex.assign(n, Vec3::Zero()); }
    bool allFinite() const;
};

// Value + gradient of one raw (unweighted) term. The value matches the losses
// module bitwise under the same snapshot. K applies to the rq term only.
std::pair<double, GradField> grad_term(LossTerm term, const TriMesh& pred, const TriMesh& gt,
                                       const TriMesh* body, const LossWeights& weights,
                                       int K = 8);

std::pair<double, GradField> grad_term_frozen(LossTerm term, const TriMesh& pred,
                                              const TriMesh& gt, const TriMesh* body,
                                              const LossWeights& weights,
                                              const SceneSnapshot& snap, int K = 8);

// Weighted sum of term gradients under one shared snapshot set. The report
// matches compose() on the same inputs.
std::pair<LossReport, GradField> grad_compose(const TriMesh& pred, const TriMesh& gt,
                                              const TriMesh* body, const LossWeights& weights,
                                              Recipe recipe);

std::pair<LossReport, GradField> grad_compose_frozen(const TriMesh& pred, const TriMesh& gt,
                                                     const TriMesh* body,
                                                     const LossWeights& weights, Recipe recipe,
                                                     const SceneSnapshot& snap);

// --- finite-difference verification ------------------------------------------

// A target is either a single raw term or a full recipe.
struct FdTarget {
    std::optional<LossTerm> term;
    std::optional<Recipe> recipe;
    int K = 8;  // for term == rq

    static FdTarget forTerm(LossTerm t, int K = 8) { return {t, std::nullopt, K}; }
    static FdTarget forRecipe(Recipe r) { return {std::nullopt, r, 0}; }
};

struct FdOptions {
    double h = 1e-6;
    int trials = 30;            // independent random scenes
    int coordsPerScene = 24;    // sampled coordinates per scene
    int resampleBudget = 200;   // coordinate resamples before giving up on a scene
    int sceneBudget = 8;        // scene resamples per trial
    std::uint64_t seed = 1;
};

struct FdReport {
    double maxRelError = 0.0;
    int scenes = 0;
    long coordinateChecks = 0;
    long resampledCoordinates = 0;
    long resampledScenes = 0;
};

// Central differences on randomly sampled coordinates of randomly generated
// non-degenerate scenes. A coordinate counts as degenerate (and is resampled)
// when any frozen selection differs between x-h, x and x+h. Near-zero
// components pass through an absolute 1e-9 fallback. Throws DegenerateScene
// when the resample budget runs out.
FdReport finite_difference_check(const FdTarget& target, const FdOptions& options);

}  // namespace drapegeom
