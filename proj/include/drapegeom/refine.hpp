#pragma once

// Gradient-descent mesh refinement: optimize per-vertex translations of an
// initial garment toward a target under a chosen loss recipe. Discrete
// snapshots (correspondences, K-NN sets, gates) refresh every
// snapshotRefreshEvery steps and are frozen in between.

#include <cstdint>
#include <utility>
#include <vector>

#include "drapegeom/grad.hpp"

namespace drapegeom {

enum class OptimizerKind { plain, momentum, adaptive };

OptimizerKind parse_optimizer(const std::string& name);
std::string optimizer_name(OptimizerKind k);

struct RefineConfig {
    Recipe recipe = Recipe::P;
    LossWeights weights;
    int steps = 1000;
    OptimizerKind optimizer = OptimizerKind::adaptive;
    double momentumBeta = 0.9;
    double adamBeta1 = 0.9;
    double adamBeta2 = 0.999;
    double adamEps = 1e-8;
    // cm per unit gradient; <= 0 resolves to 0.001 * average edge length of
    // the initial mesh (the training learning rate at scene scale).
    double stepSize = 0.0;
    int snapshotRefreshEvery = 10;
    int traceEvery = 50;
    std::uint64_t seed = 0;

    void validate() const;  // throws InvalidConfig
};

struct RefineResult {
    TriMesh finalMesh;
    std::vector<std::pair<int, LossReport>> trace;  // (step, report); includes 0 and final
    long clampEvents = 0;
    long degenerateEvents = 0;
    bool abortedNonFinite = false;
    int stepsRun = 0;
    long finalPenetrationCount = -1;                        // resolve_penetration only
    std::vector<std::pair<int, long>> penetrationTrace;     // (step, count), ditto
};

// init and target must share topology; body is optional (the pen term is
// skipped without it). Deterministic for fixed inputs and config.
RefineResult refine(const TriMesh& init, const TriMesh& target, const TriMesh* body,
                    const RefineConfig& config);

// Standalone interpenetration resolution: minimizes
//   L_pen(pred; body) + anchorMu * L_vert(pred, garment)
// with the proximity gate disabled, stopping early once the penetration count
// reaches zero. stepSize <= 0 resolves to 10 * average edge length (plain
// descent with line search tames the overshoot).
RefineResult resolve_penetration(const TriMesh& garment, const TriMesh& body,
                                 const RefineConfig& config, double anchorMu = 0.1);

}  // namespace drapegeom
