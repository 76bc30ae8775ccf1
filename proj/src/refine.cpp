#include "drapegeom/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drapegeom/metrics.hpp"

namespace drapegeom {

OptimizerKind parse_optimizer(const std::string& name) {
    if (name == "plain") return OptimizerKind::plain;
    if (name == "momentum") return OptimizerKind::momentum;
    if (name == "adaptive") return OptimizerKind::adaptive;
    throw InvalidConfig("unknown optimizer '" + name + "' (expected plain|momentum|adaptive)");
}

std::string optimizer_name(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::plain: return "plain";
        case OptimizerKind::momentum: return "momentum";
        case OptimizerKind::adaptive: return "adaptive";
    }
    return "?";
}

void RefineConfig::validate() const {
    weights.validate();
    if (steps < 1) throw InvalidConfig("steps must be >= 1");
    if (snapshotRefreshEvery < 1) throw InvalidConfig("snapshot_refresh_every must be >= 1");
    if (traceEvery < 1) throw InvalidConfig("trace_every must be >= 1");
    if (!(momentumBeta >= 0.0 && momentumBeta < 1.0))
        throw InvalidConfig("momentum_beta must be in [0,1)");
    if (!(adamBeta1 >= 0.0 && adamBeta1 < 1.0) || !(adamBeta2 >= 0.0 && adamBeta2 < 1.0))
        throw InvalidConfig("adam betas must be in [0,1)");
    if (!(adamEps > 0.0)) throw InvalidConfig("adam_eps must be > 0");
}

namespace {

struct OptimizerState {
    std::vector<Vec3> momentum;   // momentum velocity or Adam first moment
    std::vector<Vec3> secondMoment;
    long t = 0;
};

// One optimizer update. For plain descent, a backtracking line search on the
// frozen objective guarantees the loss never increases within a snapshot
// window; a step that fails 20 halvings is skipped.
template <typename FrozenEval>
std::vector<Vec3> take_step(const std::vector<Vec3>& x, const GradField& grad,
                            const RefineConfig& cfg, double stepSize, OptimizerState& state,
                            double currentTotal, const FrozenEval& frozenTotal) {
    const std::size_t n = x.size();
    std::vector<Vec3> next = x;
    switch (cfg.optimizer) {
        case OptimizerKind::plain: {
            double eta = stepSize;
            for (int halving = 0; halving <= 20; ++halving) {
                for (std::size_t i = 0; i < n; ++i)
                    next[i] = x[i] - eta * grad.perVertex[i];
                if (frozenTotal(next) < currentTotal) return next;
                eta *= 0.5;
            }
            return x;  // no acceptable step; stay put
        }
        case OptimizerKind::momentum: {
            for (std::size_t i = 0; i < n; ++i) {
                state.momentum[i] =
                    cfg.momentumBeta * state.momentum[i] - stepSize * grad.perVertex[i];
                next[i] = x[i] + state.momentum[i];
            }
            return next;
        }
        case OptimizerKind::adaptive: {
            state.t++;
            const double c1 = 1.0 - std::pow(cfg.adamBeta1, static_cast<double>(state.t));
            const double c2 = 1.0 - std::pow(cfg.adamBeta2, static_cast<double>(state.t));
            for (std::size_t i = 0; i < n; ++i) {
                const Vec3& g = grad.perVertex[i];
                state.momentum[i] = cfg.adamBeta1 * state.momentum[i] + (1.0 - cfg.adamBeta1) * g;
                state.secondMoment[i] = cfg.adamBeta2 * state.secondMoment[i] +
                                        (1.0 - cfg.adamBeta2) * g.cwiseProduct(g);
                const Vec3 mHat = state.momentum[i] / c1;
                const Vec3 vHat = state.secondMoment[i] / c2;
                for (int a = 0; a < 3; ++a)
                    next[i][a] = x[i][a] - stepSize * mHat[a] / (std::sqrt(vHat[a]) + cfg.adamEps);
            }
            return next;
        }
    }
    return next;
}

std::vector<int> recipe_rq_ks(Recipe r) {
    if (r == Recipe::RQ_TOT || r == Recipe::MCRQ_TOT)
        return {kRqScales[0], kRqScales[1], kRqScales[2]};
    return {};
}

}  // namespace

RefineResult refine(const TriMesh& init, const TriMesh& target, const TriMesh* body,
                    const RefineConfig& config) {
    config.validate();
    require_same_topology(init, target);

    const double stepSize =
        config.stepSize > 0.0 ? config.stepSize : 0.001 * average_edge_length(init);
    const std::vector<int> rqKs = recipe_rq_ks(config.recipe);

    RefineResult result;
    TriMesh pred = init;
    OptimizerState state;
    state.momentum.assign(init.vertexCount(), Vec3::Zero());
    state.secondMoment.assign(init.vertexCount(), Vec3::Zero());

    SceneSnapshot snap;
    for (int step = 0; step < config.steps; ++step) {
        if (step % config.snapshotRefreshEvery == 0)
            snap = make_snapshot(pred, target, body, config.weights, body != nullptr, rqKs);

        auto [report, grad] =
            grad_compose_frozen(pred, target, body, config.weights, config.recipe, snap);
        result.clampEvents += report.counters.cotClamps + report.counters.mcDropped;
        result.degenerateEvents += report.counters.normSkipped + report.counters.rqSkipped +
                                   report.counters.bendDegenerate;
        if (!std::isfinite(report.total) || !grad.allFinite()) {
            result.abortedNonFinite = true;
            result.trace.emplace_back(step, report);
            break;
        }
        if (step % config.traceEvery == 0) result.trace.emplace_back(step, report);

        auto frozenTotal = [&](const std::vector<Vec3>& trial) {
            const TriMesh trialMesh = with_positions(pred, trial);
            return compose_frozen(trialMesh, target, body, config.weights, config.recipe, snap)
                .total;
        };
        std::vector<Vec3> next = take_step(pred.positions, grad, config, stepSize, state,
                                           report.total, frozenTotal);
        pred = with_positions(pred, std::move(next));
        result.stepsRun = step + 1;
    }

    if (!result.abortedNonFinite) {
        const LossReport finalReport =
            compose(pred, target, body, config.weights, config.recipe);
        result.trace.emplace_back(result.stepsRun, finalReport);
    }
    result.finalMesh = std::move(pred);
    return result;
}

RefineResult resolve_penetration(const TriMesh& garment, const TriMesh& body,
                                 const RefineConfig& config, double anchorMu) {
    config.validate();
    if (!(anchorMu >= 0.0)) throw InvalidConfig("anchorMu must be >= 0");

    // Gate disabled: the anchor mesh is the start pose, which the garment must
    // be allowed to leave by more than d_tol.
    LossWeights weights = config.weights;
    weights.d_tol = std::numeric_limits<double>::infinity();

    const double stepSize =
        config.stepSize > 0.0 ? config.stepSize : 10.0 * average_edge_length(garment);

    RefineResult result;
    TriMesh pred = garment;
    const TriMesh& anchor = garment;
    OptimizerState state;
    state.momentum.assign(garment.vertexCount(), Vec3::Zero());
    state.secondMoment.assign(garment.vertexCount(), Vec3::Zero());

    PenSnapshot snap;
    auto makeReport = [&](const TriMesh& mesh, const PenSnapshot& s) {
        LossReport report;
        report.perTerm["pen"] = eval_pen(mesh.positions, s);
        report.perTerm["vert"] = eval_vert(mesh, anchor);
        report.effectiveWeights["pen"] = 1.0;
        report.effectiveWeights["vert"] = anchorMu;
        report.total = report.perTerm["pen"] + anchorMu * report.perTerm["vert"];
        report.correspondence = s.corr;
        return report;
    };

    for (int step = 0; step < config.steps; ++step) {
        if (step % config.snapshotRefreshEvery == 0)
            snap = make_pen_snapshot(pred, anchor, body, weights);

        LossReport report = makeReport(pred, snap);
        GradField grad;
        grad.resize(pred.vertexCount());
        {
            const double nInv = 1.0 / static_cast<double>(pred.vertexCount());
            for (std::size_t j = 0; j < pred.vertexCount(); ++j) {
                const int bi = snap.corr.pairs[j].second;
                const Vec3& nb = snap.bodyNormals[bi];
                if (nb.dot(pred.positions[j] - snap.offsetPoints[bi]) < 0.0)
                    grad.perVertex[j] -= nInv * nb;
                grad.perVertex[j] +=
                    (2.0 * anchorMu * nInv) * (pred.positions[j] - anchor.positions[j]);
            }
        }
        if (!std::isfinite(report.total) || !grad.allFinite()) {
            result.abortedNonFinite = true;
            result.trace.emplace_back(step, report);
            break;
        }
        if (step % config.traceEvery == 0) result.trace.emplace_back(step, report);

        result.finalPenetrationCount =
            penetration_count(pred, body, weights.body_offset_fraction).count;
        result.penetrationTrace.emplace_back(step, result.finalPenetrationCount);
        if (result.finalPenetrationCount == 0) break;

        auto frozenTotal = [&](const std::vector<Vec3>& trial) {
            const TriMesh trialMesh = with_positions(pred, trial);
            return makeReport(trialMesh, snap).total;
        };
        std::vector<Vec3> next = take_step(pred.positions, grad, config, stepSize, state,
                                           report.total, frozenTotal);
        pred = with_positions(pred, std::move(next));
        result.stepsRun = step + 1;
    }

    if (!result.abortedNonFinite) {
        snap = make_pen_snapshot(pred, anchor, body, weights);
        result.trace.emplace_back(result.stepsRun, makeReport(pred, snap));
        result.finalPenetrationCount =
            penetration_count(pred, body, weights.body_offset_fraction).count;
        result.penetrationTrace.emplace_back(result.stepsRun, result.finalPenetrationCount);
    }
    result.finalMesh = std::move(pred);
    return result;
}

}  // namespace drapegeom
