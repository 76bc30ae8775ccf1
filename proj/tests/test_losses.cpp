#include "doctest.h"

#include <random>

#include "drapegeom/losses.hpp"
#include "drapegeom/scene.hpp"
#include "test_support.hpp"

using namespace drapegeom;

namespace {

// Flat plane-grid body: every vertex normal is exactly +z.
struct PenScene {
    TriMesh body;
    TriMesh pred;
    TriMesh gt;
    double offset;  // body offset along +z
};

PenScene make_pen_scene() {
    PenScene s;
    s.body = make_plane_grid(12, 12, 1.0);
    LossWeights w;
    s.offset = w.body_offset_fraction * average_edge_length(s.body);
    TriMesh garment = make_plane_grid(7, 7, 0.5);
    std::vector<Vec3> pos = garment.positions;
    for (Vec3& p : pos) p += Vec3(4.0, 4.0, s.offset + 1.0);  // fully outside
    s.pred = with_positions(garment, std::move(pos));
    s.gt = s.pred;
    return s;
}

// Spherical-cap version of a flat grid (same topology).
TriMesh dome(const TriMesh& grid, double R) {
    std::vector<Vec3> pos = grid.positions;
    Vec3 c = Vec3::Zero();
    for (const Vec3& p : pos) c += p;
    c /= static_cast<double>(pos.size());
    for (Vec3& p : pos) {
        const double r2 = (p - c).head<2>().squaredNorm();
        p.z() = std::sqrt(R * R - r2) - R;
    }
    return with_positions(grid, std::move(pos));
}

}  // namespace

TEST_CASE("l_vert: zero, uniform translation, hand sum") {
    const TriMesh gt = make_wrinkled_plane(5, 5, 1.0, 0.2, 2.5);
    CHECK(l_vert(gt, gt) == 0.0);

    const Vec3 t(0.3, -0.4, 1.2);
    CHECK(l_vert(dtest::translated(gt, t), gt) ==
          doctest::Approx(t.squaredNorm()).epsilon(1e-12));

    const TriMesh a = build_mesh({{0, 0, 0}, {2, 0, 0}, {0, 2, 0}}, {{0, 1, 2}});
    std::vector<Vec3> moved = a.positions;
    moved[0] += Vec3(1, 0, 0);
    moved[1] += Vec3(0, 2, 0);
    moved[2] += Vec3(0, 0, 2);
    const TriMesh b = with_positions(a, std::move(moved));
    CHECK(l_vert(b, a) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(l_vert(a, make_plane_grid(3, 3, 1.0)), VertexCountMismatch);
}

TEST_CASE("l_pen: outside, single violation, gate off") {
    PenScene s = make_pen_scene();
    const LossWeights w;
    CHECK(l_pen(s.pred, s.gt, s.body, w) == 0.0);

    // push the center vertex to depth delta below the offset plane
    const double delta = 0.37;
    std::vector<Vec3> pos = s.pred.positions;
    pos[24].z() = s.offset - delta;
    const TriMesh violating = with_positions(s.pred, std::move(pos));
    const double n = static_cast<double>(violating.vertexCount());
    CHECK(l_pen(violating, violating, s.body, w) ==
          doctest::Approx(delta / n).epsilon(1e-12));

    // same violation, but the ground truth is far away: the gate shuts
    std::vector<Vec3> farGt = violating.positions;
    farGt[24] += Vec3(1.0, 0, 0);
    const TriMesh gtFar = with_positions(violating, std::move(farGt));
    CHECK(l_pen(violating, gtFar, s.body, w) == 0.0);
}

TEST_CASE("l_pen is monotone in violation depth") {
    PenScene s = make_pen_scene();
    const LossWeights w;
    double prev = -1.0;
    for (int step = 0; step < 10; ++step) {
        std::vector<Vec3> pos = s.pred.positions;
        pos[24].z() = s.offset - 0.05 * (step + 1);
        const TriMesh mesh = with_positions(s.pred, std::move(pos));
        const double val = l_pen(mesh, mesh, s.body, w);
        CHECK(val >= prev);
        prev = val;
    }
    CHECK(prev > 0.0);
}

TEST_CASE("l_norm: zero, global flip notches 4, right angle notches 1") {
    const TriMesh gt = make_wrinkled_plane(6, 6, 1.0, 0.25, 3.0);
    CHECK(l_norm(gt, gt) == 0.0);

    const TriMesh flipped = dtest::flip_windings(gt);
    CHECK(l_norm(flipped, gt) == doctest::Approx(4.0).epsilon(1e-12));

    const TriMesh flat = build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    const TriMesh upright = build_mesh({{0, 0, 0}, {1, 0, 0}, {0, 0, 1}}, {{0, 1, 2}});
    CHECK(l_norm(upright, flat) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(l_norm(flat, gt), FaceCountMismatch);
}

TEST_CASE("l_bend: zero, rigid invariance, doubling") {
    const TriMesh gt = make_wrinkled_plane(6, 5, 1.0, 0.3, 2.0);
    CHECK(l_bend(gt, gt) == 0.0);

    const TriMesh rotated = transform_mesh(gt, random_rotation(3), Vec3(1, 2, 3));
    CHECK(l_bend(rotated, gt) <= 1e-9);

    double meanTwoRing = 0.0;
    for (const auto& [i, k] : gt.tables.twoEdgePairs)
        meanTwoRing += (gt.positions[i] - gt.positions[k]).norm();
    meanTwoRing /= static_cast<double>(gt.tables.twoEdgePairs.size());
    CHECK(l_bend(dtest::scaled(gt, 2.0), gt) == doctest::Approx(meanTwoRing).epsilon(1e-12));
}

TEST_CASE("l_rq: zero, rigid invariance, amplitude ladder") {
    const TriMesh gt = perturb_positions(make_wrinkled_plane(8, 8, 1.0, 0.3, 3.0), 0.02, 17);
    for (const int K : {8, 16}) {
        CHECK(l_rq(gt, gt, K) == 0.0);
        const TriMesh rigid = transform_mesh(gt, random_rotation(9), Vec3(-1, 4, 2));
        CHECK(l_rq(rigid, gt, K) <= 1e-9);
    }

    const TriMesh flat = make_plane_grid(10, 10, 1.0);
    double prev = 0.0;
    for (const double amp : {0.1, 0.2, 0.4}) {
        const TriMesh wr = make_wrinkled_plane(10, 10, 1.0, amp, 4.0);
        const double val = l_rq(flat, wr, 8);
        CHECK(val > prev);
        prev = val;
    }
}

TEST_CASE("l_mc: zero, dome oracle, clamp threshold zero") {
    const TriMesh gt = make_wrinkled_plane(7, 7, 1.0, 0.25, 3.0);
    const LossWeights w;
    CHECK(l_mc(gt, gt, w) == 0.0);

    const TriMesh grid = make_plane_grid(9, 9, 0.5);
    const TriMesh cap = dome(grid, 10.0);
    const CurvatureField capMc = mean_curvature_normal(cap);
    double expected = 0.0;
    int used = 0;
    for (std::size_t v = 0; v < cap.vertexCount(); ++v) {
        if (capMc.flagged[v]) continue;
        expected += capMc.vectors[v].squaredNorm();
        used++;
    }
    expected /= used;
    // the flat side's curvature is ~0, so the loss is the cap's mean |kappa|^2
    CHECK(l_mc(grid, cap, w) == doctest::Approx(expected).epsilon(1e-6));

    LossWeights clamped;
    clamped.mc_clamp_threshold = 0.0;
    LossCounters counters;
    const TriMesh pred = make_plane_grid(7, 7, 1.0);
    const TriMesh target = perturb_positions(gt, 0.03, 23);
    CHECK(l_mc(pred, target, clamped, &counters) == 0.0);
    int interior = 0;
    const CurvatureField pf = mean_curvature_normal(pred);
    const CurvatureField tf = mean_curvature_normal(target);
    for (std::size_t v = 0; v < pred.vertexCount(); ++v)
        if (!pf.flagged[v] && !tf.flagged[v]) interior++;
    CHECK(counters.mcDropped == interior);
}

TEST_CASE("every term is nonnegative and zero at pred == gt") {
    const TriMesh gt = perturb_positions(make_wrinkled_plane(7, 7, 1.0, 0.2, 3.0), 0.02, 31);
    const TriMesh pred = perturb_positions(gt, 0.05, 32);
    const LossWeights w;
    CHECK(l_vert(pred, gt) >= 0.0);
    CHECK(l_norm(pred, gt) >= 0.0);
    CHECK(l_bend(pred, gt) >= 0.0);
    CHECK(l_rq(pred, gt, 8) >= 0.0);
    CHECK(l_mc(pred, gt, w) >= 0.0);

    CHECK(l_vert(gt, gt) == 0.0);
    CHECK(l_norm(gt, gt) == 0.0);
    CHECK(l_bend(gt, gt) == 0.0);
    CHECK(l_rq(gt, gt, 16) == 0.0);
    CHECK(l_mc(gt, gt, w) == 0.0);
}

TEST_CASE("compose: recipe P weighting matches independent terms") {
    PenScene s = make_pen_scene();
    std::vector<Vec3> pos = s.pred.positions;
    pos[24].z() = s.offset - 0.2;  // one violation
    const TriMesh gt = with_positions(s.pred, std::move(pos));
    const TriMesh pred = perturb_positions(gt, 0.005, 61);  // inside every d_tol gate
    const LossWeights w;

    const LossReport report = compose(pred, gt, &s.body, w, Recipe::P);
    const double expected = l_vert(pred, gt) + 1.0 * l_pen(pred, gt, s.body, w) +
                            0.3 * l_norm(pred, gt) + 0.5 * l_bend(pred, gt);
    CHECK(report.total == doctest::Approx(expected).epsilon(1e-12));
    CHECK(report.correspondence.has_value());
    CHECK(report.perTerm.at("pen") > 0.0);
}

TEST_CASE("compose: RQ_TOT equals 0.1 L_p + 500/50/10 rq terms") {
    const TriMesh gt = perturb_positions(make_wrinkled_plane(7, 7, 1.0, 0.3, 3.5), 0.02, 41);
    const TriMesh pred = perturb_positions(gt, 0.03, 42);
    const LossWeights w;
    const LossReport report = compose(pred, gt, nullptr, w, Recipe::RQ_TOT);
    const double lp = l_vert(pred, gt) + 0.3 * l_norm(pred, gt) + 0.5 * l_bend(pred, gt);
    const double expected = 0.1 * lp + 500.0 * l_rq(pred, gt, 8) +
                            50.0 * l_rq(pred, gt, 16) + 10.0 * l_rq(pred, gt, 32);
    CHECK(report.total == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("compose: total equals weighted sum for random weights") {
    const TriMesh gt = perturb_positions(make_wrinkled_plane(6, 6, 1.0, 0.25, 3.0), 0.02, 51);
    const TriMesh pred = perturb_positions(gt, 0.04, 52);
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> d(0.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        LossWeights w;
        w.lambda_pen = d(rng);
        w.lambda_norm = d(rng);
        w.lambda_bend = d(rng);
        w.lambda_p = d(rng);
        w.lambda_mc = d(rng);
        w.lambda_rq8 = d(rng);
        w.lambda_rq16 = d(rng);
        w.lambda_rq32 = d(rng);
        const Recipe recipe = static_cast<Recipe>(trial % 4);
        const LossReport r = compose(pred, gt, nullptr, w, recipe);
        double sum = 0.0;
        for (const auto& [name, weight] : r.effectiveWeights)
            sum += weight * r.perTerm.at(name);
        CHECK(r.total == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("compose: zero total at pred == gt for every recipe") {
    PenScene s = make_pen_scene();
    const LossWeights w;
    for (const Recipe r : {Recipe::P, Recipe::MC_TOT, Recipe::RQ_TOT, Recipe::MCRQ_TOT}) {
        const LossReport rep = compose(s.pred, s.gt, &s.body, w, r);
        CHECK(rep.total == 0.0);
    }
}

TEST_CASE("loss weights validation") {
    LossWeights bad;
    bad.lambda_norm = -0.1;
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
    LossWeights frac;
    frac.body_offset_fraction = 1.5;
    CHECK_THROWS_AS(frac.validate(), InvalidConfig);
}
