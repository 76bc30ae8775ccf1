#include "doctest.h"

#include <random>

#include "drapegeom/scene.hpp"
#include "drapegeom/spatial.hpp"
#include "test_support.hpp"

using namespace drapegeom;

namespace {
std::vector<Vec3> random_points(std::mt19937_64& rng, std::size_t n, double extent) {
    std::uniform_real_distribution<double> d(-extent, extent);
    std::vector<Vec3> pts(n);
    for (Vec3& p : pts) p = Vec3(d(rng), d(rng), d(rng));
    return pts;
}
}  // namespace

TEST_CASE("build_index: single point answers every query") {
    const PointIndex idx = build_index({Vec3(1, 2, 3)});
    for (const Vec3& q : {Vec3(0, 0, 0), Vec3(5, 5, 5), Vec3(1, 2, 3)})
        CHECK(idx.nearest(q).index == 0);
}

TEST_CASE("build_index: empty point set rejected") {
    CHECK_THROWS_AS(build_index({}), EmptyPointSet);
}

TEST_CASE("knn: exact match, hand distances, exhaustive case") {
    std::vector<Vec3> grid;
    for (int i = 0; i < 4; ++i) grid.emplace_back(i, 0, 0);
    const PointIndex idx = build_index(grid);

    const auto atPoint = idx.knn(Vec3(2, 0, 0), 1);
    CHECK(atPoint[0].index == 2);
    CHECK(atPoint[0].distance == 0.0);

    const auto two = idx.knn(Vec3(0.4, 0, 0), 2);  // 0.4 < 0.6
    CHECK(two[0].index == 0);
    CHECK(two[1].index == 1);

    const auto all = idx.knn(Vec3(0.1, 0, 0), 4);
    CHECK(all.size() == 4);
    for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i].distance >= all[i - 1].distance);

    CHECK_THROWS_AS(idx.knn(Vec3(0, 0, 0), 5), KTooLarge);
}

TEST_CASE("knn: duplicate points break ties by lowest index") {
    const PointIndex idx = build_index({Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(1, 1, 1)});
    const auto hits = idx.knn(Vec3(0, 0, 0), 2);
    CHECK(hits[0].index == 0);
    CHECK(hits[1].index == 1);
}

TEST_CASE("oracle equivalence on 100 random instances") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> sizeDist(1, 500);
    std::uniform_int_distribution<int> snapDist(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = sizeDist(rng);
        std::vector<Vec3> pts = random_points(rng, n, 2.0);
        if (snapDist(rng)) {  // quantized coordinates force distance ties
            for (Vec3& p : pts)
                for (int a = 0; a < 3; ++a) p[a] = std::round(p[a] * 2.0) / 2.0;
        }
        const PointIndex idx = build_index(pts);
        std::uniform_int_distribution<int> kDist(1, static_cast<int>(n));
        for (int q = 0; q < 10; ++q) {
            const Vec3 query = random_points(rng, 1, 2.5)[0];
            const int k = kDist(rng);
            const auto fast = idx.knn(query, k);
            const auto slow = brute_force_knn(pts, query, k);
            REQUIRE(fast.size() == slow.size());
            for (std::size_t i = 0; i < fast.size(); ++i) {
                CHECK(fast[i].index == slow[i].index);
                CHECK(fast[i].distance == slow[i].distance);
            }
        }
    }
}

TEST_CASE("knn(K) is a prefix of knn(K+1)") {
    std::mt19937_64 rng(7);
    const auto pts = random_points(rng, 200, 1.0);
    const PointIndex idx = build_index(pts);
    const Vec3 q(0.2, -0.1, 0.3);
    for (int k = 1; k < 20; ++k) {
        const auto a = idx.knn(q, k);
        const auto b = idx.knn(q, k + 1);
        for (int i = 0; i < k; ++i) CHECK(a[i].index == b[i].index);
    }
}

TEST_CASE("nearest_correspondences: identity and offset scenes") {
    const TriMesh mesh = make_plane_grid(5, 5, 1.0);
    const CorrespondenceSet self = nearest_correspondences(mesh, mesh);
    for (std::size_t j = 0; j < mesh.vertexCount(); ++j) {
        CHECK(self.pairs[j].first == static_cast<int>(j));
        CHECK(self.pairs[j].second == static_cast<int>(j));
        CHECK(self.distances[j] == 0.0);
    }

    const TriMesh far = dtest::translated(mesh, Vec3(100, 0, 0));
    const TriMesh tinyBody = dtest::single_triangle();
    const CorrespondenceSet c = nearest_correspondences(far, tinyBody);
    for (std::size_t j = 0; j < far.vertexCount(); ++j) CHECK(c.pairs[j].second >= 0);

    // brute-force cross-check on a capsule body + offset patch
    const DrapeScene scene = make_capsule_drape(4.0, 6.0, 14, 5, 5, 0.5, 0.3);
    const CorrespondenceSet cc = nearest_correspondences(scene.cloth, scene.body);
    for (std::size_t j = 0; j < scene.cloth.vertexCount(); ++j) {
        const auto slow = brute_force_knn(scene.body.positions, scene.cloth.positions[j], 1);
        CHECK(cc.pairs[j].second == slow[0].index);
        CHECK(cc.distances[j] == slow[0].distance);
    }
}

TEST_CASE("downsample_points: identity factor and antipodal pair") {
    std::vector<Vec3> two = {Vec3(0, 0, 1), Vec3(0, 0, -1)};
    CHECK(downsample_points(two, 1) == std::vector<int>{0, 1});
    CHECK(downsample_points(two, 2) == std::vector<int>{0});
}

TEST_CASE("downsample_points: farthest-point sampling spreads better than random") {
    const TriMesh grid = make_plane_grid(10, 10, 1.0);
    const auto fps = downsample_points(grid.positions, 10);
    REQUIRE(fps.size() == 10);

    auto minPairDist = [&](const std::vector<int>& sel) {
        double best = 1e300;
        for (std::size_t a = 0; a < sel.size(); ++a)
            for (std::size_t b = a + 1; b < sel.size(); ++b)
                best = std::min(best,
                                (grid.positions[sel[a]] - grid.positions[sel[b]]).norm());
        return best;
    };
    const double fpsSpread = minPairDist(fps);

    std::mt19937_64 rng(99);
    int fpsWins = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> all(grid.vertexCount());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(10);
        if (fpsSpread >= minPairDist(all)) fpsWins++;
    }
    CHECK(fpsWins >= 95);
}

TEST_CASE("knn pooling: verbatim, constant, component-wise max") {
    const std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    const PointIndex idx = build_index(pts);
    const std::vector<std::vector<double>> features = {{1, 5}, {4, 2}, {3, 3}};

    const std::vector<Vec3> q1 = {Vec3(0.9, 0, 0)};
    const auto verbatim = knn_max_pool(features, idx, q1, 1);
    CHECK(verbatim[0] == std::vector<double>{4, 2});

    const std::vector<std::vector<double>> constant = {{7, 7}, {7, 7}, {7, 7}};
    const auto c = knn_max_pool(constant, idx, q1, 3);
    CHECK(c[0] == std::vector<double>{7, 7});

    const auto m = knn_max_pool(features, idx, q1, 3);
    CHECK(m[0] == std::vector<double>{4, 5});

    const auto avg = knn_avg_pool(features, idx, q1, 3);
    CHECK(avg[0][0] == doctest::Approx((1 + 4 + 3) / 3.0));
    CHECK(avg[0][1] == doctest::Approx((5 + 2 + 3) / 3.0));
}

TEST_CASE("knn_max_pool is monotone in its inputs") {
    std::mt19937_64 rng(5);
    const auto pts = random_points(rng, 60, 1.0);
    const PointIndex idx = build_index(pts);
    std::uniform_real_distribution<double> fd(0.0, 1.0);
    std::vector<std::vector<double>> features(60, std::vector<double>(3));
    for (auto& f : features)
        for (double& v : f) v = fd(rng);
    const auto queries = random_points(rng, 20, 1.0);
    const auto base = knn_max_pool(features, idx, queries, 7);

    auto bumped = features;
    std::uniform_int_distribution<int> pick(0, 59);
    for (int t = 0; t < 10; ++t) bumped[pick(rng)][pick(rng) % 3] += fd(rng);
    const auto after = knn_max_pool(bumped, idx, queries, 7);
    for (std::size_t q = 0; q < queries.size(); ++q)
        for (int d = 0; d < 3; ++d) CHECK(after[q][d] >= base[q][d]);
}
