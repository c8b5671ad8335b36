#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "ustlab/lattice.hpp"
#include "ustlab/rng.hpp"

using namespace ustlab;

TEST_CASE("neighbors are the four axis steps in E,N,W,S order") {
    auto nb = neighbors({3, -2});
    REQUIRE(nb[0] == LatticePoint{4, -2});
    REQUIRE(nb[1] == LatticePoint{3, -1});
    REQUIRE(nb[2] == LatticePoint{2, -2});
    REQUIRE(nb[3] == LatticePoint{3, -3});
    for (auto q : nb) REQUIRE(are_lattice_neighbors({3, -2}, q));
}

TEST_CASE("pack/unpack round-trips including negatives") {
    for (LatticePoint p : {LatticePoint{0, 0}, LatticePoint{-1, 7}, LatticePoint{kCoordLimit, -kCoordLimit},
                           LatticePoint{123456, -654321}}) {
        REQUIRE(unpack(pack(p)) == p);
    }
}

TEST_CASE("euclidean ball sizes match brute-force enumeration") {
    auto brute = [](double r) {
        std::int64_t count = 0;
        std::int32_t m = static_cast<std::int32_t>(std::ceil(r));
        for (std::int32_t x = -m; x <= m; ++x)
            for (std::int32_t y = -m; y <= m; ++y)
                if (static_cast<double>(norm2({x, y})) <= r * r + 1e-9) ++count;
        return count;
    };
    REQUIRE(euclidean_ball({0, 0}, 0).size() == 1);
    REQUIRE(euclidean_ball({0, 0}, 1).size() == 5);
    REQUIRE(euclidean_ball({0, 0}, 2).size() == 13);
    for (double r : {3.0, 5.5, 10.0, 17.25}) {
        REQUIRE(euclidean_ball({0, 0}, r).size() == static_cast<std::size_t>(brute(r)));
    }
}

TEST_CASE("ball size is monotone in the radius and area-consistent") {
    std::size_t prev = 0;
    for (double r = 0; r <= 30; r += 1.0) {
        std::size_t s = euclidean_ball({7, -9}, r).size();
        REQUIRE(s >= prev);
        prev = s;
    }
    double area = static_cast<double>(euclidean_ball({0, 0}, 100).size());
    REQUIRE(std::abs(area / (100.0 * 100.0) - 3.14159265) < 0.05 * 3.14159265);
}

TEST_CASE("boundary examples") {
    PointSet single{{0, 0}};
    auto d = LatticeRegion::explicit_set(single);
    REQUIRE(outer_boundary(d).size() == 4);
    REQUIRE(inner_boundary(d).size() == 1);

    auto ball1 = euclidean_ball({0, 0}, 1);
    REQUIRE(inner_boundary(ball1).size() == 4);  // center has all neighbors inside

    auto box = LatticeRegion::box({0, 0}, 1);  // 3x3
    REQUIRE(inner_boundary(box).size() == 8);
    REQUIRE(outer_boundary(box).size() == 12);
}

TEST_CASE("boundaries are disjoint from / contained in the region") {
    Rng rng(RandomSource{20240817ULL, 5});
    for (int trial = 0; trial < 20; ++trial) {
        PointSet pts;
        for (int i = 0; i < 40; ++i) {
            std::int32_t x = static_cast<std::int32_t>(rng.next_below(21)) - 10;
            std::int32_t y = static_cast<std::int32_t>(rng.next_below(21)) - 10;
            pts.insert({x, y});
        }
        auto d = LatticeRegion::explicit_set(pts);
        outer_boundary(d).for_each([&](LatticePoint p) { REQUIRE(!d.contains(p)); });
        inner_boundary(d).for_each([&](LatticePoint p) { REQUIRE(d.contains(p)); });
    }
}

TEST_CASE("lazy and materialized regions agree on membership") {
    auto lazy = euclidean_ball({3, 4}, 6.5);
    PointSet mat;
    for (auto p : lazy.points()) mat.insert(p);
    auto exp = LatticeRegion::explicit_set(mat);
    Rng rng(RandomSource{99ULL, 0});
    for (int i = 0; i < 2000; ++i) {
        LatticePoint p{static_cast<std::int32_t>(rng.next_below(31)) - 15 + 3,
                       static_cast<std::int32_t>(rng.next_below(31)) - 15 + 4};
        REQUIRE(lazy.contains(p) == exp.contains(p));
    }
    REQUIRE(lazy.size() == exp.size());
}

TEST_CASE("path step count") {
    LatticePath p;
    REQUIRE(p.steps() == 0);
    p.vertices = {{0, 0}};
    REQUIRE(p.steps() == 0);
    p.vertices = {{0, 0}, {1, 0}, {1, 1}};
    REQUIRE(p.steps() == 2);
}
