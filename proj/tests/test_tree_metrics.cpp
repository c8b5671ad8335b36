#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "ustlab/oracle.hpp"
#include "ustlab/tree_metrics.hpp"
#include "ustlab/ust.hpp"

using namespace ustlab;

namespace {

// FiniteGraph over the sampled vertices of a tree window, plus the index map.
std::pair<FiniteGraph, std::vector<std::int32_t>> tree_as_graph(const TreeWindow& t) {
    std::vector<std::int32_t> verts;
    std::vector<std::int32_t> gid(t.vertex_capacity(), -1);
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(t.vertex_capacity()); ++i)
        if (t.parent_index(i) != TreeWindow::kAbsent) {
            gid[i] = static_cast<std::int32_t>(verts.size());
            verts.push_back(i);
        }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (auto i : verts) {
        std::int32_t p = t.parent_index(i);
        if (p != i) edges.emplace_back(static_cast<std::uint32_t>(gid[i]),
                                       static_cast<std::uint32_t>(gid[p]));
    }
    return {FiniteGraph(verts.size(), edges), gid};
}

}  // namespace

TEST_CASE("intrinsic ball on the path tree") {
    TreeWindow t = path_tree(5);
    auto b0 = intrinsic_ball(t, {0, 0}, 0);
    REQUIRE(b0.volume == 1);
    REQUIRE(b0.members == std::vector<LatticePoint>{{0, 0}});

    auto b2 = intrinsic_ball(t, {0, 0}, 2);
    REQUIRE(b2.volume == 5);
    REQUIRE(!b2.truncated);

    auto edge = intrinsic_ball(t, {5, 0}, 3);
    REQUIRE(edge.volume == 4);
}

TEST_CASE("ball membership matches exhaustive tree distances") {
    RandomSource src{818181ULL, 0};
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(src.substream(s));
        TreeWindow t = sample_ust_box_free(4, rng);
        const std::int32_t R = 3 + static_cast<std::int32_t>(s % 4);
        auto ball = intrinsic_ball(t, {0, 0}, R);
        std::set<std::pair<int, int>> members;
        for (std::size_t i = 0; i < ball.members.size(); ++i) {
            members.insert({ball.members[i].x, ball.members[i].y});
            REQUIRE(ball.depth[i] == tree_distance(t, {0, 0}, ball.members[i]));
        }
        for (std::int32_t idx = 0; idx < static_cast<std::int32_t>(t.vertex_capacity()); ++idx) {
            LatticePoint p = t.point(idx);
            bool inside = tree_distance(t, {0, 0}, p) <= R;
            REQUIRE(inside == (members.count({p.x, p.y}) != 0));
        }
        REQUIRE(ball.volume == static_cast<std::int64_t>(members.size()));
        REQUIRE(!ball.truncated);  // exact finite tree
    }
}

TEST_CASE("balls nest and volumes are monotone in the radius") {
    Rng rng(RandomSource{111ULL, 2});
    TreeWindow t = sample_ust_box_free(6, rng);
    std::int64_t prev = 0;
    for (std::int32_t R = 0; R <= 12; ++R) {
        auto b = intrinsic_ball(t, {0, 0}, R);
        REQUIRE(b.volume >= prev);
        prev = b.volume;
    }
}

TEST_CASE("window truncation flags and errors") {
    TreeWindow t = sample_ust_window(4, WindowMethod::WiredBox, 4, RandomSource{5ULL, 0});
    // a huge intrinsic radius must reach the window edge
    auto b = intrinsic_ball(t, {0, 0}, 40);
    REQUIRE(b.truncated);
    REQUIRE_THROWS_AS(resistance_to_ball_complement(t, {0, 0}, 40), WindowTooSmall);
    REQUIRE_THROWS_AS(nash_williams_bound(t, {0, 0}, 40), WindowTooSmall);
}

TEST_CASE("component_in_box basics") {
    RandomSource src{232323ULL, 0};
    for (std::uint64_t s = 0; s < 30; ++s) {
        Rng rng(src.substream(s));
        TreeWindow t = sample_ust_box_free(5, rng);
        std::size_t prev = 0;
        for (std::int32_t r = 0; r <= 5; ++r) {
            auto comp = component_in_box(t, r);
            REQUIRE(comp.size() >= 1);
            REQUIRE(comp.front() == LatticePoint{0, 0});
            for (auto p : comp) REQUIRE(norm2(p) <= std::int64_t{r} * r);
            REQUIRE(comp.size() >= prev);
            prev = comp.size();
        }
    }
}

TEST_CASE("single-target resistance equals the tree distance") {
    RandomSource src{343434ULL, 0};
    for (std::uint64_t s = 0; s < 50; ++s) {
        Rng rng(src.substream(s));
        TreeWindow t = sample_ust_box_free(3, rng);
        Rng pick(src.substream(s ^ 0xabc));
        for (int k = 0; k < 5; ++k) {
            LatticePoint x{static_cast<std::int32_t>(pick.next_below(7)) - 3,
                           static_cast<std::int32_t>(pick.next_below(7)) - 3};
            LatticePoint y{static_cast<std::int32_t>(pick.next_below(7)) - 3,
                           static_cast<std::int32_t>(pick.next_below(7)) - 3};
            if (x == y) continue;
            auto q = effective_resistance(t, x, PointSet{y});
            REQUIRE(!q.infinite);
            REQUIRE(q.value == static_cast<double>(tree_distance(t, x, y)));
        }
    }
}

TEST_CASE("Y-junction worked example") {
    // center at 0 with three unit branches; source at one leaf, targets at
    // the other two: source edge in series with the two target edges in
    // parallel, R = 1 + 1/2
    TreeWindow t(1, 1, RootKind::FiniteRoot);
    t.set_root(t.index({0, 0}));
    t.set_parent(t.index({1, 0}), t.index({0, 0}));
    t.set_parent(t.index({0, 1}), t.index({0, 0}));
    t.set_parent(t.index({-1, 0}), t.index({0, 0}));
    auto q = effective_resistance(t, {1, 0}, PointSet{{0, 1}, {-1, 0}});
    REQUIRE(q.value == Catch::Approx(1.5));
}

TEST_CASE("series/parallel value matches the Laplacian oracle") {
    RandomSource src{454545ULL, 0};
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(src.substream(s));
        TreeWindow t = sample_ust_box_free(3, rng);
        auto [g, gid] = tree_as_graph(t);

        Rng pick(src.substream(s ^ 0xdef));
        LatticePoint x{static_cast<std::int32_t>(pick.next_below(7)) - 3,
                       static_cast<std::int32_t>(pick.next_below(7)) - 3};
        PointSet targets;
        std::vector<std::uint32_t> target_ids;
        int want = 1 + static_cast<int>(pick.next_below(3));
        while (static_cast<int>(targets.size()) < want) {
            LatticePoint y{static_cast<std::int32_t>(pick.next_below(7)) - 3,
                           static_cast<std::int32_t>(pick.next_below(7)) - 3};
            if (y == x || targets.count(y)) continue;
            targets.insert(y);
            target_ids.push_back(static_cast<std::uint32_t>(gid[t.index(y)]));
        }
        double mine = effective_resistance(t, x, targets).value;
        double ref = oracle::laplacian_resistance(
            g, {static_cast<std::uint32_t>(gid[t.index(x)])}, target_ids);
        REQUIRE(std::abs(mine - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("Rayleigh monotonicity: more targets, less resistance") {
    RandomSource src{565656ULL, 0};
    for (std::uint64_t s = 0; s < 30; ++s) {
        Rng rng(src.substream(s));
        TreeWindow t = sample_ust_box_free(3, rng);
        PointSet small{{3, 3}}, big{{3, 3}, {-3, 3}, {3, -3}};
        double rs = effective_resistance(t, {0, 0}, small).value;
        double rb = effective_resistance(t, {0, 0}, big).value;
        REQUIRE(rb <= rs + 1e-12);
    }
}

TEST_CASE("ball-complement resistance respects Nash-Williams and series bounds") {
    RandomSource src{676767ULL, 0};
    int checked = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(src.substream(s));
        TreeWindow t = sample_ust_box_free(4, rng);
        const std::int32_t R = 2;
        auto q = resistance_to_ball_complement(t, {0, 0}, R);
        double nw = nash_williams_bound(t, {0, 0}, R);
        if (q.infinite) {
            REQUIRE(std::isinf(nw));
            continue;
        }
        ++checked;
        REQUIRE(q.value >= nw - 1e-12);
        REQUIRE(q.value >= 1.0 / 4.0);  // at most 4 disjoint unit edges out
        REQUIRE(q.value <= R + 1.0);    // targets sit at depth R+1
    }
    REQUIRE(checked > 50);
}

TEST_CASE("resistance out of U_r equals resistance out of the euclidean ball") {
    RandomSource src{787878ULL, 0};
    for (std::uint64_t s = 0; s < 50; ++s) {
        Rng rng(src.substream(s));
        TreeWindow t = sample_ust_box_free(6, rng);
        const std::int32_t r = 3;
        const std::int64_t r2 = r * r;

        PointSet outside_ball;
        for (std::int32_t idx = 0; idx < static_cast<std::int32_t>(t.vertex_capacity()); ++idx)
            if (norm2(t.point(idx)) > r2) outside_ball.insert(t.point(idx));

        auto comp = component_in_box(t, r);
        PointSet in_comp;
        for (auto p : comp) in_comp.insert(p);
        PointSet outside_comp;
        for (std::int32_t idx = 0; idx < static_cast<std::int32_t>(t.vertex_capacity()); ++idx)
            if (!in_comp.count(t.point(idx))) outside_comp.insert(t.point(idx));

        double a = effective_resistance(t, {0, 0}, outside_ball).value;
        double b = effective_resistance(t, {0, 0}, outside_comp).value;
        REQUIRE(a == Catch::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("good-ball conditions are monotone in lambda") {
    auto g_fn = [](double R) { return std::pow(R, 0.8); };
    RandomSource src{898989ULL, 0};
    for (std::uint64_t s = 0; s < 20; ++s) {
        TreeWindow t = sample_ust_window(20, WindowMethod::WiredBox, 4, RandomSource{900 + s, 0});
        for (double lam : {1.0, 2.0, 4.0}) {
            auto a = good_ball_check(t, {0, 0}, 8, lam, g_fn);
            auto b = good_ball_check(t, {0, 0}, 8, 2 * lam, g_fn);
            if (a.cond_volume_upper) REQUIRE(b.cond_volume_upper);
            if (a.cond_volume_lower) REQUIRE(b.cond_volume_lower);
            if (a.cond_resistance) REQUIRE(b.cond_resistance);
        }
    }
}

TEST_CASE("most balls are good at generous lambda", "[slow]") {
    // scale function calibrated on the ensemble itself: g = sqrt(mean volume)
    const std::int32_t R = 16;
    const std::uint64_t trees = 200;
    std::vector<TreeWindow> sample;
    std::vector<std::int64_t> volumes;
    for (std::uint64_t s = 0; s < trees; ++s) {
        sample.push_back(sample_ust_window(40, WindowMethod::WiredBox, 4, RandomSource{4400 + s, 0}));
        volumes.push_back(intrinsic_ball(sample.back(), {0, 0}, R).volume);
    }
    double mean_vol = 0;
    for (auto v : volumes) mean_vol += static_cast<double>(v);
    mean_vol /= static_cast<double>(trees);
    auto g_fn = [&](double) { return std::sqrt(mean_vol); };

    int good = 0;
    for (const auto& t : sample)
        if (good_ball_check(t, {0, 0}, R, 8.0, g_fn).good()) ++good;
    REQUIRE(static_cast<double>(good) / static_cast<double>(trees) > 0.9);
}
