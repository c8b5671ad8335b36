#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "ustlab/oracle.hpp"
#include "ustlab/stats.hpp"
#include "ustlab/ust.hpp"

using namespace ustlab;

namespace {

oracle::EdgeList parent_edges(const std::vector<std::uint32_t>& parent) {
    oracle::EdgeList e;
    for (std::uint32_t v = 0; v < parent.size(); ++v)
        if (parent[v] != v) e.emplace_back(std::min(v, parent[v]), std::max(v, parent[v]));
    std::sort(e.begin(), e.end());
    return e;
}

std::vector<std::uint32_t> identity_order(std::size_t n) {
    std::vector<std::uint32_t> o(n);
    for (std::size_t i = 0; i < n; ++i) o[i] = static_cast<std::uint32_t>(i);
    return o;
}

// Uniformity check: sample Wilson trees, index them against the enumeration,
// chi-square against the uniform law.
double wilson_uniformity_pvalue(const FiniteGraph& g, std::uint32_t root,
                                const std::vector<std::uint32_t>& order, std::uint64_t samples,
                                RandomSource src) {
    auto all = oracle::enumerate_spanning_trees(g);
    std::map<oracle::EdgeList, std::size_t> index;
    for (std::size_t i = 0; i < all.size(); ++i) index[all[i]] = i;
    std::vector<std::uint64_t> observed(all.size(), 0);
    Rng rng(src);
    for (std::uint64_t s = 0; s < samples; ++s) {
        auto parent = wilson_finite(g, root, order, rng);
        auto it = index.find(parent_edges(parent));
        REQUIRE(it != index.end());
        ++observed[it->second];
    }
    std::vector<double> expected(all.size(), 1.0 / static_cast<double>(all.size()));
    return chi_squared_pvalue(observed, expected);
}

// LERW from v to w on the free-boundary box graph, as a grid-index sequence.
std::vector<std::uint32_t> box_lerw_path(std::int32_t half, LatticePoint v, LatticePoint w,
                                         Rng& rng) {
    auto in_box = [&](LatticePoint p) { return std::abs(p.x) <= half && std::abs(p.y) <= half; };
    LatticePath raw;
    raw.vertices.push_back(v);
    LatticePoint pos = v;
    while (!(pos == w)) {
        std::array<LatticePoint, 4> opts;
        int m = 0;
        for (auto q : neighbors(pos))
            if (in_box(q)) opts[m++] = q;
        pos = opts[rng.next_below(static_cast<std::uint64_t>(m))];
        raw.vertices.push_back(pos);
    }
    auto erased = loop_erase(raw);
    std::vector<std::uint32_t> out;
    std::int32_t side = 2 * half + 1;
    for (auto p : erased.vertices)
        out.push_back(static_cast<std::uint32_t>((p.y + half) * side + (p.x + half)));
    return out;
}

}  // namespace

TEST_CASE("wilson on a single edge") {
    auto g = FiniteGraph::path(2);
    Rng rng(RandomSource{1ULL, 0});
    auto parent = wilson_finite(g, 1, identity_order(2), rng);
    REQUIRE(parent[1] == 1);
    REQUIRE(parent[0] == 1);
}

TEST_CASE("wilson samples are spanning trees") {
    auto g = FiniteGraph::grid(4, 4);
    Rng rng(RandomSource{77ULL, 1});
    for (int s = 0; s < 100; ++s) {
        auto parent = wilson_finite(g, 5, identity_order(16), rng);
        auto edges = parent_edges(parent);
        REQUIRE(edges.size() == 15);
        // every vertex reaches the root
        for (std::uint32_t v = 0; v < 16; ++v) {
            std::uint32_t cur = v;
            for (int hops = 0; hops < 17; ++hops) {
                if (parent[cur] == cur) break;
                cur = parent[cur];
            }
            REQUIRE(parent[cur] == cur);
            REQUIRE(cur == 5);
        }
        // edges are graph edges
        const auto& ge = g.edges();
        for (auto e : edges) REQUIRE(std::binary_search(ge.begin(), ge.end(), e));
    }
}

TEST_CASE("wilson uniformity on the 4-cycle") {
    double p = wilson_uniformity_pvalue(FiniteGraph::cycle(4), 0, identity_order(4), 100000,
                                        RandomSource{31337ULL, 0});
    REQUIRE(p > 1e-4);
}

TEST_CASE("wilson uniformity on the 2x3 grid") {
    double p = wilson_uniformity_pvalue(FiniteGraph::grid(3, 2), 0, identity_order(6), 150000,
                                        RandomSource{31338ULL, 0});
    REQUIRE(p > 1e-3);
}

TEST_CASE("wilson law is invariant under root and fill order") {
    auto g = FiniteGraph::grid(3, 2);
    std::vector<std::uint32_t> reversed{5, 4, 3, 2, 1, 0};
    double p1 = wilson_uniformity_pvalue(g, 5, reversed, 100000, RandomSource{424ULL, 0});
    double p2 = wilson_uniformity_pvalue(g, 3, {2, 5, 0, 4, 1, 3}, 100000, RandomSource{425ULL, 0});
    REQUIRE(p1 > 1e-4);
    REQUIRE(p2 > 1e-4);
}

TEST_CASE("pemantle path-law triangle on the 2x2 grid") {
    const std::int32_t half = 0;  // embed grid(2,2) as {0,1}^2 via explicit walk below
    (void)half;
    auto g = FiniteGraph::grid(2, 2);
    const std::uint32_t v = 0, w = 3;
    auto exact = oracle::exact_path_law(g, v, w);

    const std::uint64_t samples = 20000;
    std::map<std::vector<std::uint32_t>, std::uint64_t> wilson_law, lerw_law, exact_counts;
    for (const auto& [path, c] : exact.counts) exact_counts[path] = c;

    Rng rng(RandomSource{271ULL, 3});
    for (std::uint64_t s = 0; s < samples; ++s) {
        auto parent = wilson_finite(g, 0, identity_order(4), rng);
        ++wilson_law[oracle::tree_edge_list_path(4, parent_edges(parent), v, w)];
    }
    // LERW from v stopped on hitting w, on the same graph: grid(2,2) is the
    // box [0,1]^2; walk directly on indices
    Rng rng2(RandomSource{272ULL, 3});
    for (std::uint64_t s = 0; s < samples; ++s) {
        LatticePath raw;
        raw.vertices.push_back({0, 0});
        LatticePoint pos{0, 0};
        while (!(pos == LatticePoint{1, 1})) {
            std::array<LatticePoint, 4> opts;
            int m = 0;
            for (auto q : neighbors(pos))
                if (q.x >= 0 && q.x <= 1 && q.y >= 0 && q.y <= 1) opts[m++] = q;
            pos = opts[rng2.next_below(static_cast<std::uint64_t>(m))];
            raw.vertices.push_back(pos);
        }
        auto erased = loop_erase(raw);
        std::vector<std::uint32_t> key;
        for (auto p : erased.vertices) key.push_back(static_cast<std::uint32_t>(p.x + 2 * p.y));
        ++lerw_law[key];
    }

    REQUIRE(empirical_tv_distance(wilson_law, exact_counts) < 0.05);
    REQUIRE(empirical_tv_distance(lerw_law, exact_counts) < 0.05);
    REQUIRE(empirical_tv_distance(wilson_law, lerw_law) < 0.05);
}

TEST_CASE("tree_path agrees with BFS distance on free-box trees") {
    RandomSource src{606060ULL, 0};
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(src.substream(s));
        TreeWindow t = sample_ust_box_free(2, rng);
        // BFS over tree adjacency from a fixed start
        LatticePoint start{0, 0};
        std::vector<std::int32_t> dist(t.vertex_capacity(), -1);
        std::vector<std::int32_t> frontier{t.index(start)};
        dist[t.index(start)] = 0;
        while (!frontier.empty()) {
            std::vector<std::int32_t> next;
            for (auto idx : frontier) {
                std::array<std::int32_t, 4> nb;
                int n = t.tree_neighbors(t.point(idx), nb);
                for (int k = 0; k < n; ++k)
                    if (dist[nb[k]] < 0) {
                        dist[nb[k]] = dist[idx] + 1;
                        next.push_back(nb[k]);
                    }
            }
            frontier.swap(next);
        }
        for (std::int32_t idx = 0; idx < static_cast<std::int32_t>(t.vertex_capacity()); ++idx) {
            LatticePoint p = t.point(idx);
            auto path = tree_path(t, start, p);
            REQUIRE(static_cast<std::int32_t>(path.steps()) == dist[idx]);
            REQUIRE(path.vertices.front() == start);
            REQUIRE(path.vertices.back() == p);
            // consecutive path vertices are tree-adjacent
            for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i)
                REQUIRE(t.tree_adjacent(t.index(path.vertices[i]),
                                        t.index(path.vertices[i + 1])));
        }
    }
}

TEST_CASE("meeting point splits the tree path") {
    RandomSource src{505050ULL, 0};
    for (std::uint64_t s = 0; s < 50; ++s) {
        Rng rng(src.substream(s));
        TreeWindow t = sample_ust_box_free(3, rng);
        Rng pick(src.substream(s ^ 0xff));
        for (int k = 0; k < 10; ++k) {
            LatticePoint x{static_cast<std::int32_t>(pick.next_below(7)) - 3,
                           static_cast<std::int32_t>(pick.next_below(7)) - 3};
            LatticePoint y{static_cast<std::int32_t>(pick.next_below(7)) - 3,
                           static_cast<std::int32_t>(pick.next_below(7)) - 3};
            LatticePoint z = meeting_point(t, x, y);
            REQUIRE(tree_distance(t, x, y) == tree_distance(t, x, z) + tree_distance(t, z, y));
            REQUIRE(tree_distance(t, x, y) == tree_distance(t, y, x));
        }
    }
}

TEST_CASE("windowed samples are deterministic in (seed, stream)") {
    for (auto method : {WindowMethod::WiredBox, WindowMethod::SpineAndFill}) {
        TreeWindow a = sample_ust_window(8, method, 4, RandomSource{97ULL, 5});
        TreeWindow b = sample_ust_window(8, method, 4, RandomSource{97ULL, 5});
        REQUIRE(a.vertex_capacity() == b.vertex_capacity());
        for (std::size_t i = 0; i < a.vertex_capacity(); ++i)
            REQUIRE(a.parent_index(static_cast<std::int32_t>(i)) ==
                    b.parent_index(static_cast<std::int32_t>(i)));
        TreeWindow c = sample_ust_window(8, method, 4, RandomSource{97ULL, 6});
        bool differs = false;
        for (std::size_t i = 0; i < a.vertex_capacity() && !differs; ++i)
            differs = a.parent_index(static_cast<std::int32_t>(i)) !=
                      c.parent_index(static_cast<std::int32_t>(i));
        REQUIRE(differs);
    }
}

TEST_CASE("window samples cover the box and connect the origin locally") {
    int connected = 0, total = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        for (auto method : {WindowMethod::WiredBox, WindowMethod::SpineAndFill}) {
            TreeWindow t = sample_ust_window(8, method, 4, RandomSource{1000 + s, 0});
            for (std::size_t i = 0; i < t.vertex_capacity(); ++i)
                REQUIRE(t.parent_index(static_cast<std::int32_t>(i)) != TreeWindow::kAbsent);
            for (auto q : neighbors({0, 0})) {
                ++total;
                try {
                    tree_path(t, {0, 0}, q);
                    ++connected;
                } catch (const std::runtime_error&) {
                    // wired forest: both endpoints may drain to the boundary
                }
            }
        }
    }
    // paths between the origin and its neighbors usually stay inside a K=4
    // box; the wired forest occasionally routes both ends to the boundary
    REQUIRE(connected >= static_cast<int>(0.85 * total));
}

TEST_CASE("spine-and-fill: the spine is the rootward chain from the origin") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        TreeWindow t = sample_ust_window(6, WindowMethod::SpineAndFill, 4, RandomSource{7000 + s, 0});
        REQUIRE(t.spine().has_value());
        const auto& spine = t.spine()->vertices;
        REQUIRE(spine.front() == LatticePoint{0, 0});
        auto chain = rootward_chain(t, {0, 0});
        REQUIRE(chain.size() == spine.size());
        for (std::size_t i = 0; i < spine.size(); ++i)
            REQUIRE(t.index(spine[i]) == chain[i]);
    }
}

TEST_CASE("tree files round-trip byte-exactly") {
    TreeWindow t = sample_ust_window(4, WindowMethod::WiredBox, 4, RandomSource{12321ULL, 0});
    std::ostringstream first;
    save_tree(t, first);
    std::istringstream in(first.str());
    TreeWindow loaded = load_tree(in);
    std::ostringstream second;
    save_tree(loaded, second);
    REQUIRE(first.str() == second.str());
    REQUIRE(loaded.meta_r == t.meta_r);
    REQUIRE(loaded.meta_K == t.meta_K);
    REQUIRE(loaded.meta_seed == t.meta_seed);
    REQUIRE(loaded.meta_method == t.meta_method);
    for (std::size_t i = 0; i < t.vertex_capacity(); ++i)
        REQUIRE(loaded.parent_index(static_cast<std::int32_t>(i)) ==
                t.parent_index(static_cast<std::int32_t>(i)));
}

TEST_CASE("path tree is a rooted segment") {
    TreeWindow t = path_tree(5);
    REQUIRE(t.present({-5, 0}));
    REQUIRE(t.present({5, 0}));
    REQUIRE(!t.present({0, 1}));
    REQUIRE(t.degree({0, 0}) == 2);
    REQUIRE(t.degree({5, 0}) == 1);
    REQUIRE(tree_distance(t, {-5, 0}, {5, 0}) == 10);
    REQUIRE(!t.guarded());
}

TEST_CASE("window restriction is stable in the box factor K", "[slow]") {
    // marginals of the tree restricted to the 3x3 box around 0, K=16 vs
    // K=32; the full 12-edge mask law has too many atoms for a TV test at
    // this sample size, so compare per-edge marginals and the edge count
    struct LocalStats {
        std::array<double, 12> edge_freq{};
        std::map<int, std::uint64_t> edge_count_hist;
    };
    auto local_law = [&](std::int32_t K, std::uint64_t n, std::uint64_t salt) {
        LocalStats st;
        for (std::uint64_t s = 0; s < n; ++s) {
            TreeWindow t = sample_ust_window(1, WindowMethod::WiredBox, K,
                                             RandomSource{mix64(salt, s), 0});
            int bit = 0, count = 0;
            for (std::int32_t y = -1; y <= 1; ++y)
                for (std::int32_t x = -1; x <= 1; ++x) {
                    if (x < 1 && t.tree_adjacent(t.index({x, y}), t.index({x + 1, y}))) {
                        st.edge_freq[bit] += 1.0;
                        ++count;
                    }
                    if (x < 1) ++bit;
                    if (y < 1 && t.tree_adjacent(t.index({x, y}), t.index({x, y + 1}))) {
                        st.edge_freq[bit] += 1.0;
                        ++count;
                    }
                    if (y < 1) ++bit;
                }
            ++st.edge_count_hist[count];
        }
        for (auto& f : st.edge_freq) f /= static_cast<double>(n);
        return st;
    };
    const std::uint64_t n = 30000;
    auto a = local_law(16, n, 111);
    auto b = local_law(32, n, 222);
    for (int e = 0; e < 12; ++e)
        REQUIRE(std::abs(a.edge_freq[e] - b.edge_freq[e]) < 0.02);
    REQUIRE(empirical_tv_distance(a.edge_count_hist, b.edge_count_hist) < 0.05);
}
