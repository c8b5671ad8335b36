#pragma once

// Wilson's-algorithm UST sampling on finite graphs and on Z^2 windows,
// plus the parent-pointer TreeWindow structure and its file format.

#include <array>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ustlab/graph.hpp"
#include "ustlab/lattice.hpp"
#include "ustlab/rng.hpp"
#include "ustlab/walk.hpp"

namespace ustlab {

enum class RootKind { FiniteRoot, WiredBoundary, InfiniteLerwSpine };
enum class WindowMethod { WiredBox, SpineAndFill };

inline std::string method_name(WindowMethod m) {
    return m == WindowMethod::WiredBox ? "wired" : "spine";
}

// Spanning tree (or forest rooted at the wired boundary) of a box
// [-half,half]^2, parent pointers rootward. parent == self marks a root,
// parent == kAbsent marks a lattice site that is not part of the structure
// (synthetic trees only; window samples cover the whole box).
class TreeWindow {
  public:
    static constexpr std::int32_t kAbsent = -1;

    TreeWindow(std::int32_t half, std::int32_t trusted, RootKind kind)
        : half_(half), trusted_(trusted), root_kind_(kind),
          parent_(static_cast<std::size_t>(side()) * side(), kAbsent) {
        if (half < 0 || trusted < 0 || trusted > half)
            throw std::invalid_argument("TreeWindow: bad radii");
    }

    std::int32_t half() const { return half_; }
    std::int32_t trusted_radius() const { return trusted_; }
    std::int32_t side() const { return 2 * half_ + 1; }
    RootKind root_kind() const { return root_kind_; }

    // Metadata echoed into the file header.
    std::int32_t meta_r = 0;
    std::int32_t meta_K = 0;
    std::uint64_t meta_seed = 0;
    std::string meta_method = "finite";

    bool in_box(LatticePoint p) const {
        return std::abs(p.x) <= half_ && std::abs(p.y) <= half_;
    }

    // Window samples are only trusted inside B(0, trusted); exact finite
    // trees (FiniteRoot) are the whole graph and need no guard.
    bool guarded() const { return root_kind_ != RootKind::FiniteRoot; }

    // Squared Euclidean guard radius for walks; crossing it aborts a replica.
    std::int64_t guard_norm2() const {
        if (!guarded()) return std::numeric_limits<std::int64_t>::max();
        std::int64_t g = std::max<std::int64_t>(0, trusted_ - 1);
        return g * g;
    }

    std::int32_t index(LatticePoint p) const {
        return (p.y + half_) * side() + (p.x + half_);
    }

    LatticePoint point(std::int32_t idx) const {
        return {static_cast<std::int32_t>(idx % side()) - half_,
                static_cast<std::int32_t>(idx / side()) - half_};
    }

    bool present(LatticePoint p) const { return in_box(p) && parent_[index(p)] != kAbsent; }

    std::int32_t parent_index(std::int32_t idx) const { return parent_[idx]; }
    void set_parent(std::int32_t idx, std::int32_t par) { parent_[idx] = par; }
    void set_root(std::int32_t idx) { parent_[idx] = idx; }
    bool is_root(std::int32_t idx) const { return parent_[idx] == idx; }

    bool tree_adjacent(std::int32_t a, std::int32_t b) const {
        return (parent_[a] == b && a != b) || (parent_[b] == a && a != b);
    }

    // Tree neighbors of p among its 4 lattice neighbors; returns the count.
    int tree_neighbors(LatticePoint p, std::array<std::int32_t, 4>& out) const {
        std::int32_t ip = index(p);
        int n = 0;
        for (auto q : neighbors(p)) {
            if (!in_box(q)) continue;
            std::int32_t iq = index(q);
            if (parent_[iq] == kAbsent) continue;
            if (tree_adjacent(ip, iq)) out[n++] = iq;
        }
        return n;
    }

    // mu_x, the tree degree of x within the box.
    int degree(LatticePoint p) const {
        std::array<std::int32_t, 4> tmp;
        return tree_neighbors(p, tmp);
    }

    const std::optional<LatticePath>& spine() const { return spine_; }
    void set_spine(LatticePath s) { spine_ = std::move(s); }

    std::size_t vertex_capacity() const { return parent_.size(); }

  private:
    std::int32_t half_;
    std::int32_t trusted_;
    RootKind root_kind_;
    std::vector<std::int32_t> parent_;
    std::optional<LatticePath> spine_;
};

// Rootward chain from x, ending at (and including) a root.
inline std::vector<std::int32_t> rootward_chain(const TreeWindow& t, LatticePoint x) {
    if (!t.in_box(x) || !t.present(x))
        throw std::domain_error("rootward_chain: point outside sampled tree");
    std::vector<std::int32_t> chain;
    std::int32_t cur = t.index(x);
    chain.push_back(cur);
    std::size_t guard = t.vertex_capacity() + 1;
    while (!t.is_root(cur)) {
        cur = t.parent_index(cur);
        chain.push_back(cur);
        if (chain.size() > guard) throw std::runtime_error("rootward_chain: parent cycle");
    }
    return chain;
}

// First common vertex of the two rootward chains (Z_{xy}).
inline LatticePoint meeting_point(const TreeWindow& t, LatticePoint x, LatticePoint y) {
    auto cx = rootward_chain(t, x);
    std::unordered_map<std::int32_t, std::size_t> on_x;
    on_x.reserve(cx.size() * 2);
    for (std::size_t i = 0; i < cx.size(); ++i) on_x.emplace(cx[i], i);

    std::int32_t cur = t.index(y);
    if (!t.present(y)) throw std::domain_error("meeting_point: point outside sampled tree");
    std::size_t guard = t.vertex_capacity() + 1, steps = 0;
    while (true) {
        if (on_x.count(cur)) return t.point(cur);
        if (t.is_root(cur)) break;
        cur = t.parent_index(cur);
        if (++steps > guard) throw std::runtime_error("meeting_point: parent cycle");
    }
    throw std::runtime_error("meeting_point: vertices in different components");
}

// The unique tree path gamma(x,y); |path| - 1 = d(x,y).
inline LatticePath tree_path(const TreeWindow& t, LatticePoint x, LatticePoint y) {
    auto cx = rootward_chain(t, x);
    std::unordered_map<std::int32_t, std::size_t> on_x;
    on_x.reserve(cx.size() * 2);
    for (std::size_t i = 0; i < cx.size(); ++i) on_x.emplace(cx[i], i);

    if (!t.present(y)) throw std::domain_error("tree_path: point outside sampled tree");
    std::vector<std::int32_t> cy;
    std::int32_t cur = t.index(y);
    std::size_t meet_on_x = 0;
    std::size_t guard = t.vertex_capacity() + 1;
    while (true) {
        auto it = on_x.find(cur);
        if (it != on_x.end()) {
            meet_on_x = it->second;
            break;
        }
        cy.push_back(cur);
        if (t.is_root(cur))
            throw std::runtime_error("tree_path: vertices in different components");
        cur = t.parent_index(cur);
        if (cy.size() > guard) throw std::runtime_error("tree_path: parent cycle");
    }

    LatticePath path;
    path.tree_path = true;
    for (std::size_t i = 0; i <= meet_on_x; ++i) path.vertices.push_back(t.point(cx[i]));
    for (auto it = cy.rbegin(); it != cy.rend(); ++it) path.vertices.push_back(t.point(*it));
    return path;
}

inline std::int64_t tree_distance(const TreeWindow& t, LatticePoint x, LatticePoint y) {
    return static_cast<std::int64_t>(tree_path(t, x, y).steps());
}

// Wilson's algorithm on a finite graph: exact UST sample for any root and
// fill order. Walks are loop-erased via last-exit ("next pointer") tracing.
inline std::vector<std::uint32_t> wilson_finite(const FiniteGraph& g, std::uint32_t root,
                                                const std::vector<std::uint32_t>& order,
                                                Rng& rng) {
    std::size_t n = g.vertex_count();
    if (root >= n) throw std::invalid_argument("wilson_finite: root out of range");
    if (order.size() != n) throw std::invalid_argument("wilson_finite: order must cover vertices");

    std::vector<std::uint32_t> parent(n, 0), next(n, 0);
    std::vector<char> in_tree(n, 0);
    in_tree[root] = 1;
    parent[root] = root;

    for (auto start : order) {
        if (in_tree[start]) continue;
        std::uint32_t v = start;
        while (!in_tree[v]) {
            const auto& adj = g.adjacent(v);
            std::uint32_t w = adj[rng.next_below(adj.size())];
            next[v] = w;
            v = w;
        }
        v = start;
        while (!in_tree[v]) {
            in_tree[v] = 1;
            parent[v] = next[v];
            v = next[v];
        }
    }
    return parent;
}

namespace detail {

// One Wilson fill pass over the box. Walks stop on the existing tree or on
// leaving the box (wired root). Assumes t.parent is kAbsent exactly on
// not-yet-visited vertices; visited ones must already have valid parents.
inline void wilson_fill_box(TreeWindow& t, Rng& rng) {
    const std::int32_t half = t.half();
    const std::int32_t side = t.side();
    const std::size_t n = t.vertex_capacity();
    constexpr std::int32_t kExit = -2;
    std::vector<std::int32_t> next(n, 0);
    std::vector<char> in_tree(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (t.parent_index(static_cast<std::int32_t>(i)) != TreeWindow::kAbsent) in_tree[i] = 1;

    for (std::int32_t idx = 0; idx < static_cast<std::int32_t>(n); ++idx) {
        if (in_tree[idx]) continue;
        // Random walk from idx until it meets the tree or steps out of the box.
        LatticePoint pos = t.point(idx);
        std::int32_t cur = idx;
        while (true) {
            LatticePoint nxt = pos;
            switch (rng.next_direction()) {
                case 0: ++nxt.x; break;
                case 1: ++nxt.y; break;
                case 2: --nxt.x; break;
                default: --nxt.y; break;
            }
            if (std::abs(nxt.x) > half || std::abs(nxt.y) > half) {
                next[cur] = kExit;
                break;
            }
            std::int32_t inxt = (nxt.y + half) * side + (nxt.x + half);
            next[cur] = inxt;
            if (in_tree[inxt]) break;
            cur = inxt;
            pos = nxt;
        }
        // Trace the loop-erased path and adjoin it.
        cur = idx;
        while (!in_tree[cur]) {
            in_tree[cur] = 1;
            if (next[cur] == kExit) {
                t.set_root(cur);
                break;
            }
            t.set_parent(cur, next[cur]);
            cur = next[cur];
        }
    }
}

}  // namespace detail

// UST of the full box graph [-half,half]^2 with free boundary, rooted at the
// corner (-half,-half). Exact UST of the finite box (oracle-friendly sizes).
inline TreeWindow sample_ust_box_free(std::int32_t half, Rng& rng) {
    TreeWindow t(half, half, RootKind::FiniteRoot);
    t.meta_r = half;
    t.meta_K = 1;
    t.meta_method = "finite";
    const std::int32_t side = t.side();
    const std::size_t n = t.vertex_capacity();
    std::vector<std::int32_t> next(n, 0);
    std::vector<char> in_tree(n, 0);
    in_tree[0] = 1;
    t.set_root(0);
    for (std::int32_t idx = 0; idx < static_cast<std::int32_t>(n); ++idx) {
        if (in_tree[idx]) continue;
        LatticePoint pos = t.point(idx);
        std::int32_t cur = idx;
        while (true) {
            // Uniform step among in-box neighbors (free boundary).
            std::array<std::int32_t, 4> opts;
            int m = 0;
            for (auto q : neighbors(pos))
                if (t.in_box(q)) opts[m++] = t.index(q);
            std::int32_t inxt = opts[rng.next_below(static_cast<std::uint64_t>(m))];
            next[cur] = inxt;
            if (in_tree[inxt]) break;
            cur = inxt;
            pos = {static_cast<std::int32_t>(inxt % side) - half,
                   static_cast<std::int32_t>(inxt / side) - half};
        }
        cur = idx;
        while (!in_tree[cur]) {
            in_tree[cur] = 1;
            t.set_parent(cur, next[cur]);
            cur = next[cur];
        }
    }
    return t;
}

// Windowed UST sample: spanning tree/forest of the box B(0,K*r) whose
// restriction to B(0,r) approximates the infinite-volume UST.
//   wired-box:      every walk that leaves the box attaches to the wired root.
//   spine-and-fill: a truncated infinite LERW from 0 is laid down first as
//                   the gamma(0,infinity) prefix, then Wilson fills the rest.
inline TreeWindow sample_ust_window(std::int32_t r, WindowMethod method, std::int32_t K,
                                    RandomSource src, std::int32_t spine_truncation_factor = 2) {
    if (r < 1) throw std::invalid_argument("sample_ust_window: r must be >= 1");
    if (K < 4) throw std::invalid_argument("sample_ust_window: K must be >= 4");
    const std::int32_t half = K * r;
    TreeWindow t(half, r,
                 method == WindowMethod::WiredBox ? RootKind::WiredBoundary
                                                  : RootKind::InfiniteLerwSpine);
    t.meta_r = r;
    t.meta_K = K;
    t.meta_seed = src.seed;
    t.meta_method = method_name(method);
    Rng rng(src);

    if (method == WindowMethod::SpineAndFill) {
        // Truncated infinite LERW run out of the box; its in-box part is the spine.
        ErasureIndex ws(static_cast<std::int64_t>(spine_truncation_factor) * half + 1);
        LerwSample spine = lerw_streaming(
            {0, 0},
            StopRule::exit_ball({0, 0}, static_cast<double>(spine_truncation_factor) * half), rng,
            ws);
        std::size_t exit_at = spine.path.vertices.size();
        for (std::size_t i = 0; i < spine.path.vertices.size(); ++i) {
            if (!t.in_box(spine.path.vertices[i])) {
                exit_at = i;
                break;
            }
        }
        LatticePath in_box_spine;
        in_box_spine.tree_path = true;
        in_box_spine.vertices.assign(spine.path.vertices.begin(),
                                     spine.path.vertices.begin() + exit_at);
        for (std::size_t i = 0; i + 1 < in_box_spine.vertices.size(); ++i)
            t.set_parent(t.index(in_box_spine.vertices[i]), t.index(in_box_spine.vertices[i + 1]));
        t.set_root(t.index(in_box_spine.vertices.back()));
        t.set_spine(std::move(in_box_spine));
    }

    detail::wilson_fill_box(t, rng);
    return t;
}

// --- file format: header `ust-window v1 r=<r> K=<K> method=<m> seed=<u64>`,
// --- then one line `x y px py` per vertex; roots have px=x, py=y.

inline void save_tree(const TreeWindow& t, std::ostream& os) {
    os << "ust-window v1 r=" << t.meta_r << " K=" << t.meta_K << " method=" << t.meta_method
       << " seed=" << t.meta_seed << "\n";
    for (std::int32_t idx = 0; idx < static_cast<std::int32_t>(t.vertex_capacity()); ++idx) {
        std::int32_t par = t.parent_index(idx);
        if (par == TreeWindow::kAbsent) continue;
        LatticePoint p = t.point(idx), q = t.point(par);
        os << p.x << ' ' << p.y << ' ' << q.x << ' ' << q.y << '\n';
    }
}

inline void save_tree_file(const TreeWindow& t, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_tree_file: cannot open " + path);
    save_tree(t, os);
}

inline TreeWindow load_tree(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("ust-window v1 ", 0) != 0)
        throw std::runtime_error("load_tree: bad header");
    auto field = [&](const std::string& key) -> std::string {
        auto pos = header.find(" " + key + "=");
        if (pos == std::string::npos) throw std::runtime_error("load_tree: missing " + key);
        pos += key.size() + 2;
        auto end = header.find(' ', pos);
        return header.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    };
    std::int32_t r = std::stoi(field("r"));
    std::int32_t K = std::stoi(field("K"));
    std::string method = field("method");
    std::uint64_t seed = std::stoull(field("seed"));

    struct Row {
        LatticePoint p, q;
    };
    std::vector<Row> rows;
    std::int32_t half = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Row row;
        if (!(ls >> row.p.x >> row.p.y >> row.q.x >> row.q.y))
            throw std::runtime_error("load_tree: bad vertex line: " + line);
        half = std::max({half, std::abs(row.p.x), std::abs(row.p.y)});
        rows.push_back(row);
    }
    RootKind kind = method == "wired"    ? RootKind::WiredBoundary
                    : method == "spine" ? RootKind::InfiniteLerwSpine
                                        : RootKind::FiniteRoot;
    TreeWindow t(half, std::min(r, half), kind);
    t.meta_r = r;
    t.meta_K = K;
    t.meta_seed = seed;
    t.meta_method = method;
    for (const auto& row : rows) {
        if (row.p == row.q)
            t.set_root(t.index(row.p));
        else
            t.set_parent(t.index(row.p), t.index(row.q));
    }
    return t;
}

inline TreeWindow load_tree_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_tree_file: cannot open " + path);
    return load_tree(is);
}

// Synthetic 1-D path tree: the segment [-len, len] x {0} rooted at the left
// end. Sanity anchor for the whole estimator stack.
inline TreeWindow path_tree(std::int32_t len) {
    TreeWindow t(len, len, RootKind::FiniteRoot);
    t.meta_r = len;
    t.meta_K = 1;
    t.meta_method = "path";
    t.set_root(t.index({-len, 0}));
    for (std::int32_t x = -len + 1; x <= len; ++x)
        t.set_parent(t.index({x, 0}), t.index({x - 1, 0}));
    return t;
}

}  // namespace ustlab
