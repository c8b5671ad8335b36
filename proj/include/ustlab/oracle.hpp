#pragma once

// Exact ground truth on tiny instances: spanning-tree counting/enumeration,
// exact UST path laws, Laplacian resistance, Dirichlet exit times, and dense
// heat-kernel matrix powers. Obviously-correct over fast, with hard size caps.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <vector>

#include "ustlab/graph.hpp"
#include "ustlab/lattice.hpp"
#include "ustlab/ust.hpp"

namespace ustlab::oracle {

inline constexpr std::size_t kEnumerationCap = 24;
inline constexpr std::size_t kLinearAlgebraCap = 225;

using BigInt = boost::multiprecision::cpp_int;

// Matrix-tree count via fraction-free (Bareiss) elimination of the reduced
// Laplacian, exact in integers.
inline BigInt count_spanning_trees(const FiniteGraph& g) {
    std::size_t n = g.vertex_count();
    if (n > kEnumerationCap) throw std::invalid_argument("count_spanning_trees: graph too large");
    if (n == 1) return 1;
    std::size_t m = n - 1;  // delete last row/column
    std::vector<std::vector<BigInt>> a(m, std::vector<BigInt>(m, 0));
    for (std::uint32_t v = 0; v < n; ++v)
        if (v < m) a[v][v] = static_cast<std::int64_t>(g.adjacent(v).size());
    for (auto [u, v] : g.edges())
        if (u < m && v < m) {
            a[u][v] -= 1;
            a[v][u] -= 1;
        }
    BigInt prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < m; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < m && a[p][k] == 0) ++p;
            if (p == m) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < m; ++i)
            for (std::size_t j = k + 1; j < m; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign > 0 ? a[m - 1][m - 1] : -a[m - 1][m - 1];
}

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

// All spanning trees as canonical sorted edge lists.
inline std::vector<EdgeList> enumerate_spanning_trees(const FiniteGraph& g) {
    std::size_t n = g.vertex_count();
    if (n > 12) throw std::invalid_argument("enumerate_spanning_trees: graph too large");
    const auto& edges = g.edges();
    std::size_t m = edges.size(), k = n - 1;
    std::vector<EdgeList> out;
    if (k == 0) {
        out.push_back({});
        return out;
    }
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    std::vector<std::uint32_t> uf(n);
    auto find = [&](std::uint32_t v) {
        while (uf[v] != v) v = uf[v] = uf[uf[v]];
        return v;
    };
    while (true) {
        for (std::uint32_t v = 0; v < n; ++v) uf[v] = v;
        bool acyclic = true;
        for (auto i : pick) {
            auto ru = find(edges[i].first), rv = find(edges[i].second);
            if (ru == rv) {
                acyclic = false;
                break;
            }
            uf[ru] = rv;
        }
        if (acyclic) {
            EdgeList t;
            for (auto i : pick) t.push_back(edges[i]);
            out.push_back(std::move(t));
        }
        // next k-combination of m
        std::size_t i = k;
        while (i > 0 && pick[i - 1] == m - k + i - 1) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return out;
}

// Vertex sequence of the unique v-w path in a tree given as an edge list.
inline std::vector<std::uint32_t> tree_edge_list_path(std::size_t n, const EdgeList& tree,
                                                      std::uint32_t v, std::uint32_t w) {
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (auto [a, b] : tree) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<std::int32_t> from(n, -1);
    std::queue<std::uint32_t> q;
    q.push(v);
    from[v] = static_cast<std::int32_t>(v);
    while (!q.empty()) {
        auto u = q.front();
        q.pop();
        if (u == w) break;
        for (auto x : adj[u])
            if (from[x] < 0) {
                from[x] = static_cast<std::int32_t>(u);
                q.push(x);
            }
    }
    if (from[w] < 0) throw std::runtime_error("tree_edge_list_path: disconnected tree");
    std::vector<std::uint32_t> path;
    for (std::uint32_t cur = w;; cur = static_cast<std::uint32_t>(from[cur])) {
        path.push_back(cur);
        if (cur == v) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// Exact UST path-marginal law: probability of each v-w path over the uniform
// tree measure. Probabilities are exact fractions count/total rendered as
// doubles; counts are also exposed.
struct PathLaw {
    std::map<std::vector<std::uint32_t>, std::uint64_t> counts;
    std::uint64_t total = 0;

    double probability(const std::vector<std::uint32_t>& path) const {
        auto it = counts.find(path);
        return it == counts.end() ? 0.0
                                  : static_cast<double>(it->second) / static_cast<double>(total);
    }
};

inline PathLaw exact_path_law(const FiniteGraph& g, std::uint32_t v, std::uint32_t w) {
    PathLaw law;
    auto trees = enumerate_spanning_trees(g);
    law.total = trees.size();
    for (const auto& t : trees) ++law.counts[tree_edge_list_path(g.vertex_count(), t, v, w)];
    return law;
}

inline constexpr double kInfiniteResistance = std::numeric_limits<double>::infinity();

// Effective resistance between vertex sets via the Dirichlet problem:
// potential 1 on A, 0 on B, harmonic elsewhere; R = 1 / energy.
inline double laplacian_resistance(const FiniteGraph& g, const std::vector<std::uint32_t>& a,
                                   const std::vector<std::uint32_t>& b) {
    std::size_t n = g.vertex_count();
    if (n > kLinearAlgebraCap) throw std::invalid_argument("laplacian_resistance: graph too large");
    if (a.empty() || b.empty()) throw std::invalid_argument("laplacian_resistance: empty set");
    std::vector<int> role(n, 0);  // 0 free, 1 in A, 2 in B
    for (auto v : a) role[v] = 1;
    for (auto v : b) {
        if (role[v] == 1) throw std::invalid_argument("laplacian_resistance: sets not disjoint");
        role[v] = 2;
    }
    std::vector<std::int32_t> id(n, -1);
    std::vector<std::uint32_t> free;
    for (std::uint32_t v = 0; v < n; ++v)
        if (role[v] == 0) {
            id[v] = static_cast<std::int32_t>(free.size());
            free.push_back(v);
        }
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
    for (auto v : a) phi[v] = 1.0;
    if (!free.empty()) {
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(free.size(), free.size());
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(free.size());
        for (std::size_t i = 0; i < free.size(); ++i) {
            auto v = free[i];
            L(i, i) = static_cast<double>(g.adjacent(v).size());
            for (auto w : g.adjacent(v)) {
                if (role[w] == 0)
                    L(i, id[w]) -= 1.0;
                else if (role[w] == 1)
                    rhs[i] += 1.0;
            }
        }
        Eigen::VectorXd x = L.ldlt().solve(rhs);
        for (std::size_t i = 0; i < free.size(); ++i) phi[free[i]] = x[i];
    }
    double energy = 0.0;
    for (auto [u, v] : g.edges()) {
        double d = phi[u] - phi[v];
        energy += d * d;
    }
    if (energy < 1e-14) return kInfiniteResistance;
    return 1.0 / energy;
}

// Expected exit time of a lattice region: E[sigma] = 1 + mean over the 4
// lattice neighbors, zero outside D. Sparse SPD solve.
inline double dirichlet_expected_exit(const LatticeRegion& d, LatticePoint start) {
    auto pts = d.points();
    std::unordered_map<std::uint64_t, std::int32_t> id;
    id.reserve(pts.size() * 2);
    // deterministic ordering
    std::sort(pts.begin(), pts.end(), [](LatticePoint a, LatticePoint b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    for (std::size_t i = 0; i < pts.size(); ++i) id[pack(pts[i])] = static_cast<std::int32_t>(i);
    auto it = id.find(pack(start));
    if (it == id.end()) throw std::domain_error("dirichlet_expected_exit: start outside region");

    std::size_t n = pts.size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, 4.0);  // 4*E = 4 + sum neighbors
    for (std::size_t i = 0; i < n; ++i) {
        trip.emplace_back(i, i, 4.0);
        for (auto q : neighbors(pts[i])) {
            auto jt = id.find(pack(q));
            if (jt != id.end()) trip.emplace_back(i, jt->second, -1.0);
        }
    }
    Eigen::SparseMatrix<double> lap(n, n);
    lap.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("dirichlet_expected_exit: factorization failed");
    Eigen::VectorXd m = solver.solve(rhs);
    return m[it->second];
}

// Same on a finite graph with an absorbing boundary set.
inline double dirichlet_expected_exit(const FiniteGraph& g,
                                      const std::vector<std::uint32_t>& boundary,
                                      std::uint32_t start) {
    std::size_t n = g.vertex_count();
    if (n > kLinearAlgebraCap) throw std::invalid_argument("dirichlet_expected_exit: too large");
    std::vector<char> absorb(n, 0);
    for (auto v : boundary) absorb[v] = 1;
    if (absorb[start]) return 0.0;
    std::vector<std::int32_t> id(n, -1);
    std::vector<std::uint32_t> interior;
    for (std::uint32_t v = 0; v < n; ++v)
        if (!absorb[v]) {
            id[v] = static_cast<std::int32_t>(interior.size());
            interior.push_back(v);
        }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(interior.size(), interior.size());
    Eigen::VectorXd rhs(interior.size());
    for (std::size_t i = 0; i < interior.size(); ++i) {
        auto v = interior[i];
        double deg = static_cast<double>(g.adjacent(v).size());
        A(i, i) = deg;
        rhs[i] = deg;
        for (auto w : g.adjacent(v))
            if (!absorb[w]) A(i, id[w]) -= 1.0;
    }
    Eigen::VectorXd m = A.ldlt().solve(rhs);
    return m[id[start]];
}

// Dense heat kernel on a small tree: p_n(x,y) = mu_y^{-1} (P^n)(x,y).
class HeatKernelMatrix {
  public:
    HeatKernelMatrix(const TreeWindow& tree, std::uint64_t n) {
        if (n > (1ULL << 14)) throw std::invalid_argument("transition_powers: n too large");
        for (std::int32_t idx = 0; idx < static_cast<std::int32_t>(tree.vertex_capacity()); ++idx)
            if (tree.parent_index(idx) != TreeWindow::kAbsent) {
                index_[idx] = static_cast<std::int32_t>(points_.size());
                points_.push_back(tree.point(idx));
            }
        std::size_t m = points_.size();
        if (m > kLinearAlgebraCap) throw std::invalid_argument("transition_powers: tree too large");
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m, m);
        degree_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::array<std::int32_t, 4> nb;
            int deg = tree.tree_neighbors(points_[i], nb);
            degree_[i] = deg;
            if (deg == 0) throw std::runtime_error("transition_powers: isolated vertex");
            for (int k = 0; k < deg; ++k) p(i, index_.at(nb[k])) = 1.0 / deg;
        }
        // binary powering
        pn_ = Eigen::MatrixXd::Identity(m, m);
        Eigen::MatrixXd base = p;
        std::uint64_t e = n;
        while (e > 0) {
            if (e & 1) pn_ = pn_ * base;
            base = base * base;
            e >>= 1;
        }
    }

    std::size_t state_count() const { return points_.size(); }
    const std::vector<LatticePoint>& states() const { return points_; }
    int degree_of(std::size_t i) const { return degree_[i]; }

    std::int32_t state_index(const TreeWindow& tree, LatticePoint p) const {
        auto it = index_.find(tree.index(p));
        if (it == index_.end()) throw std::domain_error("state_index: point not in tree");
        return it->second;
    }

    // P^x(X_n = y)
    double transition(std::size_t xi, std::size_t yi) const { return pn_(xi, yi); }
    // p_n(x,y) = mu_y^{-1} P^x(X_n = y)
    double kernel(std::size_t xi, std::size_t yi) const { return pn_(xi, yi) / degree_[yi]; }

  private:
    std::vector<LatticePoint> points_;
    std::unordered_map<std::int32_t, std::int32_t> index_;
    std::vector<int> degree_;
    Eigen::MatrixXd pn_;
};

inline HeatKernelMatrix transition_powers(const TreeWindow& tree, std::uint64_t n) {
    return HeatKernelMatrix(tree, n);
}

}  // namespace ustlab::oracle
