#pragma once

// Small undirected graphs with indexed vertices, used by Wilson's algorithm
// on finite graphs and by the exact oracles.

#include <algorithm>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ustlab {

class FiniteGraph {
  public:
    FiniteGraph(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges)
        : adj_(n) {
        for (auto [u, v] : edges) {
            if (u >= n || v >= n) throw std::invalid_argument("FiniteGraph: vertex out of range");
            if (u == v) throw std::invalid_argument("FiniteGraph: self loop");
            adj_[u].push_back(v);
            adj_[v].push_back(u);
            edges_.emplace_back(std::min(u, v), std::max(u, v));
        }
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
            throw std::invalid_argument("FiniteGraph: duplicate edge");
        if (!connected()) throw std::invalid_argument("FiniteGraph: not connected");
    }

    std::size_t vertex_count() const { return adj_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<std::uint32_t>& adjacent(std::uint32_t v) const { return adj_[v]; }
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges() const { return edges_; }

    // w x h grid, vertex index = x + w*y.
    static FiniteGraph grid(std::uint32_t w, std::uint32_t h) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
        for (std::uint32_t y = 0; y < h; ++y)
            for (std::uint32_t x = 0; x < w; ++x) {
                std::uint32_t v = x + w * y;
                if (x + 1 < w) e.emplace_back(v, v + 1);
                if (y + 1 < h) e.emplace_back(v, v + w);
            }
        return FiniteGraph(std::size_t{w} * h, e);
    }

    static FiniteGraph cycle(std::uint32_t n) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
        for (std::uint32_t v = 0; v < n; ++v) e.emplace_back(v, (v + 1) % n);
        return FiniteGraph(n, e);
    }

    static FiniteGraph path(std::uint32_t n) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
        for (std::uint32_t v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
        return FiniteGraph(n, e);
    }

  private:
    bool connected() const {
        if (adj_.empty()) return false;
        std::vector<char> seen(adj_.size(), 0);
        std::queue<std::uint32_t> q;
        q.push(0);
        seen[0] = 1;
        std::size_t count = 1;
        while (!q.empty()) {
            auto v = q.front();
            q.pop();
            for (auto w : adj_[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    q.push(w);
                }
        }
        return count == adj_.size();
    }

    std::vector<std::vector<std::uint32_t>> adj_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;
};

}  // namespace ustlab
