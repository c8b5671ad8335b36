#pragma once

// Intrinsic-metric and electrical quantities of a sampled tree: metric balls
// and volumes, the component U_r, effective resistance on the tree, the
// Nash-Williams cut-set bound, and good-ball checks.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ustlab/lattice.hpp"
#include "ustlab/ust.hpp"

namespace ustlab {

class WindowTooSmall : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// B_d(center, R) in the tree metric. `truncated` is set when the ball touches
// the trusted-window boundary; the volume is then only a lower bound.
struct MetricBall {
    LatticePoint center;
    std::int32_t radius = 0;
    std::vector<LatticePoint> members;
    std::vector<std::int32_t> depth;  // d(center, members[i])
    std::int64_t volume = 0;
    bool truncated = false;
};

inline MetricBall intrinsic_ball(const TreeWindow& t, LatticePoint center, std::int32_t radius) {
    if (!t.present(center)) throw std::domain_error("intrinsic_ball: center outside sampled tree");
    if (radius < 0) throw std::invalid_argument("intrinsic_ball: negative radius");

    // conservative: anything at Euclidean distance > trusted - 1 counts as
    // touching the trusted-window boundary
    const std::int64_t inner = std::max<std::int64_t>(0, t.trusted_radius() - 1);
    const std::int64_t trust2 = inner * inner;
    MetricBall ball;
    ball.center = center;
    ball.radius = radius;

    std::vector<std::int32_t> frontier{t.index(center)}, next;
    std::unordered_map<std::int32_t, char> seen;
    seen.emplace(t.index(center), 1);
    for (std::int32_t d = 0; d <= radius && !frontier.empty(); ++d) {
        for (auto idx : frontier) {
            LatticePoint p = t.point(idx);
            ball.members.push_back(p);
            ball.depth.push_back(d);
            // touching or leaving the trusted region makes the volume a lower
            // bound; exact finite trees are never truncated
            if (t.guarded() && norm2(p) > trust2) ball.truncated = true;
            if (d == radius) continue;
            std::array<std::int32_t, 4> nb;
            int n = t.tree_neighbors(p, nb);
            for (int k = 0; k < n; ++k)
                if (seen.emplace(nb[k], 1).second) next.push_back(nb[k]);
        }
        frontier.swap(next);
        next.clear();
    }
    ball.volume = static_cast<std::int64_t>(ball.members.size());
    return ball;
}

// U_r: connected component of 0 using tree edges with both endpoints in B(0,r).
inline std::vector<LatticePoint> component_in_box(const TreeWindow& t, std::int32_t r) {
    if (r > t.half()) throw std::domain_error("component_in_box: r exceeds sampled window");
    if (!t.present({0, 0})) throw std::domain_error("component_in_box: origin not sampled");
    const std::int64_t r2 = std::int64_t{r} * r;
    if (norm2({0, 0}) > r2) return {};

    std::vector<LatticePoint> out;
    std::vector<std::int32_t> stack{t.index({0, 0})};
    std::unordered_map<std::int32_t, char> seen;
    seen.emplace(stack[0], 1);
    while (!stack.empty()) {
        std::int32_t idx = stack.back();
        stack.pop_back();
        LatticePoint p = t.point(idx);
        out.push_back(p);
        std::array<std::int32_t, 4> nb;
        int n = t.tree_neighbors(p, nb);
        for (int k = 0; k < n; ++k) {
            if (norm2(t.point(nb[k])) > r2) continue;
            if (seen.emplace(nb[k], 1).second) stack.push_back(nb[k]);
        }
    }
    return out;
}

struct ResistanceQuery {
    LatticePoint source;
    double value = 0.0;
    bool infinite = false;
};

namespace detail {

// Series/parallel reduction on the tree rooted at `source`: a target vertex
// is grounded; a vertex's conductance toward the targets is the parallel sum
// over children of 1/(1 + R_child), branches without targets pruned.
// Num is double or an exact rational type.
template <typename Num, typename IsTarget>
std::optional<Num> resistance_reduction(const TreeWindow& t, LatticePoint source,
                                        IsTarget&& is_target,
                                        const std::function<bool(std::int32_t)>& expand) {
    struct Frame {
        std::int32_t idx;
        std::int32_t from;
        bool entered;
    };
    std::unordered_map<std::int32_t, std::optional<Num>> subtree_r;  // nullopt = pruned
    std::vector<Frame> stack{{t.index(source), -1, false}};
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (!f.entered) {
            f.entered = true;
            const std::int32_t idx = f.idx, from = f.from;
            if (is_target(idx)) {
                subtree_r[idx] = Num(0);
                stack.pop_back();
                continue;
            }
            if (expand(idx)) {
                std::array<std::int32_t, 4> nb;
                int n = t.tree_neighbors(t.point(idx), nb);
                for (int k = 0; k < n; ++k)
                    if (nb[k] != from) stack.push_back({nb[k], idx, false});
            }
            continue;
        }
        // children resolved: combine 1/(1 + R_c) in parallel
        Num conductance(0);
        bool any = false;
        std::array<std::int32_t, 4> nb;
        int n = t.tree_neighbors(t.point(f.idx), nb);
        bool expanded = expand(f.idx);
        for (int k = 0; k < n && expanded; ++k) {
            if (nb[k] == f.from) continue;
            auto it = subtree_r.find(nb[k]);
            if (it == subtree_r.end() || !it->second.has_value()) continue;
            conductance += Num(1) / (Num(1) + *it->second);
            any = true;
        }
        if (any)
            subtree_r[f.idx] = Num(1) / conductance;
        else
            subtree_r[f.idx] = std::nullopt;
        stack.pop_back();
    }
    return subtree_r[t.index(source)];
}

}  // namespace detail

// R_eff(source, target set) with unit resistors on tree edges. Exact under
// Num = rational; double by default.
template <typename Num = double>
ResistanceQuery effective_resistance(const TreeWindow& t, LatticePoint source,
                                     const PointSet& targets) {
    if (targets.empty()) throw std::invalid_argument("effective_resistance: empty target");
    if (!t.present(source)) throw std::domain_error("effective_resistance: source not sampled");
    if (targets.count(source)) throw std::invalid_argument("effective_resistance: source in target");
    for (auto p : targets)
        if (!t.present(p)) throw std::domain_error("effective_resistance: target not sampled");

    auto is_target = [&](std::int32_t idx) { return targets.count(t.point(idx)) != 0; };
    auto r = detail::resistance_reduction<Num>(t, source, is_target,
                                               [](std::int32_t) { return true; });
    ResistanceQuery q;
    q.source = source;
    if (!r.has_value()) {
        q.infinite = true;
        q.value = std::numeric_limits<double>::infinity();
    } else {
        q.value = static_cast<double>(*r);
    }
    return q;
}

// R_eff(center, B_d(center,R)^c): every sampled vertex at intrinsic distance
// > R is grounded. Requires an untruncated metric ball.
inline ResistanceQuery resistance_to_ball_complement(const TreeWindow& t, LatticePoint center,
                                                     std::int32_t radius) {
    MetricBall ball = intrinsic_ball(t, center, radius);
    if (ball.truncated)
        throw WindowTooSmall("resistance_to_ball_complement: window too small for this radius");

    // depth map over the ball; anything stepped onto beyond it is a target
    std::unordered_map<std::int32_t, std::int32_t> depth;
    depth.reserve(ball.members.size() * 2);
    for (std::size_t i = 0; i < ball.members.size(); ++i)
        depth.emplace(t.index(ball.members[i]), ball.depth[i]);

    auto is_target = [&](std::int32_t idx) { return depth.find(idx) == depth.end(); };
    auto expand = [&](std::int32_t idx) {
        auto it = depth.find(idx);
        return it != depth.end() && it->second <= radius;
    };
    auto r = detail::resistance_reduction<double>(t, center, is_target, expand);
    ResistanceQuery q;
    q.source = center;
    if (!r.has_value()) {
        q.infinite = true;
        q.value = std::numeric_limits<double>::infinity();
    } else {
        q.value = *r;
    }
    return q;
}

// Nash-Williams lower bound sum_{k=1..R} 1/|Gamma_k| where Gamma_k is the set
// of vertices at distance exactly k that are connected past distance R away
// from the center.
inline double nash_williams_bound(const TreeWindow& t, LatticePoint center, std::int32_t radius) {
    MetricBall ball = intrinsic_ball(t, center, radius + 1);
    if (ball.truncated) throw WindowTooSmall("nash_williams_bound: window too small");

    std::unordered_map<std::int32_t, std::int32_t> depth;
    for (std::size_t i = 0; i < ball.members.size(); ++i)
        depth.emplace(t.index(ball.members[i]), ball.depth[i]);

    // escaping = subtree (away from center) reaches depth R+1
    std::unordered_map<std::int32_t, char> escaping;
    // process members in order of decreasing depth; BFS order means reverse scan
    std::vector<std::int64_t> sphere(radius + 2, 0);
    for (std::size_t ri = ball.members.size(); ri-- > 0;) {
        LatticePoint p = ball.members[ri];
        std::int32_t d = ball.depth[ri];
        std::int32_t idx = t.index(p);
        bool esc = (d == radius + 1);
        if (!esc) {
            std::array<std::int32_t, 4> nb;
            int n = t.tree_neighbors(p, nb);
            for (int k = 0; k < n && !esc; ++k) {
                auto it = depth.find(nb[k]);
                if (it != depth.end() && it->second == d + 1 && escaping.count(nb[k])) esc = true;
            }
        }
        if (esc) {
            escaping.emplace(idx, 1);
            sphere[d] += 1;
        }
    }
    double bound = 0.0;
    for (std::int32_t k = 1; k <= radius; ++k) {
        if (sphere[k] == 0) return std::numeric_limits<double>::infinity();
        bound += 1.0 / static_cast<double>(sphere[k]);
    }
    return bound;
}

// Good-ball conditions at (x, R, lambda) for a supplied scale function g:
//   (1) |B_d(x,R)| <= lambda g(R)^2
//   (2) lambda^{-1} g(R)^2 <= |B_d(x,R)|
//   (3) R_eff(x, B_d(x,R)^c) >= lambda^{-1} R
struct GoodBallReport {
    LatticePoint x;
    std::int32_t radius = 0;
    double lambda = 1.0;
    std::int64_t volume = 0;
    double resistance = 0.0;
    bool cond_volume_upper = false;
    bool cond_volume_lower = false;
    bool cond_resistance = false;

    bool good() const { return cond_volume_upper && cond_volume_lower && cond_resistance; }
};

inline GoodBallReport good_ball_check(const TreeWindow& t, LatticePoint x, std::int32_t radius,
                                      double lambda, const std::function<double(double)>& g) {
    if (lambda < 1.0) throw std::invalid_argument("good_ball_check: lambda must be >= 1");
    MetricBall ball = intrinsic_ball(t, x, radius);
    if (ball.truncated) throw WindowTooSmall("good_ball_check: window too small");

    GoodBallReport rep;
    rep.x = x;
    rep.radius = radius;
    rep.lambda = lambda;
    rep.volume = ball.volume;
    double g2 = g(static_cast<double>(radius));
    g2 *= g2;
    rep.cond_volume_upper = static_cast<double>(ball.volume) <= lambda * g2;
    rep.cond_volume_lower = g2 / lambda <= static_cast<double>(ball.volume);
    auto res = resistance_to_ball_complement(t, x, radius);
    rep.resistance = res.value;
    rep.cond_resistance = res.infinite || res.value >= static_cast<double>(radius) / lambda;
    return rep;
}

}  // namespace ustlab
