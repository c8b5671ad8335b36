#pragma once

// Lattice geometry on Z^2: points, paths, regions, boundaries.

#include <array>
#include <cstdint>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace ustlab {

// Coordinates are kept within |x|,|y| <= 2^30 so that squared Euclidean
// norms of differences always fit in int64 without overflow.
inline constexpr std::int32_t kCoordLimit = std::int32_t{1} << 30;

struct LatticePoint {
    std::int32_t x = 0;
    std::int32_t y = 0;

    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

inline std::uint64_t pack(LatticePoint p) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.x)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.y));
}

inline LatticePoint unpack(std::uint64_t key) {
    return {static_cast<std::int32_t>(static_cast<std::uint32_t>(key >> 32)),
            static_cast<std::int32_t>(static_cast<std::uint32_t>(key))};
}

struct PointHash {
    std::size_t operator()(LatticePoint p) const {
        std::uint64_t z = pack(p) + 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return static_cast<std::size_t>(z ^ (z >> 31));
    }
};

using PointSet = std::unordered_set<LatticePoint, PointHash>;

inline std::int64_t norm2(LatticePoint p) {
    return std::int64_t{p.x} * p.x + std::int64_t{p.y} * p.y;
}

inline std::int64_t dist2(LatticePoint a, LatticePoint b) {
    std::int64_t dx = std::int64_t{a.x} - b.x;
    std::int64_t dy = std::int64_t{a.y} - b.y;
    return dx * dx + dy * dy;
}

inline bool are_lattice_neighbors(LatticePoint a, LatticePoint b) {
    return dist2(a, b) == 1;
}

// Fixed E, N, W, S order; all seeded runs depend on it.
inline std::array<LatticePoint, 4> neighbors(LatticePoint p) {
    return {LatticePoint{p.x + 1, p.y}, LatticePoint{p.x, p.y + 1},
            LatticePoint{p.x - 1, p.y}, LatticePoint{p.x, p.y - 1}};
}

// A nearest-neighbor (or tree-adjacent, when flagged) walk on Z^2.
struct LatticePath {
    std::vector<LatticePoint> vertices;
    bool tree_path = false;

    std::size_t steps() const { return vertices.empty() ? 0 : vertices.size() - 1; }
};

enum class RegionKind { Box, Ball, Explicit };

// Finite subset of Z^2, either a lazy box/ball descriptor or an explicit set.
// Both representations expose the same membership predicate.
class LatticeRegion {
  public:
    static LatticeRegion box(LatticePoint center, std::int32_t half_width) {
        if (half_width < 0) throw std::invalid_argument("box: negative half width");
        LatticeRegion r;
        r.kind_ = RegionKind::Box;
        r.center_ = center;
        r.half_ = half_width;
        return r;
    }

    // Euclidean ball B(center, radius) = { y : |y - center| <= radius }.
    static LatticeRegion ball(LatticePoint center, double radius) {
        if (radius < 0) throw std::invalid_argument("ball: negative radius");
        LatticeRegion r;
        r.kind_ = RegionKind::Ball;
        r.center_ = center;
        r.radius2_ = radius * radius;
        r.half_ = static_cast<std::int32_t>(std::floor(radius));
        return r;
    }

    static LatticeRegion explicit_set(PointSet pts) {
        LatticeRegion r;
        r.kind_ = RegionKind::Explicit;
        r.set_ = std::move(pts);
        return r;
    }

    RegionKind kind() const { return kind_; }

    bool contains(LatticePoint p) const {
        switch (kind_) {
            case RegionKind::Box:
                return std::abs(p.x - center_.x) <= half_ && std::abs(p.y - center_.y) <= half_;
            case RegionKind::Ball:
                return static_cast<double>(dist2(p, center_)) <= radius2_ + 1e-9;
            case RegionKind::Explicit:
                return set_.count(p) != 0;
        }
        return false;
    }

    void for_each(const std::function<void(LatticePoint)>& fn) const {
        if (kind_ == RegionKind::Explicit) {
            for (auto p : set_) fn(p);
            return;
        }
        for (std::int32_t dx = -half_; dx <= half_; ++dx)
            for (std::int32_t dy = -half_; dy <= half_; ++dy) {
                LatticePoint p{center_.x + dx, center_.y + dy};
                if (contains(p)) fn(p);
            }
    }

    std::vector<LatticePoint> points() const {
        std::vector<LatticePoint> out;
        for_each([&](LatticePoint p) { out.push_back(p); });
        return out;
    }

    std::size_t size() const {
        if (kind_ == RegionKind::Explicit) return set_.size();
        std::size_t n = 0;
        for_each([&](LatticePoint) { ++n; });
        return n;
    }

    bool empty() const { return kind_ == RegionKind::Explicit ? set_.empty() : size() == 0; }

  private:
    RegionKind kind_ = RegionKind::Explicit;
    LatticePoint center_{};
    std::int32_t half_ = 0;
    double radius2_ = 0.0;
    PointSet set_;
};

inline LatticeRegion euclidean_ball(LatticePoint center, double radius) {
    return LatticeRegion::ball(center, radius);
}

// Points outside D with a lattice neighbor in D.
inline LatticeRegion outer_boundary(const LatticeRegion& d) {
    PointSet out;
    d.for_each([&](LatticePoint p) {
        for (auto q : neighbors(p))
            if (!d.contains(q)) out.insert(q);
    });
    return LatticeRegion::explicit_set(std::move(out));
}

// Points of D with a lattice neighbor outside D.
inline LatticeRegion inner_boundary(const LatticeRegion& d) {
    PointSet in;
    d.for_each([&](LatticePoint p) {
        for (auto q : neighbors(p))
            if (!d.contains(q)) {
                in.insert(p);
                break;
            }
    });
    return LatticeRegion::explicit_set(std::move(in));
}

}  // namespace ustlab
