#pragma once

// Simple random walk on Z^2, stopping rules, chronological loop erasure,
// and truncated infinite LERW sampling.

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ustlab/lattice.hpp"
#include "ustlab/rng.hpp"

namespace ustlab {

inline constexpr std::uint64_t kDefaultStepCap = 1'000'000'000ULL;

// A mis-specified stop rule surfaces as a loud error carrying the partial walk.
class StepCapExceeded : public std::runtime_error {
  public:
    explicit StepCapExceeded(LatticePath partial)
        : std::runtime_error("srw_until: step cap exceeded"), partial_path(std::move(partial)) {}

    LatticePath partial_path;
};

// Stopping times are over j >= 1: a walk started inside K does not stop at 0.
struct StopRule {
    enum class Kind { ExitRegion, HitRegion, HitPoint, ExitBall, FixedSteps };

    Kind kind;
    LatticeRegion region;      // ExitRegion / HitRegion
    LatticePoint point{};      // HitPoint / ExitBall center
    std::int64_t radius2 = 0;  // ExitBall: stop when dist2 > radius2
    std::uint64_t steps = 0;   // FixedSteps

    static StopRule exit_region(LatticeRegion d) {
        return {Kind::ExitRegion, std::move(d), {}, 0, 0};
    }
    static StopRule hit_region(LatticeRegion k) {
        return {Kind::HitRegion, std::move(k), {}, 0, 0};
    }
    static StopRule hit_point(LatticePoint w) {
        return {Kind::HitPoint, LatticeRegion::explicit_set({}), w, 0, 0};
    }
    static StopRule exit_ball(LatticePoint center, double r) {
        if (r < 0) throw std::invalid_argument("exit_ball: negative radius");
        auto r2 = static_cast<std::int64_t>(r * r + 1e-9);
        return {Kind::ExitBall, LatticeRegion::explicit_set({}), center, r2, 0};
    }
    static StopRule fixed_steps(std::uint64_t n) {
        return {Kind::FixedSteps, LatticeRegion::explicit_set({}), {}, 0, n};
    }

    bool satisfied(LatticePoint p, std::uint64_t step) const {
        switch (kind) {
            case Kind::ExitRegion: return !region.contains(p);
            case Kind::HitRegion: return region.contains(p);
            case Kind::HitPoint: return p == point;
            case Kind::ExitBall: return dist2(p, point) > radius2;
            case Kind::FixedSteps: return step >= steps;
        }
        return false;
    }
};

// Full walk [S_0, ..., S_T], T the first index >= 1 satisfying the rule.
inline LatticePath srw_until(LatticePoint start, const StopRule& stop, Rng& rng,
                             std::uint64_t step_cap = kDefaultStepCap) {
    LatticePath path;
    path.vertices.push_back(start);
    if (stop.kind == StopRule::Kind::FixedSteps && stop.steps == 0) return path;

    LatticePoint pos = start;
    for (std::uint64_t j = 1; j <= step_cap; ++j) {
        switch (rng.next_direction()) {
            case 0: ++pos.x; break;
            case 1: ++pos.y; break;
            case 2: --pos.x; break;
            default: --pos.y; break;
        }
        path.vertices.push_back(pos);
        if (stop.satisfied(pos, j)) return path;
    }
    throw StepCapExceeded(std::move(path));
}

// Chronological loop erasure L(lambda): on a revisit of a retained vertex,
// everything after its first retained occurrence is dropped, so each kept
// vertex records the walk's last exit from it.
inline LatticePath loop_erase(const LatticePath& path) {
    if (path.vertices.empty()) throw std::invalid_argument("loop_erase: empty path");
    std::vector<LatticePoint> kept;
    kept.reserve(path.vertices.size());
    std::unordered_map<std::uint64_t, std::uint32_t> pos_of;
    pos_of.reserve(path.vertices.size() * 2);
    for (auto v : path.vertices) {
        auto it = pos_of.find(pack(v));
        if (it != pos_of.end() && it->second < kept.size() && kept[it->second] == v) {
            kept.resize(it->second + 1);
        } else {
            pos_of[pack(v)] = static_cast<std::uint32_t>(kept.size());
            kept.push_back(v);
        }
    }
    LatticePath out;
    out.vertices = std::move(kept);
    return out;
}

struct LerwSample {
    LatticePath path;             // self-avoiding
    std::uint64_t raw_steps = 0;  // length of the generating SRW
    std::optional<std::pair<std::int64_t, std::int64_t>> truncation;  // (l, n)
};

inline LerwSample sample_lerw(LatticePoint start, const StopRule& stop, Rng& rng,
                              std::uint64_t step_cap = kDefaultStepCap) {
    LatticePath raw = srw_until(start, stop, rng, step_cap);
    LerwSample s;
    s.raw_steps = raw.steps();
    s.path = loop_erase(raw);
    return s;
}

// Point -> path-index map for streaming loop erasure. Entries are validated
// against the current path, so truncation leaves stale slots harmless and a
// per-walk epoch makes reset O(1). Dense grid for small boxes, open-address
// hash otherwise.
class ErasureIndex {
  public:
    explicit ErasureIndex(std::int64_t half_width) {
        std::int64_t side = 2 * half_width + 1;
        if (half_width > 0 && side * side <= kDenseCells) {
            half_ = half_width;
            dense_.assign(static_cast<std::size_t>(side * side), 0);
        } else {
            table_.assign(1 << 20, Slot{});
            mask_ = table_.size() - 1;
        }
    }

    void new_walk() { ++epoch_; }

    void set(LatticePoint p, std::uint32_t idx) {
        if (half_ >= 0) {
            dense_[dense_slot(p)] = (static_cast<std::uint64_t>(epoch_) << 32) | idx;
            return;
        }
        if (++used_ * 10 > table_.size() * 7) grow();
        std::uint64_t key = pack(p);
        std::size_t i = PointHash{}(p)&mask_;
        while (table_[i].epoch == epoch_ && table_[i].key != key) i = (i + 1) & mask_;
        table_[i] = Slot{key, epoch_, idx};
    }

    // Returns the stored index or -1; caller re-validates against the path.
    std::int64_t get(LatticePoint p) const {
        if (half_ >= 0) {
            if (std::abs(std::int64_t{p.x}) > half_ || std::abs(std::int64_t{p.y}) > half_)
                return -1;
            std::uint64_t cell = dense_[dense_slot(p)];
            return (cell >> 32) == epoch_ ? static_cast<std::int64_t>(cell & 0xffffffffULL) : -1;
        }
        std::uint64_t key = pack(p);
        std::size_t i = PointHash{}(p)&mask_;
        while (table_[i].epoch == epoch_) {
            if (table_[i].key == key) return table_[i].index;
            i = (i + 1) & mask_;
        }
        return -1;
    }

  private:
    static constexpr std::int64_t kDenseCells = 1LL << 25;  // 256 MB ceiling at 8B/cell

    struct Slot {
        std::uint64_t key = 0;
        std::uint32_t epoch = 0;
        std::uint32_t index = 0;
    };

    std::size_t dense_slot(LatticePoint p) const {
        std::int64_t side = 2 * half_ + 1;
        return static_cast<std::size_t>((std::int64_t{p.y} + half_) * side +
                                        (std::int64_t{p.x} + half_));
    }

    void grow() {
        std::vector<Slot> old = std::move(table_);
        table_.assign(old.size() * 2, Slot{});
        mask_ = table_.size() - 1;
        used_ = 0;
        for (const auto& s : old) {
            if (s.epoch != epoch_) continue;
            std::size_t i = PointHash{}(unpack(s.key)) & mask_;
            while (table_[i].epoch == epoch_) i = (i + 1) & mask_;
            table_[i] = s;
            ++used_;
        }
    }

    std::int64_t half_ = -1;
    std::vector<std::uint64_t> dense_;
    std::vector<Slot> table_;
    std::size_t mask_ = 0;
    std::size_t used_ = 0;
    std::uint32_t epoch_ = 0;
};

// Streaming loop-erased walk: runs the SRW and maintains L(S[0,j]) as it
// goes. Identical output to srw_until + loop_erase under the same rng.
inline LerwSample lerw_streaming(LatticePoint start, const StopRule& stop, Rng& rng,
                                 ErasureIndex& index, std::uint64_t step_cap = kDefaultStepCap) {
    LerwSample out;
    index.new_walk();
    auto& kept = out.path.vertices;
    kept.push_back(start);
    index.set(start, 0);

    LatticePoint pos = start;
    for (std::uint64_t j = 1; j <= step_cap; ++j) {
        switch (rng.next_direction()) {
            case 0: ++pos.x; break;
            case 1: ++pos.y; break;
            case 2: --pos.x; break;
            default: --pos.y; break;
        }
        std::int64_t i = index.get(pos);
        if (i >= 0 && i < static_cast<std::int64_t>(kept.size()) &&
            kept[static_cast<std::size_t>(i)] == pos) {
            kept.resize(static_cast<std::size_t>(i) + 1);
        } else {
            index.set(pos, static_cast<std::uint32_t>(kept.size()));
            kept.push_back(pos);
        }
        if (stop.satisfied(pos, j)) {
            out.raw_steps = j;
            return out;
        }
    }
    out.raw_steps = step_cap;
    throw StepCapExceeded(std::move(out.path));
}

// mu_{l,n} sampler: SRW to sigma_n with n = K*l, loop-erased, truncated at the
// first exit of B(0,l). Approximates the infinite LERW run to sigma-hat_l.
inline LerwSample sample_infinite_lerw(std::int64_t l, std::int64_t truncation_factor, Rng& rng,
                                       ErasureIndex* workspace = nullptr,
                                       std::uint64_t step_cap = kDefaultStepCap) {
    if (l < 1) throw std::invalid_argument("sample_infinite_lerw: l must be >= 1");
    if (truncation_factor < 2)
        throw std::invalid_argument("sample_infinite_lerw: truncation factor must be >= 2");
    std::int64_t n = truncation_factor * l;

    std::unique_ptr<ErasureIndex> local;
    if (workspace == nullptr) {
        local = std::make_unique<ErasureIndex>(n + 1);
        workspace = local.get();
    }
    LerwSample s = lerw_streaming({0, 0}, StopRule::exit_ball({0, 0}, static_cast<double>(n)), rng,
                                  *workspace, step_cap);

    std::int64_t l2 = l * l;
    for (std::size_t i = 0; i < s.path.vertices.size(); ++i) {
        if (norm2(s.path.vertices[i]) > l2) {
            s.path.vertices.resize(i + 1);
            break;
        }
    }
    s.truncation = std::make_pair(l, n);
    return s;
}

// M_D / M_{D',D} / M-hat observables: steps of the loop-erased path, or the
// number of its vertices inside a subregion.
inline std::int64_t measure_lerw_lengths(const LerwSample& sample,
                                         const LatticeRegion* subregion = nullptr) {
    if (subregion == nullptr) return static_cast<std::int64_t>(sample.path.steps());
    std::int64_t count = 0;
    for (auto v : sample.path.vertices)
        if (subregion->contains(v)) ++count;
    return count;
}

}  // namespace ustlab
