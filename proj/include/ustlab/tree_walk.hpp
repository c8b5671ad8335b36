#pragma once

// Simple random walk X on a sampled TreeWindow: exit times, return
// probabilities, displacement and range observables. Walks step uniformly
// among tree neighbors (P(x->y) = 1/mu_x) and abort loudly when they touch
// the trusted-window edge.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ustlab/lattice.hpp"
#include "ustlab/parallel.hpp"
#include "ustlab/rng.hpp"
#include "ustlab/ust.hpp"

namespace ustlab {

enum class StopReason { Horizon, IntrinsicRadiusHit, EuclideanRadiusHit, WindowEdge };

struct WalkStops {
    std::int32_t intrinsic_radius = -1;  // tau_R: stop when d(start, X_n) > R
    std::int32_t euclidean_radius = -1;  // tau-tilde_r: stop when |X_n| > r
};

struct WalkTrace {
    LatticePoint start;
    std::vector<LatticePoint> positions;
    std::uint64_t steps = 0;
    StopReason stop_reason = StopReason::Horizon;
};

// d(start, .) over the component of `start`, truncated at `max_depth`
// (negative = full component). -1 where unknown/absent.
inline std::vector<std::int32_t> depth_field(const TreeWindow& t, LatticePoint start,
                                             std::int64_t max_depth = -1) {
    if (!t.present(start)) throw std::domain_error("depth_field: start outside sampled tree");
    std::vector<std::int32_t> depth(t.vertex_capacity(), -1);
    std::vector<std::int32_t> frontier{t.index(start)}, next;
    depth[t.index(start)] = 0;
    for (std::int64_t d = 0; !frontier.empty() && (max_depth < 0 || d < max_depth); ++d) {
        for (auto idx : frontier) {
            std::array<std::int32_t, 4> nb;
            int n = t.tree_neighbors(t.point(idx), nb);
            for (int k = 0; k < n; ++k)
                if (depth[nb[k]] < 0) {
                    depth[nb[k]] = static_cast<std::int32_t>(d + 1);
                    next.push_back(nb[k]);
                }
        }
        frontier.swap(next);
        next.clear();
    }
    return depth;
}

namespace detail {

// One uniform tree-neighbor step from p. Returns the new point.
inline LatticePoint tree_step(const TreeWindow& t, LatticePoint p, Rng& rng) {
    std::array<std::int32_t, 4> nb;
    int n = t.tree_neighbors(p, nb);
    if (n == 0) throw std::runtime_error("tree walk: isolated vertex");
    std::int32_t pick = n == 1 ? nb[0] : nb[rng.next_below(static_cast<std::uint64_t>(n))];
    return t.point(pick);
}

}  // namespace detail

inline WalkTrace run_walk(const TreeWindow& t, LatticePoint start, std::uint64_t horizon,
                          const WalkStops& stops, Rng& rng, bool record_positions = true) {
    if (!t.present(start)) throw std::domain_error("run_walk: start outside sampled tree");
    const std::int64_t guard2 = t.guard_norm2();
    const std::int64_t euclid2 = stops.euclidean_radius >= 0
                                     ? std::int64_t{stops.euclidean_radius} * stops.euclidean_radius
                                     : -1;

    std::vector<std::int32_t> depth;
    if (stops.intrinsic_radius >= 0)
        depth = depth_field(t, start, std::int64_t{stops.intrinsic_radius} + 2);

    WalkTrace trace;
    trace.start = start;
    if (record_positions) trace.positions.push_back(start);

    LatticePoint pos = start;
    for (std::uint64_t n = 1; n <= horizon; ++n) {
        pos = detail::tree_step(t, pos, rng);
        if (record_positions) trace.positions.push_back(pos);
        trace.steps = n;
        if (stops.intrinsic_radius >= 0) {
            std::int32_t d = depth[t.index(pos)];
            if (d < 0 || d > stops.intrinsic_radius) {
                trace.stop_reason = StopReason::IntrinsicRadiusHit;
                return trace;
            }
        }
        if (euclid2 >= 0 && norm2(pos) > euclid2) {
            trace.stop_reason = StopReason::EuclideanRadiusHit;
            return trace;
        }
        if (norm2(pos) > guard2) {
            trace.stop_reason = StopReason::WindowEdge;
            return trace;
        }
    }
    trace.stop_reason = StopReason::Horizon;
    return trace;
}

// Shared tree source for annealed (fresh tree per index) or quenched (same
// tree every time) sweeps.
using TreeFactory = std::function<std::shared_ptr<const TreeWindow>(std::uint64_t)>;

inline TreeFactory fixed_tree_factory(std::shared_ptr<const TreeWindow> t) {
    return [t](std::uint64_t) { return t; };
}

struct HeatKernelEstimate {
    std::uint64_t n = 0;        // time (even for the diagonal law)
    double p = 0.0;             // p_n(0,0) estimate
    double p_tilde = 0.0;       // p_n + p_{n+1}
    double stderr_ = 0.0;       // over per-tree means
    double discard_rate = 0.0;  // window-edge aborts
    bool valid = true;
};

struct AnnealedBudget {
    std::uint64_t trees = 1;
    std::uint64_t walks_per_tree = 1;
    unsigned workers = 1;
};

// Monte Carlo p_{2n}(0,0) = mu_0^{-1} P^0(X_{2n} = 0) averaged over trees.
// A walk that touches the window edge before the largest horizon is
// discarded for every n; rates above 1% flag the estimates invalid.
inline std::vector<HeatKernelEstimate> estimate_return_probability(
    const TreeFactory& factory, const std::vector<std::uint64_t>& times,
    const AnnealedBudget& budget, RandomSource src) {
    for (auto n : times)
        if (n % 2 != 0) throw std::invalid_argument("estimate_return_probability: odd time");
    std::vector<std::uint64_t> sorted_times = times;
    std::sort(sorted_times.begin(), sorted_times.end());
    const std::uint64_t horizon = sorted_times.empty() ? 0 : sorted_times.back() + 1;

    struct TreeStats {
        std::vector<double> mean_p, mean_pt;  // per time, per-tree means
        std::vector<std::uint64_t> hits_pt;   // raw p~ indicator counts
        double mu0 = 1.0;
        std::uint64_t kept = 0, discarded = 0;
    };
    std::vector<TreeStats> per_tree(budget.trees);

    parallel_replicas(budget.trees, budget.workers, [&](std::size_t ti) {
        auto tree = factory(ti);
        const double mu0 = tree->degree({0, 0});
        const std::int64_t guard2 = tree->guard_norm2();
        TreeStats& ts = per_tree[ti];
        ts.mu0 = mu0;
        std::vector<std::uint64_t> hit(sorted_times.size(), 0), hit1(sorted_times.size(), 0);
        Rng rng(src.substream(0x52455450ULL ^ ti));
        for (std::uint64_t w = 0; w < budget.walks_per_tree; ++w) {
            LatticePoint pos{0, 0};
            bool ok = true;
            std::size_t next_t = 0;
            std::vector<std::uint8_t> at0(horizon + 2, 0);
            at0[0] = 1;
            for (std::uint64_t n = 1; n <= horizon && ok; ++n) {
                pos = detail::tree_step(*tree, pos, rng);
                if (pos == LatticePoint{0, 0}) at0[n] = 1;
                if (norm2(pos) > guard2) ok = false;
            }
            (void)next_t;
            if (!ok) {
                ++ts.discarded;
                continue;
            }
            ++ts.kept;
            for (std::size_t i = 0; i < sorted_times.size(); ++i) {
                hit[i] += at0[sorted_times[i]];
                hit1[i] += at0[sorted_times[i] + 1];
            }
        }
        ts.mean_p.resize(sorted_times.size(), 0.0);
        ts.mean_pt.resize(sorted_times.size(), 0.0);
        ts.hits_pt.resize(sorted_times.size(), 0);
        for (std::size_t i = 0; i < sorted_times.size(); ++i) ts.hits_pt[i] = hit[i] + hit1[i];
        if (ts.kept > 0)
            for (std::size_t i = 0; i < sorted_times.size(); ++i) {
                double kept = static_cast<double>(ts.kept);
                ts.mean_p[i] = static_cast<double>(hit[i]) / kept / mu0;
                ts.mean_pt[i] = static_cast<double>(hit[i] + hit1[i]) / kept / mu0;
            }
    });

    std::vector<HeatKernelEstimate> out;
    std::uint64_t kept_total = 0, discarded_total = 0;
    for (const auto& ts : per_tree) {
        kept_total += ts.kept;
        discarded_total += ts.discarded;
    }
    for (std::size_t i = 0; i < sorted_times.size(); ++i) {
        HeatKernelEstimate e;
        e.n = sorted_times[i];
        double sum = 0.0, sum_t = 0.0, count = 0.0;
        for (const auto& ts : per_tree) {
            if (ts.kept == 0) continue;
            sum += ts.mean_p[i];
            sum_t += ts.mean_pt[i];
            count += 1.0;
        }
        if (count > 0) {
            e.p = sum / count;
            e.p_tilde = sum_t / count;
            double var = 0.0;
            for (const auto& ts : per_tree) {
                if (ts.kept == 0) continue;
                double d = ts.mean_pt[i] - e.p_tilde;
                var += d * d;
            }
            if (count > 1) {
                e.stderr_ = std::sqrt(var / (count * (count - 1.0)));
            } else {
                // quenched case: binomial error over walks (the p~ indicator
                // is 0/1 since the tree walk has period 2)
                for (const auto& ts : per_tree) {
                    if (ts.kept == 0) continue;
                    double q = static_cast<double>(ts.hits_pt[i]) / static_cast<double>(ts.kept);
                    e.stderr_ = std::sqrt(q * (1.0 - q) / static_cast<double>(ts.kept)) / ts.mu0;
                }
            }
        }
        e.discard_rate = kept_total + discarded_total == 0
                             ? 0.0
                             : static_cast<double>(discarded_total) /
                                   static_cast<double>(kept_total + discarded_total);
        e.valid = e.discard_rate <= 0.01 && count > 0;
        out.push_back(e);
    }
    return out;
}

struct ExitTimeRow {
    bool intrinsic = true;  // true: tau_R over d(0,.); false: tau-tilde_r over |.|
    std::int32_t radius = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
    double discard_rate = 0.0;
    bool valid = true;
};

// Annealed mean exit times from intrinsic and Euclidean balls, one walk pass
// recording every requested radius.
inline std::vector<ExitTimeRow> exit_time_statistics(const TreeFactory& factory,
                                                     const std::vector<std::int32_t>& intrinsic_radii,
                                                     const std::vector<std::int32_t>& euclidean_radii,
                                                     const AnnealedBudget& budget, RandomSource src,
                                                     std::uint64_t step_cap = 100'000'000ULL) {
    std::vector<std::int32_t> rs = intrinsic_radii, es = euclidean_radii;
    std::sort(rs.begin(), rs.end());
    std::sort(es.begin(), es.end());
    const std::int32_t max_r = rs.empty() ? -1 : rs.back();

    const std::size_t nrow = rs.size() + es.size();
    struct TreeStats {
        std::vector<double> mean;   // per row
        std::vector<double> sumsq;  // per row, walk-level sum of squares
        std::uint64_t kept = 0, discarded = 0;
    };
    std::vector<TreeStats> per_tree(budget.trees);

    parallel_replicas(budget.trees, budget.workers, [&](std::size_t ti) {
        auto tree = factory(ti);
        TreeStats& ts = per_tree[ti];
        ts.mean.assign(nrow, 0.0);
        ts.sumsq.assign(nrow, 0.0);
        std::vector<std::int32_t> depth;
        if (!rs.empty()) depth = depth_field(*tree, {0, 0}, std::int64_t{max_r} + 2);
        const std::int64_t guard2 = tree->guard_norm2();
        Rng rng(src.substream(0x54495845ULL ^ ti));
        std::vector<std::uint64_t> sums(nrow, 0);
        for (std::uint64_t w = 0; w < budget.walks_per_tree; ++w) {
            LatticePoint pos{0, 0};
            std::size_t next_int = 0, next_euc = 0;
            std::vector<std::uint64_t> row_val(nrow, 0);
            bool ok = true;
            for (std::uint64_t n = 1; next_int < rs.size() || next_euc < es.size(); ++n) {
                if (n > step_cap) {
                    ok = false;
                    break;
                }
                pos = detail::tree_step(*tree, pos, rng);
                if (next_int < rs.size()) {
                    std::int32_t d = depth[tree->index(pos)];
                    while (next_int < rs.size() && (d < 0 || d > rs[next_int])) {
                        row_val[next_int] = n;
                        ++next_int;
                    }
                }
                std::int64_t n2 = norm2(pos);
                while (next_euc < es.size() && n2 > std::int64_t{es[next_euc]} * es[next_euc]) {
                    row_val[rs.size() + next_euc] = n;
                    ++next_euc;
                }
                if (n2 > guard2 && (next_int < rs.size() || next_euc < es.size())) {
                    ok = false;
                    break;
                }
            }
            if (!ok) {
                ++ts.discarded;
                continue;
            }
            ++ts.kept;
            for (std::size_t i = 0; i < nrow; ++i) {
                sums[i] += row_val[i];
                double v = static_cast<double>(row_val[i]);
                ts.sumsq[i] += v * v;
            }
        }
        if (ts.kept > 0)
            for (std::size_t i = 0; i < nrow; ++i)
                ts.mean[i] = static_cast<double>(sums[i]) / static_cast<double>(ts.kept);
    });

    std::uint64_t kept_total = 0, discarded_total = 0;
    for (const auto& ts : per_tree) {
        kept_total += ts.kept;
        discarded_total += ts.discarded;
    }
    double discard_rate = kept_total + discarded_total == 0
                              ? 0.0
                              : static_cast<double>(discarded_total) /
                                    static_cast<double>(kept_total + discarded_total);

    std::vector<ExitTimeRow> out;
    for (std::size_t i = 0; i < nrow; ++i) {
        ExitTimeRow row;
        row.intrinsic = i < rs.size();
        row.radius = row.intrinsic ? rs[i] : es[i - rs.size()];
        double sum = 0.0, count = 0.0;
        for (const auto& ts : per_tree)
            if (ts.kept > 0) {
                sum += ts.mean[i];
                count += 1.0;
            }
        row.mean = count > 0 ? sum / count : 0.0;
        double var = 0.0;
        for (const auto& ts : per_tree)
            if (ts.kept > 0) {
                double d = ts.mean[i] - row.mean;
                var += d * d;
            }
        if (count > 1) {
            row.stderr_ = std::sqrt(var / (count * (count - 1.0)));
        } else {
            // quenched case: sample variance over walks
            row.stderr_ = 0.0;
            for (const auto& ts : per_tree)
                if (ts.kept > 1) {
                    double k = static_cast<double>(ts.kept);
                    double v = (ts.sumsq[i] / k - ts.mean[i] * ts.mean[i]) * k / (k - 1.0);
                    row.stderr_ = std::sqrt(std::max(0.0, v) / k);
                }
        }
        row.samples = kept_total;
        row.discard_rate = discard_rate;
        row.valid = discard_rate <= 0.01 && count > 0;
        out.push_back(row);
    }
    return out;
}

struct DisplacementRow {
    std::uint64_t n = 0;
    double mean_distance = 0.0;  // E d(0, X_n)
    double mean_max = 0.0;       // E Y_n
    double mean_range = 0.0;     // E |W_n|
    double stderr_distance = 0.0, stderr_max = 0.0, stderr_range = 0.0;
    double discard_rate = 0.0;
    bool valid = true;
};

// E[d(0,X_n)], E[Y_n], E[|W_n|] at the requested times; Y as a running max,
// W as the visited-set cardinality.
inline std::vector<DisplacementRow> displacement_and_range(const TreeFactory& factory,
                                                           const std::vector<std::uint64_t>& times,
                                                           const AnnealedBudget& budget,
                                                           RandomSource src) {
    std::vector<std::uint64_t> ns = times;
    std::sort(ns.begin(), ns.end());
    const std::uint64_t horizon = ns.empty() ? 0 : ns.back();

    struct TreeStats {
        std::vector<double> d, y, w;
        std::vector<double> d2, y2, w2;  // per-walk sums of squares
        std::uint64_t kept = 0, discarded = 0;
    };
    std::vector<TreeStats> per_tree(budget.trees);

    parallel_replicas(budget.trees, budget.workers, [&](std::size_t ti) {
        auto tree = factory(ti);
        TreeStats& ts = per_tree[ti];
        auto depth = depth_field(*tree, {0, 0});
        const std::int64_t guard2 = tree->guard_norm2();
        Rng rng(src.substream(0x44495350ULL ^ ti));
        std::vector<std::uint32_t> stamp(tree->vertex_capacity(), 0);
        std::uint32_t epoch = 0;
        std::vector<double> sum_d(ns.size(), 0), sum_y(ns.size(), 0), sum_w(ns.size(), 0);
        ts.d2.assign(ns.size(), 0.0);
        ts.y2.assign(ns.size(), 0.0);
        ts.w2.assign(ns.size(), 0.0);
        for (std::uint64_t wlk = 0; wlk < budget.walks_per_tree; ++wlk) {
            ++epoch;
            LatticePoint pos{0, 0};
            stamp[tree->index(pos)] = epoch;
            std::int64_t range = 1;
            std::int32_t ymax = 0;
            std::size_t next_t = 0;
            bool ok = true;
            std::vector<double> rec_d(ns.size(), 0), rec_y(ns.size(), 0), rec_w(ns.size(), 0);
            for (std::uint64_t n = 0; n <= horizon; ++n) {
                if (n > 0) {
                    pos = detail::tree_step(*tree, pos, rng);
                    std::int32_t idx = tree->index(pos);
                    if (stamp[idx] != epoch) {
                        stamp[idx] = epoch;
                        ++range;
                    }
                    std::int32_t d = depth[idx];
                    if (d > ymax) ymax = d;
                    if (norm2(pos) > guard2) {
                        ok = false;
                        break;
                    }
                }
                while (next_t < ns.size() && ns[next_t] == n) {
                    rec_d[next_t] = static_cast<double>(depth[tree->index(pos)]);
                    rec_y[next_t] = static_cast<double>(ymax);
                    rec_w[next_t] = static_cast<double>(range);
                    ++next_t;
                }
            }
            if (!ok) {
                ++ts.discarded;
                continue;
            }
            ++ts.kept;
            for (std::size_t i = 0; i < ns.size(); ++i) {
                sum_d[i] += rec_d[i];
                sum_y[i] += rec_y[i];
                sum_w[i] += rec_w[i];
                ts.d2[i] += rec_d[i] * rec_d[i];
                ts.y2[i] += rec_y[i] * rec_y[i];
                ts.w2[i] += rec_w[i] * rec_w[i];
            }
        }
        ts.d.assign(ns.size(), 0.0);
        ts.y.assign(ns.size(), 0.0);
        ts.w.assign(ns.size(), 0.0);
        if (ts.kept > 0)
            for (std::size_t i = 0; i < ns.size(); ++i) {
                ts.d[i] = sum_d[i] / static_cast<double>(ts.kept);
                ts.y[i] = sum_y[i] / static_cast<double>(ts.kept);
                ts.w[i] = sum_w[i] / static_cast<double>(ts.kept);
            }
    });

    std::uint64_t kept_total = 0, discarded_total = 0;
    for (const auto& ts : per_tree) {
        kept_total += ts.kept;
        discarded_total += ts.discarded;
    }
    double discard_rate = kept_total + discarded_total == 0
                              ? 0.0
                              : static_cast<double>(discarded_total) /
                                    static_cast<double>(kept_total + discarded_total);

    std::vector<DisplacementRow> out;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        DisplacementRow row;
        row.n = ns[i];
        auto reduce = [&](auto field, auto sq_field, double& mean, double& se) {
            double sum = 0.0, count = 0.0;
            for (const auto& ts : per_tree)
                if (ts.kept > 0) {
                    sum += (ts.*field)[i];
                    count += 1.0;
                }
            mean = count > 0 ? sum / count : 0.0;
            if (count > 1) {
                double var = 0.0;
                for (const auto& ts : per_tree)
                    if (ts.kept > 0) {
                        double d = (ts.*field)[i] - mean;
                        var += d * d;
                    }
                se = std::sqrt(var / (count * (count - 1.0)));
            } else {
                // quenched case: sample variance over walks
                se = 0.0;
                for (const auto& ts : per_tree)
                    if (ts.kept > 1) {
                        double k = static_cast<double>(ts.kept);
                        double m = (ts.*field)[i];
                        double v = ((ts.*sq_field)[i] / k - m * m) * k / (k - 1.0);
                        se = std::sqrt(std::max(0.0, v) / k);
                    }
            }
        };
        reduce(&TreeStats::d, &TreeStats::d2, row.mean_distance, row.stderr_distance);
        reduce(&TreeStats::y, &TreeStats::y2, row.mean_max, row.stderr_max);
        reduce(&TreeStats::w, &TreeStats::w2, row.mean_range, row.stderr_range);
        row.discard_rate = discard_rate;
        row.valid = discard_rate <= 0.01;
        out.push_back(row);
    }
    return out;
}

struct KernelProfileRow {
    std::int32_t distance = 0;   // intrinsic distance bin
    double mean_p_tilde = 0.0;   // mean of p~_T(0,y) over y at this distance
    std::int64_t bin_size = 0;   // number of tree vertices at this distance
    std::uint64_t walks = 0;
};

// Off-diagonal kernel binned by intrinsic distance: a qualitative
// sub-Gaussian-shape diagnostic, not a constants check.
inline std::vector<KernelProfileRow> sub_gaussian_profile(const TreeWindow& tree, std::uint64_t T,
                                                          std::int32_t max_distance,
                                                          std::uint64_t replicas, RandomSource src,
                                                          unsigned workers = 1) {
    if (T < 1) throw std::invalid_argument("sub_gaussian_profile: T must be >= 1");
    auto depth = depth_field(tree, {0, 0});
    const std::int64_t guard2 = tree.guard_norm2();

    // counts over end positions at T and T+1, merged across chunks
    const std::size_t cells = tree.vertex_capacity();
    const std::size_t chunks = workers == 0 ? 1 : workers * 4;
    const std::uint64_t per_chunk = (replicas + chunks - 1) / chunks;
    std::vector<std::vector<std::uint32_t>> counts(chunks);
    std::vector<std::uint64_t> kept(chunks, 0);
    parallel_replicas(chunks, workers, [&](std::size_t ci) {
        counts[ci].assign(cells, 0);
        Rng rng(src.substream(0x50524f46ULL ^ ci));
        for (std::uint64_t w = 0; w < per_chunk; ++w) {
            LatticePoint pos{0, 0};
            bool ok = true;
            std::int32_t end_t = -1;
            for (std::uint64_t n = 1; n <= T + 1; ++n) {
                pos = detail::tree_step(tree, pos, rng);
                if (norm2(pos) > guard2) {
                    ok = false;
                    break;
                }
                if (n == T) end_t = tree.index(pos);
            }
            if (!ok) continue;
            ++kept[ci];
            ++counts[ci][end_t];
            ++counts[ci][tree.index(pos)];
        }
    });

    std::uint64_t total_kept = 0;
    for (auto k : kept) total_kept += k;
    std::vector<double> sum_pt(max_distance + 1, 0.0);
    std::vector<std::int64_t> bin(max_distance + 1, 0);
    for (std::size_t idx = 0; idx < cells; ++idx) {
        std::int32_t d = depth[idx];
        if (d < 0 || d > max_distance) continue;
        ++bin[d];
        std::uint64_t c = 0;
        for (const auto& chunk : counts) c += chunk[idx];
        double mu = static_cast<double>(tree.degree(tree.point(static_cast<std::int32_t>(idx))));
        if (total_kept > 0 && mu > 0)
            sum_pt[d] += static_cast<double>(c) / static_cast<double>(total_kept) / mu;
    }

    std::vector<KernelProfileRow> out;
    for (std::int32_t d = 0; d <= max_distance; ++d) {
        KernelProfileRow row;
        row.distance = d;
        row.bin_size = bin[d];
        row.mean_p_tilde = bin[d] > 0 ? sum_pt[d] / static_cast<double>(bin[d]) : 0.0;
        row.walks = total_kept;
        out.push_back(row);
    }
    return out;
}

}  // namespace ustlab
