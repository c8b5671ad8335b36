#pragma once

// Scaling-function estimation (G-hat and its derived g, F, f, k), weighted
// log-log exponent fits, empirical tail curves, and the consolidated
// dimension report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ustlab/parallel.hpp"
#include "ustlab/rng.hpp"
#include "ustlab/stats.hpp"
#include "ustlab/tree_metrics.hpp"
#include "ustlab/tree_walk.hpp"
#include "ustlab/ust.hpp"
#include "ustlab/walk.hpp"

namespace ustlab {

struct ScalingRow {
    double n = 0;
    double mean = 0;
    double stderr_ = 0;
    std::uint64_t samples = 0;
};

struct ScalingTable {
    std::string kind;
    std::vector<ScalingRow> rows;
};

struct ExponentFit {
    double slope = 0;
    double intercept = 0;
    double stderr_slope = 0;
    double n_min = 0, n_max = 0;
    double r_squared = 0;
};

// Weighted least squares of log(mean) on log(n) over rows with
// n_min <= n <= n_max. Weights 1/stderr_log^2 when all stderrs are positive,
// equal weights otherwise.
inline ExponentFit fit_exponent(const ScalingTable& table, double n_min, double n_max) {
    std::vector<double> x, y, w;
    bool all_positive_se = true;
    for (const auto& row : table.rows) {
        if (row.n < n_min || row.n > n_max) continue;
        if (row.mean <= 0) throw std::invalid_argument("fit_exponent: nonpositive mean");
        x.push_back(std::log(row.n));
        y.push_back(std::log(row.mean));
        double se_log = row.stderr_ > 0 ? row.stderr_ / row.mean : 0.0;
        if (se_log <= 0) all_positive_se = false;
        w.push_back(se_log);
    }
    if (x.size() < 2) throw std::invalid_argument("fit_exponent: need at least 2 rows in range");
    for (auto& wi : w) wi = all_positive_se ? 1.0 / (wi * wi) : 1.0;

    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
        sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
    }
    if (sxx <= 0) throw std::invalid_argument("fit_exponent: degenerate abscissae");

    ExponentFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    fit.n_min = n_min;
    fit.n_max = n_max;

    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += w[i] * r * r;
        ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (x.size() > 2)
        fit.stderr_slope = std::sqrt(std::max(0.0, ss_res / (static_cast<double>(x.size()) - 2.0)) / sxx);
    return fit;
}

// Pool-adjacent-violators: weighted isotonic regression, then strictified by
// an epsilon tie-break so the result is usable as an increasing interpolant.
inline std::vector<double> isotonic_increasing(const std::vector<double>& values,
                                               const std::vector<double>& weights) {
    struct Block {
        double value, weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double wi = weights.empty() ? 1.0 : weights[i];
        blocks.push_back({values[i], wi, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].value >= blocks.back().value) {
            Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            a.value = (a.value * a.weight + b.value * b.weight) / (a.weight + b.weight);
            a.weight += b.weight;
            a.count += b.count;
        }
    }
    std::vector<double> out;
    for (const auto& b : blocks)
        for (std::size_t i = 0; i < b.count; ++i) out.push_back(b.value);
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1]) out[i] = out[i - 1] + 1e-9;
    return out;
}

// G-hat as a log-log piecewise-linear interpolant anchored at G(1) = 1, with
// slope extrapolation beyond the table; g, F, f, k derived from it.
class ScalingFunctionSet {
  public:
    ScalingFunctionSet(const ScalingTable& table, double extrapolation_slope)
        : slope_(extrapolation_slope) {
        if (table.rows.empty()) throw std::invalid_argument("ScalingFunctionSet: empty table");
        std::vector<double> logs, weights;
        std::vector<double> xs;
        for (const auto& row : table.rows) {
            if (row.n < 1 || row.mean <= 0)
                throw std::invalid_argument("ScalingFunctionSet: invalid row");
            xs.push_back(std::log(row.n));
            logs.push_back(std::log(row.mean));
            double se_log = row.stderr_ > 0 ? row.stderr_ / row.mean : 1.0;
            weights.push_back(1.0 / (se_log * se_log));
        }
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (xs[i] <= xs[i - 1])
                throw std::invalid_argument("ScalingFunctionSet: n values must increase");
        auto iso = isotonic_increasing(logs, weights);
        // G(1) = 1 anchor
        if (xs.front() > 0) {
            kx_.push_back(0.0);
            ky_.push_back(0.0);
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!kx_.empty() && iso[i] <= ky_.back()) continue;  // anchor dominates
            kx_.push_back(xs[i]);
            ky_.push_back(iso[i]);
        }
        if (kx_.size() < 2) throw std::invalid_argument("ScalingFunctionSet: non-correctable table");
        if (slope_ <= 0) throw std::invalid_argument("ScalingFunctionSet: slope must be positive");
    }

    // G-hat(t), t >= 1
    double G(double t) const {
        if (t < 1) throw std::domain_error("G: domain is [1, inf)");
        return std::exp(eval_log(std::log(t)));
    }

    // g-hat = inverse of G-hat
    double g(double y) const {
        if (y < 1) throw std::domain_error("g: domain is [1, inf)");
        return std::exp(invert_log(std::log(y)));
    }

    // F(R) = R g(R)^2
    double F(double r) const {
        double gr = g(r);
        return r * gr * gr;
    }

    // f = inverse of F, by bisection (F is strictly increasing)
    double f(double t) const {
        if (t < 1) throw std::domain_error("f: domain is [1, inf)");
        double lo = 1.0, hi = 2.0;
        while (F(hi) < t) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e150) throw std::runtime_error("f: inversion out of range");
        }
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (F(mid) < t)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    // k(t) = g(f(t))^2
    double k(double t) const {
        double gf = g(f(t));
        return gf * gf;
    }

  private:
    double eval_log(double lx) const {
        if (lx <= kx_.front()) return ky_.front() + (lx - kx_.front()) * first_slope();
        if (lx >= kx_.back()) return ky_.back() + (lx - kx_.back()) * slope_;
        auto it = std::upper_bound(kx_.begin(), kx_.end(), lx);
        std::size_t i = static_cast<std::size_t>(it - kx_.begin());
        double t = (lx - kx_[i - 1]) / (kx_[i] - kx_[i - 1]);
        return ky_[i - 1] + t * (ky_[i] - ky_[i - 1]);
    }

    double invert_log(double ly) const {
        if (ly <= ky_.front()) return kx_.front() + (ly - ky_.front()) / first_slope();
        if (ly >= ky_.back()) return kx_.back() + (ly - ky_.back()) / slope_;
        auto it = std::upper_bound(ky_.begin(), ky_.end(), ly);
        std::size_t i = static_cast<std::size_t>(it - ky_.begin());
        double t = (ly - ky_[i - 1]) / (ky_[i] - ky_[i - 1]);
        return kx_[i - 1] + t * (kx_[i] - kx_[i - 1]);
    }

    double first_slope() const {
        return (ky_[1] - ky_[0]) / (kx_[1] - kx_[0]);
    }

    std::vector<double> kx_, ky_;  // knots in log-log space
    double slope_;
};

// Monte Carlo G-hat(n) = E[M-hat_n] via the truncated infinite LERW.
inline ScalingTable estimate_G(const std::vector<std::int64_t>& n_values,
                               std::uint64_t samples_per_n, std::int64_t truncation_factor,
                               RandomSource src, unsigned workers = 1) {
    ScalingTable table;
    table.kind = "Mhat";
    for (auto n : n_values) {
        if (n < 1) throw std::invalid_argument("estimate_G: n must be >= 1");
        std::vector<double> lengths(samples_per_n, 0.0);
        parallel_replicas(samples_per_n, workers, [&](std::size_t i) {
            thread_local std::unique_ptr<ErasureIndex> ws;
            thread_local std::int64_t ws_half = -1;
            std::int64_t half = truncation_factor * n + 1;
            if (!ws || ws_half < half) {
                ws = std::make_unique<ErasureIndex>(half);
                ws_half = half;
            }
            Rng rng(src.substream(mix64(0x47484154ULL, static_cast<std::uint64_t>(n)) ^ i));
            auto sample = sample_infinite_lerw(n, truncation_factor, rng, ws.get());
            lengths[i] = static_cast<double>(measure_lerw_lengths(sample));
        });
        double sum = 0;
        for (double v : lengths) sum += v;
        double mean = sum / static_cast<double>(samples_per_n);
        double var = 0;
        for (double v : lengths) var += (v - mean) * (v - mean);
        ScalingRow row;
        row.n = static_cast<double>(n);
        row.mean = mean;
        row.samples = samples_per_n;
        row.stderr_ = samples_per_n > 1
                          ? std::sqrt(var / (static_cast<double>(samples_per_n) *
                                             (static_cast<double>(samples_per_n) - 1.0)))
                          : 0.0;
        table.rows.push_back(row);
    }
    return table;
}

// Annealed ball-volume sweep: one BFS per tree gives |B_d(0,R)| for every R,
// with truncated radii excluded per sample.
inline ScalingTable ball_volume_sweep(const TreeFactory& factory,
                                      const std::vector<std::int32_t>& radii, std::uint64_t trees,
                                      RandomSource src, unsigned workers = 1) {
    std::vector<std::int32_t> rs = radii;
    std::sort(rs.begin(), rs.end());
    const std::int32_t max_r = rs.back();

    struct TreeResult {
        std::vector<double> volume;  // -1 when truncated at that radius
    };
    std::vector<TreeResult> results(trees);
    parallel_replicas(trees, workers, [&](std::size_t ti) {
        auto tree = factory(ti);
        MetricBall ball = intrinsic_ball(*tree, {0, 0}, max_r);
        // volume at R = #members with depth <= R; first boundary touch caps validity
        const std::int64_t inner = std::max<std::int64_t>(0, tree->trusted_radius() - 1);
        const std::int64_t trust2 = inner * inner;
        std::vector<std::int64_t> by_depth(max_r + 1, 0);
        std::int32_t first_touch = max_r + 1;
        for (std::size_t i = 0; i < ball.members.size(); ++i) {
            ++by_depth[ball.depth[i]];
            if (norm2(ball.members[i]) > trust2) first_touch = std::min(first_touch, ball.depth[i]);
        }
        std::vector<std::int64_t> cumulative(max_r + 1, 0);
        std::int64_t acc = 0;
        for (std::int32_t d = 0; d <= max_r; ++d) {
            acc += by_depth[d];
            cumulative[d] = acc;
        }
        results[ti].volume.resize(rs.size());
        for (std::size_t i = 0; i < rs.size(); ++i)
            results[ti].volume[i] =
                rs[i] < first_touch ? static_cast<double>(cumulative[rs[i]]) : -1.0;
    });

    ScalingTable table;
    table.kind = "ball_volume";
    for (std::size_t i = 0; i < rs.size(); ++i) {
        double sum = 0, count = 0;
        for (const auto& res : results)
            if (res.volume[i] >= 0) {
                sum += res.volume[i];
                count += 1;
            }
        if (count < 2) throw std::runtime_error("ball_volume_sweep: too few untruncated samples");
        double mean = sum / count;
        double var = 0;
        for (const auto& res : results)
            if (res.volume[i] >= 0) var += (res.volume[i] - mean) * (res.volume[i] - mean);
        ScalingRow row;
        row.n = static_cast<double>(rs[i]);
        row.mean = mean;
        row.stderr_ = std::sqrt(var / (count * (count - 1)));
        row.samples = static_cast<std::uint64_t>(count);
        table.rows.push_back(row);
    }
    return table;
}

struct TailRow {
    double lambda = 0;
    double probability = 0;
    double lo = 0, hi = 1;  // Wilson score interval
    std::uint64_t exceed = 0, trials = 0;
};

// Empirical P(observable > lambda * normalizer) with confidence intervals.
inline std::vector<TailRow> empirical_tail(const std::function<double(std::uint64_t)>& sampler,
                                           double normalizer, const std::vector<double>& lambdas,
                                           std::uint64_t replicas, unsigned workers = 1) {
    std::vector<double> values(replicas);
    parallel_replicas(replicas, workers, [&](std::size_t i) { values[i] = sampler(i); });
    std::vector<TailRow> out;
    for (double lam : lambdas) {
        TailRow row;
        row.lambda = lam;
        row.trials = replicas;
        for (double v : values)
            if (v > lam * normalizer) ++row.exceed;
        row.probability = static_cast<double>(row.exceed) / static_cast<double>(replicas);
        auto ci = wilson_interval(row.exceed, replicas);
        row.lo = ci.lo;
        row.hi = ci.hi;
        out.push_back(row);
    }
    return out;
}

// --- consolidated dimension estimation -------------------------------------

struct DimensionConfig {
    // growth exponent: G-hat(n) slope
    std::vector<std::int64_t> g_ns{16, 32, 64, 128, 256, 512};
    std::uint64_t g_samples = 3000;
    std::int64_t g_truncation = 4;

    // fractal dimension: ball volumes on windowed USTs
    std::vector<std::int32_t> df_radii{16, 24, 32, 48, 64, 96, 128, 192, 256};
    std::int32_t df_window_r = 150;
    std::int32_t df_K = 4;
    std::uint64_t df_trees = 150;

    // walk dimension: intrinsic exit times. Radii below ~24 sit in the
    // lattice-crossover regime and drag the fitted slope down, so the
    // default grid starts at 24.
    std::vector<std::int32_t> dw_radii{24, 32, 48, 64};
    std::int32_t dw_window_r = 90;
    std::int32_t dw_K = 4;
    std::uint64_t dw_trees = 600;
    std::uint64_t dw_walks = 80;

    // spectral dimension + displacement/range: walks at dyadic times
    std::vector<std::uint64_t> ds_times{64, 128, 256, 512, 1024, 2048, 4096, 8192};
    std::int32_t ds_window_r = 80;
    std::int32_t ds_K = 4;
    std::uint64_t ds_trees = 300;
    std::uint64_t ds_walks = 300;

    WindowMethod method = WindowMethod::WiredBox;
    double fit_n_min = 16;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

struct DimensionReport {
    ScalingTable g_table, volume_table, exit_table, return_table, displacement_table, range_table;
    ExponentFit growth_fit, df_fit, dw_fit, ds_fit, f_fit, k_fit;
    double growth_exponent = 0;  // expect 5/4
    double d_f = 0;              // expect 8/5
    double d_w = 0;              // expect 13/5
    double d_s = 0;              // expect 16/13
    double displacement_exponent = 0;  // expect 5/13
    double range_exponent = 0;         // expect 8/13
    double return_discard_rate = 0;
    double exit_discard_rate = 0;
    bool valid = true;
    std::vector<std::string> flags;
};

inline TreeFactory window_tree_factory(std::int32_t r, WindowMethod method, std::int32_t K,
                                       RandomSource src) {
    return [=](std::uint64_t i) {
        RandomSource s{src.seed, mix64(src.stream ^ 0x54524545ULL, i)};
        return std::make_shared<const TreeWindow>(sample_ust_window(r, method, K, s));
    };
}

inline DimensionReport estimate_dimensions(const DimensionConfig& cfg) {
    DimensionReport rep;
    RandomSource base{cfg.seed, 0};

    // growth exponent
    rep.g_table = estimate_G(cfg.g_ns, cfg.g_samples, cfg.g_truncation,
                             base.substream(0x47ULL), cfg.workers);
    rep.growth_fit = fit_exponent(rep.g_table, cfg.fit_n_min, rep.g_table.rows.back().n);
    rep.growth_exponent = rep.growth_fit.slope;

    // fractal dimension
    auto df_factory =
        window_tree_factory(cfg.df_window_r, cfg.method, cfg.df_K, base.substream(0x4446ULL));
    rep.volume_table =
        ball_volume_sweep(df_factory, cfg.df_radii, cfg.df_trees, base.substream(0x4447ULL),
                          cfg.workers);
    rep.df_fit = fit_exponent(rep.volume_table, cfg.fit_n_min, rep.volume_table.rows.back().n);
    rep.d_f = rep.df_fit.slope;

    // walk dimension
    auto dw_factory =
        window_tree_factory(cfg.dw_window_r, cfg.method, cfg.dw_K, base.substream(0x4457ULL));
    AnnealedBudget dw_budget{cfg.dw_trees, cfg.dw_walks, cfg.workers};
    auto exit_rows = exit_time_statistics(dw_factory, cfg.dw_radii, {}, dw_budget,
                                          base.substream(0x4458ULL));
    rep.exit_table.kind = "tau_R";
    for (const auto& row : exit_rows) {
        rep.exit_table.rows.push_back(
            {static_cast<double>(row.radius), row.mean, row.stderr_, row.samples});
        rep.exit_discard_rate = row.discard_rate;
        if (!row.valid) {
            rep.valid = false;
            rep.flags.push_back("exit-time discard rate above 1%");
        }
    }
    rep.dw_fit = fit_exponent(rep.exit_table, rep.exit_table.rows.front().n,
                              rep.exit_table.rows.back().n);
    rep.d_w = rep.dw_fit.slope;

    // spectral dimension and displacement/range, one walk ensemble each
    auto ds_factory =
        window_tree_factory(cfg.ds_window_r, cfg.method, cfg.ds_K, base.substream(0x4453ULL));
    AnnealedBudget ds_budget{cfg.ds_trees, cfg.ds_walks, cfg.workers};
    auto kernel = estimate_return_probability(ds_factory, cfg.ds_times, ds_budget,
                                              base.substream(0x4454ULL));
    rep.return_table.kind = "p_tilde";
    for (const auto& e : kernel) {
        rep.return_table.rows.push_back({static_cast<double>(e.n), e.p_tilde, e.stderr_, 0});
        rep.return_discard_rate = e.discard_rate;
        if (!e.valid) {
            rep.valid = false;
            rep.flags.push_back("return-probability discard rate above 1% or empty");
        }
    }
    rep.ds_fit = fit_exponent(rep.return_table, rep.return_table.rows.front().n,
                              rep.return_table.rows.back().n);
    rep.d_s = -2.0 * rep.ds_fit.slope;

    auto disp = displacement_and_range(ds_factory, cfg.ds_times, ds_budget,
                                       base.substream(0x4455ULL));
    rep.displacement_table.kind = "Y_n";
    rep.range_table.kind = "W_n";
    for (const auto& row : disp) {
        rep.displacement_table.rows.push_back(
            {static_cast<double>(row.n), row.mean_max, row.stderr_max, 0});
        rep.range_table.rows.push_back(
            {static_cast<double>(row.n), row.mean_range, row.stderr_range, 0});
        if (!row.valid) {
            rep.valid = false;
            rep.flags.push_back("displacement discard rate above 1%");
        }
    }
    rep.f_fit = fit_exponent(rep.displacement_table, rep.displacement_table.rows.front().n,
                             rep.displacement_table.rows.back().n);
    rep.k_fit = fit_exponent(rep.range_table, rep.range_table.rows.front().n,
                             rep.range_table.rows.back().n);
    rep.displacement_exponent = rep.f_fit.slope;
    rep.range_exponent = rep.k_fit.slope;
    return rep;
}

}  // namespace ustlab
