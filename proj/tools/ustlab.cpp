// ustlab: experiment runner for uniform-spanning-tree / loop-erased-walk
// simulations. Subcommands map one-to-one onto library entry points; every
// output file carries a '#'-prefixed metadata header sufficient to rerun it.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ustlab/estimators.hpp"
#include "ustlab/io.hpp"
#include "ustlab/oracle.hpp"
#include "ustlab/stats.hpp"
#include "ustlab/tree_metrics.hpp"
#include "ustlab/tree_walk.hpp"
#include "ustlab/ust.hpp"
#include "ustlab/walk.hpp"

namespace {

using namespace ustlab;
using nlohmann::json;

unsigned resolve_workers(unsigned flag) {
    if (const char* env = std::getenv("USTLAB_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return flag == 0 ? 1 : flag;
}

std::string fmt(double v) { return format_double(v); }

template <typename T>
std::string join_list(const std::vector<T>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        os << v[i];
    }
    return os.str();
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty())
        std::cout << content;
    else
        write_file_atomic(out, content);
}

WindowMethod parse_method(const std::string& m) {
    if (m == "wired") return WindowMethod::WiredBox;
    if (m == "spine") return WindowMethod::SpineAndFill;
    throw CLI::ValidationError("--method", "expected wired or spine");
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// --- sample-lerw -------------------------------------------------------------

int run_sample_lerw(std::int64_t l, std::int64_t trunc, std::uint64_t seed, std::uint64_t samples,
                    const std::string& out) {
    std::ostringstream os;
    json meta = {{"config", "sample-lerw --l " + std::to_string(l) + " --trunc-factor " +
                                std::to_string(trunc) + " --seed " + std::to_string(seed) +
                                " --samples " + std::to_string(samples)},
                 {"version", kVersion}};
    os << meta.dump() << '\n';
    ErasureIndex ws(trunc * l + 1);
    RandomSource src{seed, 0};
    for (std::uint64_t i = 0; i < samples; ++i) {
        Rng rng(src.substream(i));
        auto s = sample_infinite_lerw(l, trunc, rng, &ws);
        json rec;
        rec["seed_stream"] = i;
        rec["raw_steps"] = s.raw_steps;
        json path = json::array();
        for (auto p : s.path.vertices) path.push_back({p.x, p.y});
        rec["path"] = std::move(path);
        os << rec.dump() << '\n';
    }
    emit(out, os.str());
    return 0;
}

// --- sample-ust --------------------------------------------------------------

int run_sample_ust(std::int32_t r, std::int32_t K, const std::string& method, std::uint64_t seed,
                   const std::string& out) {
    TreeWindow t = sample_ust_window(r, parse_method(method), K, RandomSource{seed, 0});
    std::ostringstream os;
    save_tree(t, os);
    emit(out, os.str());
    return 0;
}

// --- ball-volume / resistance ------------------------------------------------

int run_ball_volume(const std::string& tree_file, const std::vector<std::int32_t>& radii,
                    const std::string& out) {
    TreeWindow t = load_tree_file(tree_file);
    CsvDocument doc;
    doc.meta("config", "ball-volume --tree " + tree_file + " --R " + join_list(radii));
    doc.meta("version", kVersion);
    doc.header({"seed", "R", "volume", "truncated"});
    for (auto R : radii) {
        MetricBall b = intrinsic_ball(t, {0, 0}, R);
        doc.row({std::to_string(t.meta_seed), std::to_string(R), std::to_string(b.volume),
                 b.truncated ? "1" : "0"});
    }
    emit(out, doc.str());
    return 0;
}

int run_resistance(const std::string& tree_file, const std::vector<std::int32_t>& radii,
                   const std::string& out) {
    TreeWindow t = load_tree_file(tree_file);
    CsvDocument doc;
    doc.meta("config", "resistance --tree " + tree_file + " --R " + join_list(radii));
    doc.meta("version", kVersion);
    doc.header({"seed", "R", "reff"});
    for (auto R : radii) {
        auto q = resistance_to_ball_complement(t, {0, 0}, R);
        doc.row({std::to_string(t.meta_seed), std::to_string(R),
                 q.infinite ? "inf" : fmt(q.value)});
    }
    emit(out, doc.str());
    return 0;
}

// --- walk --------------------------------------------------------------------

int run_walk(const std::string& tree_file, bool fresh_trees, std::int32_t r, std::int32_t K,
             const std::string& method, const std::vector<std::uint64_t>& times,
             std::uint64_t replicas, std::uint64_t walks_per_tree, std::uint64_t seed,
             const std::string& mode, unsigned workers, const std::string& out) {
    for (auto n : times)
        if (n % 2 != 0) throw CLI::ValidationError("--n", "times must be even");
    RandomSource src{seed, 0};

    TreeFactory factory;
    AnnealedBudget budget;
    budget.workers = workers;
    if (mode == "quenched") {
        std::shared_ptr<const TreeWindow> t;
        if (!tree_file.empty())
            t = std::make_shared<const TreeWindow>(load_tree_file(tree_file));
        else
            t = std::make_shared<const TreeWindow>(
                sample_ust_window(r, parse_method(method), K, src.substream(1)));
        factory = fixed_tree_factory(t);
        budget.trees = 1;
        budget.walks_per_tree = replicas;
    } else if (mode == "annealed") {
        if (!fresh_trees && tree_file.empty())
            throw CLI::ValidationError("--mode", "annealed mode needs --fresh-trees");
        factory = window_tree_factory(r, parse_method(method), K, src.substream(1));
        budget.trees = replicas;
        budget.walks_per_tree = walks_per_tree;
    } else {
        throw CLI::ValidationError("--mode", "expected annealed or quenched");
    }

    auto kernel = estimate_return_probability(factory, times, budget, src.substream(2));
    auto disp = displacement_and_range(factory, times, budget, src.substream(3));

    CsvDocument doc;
    std::ostringstream cfg;
    cfg << "walk " << (tree_file.empty() ? "--fresh-trees" : "--tree " + tree_file) << " --n "
        << join_list(times) << " --replicas " << replicas << " --walks-per-tree " << walks_per_tree
        << " --seed " << seed << " --mode " << mode << " --r " << r << " --K " << K << " --method "
        << method;
    doc.meta("config", cfg.str());
    doc.meta("version", kVersion);
    doc.meta("discard_rate_return", fmt(kernel.empty() ? 0.0 : kernel.front().discard_rate));
    doc.meta("discard_rate_displacement", fmt(disp.empty() ? 0.0 : disp.front().discard_rate));
    doc.header({"n", "stat", "value", "stderr", "discard_rate"});
    bool valid = true;
    for (const auto& e : kernel) {
        doc.row({std::to_string(e.n), "ptilde", fmt(e.p_tilde), fmt(e.stderr_),
                 fmt(e.discard_rate)});
        valid = valid && e.valid;
    }
    for (const auto& d : disp) {
        doc.row({std::to_string(d.n), "dist", fmt(d.mean_distance), fmt(d.stderr_distance),
                 fmt(d.discard_rate)});
        doc.row({std::to_string(d.n), "ymax", fmt(d.mean_max), fmt(d.stderr_max),
                 fmt(d.discard_rate)});
        doc.row({std::to_string(d.n), "range", fmt(d.mean_range), fmt(d.stderr_range),
                 fmt(d.discard_rate)});
        valid = valid && d.valid;
    }
    emit(out, doc.str());
    if (!valid) std::cerr << "walk: estimate flagged invalid (discard rate above 1%)\n";
    return valid ? 0 : 1;
}

// --- estimate-g --------------------------------------------------------------

int run_estimate_g(const std::vector<std::int64_t>& ns, std::uint64_t samples, std::int64_t trunc,
                   std::uint64_t seed, unsigned workers, const std::string& out) {
    ScalingTable table = estimate_G(ns, samples, trunc, RandomSource{seed, 0}, workers);
    CsvDocument doc;
    doc.meta("config", "estimate-g --n " + join_list(ns) + " --samples " + std::to_string(samples) +
                           " --trunc-factor " + std::to_string(trunc) + " --seed " +
                           std::to_string(seed));
    doc.meta("version", kVersion);
    doc.header({"n", "mean", "stderr", "samples"});
    for (const auto& row : table.rows)
        doc.row({fmt(row.n), fmt(row.mean), fmt(row.stderr_), std::to_string(row.samples)});
    emit(out, doc.str());
    return 0;
}

// --- estimate-dims -----------------------------------------------------------

DimensionConfig preset_config(const std::string& preset) {
    DimensionConfig cfg;  // defaults = desk scale
    if (preset == "desk") return cfg;
    if (preset == "pilot") {
        cfg.g_ns = {16, 32, 64, 128};
        cfg.g_samples = 300;
        cfg.df_radii = {8, 12, 16, 24, 32, 48, 64};
        cfg.df_window_r = 70;
        cfg.df_trees = 40;
        cfg.dw_radii = {16, 24, 32};
        cfg.dw_window_r = 40;
        cfg.dw_trees = 60;
        cfg.dw_walks = 30;
        cfg.ds_times = {16, 32, 64, 128, 256, 512, 1024};
        cfg.ds_window_r = 40;
        cfg.ds_trees = 60;
        cfg.ds_walks = 60;
        cfg.fit_n_min = 8;
        return cfg;
    }
    if (preset == "overnight") {
        cfg.g_samples = 12000;
        cfg.df_trees = 600;
        cfg.dw_trees = 2400;
        cfg.ds_trees = 1200;
        cfg.ds_walks = 600;
        return cfg;
    }
    throw CLI::ValidationError("--preset", "expected pilot, desk, or overnight");
}

json table_json(const ScalingTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"n", r.n}, {"mean", r.mean}, {"stderr", r.stderr_}, {"samples", r.samples}});
    return {{"kind", t.kind}, {"rows", std::move(rows)}};
}

json fit_json(const ExponentFit& f) {
    return {{"slope", f.slope},       {"stderr", f.stderr_slope}, {"intercept", f.intercept},
            {"nmin", f.n_min},        {"nmax", f.n_max},          {"r2", f.r_squared}};
}

int run_estimate_dims(const std::string& preset, std::uint64_t seed, unsigned workers,
                      const std::string& out) {
    Timer timer;
    DimensionConfig cfg = preset_config(preset);
    cfg.seed = seed;
    cfg.workers = workers;
    DimensionReport rep = estimate_dimensions(cfg);

    json doc;
    doc["config"] = "estimate-dims --preset " + preset + " --seed " + std::to_string(seed);
    doc["version"] = kVersion;
    doc["exponents"] = {{"growth", rep.growth_exponent},
                        {"d_f", rep.d_f},
                        {"d_w", rep.d_w},
                        {"d_s", rep.d_s},
                        {"displacement", rep.displacement_exponent},
                        {"range", rep.range_exponent}};
    doc["fits"] = {{"growth", fit_json(rep.growth_fit)}, {"d_f", fit_json(rep.df_fit)},
                   {"d_w", fit_json(rep.dw_fit)},        {"d_s", fit_json(rep.ds_fit)},
                   {"displacement", fit_json(rep.f_fit)}, {"range", fit_json(rep.k_fit)}};
    doc["tables"] = {{"G", table_json(rep.g_table)},
                     {"ball_volume", table_json(rep.volume_table)},
                     {"exit_time", table_json(rep.exit_table)},
                     {"return_probability", table_json(rep.return_table)},
                     {"displacement", table_json(rep.displacement_table)},
                     {"range", table_json(rep.range_table)}};
    doc["discard_rates"] = {{"return", rep.return_discard_rate}, {"exit", rep.exit_discard_rate}};
    doc["valid"] = rep.valid;
    doc["flags"] = rep.flags;
    emit(out, doc.dump(2) + "\n");

    std::cerr << "estimate-dims " << preset << ": growth=" << rep.growth_exponent
              << " d_f=" << rep.d_f << " d_w=" << rep.d_w << " d_s=" << rep.d_s
              << " displacement=" << rep.displacement_exponent << " range=" << rep.range_exponent
              << " (" << timer.seconds() << " s)\n";
    return rep.valid ? 0 : 1;
}

// --- tails -------------------------------------------------------------------

int run_tails(const std::string& observable, std::int64_t n, std::int32_t R,
              const std::vector<double>& lambdas, std::uint64_t replicas,
              std::uint64_t pilot_samples, std::uint64_t seed, unsigned workers,
              const std::string& out) {
    RandomSource src{seed, 0};
    std::vector<TailRow> rows;
    double normalizer = 0.0;

    if (observable == "mhat") {
        auto pilot = estimate_G({n}, pilot_samples, 4, src.substream(1), workers);
        normalizer = pilot.rows.front().mean;
        rows = empirical_tail(
            [&](std::uint64_t i) {
                thread_local std::unique_ptr<ErasureIndex> ws;
                if (!ws) ws = std::make_unique<ErasureIndex>(4 * n + 1);
                Rng rng(src.substream(mix64(0x5441494cULL, i)));
                auto s = sample_infinite_lerw(n, 4, rng, ws.get());
                return static_cast<double>(measure_lerw_lengths(s));
            },
            normalizer, lambdas, replicas, workers);
    } else if (observable == "ball") {
        // pilot g-hat over a dyadic grid up to R, then normalizer = g-hat(R)^2
        std::vector<std::int64_t> grid;
        for (std::int64_t v = 2; v <= 2 * R; v *= 2) grid.push_back(v);
        auto pilot = estimate_G(grid, pilot_samples, 4, src.substream(1), workers);
        auto slope = fit_exponent(pilot, pilot.rows.front().n, pilot.rows.back().n).slope;
        ScalingFunctionSet fns(pilot, slope);
        double gR = fns.g(static_cast<double>(R));
        normalizer = gR * gR;
        const std::int32_t window_r = R + 2;
        rows = empirical_tail(
            [&](std::uint64_t i) {
                RandomSource s{seed, mix64(0x42414c4cULL, i)};
                TreeWindow t = sample_ust_window(window_r, WindowMethod::WiredBox, 4, s);
                MetricBall b = intrinsic_ball(t, {0, 0}, R);
                return static_cast<double>(b.volume);
            },
            normalizer, lambdas, replicas, workers);
    } else {
        throw CLI::ValidationError("--observable", "expected mhat or ball");
    }

    CsvDocument doc;
    std::ostringstream cfg;
    cfg << "tails --observable " << observable << " --n " << n << " --R " << R << " --lambdas "
        << join_list(lambdas) << " --replicas " << replicas << " --pilot-samples " << pilot_samples
        << " --seed " << seed;
    doc.meta("config", cfg.str());
    doc.meta("version", kVersion);
    doc.meta("normalizer", fmt(normalizer));
    doc.header({"lambda", "p", "lo", "hi"});
    for (const auto& r : rows)
        doc.row({fmt(r.lambda), fmt(r.probability), fmt(r.lo), fmt(r.hi)});
    emit(out, doc.str());
    return 0;
}

// --- oracle selftest ----------------------------------------------------------

int run_oracle_selftest() {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
        if (!ok) ++failures;
    };

    check("count: 2x3 grid has 15 spanning trees",
          oracle::count_spanning_trees(FiniteGraph::grid(3, 2)) == 15);
    check("count: 4-cycle has 4 spanning trees",
          oracle::count_spanning_trees(FiniteGraph::cycle(4)) == 4);
    check("enumerate matches count on 3x3 grid",
          oracle::enumerate_spanning_trees(FiniteGraph::grid(3, 3)).size() ==
              static_cast<std::size_t>(oracle::count_spanning_trees(FiniteGraph::grid(3, 3))));

    {
        auto law = oracle::exact_path_law(FiniteGraph::cycle(3), 0, 1);
        bool ok = law.counts.size() == 2;
        double direct = ok ? law.probability(law.counts.begin()->first) : 0.0;
        ok = ok && (std::abs(direct - 2.0 / 3.0) < 1e-12 || std::abs(direct - 1.0 / 3.0) < 1e-12);
        check("path law: triangle split 2/3 vs 1/3", ok);
    }
    {
        auto g = FiniteGraph::path(4);
        double rf = oracle::laplacian_resistance(g, {0}, {3});
        check("resistance: path of 3 edges = 3", std::abs(rf - 3.0) < 1e-12);
    }
    {
        Rng rng(RandomSource{11ULL, 0});
        TreeWindow t = sample_ust_box_free(3, rng);
        auto hk = oracle::transition_powers(t, 8);
        bool ok = true;
        for (std::size_t x = 0; x < hk.state_count() && ok; ++x) {
            double s = 0;
            for (std::size_t y = 0; y < hk.state_count(); ++y) s += hk.transition(x, y);
            ok = std::abs(s - 1.0) < 1e-12;
        }
        check("heat kernel: P^8 row sums are 1 on a 7x7 tree", ok);
    }
    std::cout << (failures == 0 ? "selftest OK\n" : "selftest FAILED\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ustlab: uniform spanning tree / loop-erased walk simulation lab"};
    app.require_subcommand(1);
    unsigned workers_flag = 1;

    // sample-lerw
    auto* lerw = app.add_subcommand("sample-lerw", "Sample truncated infinite LERW paths (JSONL)");
    std::int64_t lerw_l = 64, lerw_trunc = 4;
    std::uint64_t lerw_seed = 1, lerw_samples = 1;
    std::string lerw_out;
    lerw->add_option("--l", lerw_l, "ball radius for the length observable")->required();
    lerw->add_option("--trunc-factor", lerw_trunc, "K: walk runs to sigma_{K*l}");
    lerw->add_option("--seed", lerw_seed, "RNG seed");
    lerw->add_option("--samples", lerw_samples, "number of paths");
    lerw->add_option("--out", lerw_out, "output file (default stdout)");

    // sample-ust
    auto* ust = app.add_subcommand("sample-ust", "Sample a windowed UST and write the tree file");
    std::int32_t ust_r = 32, ust_K = 4;
    std::string ust_method = "wired", ust_out;
    std::uint64_t ust_seed = 1;
    ust->add_option("--r", ust_r, "trusted window radius")->required();
    ust->add_option("--K", ust_K, "box factor (box radius = K*r)");
    ust->add_option("--method", ust_method, "wired|spine");
    ust->add_option("--seed", ust_seed, "RNG seed");
    ust->add_option("--out", ust_out, "output file (default stdout)");

    // ball-volume
    auto* bv = app.add_subcommand("ball-volume", "Intrinsic ball volumes on a saved tree");
    std::string bv_tree, bv_out;
    std::vector<std::int32_t> bv_R;
    bv->add_option("--tree", bv_tree, "tree file")->required();
    bv->add_option("--R", bv_R, "intrinsic radii")->required();
    bv->add_option("--out", bv_out, "output file (default stdout)");

    // resistance
    auto* res = app.add_subcommand("resistance", "Effective resistance to ball complements");
    std::string res_tree, res_out;
    std::vector<std::int32_t> res_R;
    res->add_option("--tree", res_tree, "tree file")->required();
    res->add_option("--R", res_R, "intrinsic radii")->required();
    res->add_option("--out", res_out, "output file (default stdout)");

    // walk
    auto* wk = app.add_subcommand("walk", "Random walk statistics on trees");
    std::string wk_tree, wk_mode = "annealed", wk_method = "wired", wk_out;
    bool wk_fresh = false;
    std::int32_t wk_r = 80, wk_K = 4;
    std::vector<std::uint64_t> wk_n;
    std::uint64_t wk_replicas = 100, wk_wpt = 100, wk_seed = 1;
    wk->add_option("--tree", wk_tree, "fixed tree file (quenched)");
    wk->add_flag("--fresh-trees", wk_fresh, "sample a fresh tree per replica (annealed)");
    wk->add_option("--n", wk_n, "even observation times")->required();
    wk->add_option("--replicas", wk_replicas, "trees (annealed) or walks (quenched)");
    wk->add_option("--walks-per-tree", wk_wpt, "walks per tree in annealed mode");
    wk->add_option("--seed", wk_seed, "RNG seed");
    wk->add_option("--mode", wk_mode, "annealed|quenched");
    wk->add_option("--r", wk_r, "window radius for fresh trees");
    wk->add_option("--K", wk_K, "box factor for fresh trees");
    wk->add_option("--method", wk_method, "wired|spine for fresh trees");
    wk->add_option("--workers", workers_flag, "worker threads (env USTLAB_WORKERS overrides)");
    wk->add_option("--out", wk_out, "output file (default stdout)");

    // estimate-g
    auto* eg = app.add_subcommand("estimate-g", "Monte Carlo growth function G-hat(n)");
    std::vector<std::int64_t> eg_n;
    std::uint64_t eg_samples = 1000, eg_seed = 1;
    std::int64_t eg_trunc = 4;
    std::string eg_out;
    eg->add_option("--n", eg_n, "radii")->required();
    eg->add_option("--samples", eg_samples, "samples per n (budget)");
    eg->add_option("--trunc-factor", eg_trunc, "K: walk runs to sigma_{K*n}");
    eg->add_option("--seed", eg_seed, "RNG seed");
    eg->add_option("--workers", workers_flag, "worker threads (env USTLAB_WORKERS overrides)");
    eg->add_option("--out", eg_out, "output file (default stdout)");

    // estimate-dims
    auto* ed = app.add_subcommand("estimate-dims", "Consolidated dimension report (JSON)");
    std::string ed_preset = "pilot", ed_out;
    std::uint64_t ed_seed = 1;
    ed->add_option("--preset", ed_preset, "pilot|desk|overnight");
    ed->add_option("--seed", ed_seed, "RNG seed");
    ed->add_option("--workers", workers_flag, "worker threads (env USTLAB_WORKERS overrides)");
    ed->add_option("--out", ed_out, "output file (default stdout)");

    // tails
    auto* tl = app.add_subcommand("tails", "Empirical tail probabilities");
    std::string tl_obs = "mhat", tl_out;
    std::int64_t tl_n = 128;
    std::int32_t tl_R = 64;
    std::vector<double> tl_lambdas{1, 2, 4, 8};
    std::uint64_t tl_replicas = 2000, tl_pilot = 500, tl_seed = 1;
    tl->add_option("--observable", tl_obs, "mhat|ball");
    tl->add_option("--n", tl_n, "LERW radius for mhat");
    tl->add_option("--R", tl_R, "intrinsic radius for ball");
    tl->add_option("--lambdas", tl_lambdas, "threshold multipliers");
    tl->add_option("--replicas", tl_replicas, "samples (budget)");
    tl->add_option("--pilot-samples", tl_pilot, "pilot samples for the normalizer");
    tl->add_option("--seed", tl_seed, "RNG seed");
    tl->add_option("--workers", workers_flag, "worker threads (env USTLAB_WORKERS overrides)");
    tl->add_option("--out", tl_out, "output file (default stdout)");

    // oracle selftest
    auto* orc = app.add_subcommand("oracle", "Exact small-case oracles");
    auto* self = orc->add_subcommand("selftest", "Run the oracle self-checks");
    orc->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);
    unsigned workers = resolve_workers(workers_flag);

    try {
        if (lerw->parsed()) return run_sample_lerw(lerw_l, lerw_trunc, lerw_seed, lerw_samples, lerw_out);
        if (ust->parsed()) return run_sample_ust(ust_r, ust_K, ust_method, ust_seed, ust_out);
        if (bv->parsed()) return run_ball_volume(bv_tree, bv_R, bv_out);
        if (res->parsed()) return run_resistance(res_tree, res_R, res_out);
        if (wk->parsed())
            return run_walk(wk_tree, wk_fresh, wk_r, wk_K, wk_method, wk_n, wk_replicas, wk_wpt,
                            wk_seed, wk_mode, workers, wk_out);
        if (eg->parsed()) return run_estimate_g(eg_n, eg_samples, eg_trunc, eg_seed, workers, eg_out);
        if (ed->parsed()) return run_estimate_dims(ed_preset, ed_seed, workers, ed_out);
        if (tl->parsed())
            return run_tails(tl_obs, tl_n, tl_R, tl_lambdas, tl_replicas, tl_pilot, tl_seed,
                             workers, tl_out);
        if (self->parsed()) return run_oracle_selftest();
    } catch (const std::exception& e) {
        json err = {{"error", e.what()}};
        std::cerr << err.dump() << '\n';
        return 2;
    }
    return 0;
}
