#include "patrol/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <thread>

#include "patrol/baseline.hpp"
#include "patrol/card.hpp"
#include "patrol/count_fams.hpp"
#include "patrol/leakage.hpp"
#include "patrol/maxent.hpp"
#include "patrol/model.hpp"
#include "patrol/oracle.hpp"

namespace patrol::experiment {

namespace {

constexpr uint64_t kMonitorTag = 0x6d6f6e5fULL;
constexpr uint64_t kCardTag = 0x63617264ULL;
constexpr uint64_t kDrawTag = 0x64726177ULL;

struct Pipeline {
    GeneratedGame game;
    std::shared_ptr<const CountingOracle> oracle;
    baseline::ColgResult colg;
    maxent::FittedWeights fw;
    std::shared_ptr<card::CardSampler> card_sampler;
    ExplicitStrategy card_mix;
    long long card_support = 0;
};

std::vector<int> monitor_order(const Instance& inst, uint64_t seed) {
    auto obs = observable_targets(inst);
    Rng rng(mix64(seed, kMonitorTag));
    std::shuffle(obs.begin(), obs.end(), rng);
    return obs;
}

Pipeline run_pipeline(GeneratedGame game, uint64_t seed, uint64_t card_salt, int card_D) {
    Pipeline pl;
    pl.game = std::move(game);
    pl.oracle = make_oracle(pl.game.instance);
    pl.colg = baseline::solve_no_leakage(pl.game.instance, pl.game.payoffs);
    pl.fw = maxent::fit(*pl.oracle, pl.colg.marginals);
    if (pl.fw.status != maxent::FitStatus::Converged)
        throw OracleFailure("maxent fit failed on implementable marginals: " + pl.fw.stop_reason);

    Rng crng(mix64(seed, kCardTag, card_salt));
    if (const auto* g = std::get_if<GridGame>(&pl.game.instance)) {
        auto flow = card::make_grid_flow(*g);
        auto z = card::grid_flow_point(*g, flow.layout, pl.colg.mixture);
        auto vertex_oracle = card::make_grid_vertex_oracle(*g, flow.layout);
        const GridGame game_copy = *g;
        const card::GridFlowLayout layout = flow.layout;
        card::DecodeFn decode = [game_copy, layout](const std::vector<double>& v) {
            return strategy_from_paths(game_copy,
                                       card::decode_grid_vertex(game_copy, layout, v).paths);
        };
        pl.card_sampler = std::make_shared<card::CardSampler>(
            std::move(flow.P), std::move(z), std::move(decode), card_D, crng, vertex_oracle);
        pl.card_mix = pl.card_sampler->mixture();
        pl.card_support = pl.card_sampler->support_size();
        double shortfall = card::coverage_shortfall(pl.colg.marginals, pl.card_mix);
        if (shortfall > 1e-9)
            logf("card: grid coverage shortfall %.6f from co-location", shortfall);
    } else {
        const auto& fi = std::get<FamsInstance>(pl.game.instance);
        auto fm = card::make_fams_matching(fi);
        auto z = card::fams_edge_point(fi, fm, pl.colg.mixture);
        const FamsInstance fi_copy = fi;
        const card::FamsMatching fm_copy = fm;
        card::DecodeFn decode = [fi_copy, fm_copy](const std::vector<double>& v) {
            return fams::canonicalize(fi_copy, card::decode_fams_vertex(fi_copy, fm_copy, v).edges);
        };
        pl.card_sampler = std::make_shared<card::CardSampler>(std::move(fm.P), std::move(z),
                                                              std::move(decode), card_D, crng);
        pl.card_mix = pl.card_sampler->mixture();
        pl.card_support = pl.card_sampler->support_size();
    }
    return pl;
}

double eval_explicit(const ExplicitStrategy& mix, const Payoffs& pay,
                     const leakage::ObservationScenario& sc) {
    leakage::MixedStrategy s = mix;
    return leakage::evaluate(s, pay, sc);
}

double eval_maxen(const Pipeline& pl, const leakage::ObservationScenario& sc) {
    leakage::MixedStrategy s = leakage::ProductForm{pl.oracle, pl.fw.lambda()};
    return leakage::evaluate(s, pl.game.payoffs, sc);
}

Row make_row(const std::string& label, int index, uint64_t seed, const std::string& algo,
             double utility, double base, long long support, double entropy) {
    Row r;
    r.sweep = label;
    r.sweep_index = index;
    r.seed = seed;
    r.algorithm = algo;
    r.attacker_utility = utility;
    r.baseline = base;
    r.support_size = support;
    r.entropy = entropy;
    return r;
}

std::vector<Row> rows_for_point(const std::string& label, int index, uint64_t seed,
                                const Pipeline& pl, const leakage::ObservationScenario& sc) {
    std::vector<Row> rows;
    rows.push_back(make_row(label, index, seed, "colg",
                            eval_explicit(pl.colg.mixture, pl.game.payoffs, sc), pl.colg.value,
                            (long long)pl.colg.mixture.support.size(),
                            leakage::mixture_entropy(pl.colg.mixture)));
    rows.push_back(make_row(label, index, seed, "maxen", eval_maxen(pl, sc), pl.colg.value, 0,
                            maxent::entropy(*pl.oracle, pl.fw)));
    rows.push_back(make_row(label, index, seed, "card",
                            eval_explicit(pl.card_mix, pl.game.payoffs, sc), pl.colg.value,
                            pl.card_support, leakage::mixture_entropy(pl.card_mix)));
    return rows;
}

void run_tasks(size_t count, int parallel, const std::function<void(size_t)>& fn) {
    auto safe = [&](size_t i) {
        try {
            fn(i);
        } catch (const std::exception& e) {
            logf("experiment task %zu failed: %s", i, e.what());
            std::fprintf(stderr, "[maxent-patrol] task %zu skipped: %s\n", i, e.what());
        }
    };
    if (parallel <= 1) {
        for (size_t i = 0; i < count; ++i) safe(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    int nthreads = std::min<size_t>(parallel, count);
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (size_t i; (i = next.fetch_add(1)) < count;) safe(i);
        });
    for (auto& th : pool) th.join();
}

std::vector<Row> flatten(std::vector<std::vector<Row>>& slots) {
    std::vector<Row> rows;
    for (auto& s : slots)
        for (auto& r : s) rows.push_back(std::move(r));
    return rows;
}

std::vector<Row> grid_time_sweep(const SuiteOptions& opt) {  // fig5a
    const std::vector<int> layers = {3, 5, 7, 9};
    std::vector<std::vector<Row>> slots(layers.size() * opt.seeds);
    run_tasks(slots.size(), opt.parallel, [&](size_t idx) {
        int ti = int(idx) / opt.seeds;
        uint64_t seed = idx % opt.seeds;
        GridParams gp;
        gp.T = layers[ti];
        gp.N = 9;
        gp.k = 2;
        auto pl = run_pipeline(random_grid_game(gp, seed), seed, ti, opt.card_decompositions);
        auto order = monitor_order(pl.game.instance, seed);
        auto sc = leakage::make_scenario(pl.game.instance, {order.begin(), order.begin() + 2});
        slots[idx] = rows_for_point(std::to_string(layers[ti]), ti, seed, pl, sc);
    });
    return flatten(slots);
}

std::vector<Row> grid_monitor_sweep(const SuiteOptions& opt) {  // fig5b
    constexpr int kMaxMot = 6;
    std::vector<std::vector<Row>> per_seed(opt.seeds);
    run_tasks(per_seed.size(), opt.parallel, [&](size_t idx) {
        uint64_t seed = idx;
        GridParams gp;
        gp.T = 9;
        gp.N = 9;
        gp.k = 2;
        auto pl = run_pipeline(random_grid_game(gp, seed), seed, 0, opt.card_decompositions);
        auto order = monitor_order(pl.game.instance, seed);
        std::vector<Row> rows;
        for (int m = 1; m <= kMaxMot; ++m) {
            auto sc = leakage::make_scenario(pl.game.instance, {order.begin(), order.begin() + m});
            auto pr = rows_for_point(std::to_string(m), m - 1, seed, pl, sc);
            rows.insert(rows.end(), pr.begin(), pr.end());
        }
        per_seed[idx] = std::move(rows);
    });
    // emit sweep-major: all seeds of #MoT=1 first, then 2, ...
    std::vector<Row> rows;
    for (int m = 0; m < kMaxMot; ++m)
        for (int s = 0; s < opt.seeds; ++s) {
            auto& src = per_seed[s];
            for (auto& r : src)
                if (r.sweep_index == m) rows.push_back(r);
        }
    return rows;
}

std::vector<Row> fams_dts_sweep(const SuiteOptions& opt) {  // fig5c
    // stay below saturation: past ~0.5 almost every target is covered and
    // attacker utilities compress, washing out the support-collapse effect
    const std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<std::vector<Row>> slots(ratios.size() * opt.seeds);
    run_tasks(slots.size(), opt.parallel, [&](size_t idx) {
        int di = int(idx) / opt.seeds;
        uint64_t seed = idx % opt.seeds;
        FamsParams fp;
        fp.flights = 60;
        fp.dts = ratios[di];
        auto pl = run_pipeline(random_fams_game(fp, seed), seed, di, opt.card_decompositions);
        auto order = monitor_order(pl.game.instance, seed);
        auto sc = leakage::make_scenario(pl.game.instance, {order.begin(), order.begin() + 2});
        char label[16];
        std::snprintf(label, sizeof label, "%.1f", ratios[di]);
        slots[idx] = rows_for_point(label, di, seed, pl, sc);
    });
    return flatten(slots);
}

std::vector<Row> tiny_leak_suite(bool adversarial, const SuiteOptions& opt) {  // fig4b / fig4c
    const std::vector<std::string> scen = {"accurate", "inaccurate", "manipulation"};
    std::vector<std::vector<Row>> per_seed(opt.seeds);
    run_tasks(per_seed.size(), opt.parallel, [&](size_t idx) {
        uint64_t seed = idx;
        GridParams gp;  // defaults: T=3, N=4, k=2
        auto pl =
            run_pipeline(random_grid_game(gp, seed), seed, adversarial ? 2 : 1,
                         opt.card_decompositions);
        const auto& inst = pl.game.instance;
        const auto& pay = pl.game.payoffs;
        auto order = monitor_order(inst, seed);
        int kstar = order[0];

        std::vector<Row> rows;
        for (int si = 0; si < int(scen.size()); ++si) {
            baseline::LeakageModel model;
            std::vector<std::vector<int>> eval_sets;  // worst case over these monitored sets
            if (!adversarial) {
                model.kind = baseline::LeakageModel::Kind::Probabilistic;
                if (scen[si] == "accurate") {
                    model.mu = {{kstar, 1.0}};
                    eval_sets = {{kstar}};
                } else if (scen[si] == "inaccurate") {
                    model.mu = {{kstar, 0.5}};
                    double rest = 0.5 / double(order.size() - 1);
                    for (size_t t = 1; t < order.size(); ++t) model.mu.push_back({order[t], rest});
                    eval_sets = {{kstar}};
                } else {  // manipulation: claimed leak, but nothing leaks
                    model.mu = {{kstar, 1.0}};
                    eval_sets = {{}};
                }
            } else {
                model.kind = baseline::LeakageModel::Kind::Adversarial;
                if (scen[si] == "accurate") {
                    model.candidates = {order[0], order[1]};
                    eval_sets = {{order[0]}, {order[1]}};
                } else if (scen[si] == "inaccurate") {
                    model.candidates = {order[1], order[2]};
                    eval_sets = {{kstar}};
                } else {
                    model.candidates = {kstar};
                    eval_sets = {{}};
                }
            }
            auto rig = baseline::rigoropt_mini(inst, pay, model);

            auto worst = [&](const std::function<double(const leakage::ObservationScenario&)>& f) {
                double v = -1e300;
                for (const auto& w : eval_sets) v = std::max(v, f(leakage::make_scenario(inst, w)));
                return v;
            };
            rows.push_back(make_row(scen[si], si, seed, "colg",
                                    worst([&](const leakage::ObservationScenario& sc) {
                                        return eval_explicit(pl.colg.mixture, pay, sc);
                                    }),
                                    pl.colg.value, (long long)pl.colg.mixture.support.size(),
                                    leakage::mixture_entropy(pl.colg.mixture)));
            rows.push_back(make_row(scen[si], si, seed, "maxen",
                                    worst([&](const leakage::ObservationScenario& sc) {
                                        return eval_maxen(pl, sc);
                                    }),
                                    pl.colg.value, 0, maxent::entropy(*pl.oracle, pl.fw)));
            rows.push_back(make_row(scen[si], si, seed, "card",
                                    worst([&](const leakage::ObservationScenario& sc) {
                                        return eval_explicit(pl.card_mix, pay, sc);
                                    }),
                                    pl.colg.value, pl.card_support,
                                    leakage::mixture_entropy(pl.card_mix)));
            rows.push_back(make_row(scen[si], si, seed, "rigoropt",
                                    worst([&](const leakage::ObservationScenario& sc) {
                                        return eval_explicit(rig.mixture, pay, sc);
                                    }),
                                    pl.colg.value, (long long)rig.mixture.support.size(),
                                    leakage::mixture_entropy(rig.mixture)));
        }
        per_seed[idx] = std::move(rows);
    });
    std::vector<Row> rows;
    for (int si = 0; si < int(scen.size()); ++si)
        for (int s = 0; s < opt.seeds; ++s)
            for (auto& r : per_seed[s])
                if (r.sweep_index == si) rows.push_back(r);
    return rows;
}

std::vector<Row> support_suite(const SuiteOptions& opt) {
    std::vector<std::vector<Row>> slots(opt.seeds);
    run_tasks(slots.size(), opt.parallel, [&](size_t idx) {
        uint64_t seed = idx;
        FamsParams fp;
        fp.flights = 100;
        fp.dts = 0.5;
        auto pl = run_pipeline(random_fams_game(fp, seed), seed, 0, opt.card_decompositions);
        auto sampler = pl.oracle->make_sampler(pl.fw.lambda());
        Rng rng(mix64(seed, kDrawTag));
        std::set<std::string> distinct;
        for (int n = 0; n < opt.maxen_support_draws; ++n) distinct.insert(sampler->draw(rng).key());
        std::set<std::string> card_distinct;
        Rng crng(mix64(seed, kDrawTag, kCardTag));
        for (int n = 0; n < opt.maxen_support_draws; ++n)
            card_distinct.insert(pl.card_sampler->sample(crng).key());
        auto order = monitor_order(pl.game.instance, seed);
        auto sc = leakage::make_scenario(pl.game.instance, {order.begin(), order.begin() + 2});
        auto rows = rows_for_point("0.5", 0, seed, pl, sc);
        rows[1].support_size = (long long)distinct.size();  // maxen distinct draws
        rows[2].support_size = (long long)card_distinct.size();
        slots[idx] = std::move(rows);
    });
    return flatten(slots);
}

}  // namespace

std::vector<std::string> suite_names() {
    return {"fig5a", "fig5b", "fig5c", "fig4b", "fig4c", "support"};
}

std::vector<Row> scenario_suite(const std::string& name, const SuiteOptions& opt) {
    if (name == "fig5a") return grid_time_sweep(opt);
    if (name == "fig5b") return grid_monitor_sweep(opt);
    if (name == "fig5c") return fams_dts_sweep(opt);
    if (name == "fig4b") return tiny_leak_suite(false, opt);
    if (name == "fig4c") return tiny_leak_suite(true, opt);
    if (name == "support") return support_suite(opt);
    throw Error("unknown suite '" + name + "'");
}

void write_csv(const std::vector<Row>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file " + path);
    out << "# maxent-patrol experiment schema v1\n";
    out << "# support_size: mixture support; distinct draws for maxen and card in the support "
           "suite; 0 when not measured\n";
    out << "sweep_param,seed,algorithm,attacker_utility,baseline,support_size,entropy\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%llu,%s,%.10g,%.10g,%lld,%.10g\n", r.sweep.c_str(),
                      (unsigned long long)r.seed, r.algorithm.c_str(), r.attacker_utility,
                      r.baseline, r.support_size, r.entropy);
        out << buf;
    }
    if (!out) throw Error("failed writing " + path);
}

void write_summary(const std::vector<Row>& rows, const std::string& path) {
    struct Acc {
        int n = 0;
        double utility = 0, base = 0, support = 0, entropy = 0;
    };
    std::vector<std::pair<std::pair<std::string, std::string>, Acc>> groups;
    for (const auto& r : rows) {
        auto key = std::pair{r.sweep, r.algorithm};
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
            groups.push_back({key, {}});
            it = std::prev(groups.end());
        }
        it->second.n++;
        it->second.utility += r.attacker_utility;
        it->second.base += r.baseline;
        it->second.support += double(r.support_size);
        it->second.entropy += r.entropy;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file " + path);
    out << "# maxent-patrol summary v1 (seed means per sweep point)\n";
    out << "sweep_param,algorithm,seeds,mean_attacker_utility,mean_baseline,mean_support_size,"
           "mean_entropy\n";
    char buf[256];
    for (const auto& [key, a] : groups) {
        std::snprintf(buf, sizeof buf, "%s,%s,%d,%.10g,%.10g,%.10g,%.10g\n", key.first.c_str(),
                      key.second.c_str(), a.n, a.utility / a.n, a.base / a.n, a.support / a.n,
                      a.entropy / a.n);
        out << buf;
    }
    if (!out) throw Error("failed writing " + path);
}

}  // namespace patrol::experiment
