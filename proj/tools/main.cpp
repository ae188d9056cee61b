#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "patrol/baseline.hpp"
#include "patrol/count_fams.hpp"
#include "patrol/count_grid.hpp"
#include "patrol/experiment.hpp"
#include "patrol/maxent.hpp"
#include "patrol/model.hpp"
#include "patrol/oracle.hpp"
#include "patrol/rational.hpp"

namespace {

using namespace patrol;
using nlohmann::json;

json read_json_or_die(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "error: cannot open %s\n", path.c_str());
        std::exit(2);
    }
    json j;
    in >> j;
    return j;
}

struct LoadedGame {
    Instance instance;
    std::optional<Payoffs> payoffs;
};

LoadedGame load_game(const std::string& path) {
    json j = read_json_or_die(path);
    LoadedGame g{instance_from_json(j.contains("instance") ? j.at("instance") : j), {}};
    if (j.contains("payoffs"))
        g.payoffs = payoffs_from_json(j.at("payoffs"), num_targets(g.instance));
    return g;
}

Payoffs require_payoffs(const LoadedGame& g, const std::string& payoffs_path) {
    if (!payoffs_path.empty())
        return payoffs_from_json(read_json_or_die(payoffs_path), num_targets(g.instance));
    if (g.payoffs) return *g.payoffs;
    throw Error("no payoffs: embed them in the game file or pass --payoffs");
}

std::vector<double> load_weights(const std::string& path, int nt) {
    if (path.empty()) return std::vector<double>(nt, 1.0);
    json j = read_json_or_die(path);
    auto w = j.get<std::vector<double>>();
    if (int(w.size()) != nt) throw Error("weight vector size mismatch");
    return w;
}

json strategy_json(const PureStrategy& s) {
    json j;
    auto& cov = j["covered"] = json::array();
    for (size_t i = 0; i < s.covered.size(); ++i)
        if (s.covered[i]) cov.push_back(i);
    if (const auto* g = std::get_if<GridRealization>(&s.detail))
        j["paths"] = g->paths;
    else
        j["edges"] = std::get<FamsRealization>(s.detail).edges;
    return j;
}

int cmd_count(const std::string& game_path, const std::string& weights_path, bool exact) {
    auto g = load_game(game_path);
    int nt = num_targets(g.instance);
    auto w = load_weights(weights_path, nt);
    if (exact) {
        std::vector<Rational> wq(w.begin(), w.end());
        Rational c;
        if (const auto* gg = std::get_if<GridGame>(&g.instance))
            c = grid::exact_count(*gg, wq);
        else
            c = fams::exact_count(std::get<FamsInstance>(g.instance), wq);
        std::printf("count=%s\n", c.str().c_str());
    }
    double lc;
    if (const auto* gg = std::get_if<GridGame>(&g.instance))
        lc = grid::log_count(*gg, w);
    else
        lc = fams::log_count(std::get<FamsInstance>(g.instance), w);
    std::printf("log_count=%.6f\n", lc);
    return 0;
}

int cmd_solve(const std::string& game_path, const std::string& payoffs_path,
              const std::string& out_path, double tol) {
    auto g = load_game(game_path);
    auto pay = require_payoffs(g, payoffs_path);
    auto res = baseline::solve_no_leakage(g.instance, pay, tol > 0 ? tol : 1e-7);
    std::printf("value=%.9f\n", res.value);
    std::printf("support=%zu iterations=%d\n", res.mixture.support.size(), res.iterations);
    if (!out_path.empty()) {
        json j;
        j["value"] = res.value;
        j["iterations"] = res.iterations;
        j["marginals"] = res.marginals;
        auto& sup = j["mixture"] = json::array();
        for (size_t i = 0; i < res.mixture.support.size(); ++i) {
            json s = strategy_json(res.mixture.support[i]);
            s["prob"] = res.mixture.probs[i];
            sup.push_back(std::move(s));
        }
        std::ofstream out(out_path);
        if (!out) throw Error("cannot open output file " + out_path);
        out << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_sample(const std::string& game_path, const std::string& x_path,
               const std::string& payoffs_path, int samples, uint64_t seed, double tol,
               int max_iters, const std::string& out_path) {
    auto g = load_game(game_path);
    auto oracle = make_oracle(g.instance);
    std::vector<double> x;
    if (!x_path.empty()) {
        json j = read_json_or_die(x_path);
        x = (j.is_object() ? j.at("marginals") : j).get<std::vector<double>>();
    } else {
        auto pay = require_payoffs(g, payoffs_path);
        x = baseline::solve_no_leakage(g.instance, pay).marginals;
    }
    maxent::FitOptions fo;
    if (tol > 0) fo.tol = tol;
    if (max_iters > 0) fo.max_iters = max_iters;
    auto fw = maxent::fit(*oracle, x, fo);
    std::printf("residual=%.3e status=%s iterations=%d\n", fw.residual,
                fw.status == maxent::FitStatus::Converged ? "converged" : "not-implementable",
                fw.iterations);
    if (fw.status != maxent::FitStatus::Converged) {
        std::fprintf(stderr, "error: %s\n", fw.stop_reason.c_str());
        return 1;
    }
    std::printf("entropy=%.6f\n", maxent::entropy(*oracle, fw));
    Rng rng(seed);
    auto draws = maxent::sample_maxent(*oracle, fw, samples, rng);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw Error("cannot open output file " + out_path);
        out = &file;
    }
    for (const auto& s : draws) *out << strategy_json(s).dump() << "\n";
    return 0;
}

int cmd_gen(const std::string& family, const GridParams& gp, const FamsParams& fp, uint64_t seed,
            const std::string& out_path) {
    GeneratedGame gg;
    if (family == "grid")
        gg = random_grid_game(gp, seed);
    else if (family == "fams")
        gg = random_fams_game(fp, seed);
    else
        throw Error("unknown family '" + family + "' (grid or fams)");
    json j;
    j["instance"] = instance_to_json(gg.instance);
    j["payoffs"] = payoffs_to_json(gg.payoffs);
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw Error("cannot open output file " + out_path);
        out << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_experiment(std::vector<std::string> suites, int seeds, int parallel,
                   const std::string& out_dir) {
    if (suites.empty()) {
        std::fprintf(stderr, "error: no suites requested\n");
        return 2;
    }
    auto known = experiment::suite_names();
    for (const auto& s : suites)
        if (std::find(known.begin(), known.end(), s) == known.end()) {
            std::fprintf(stderr, "error: unknown suite '%s'\n", s.c_str());
            return 2;
        }
    std::filesystem::create_directories(out_dir);
    experiment::SuiteOptions opt;
    if (seeds > 0) opt.seeds = seeds;
    if (parallel > 0) opt.parallel = parallel;
    for (const auto& s : suites) {
        auto rows = experiment::scenario_suite(s, opt);
        auto path = out_dir + "/" + s + ".csv";
        experiment::write_csv(rows, path);
        experiment::write_summary(rows, out_dir + "/" + s + "_summary.csv");
        std::printf("%s: %zu rows -> %s\n", s.c_str(), rows.size(), path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"max-entropy implementation of patrol strategy marginals"};
    app.require_subcommand(1);

    std::string game_path, weights_path, payoffs_path, x_path, out_path, out_dir = "results";
    std::string family = "grid";
    std::vector<std::string> suites;
    bool exact = false;
    int samples = 10, max_iters = 0, seeds = 0, parallel = 0;
    double tol = 0.0;
    uint64_t seed = 0;
    GridParams gp;
    FamsParams fp;

    auto* count = app.add_subcommand("count", "weighted strategy count of an instance");
    count->add_option("--instance", game_path)->required();
    count->add_option("--weights", weights_path, "JSON array of per-target weights");
    count->add_flag("--exact", exact, "exact rational arithmetic");

    auto* solve = app.add_subcommand("solve", "no-leakage optimum by column generation");
    solve->add_option("--instance", game_path)->required();
    solve->add_option("--payoffs", payoffs_path);
    solve->add_option("--tol", tol, "pricing improvement cutoff");
    solve->add_option("--out", out_path, "write value/marginals/mixture JSON");

    auto* sample = app.add_subcommand("sample", "fit max-entropy weights and draw strategies");
    sample->add_option("--instance", game_path)->required();
    sample->add_option("--x", x_path, "marginal vector JSON (array or solve output)");
    sample->add_option("--payoffs", payoffs_path, "used when --x is absent");
    sample->add_option("--samples", samples);
    sample->add_option("--seed", seed)->required();
    sample->add_option("--tol", tol, "fit residual tolerance");
    sample->add_option("--max-iters", max_iters);
    sample->add_option("--out", out_path, "JSON-lines output (default stdout)");

    auto* gen = app.add_subcommand("gen", "generate a random zero-sum game");
    gen->add_option("--family", family, "grid or fams");
    gen->add_option("--seed", seed)->required();
    gen->add_option("--T", gp.T);
    gen->add_option("--N", gp.N);
    gen->add_option("--k", gp.k);
    gen->add_option("--density", gp.density);
    gen->add_option("--flights", fp.flights);
    gen->add_option("--cities", fp.cities);
    gen->add_option("--dts", fp.dts);
    gen->add_option("--out", out_path);

    auto* exp = app.add_subcommand("experiment", "run a sweep suite and write CSV");
    exp->add_option("--suite", suites, "fig5a fig5b fig5c fig4b fig4c support")
        ->delimiter(',');
    exp->add_option("--seeds", seeds);
    exp->add_option("--parallel", parallel);
    exp->add_option("--out-dir", out_dir);

    CLI11_PARSE(app, argc, argv);

    try {
        if (count->parsed()) return cmd_count(game_path, weights_path, exact);
        if (solve->parsed()) return cmd_solve(game_path, payoffs_path, out_path, tol);
        if (sample->parsed())
            return cmd_sample(game_path, x_path, payoffs_path, samples, seed, tol, max_iters,
                              out_path);
        if (gen->parsed()) return cmd_gen(family, gp, fp, seed, out_path);
        if (exp->parsed()) return cmd_experiment(suites, seeds, parallel, out_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
