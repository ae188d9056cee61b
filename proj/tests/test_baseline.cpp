#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "patrol/baseline.hpp"
#include "patrol/lp.hpp"
#include "patrol/maxent.hpp"
#include "patrol/model.hpp"
#include "patrol/oracle.hpp"

using namespace patrol;
using namespace patrol::maxent;

namespace {

std::vector<std::array<int, 3>> complete_moves(int T, int N) {
    std::vector<std::array<int, 3>> mv;
    for (int t = 0; t + 1 < T; ++t)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) mv.push_back({t, i, j});
    return mv;
}

Flight fl(double time, const std::string& city) { return Flight{time, city}; }

// game value by one LP over the full enumeration
double enum_value(const Instance& inst, const Payoffs& pay) {
    auto pures = enumerate_pure(inst);
    auto attackable = attackable_targets(inst);
    int m = int(pures.size());
    lp::Problem<double> p;
    p.n = m + 1;
    p.c.assign(p.n, 0.0);
    p.c[m] = 1.0;
    p.free_var.assign(p.n, 0);
    p.free_var[m] = 1;
    for (int a : attackable) {
        std::vector<double> row(p.n, 0.0);
        for (int j = 0; j < m; ++j) row[j] = attacker_utility(pay, pures[j].covered, a);
        row[m] = -1.0;
        p.A.push_back(std::move(row));
        p.b.push_back(0.0);
    }
    p.E.assign(1, std::vector<double>(p.n, 0.0));
    for (int j = 0; j < m; ++j) p.E[0][j] = 1.0;
    p.f.assign(1, 1.0);
    auto sol = lp::solve(p);
    REQUIRE(sol.status == lp::Status::Optimal);
    return sol.objective;
}

double mixture_value(const ExplicitStrategy& mix, const Payoffs& pay,
                     const std::vector<int>& attackable) {
    double best = -1e300;
    for (int a : attackable) {
        double u = 0.0;
        for (size_t j = 0; j < mix.support.size(); ++j)
            u += mix.probs[j] * attacker_utility(pay, mix.support[j].covered, a);
        best = std::max(best, u);
    }
    return best;
}

}  // namespace

TEST_CASE("an always-covered lone target yields its covered payoff") {
    auto g = build_grid(2, 1, 1, complete_moves(2, 1));
    Payoffs pay{{6.0, 8.0}, {-2.0, -3.0}};
    auto res = baseline::solve_no_leakage(Instance{g}, pay);
    CHECK(res.value == doctest::Approx(-3.0));
    CHECK(res.mixture.support.size() == 1);
    CHECK(res.marginals[1] == doctest::Approx(1.0));
}

TEST_CASE("symmetric last layer is covered half-half") {
    auto g = build_grid(2, 2, 1, complete_moves(2, 2));
    Payoffs pay{{4.0, 4.0, 4.0, 4.0}, {-4.0, -4.0, -4.0, -4.0}};
    auto res = baseline::solve_no_leakage(Instance{g}, pay);
    CHECK(res.value == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(res.marginals[2] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(res.marginals[3] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("column generation reaches the full-enumeration optimum") {
    Rng rng(3333);
    for (int rep = 0; rep < 5; ++rep) {
        auto gg = patrol::testing::small_grid(rng);
        auto res = baseline::solve_no_leakage(gg.instance, gg.payoffs);
        CHECK(res.value ==
              doctest::Approx(enum_value(gg.instance, gg.payoffs)).epsilon(1e-6).scale(1.0));
        double sum = 0.0;
        for (double p : res.mixture.probs) {
            CHECK(p > 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        auto attackable = attackable_targets(gg.instance);
        CHECK(mixture_value(res.mixture, gg.payoffs, attackable) ==
              doctest::Approx(res.value).epsilon(1e-6).scale(1.0));
    }
    for (int rep = 0; rep < 5; ++rep) {
        auto gg = patrol::testing::small_fams(rng);
        auto res = baseline::solve_no_leakage(gg.instance, gg.payoffs);
        CHECK(res.value ==
              doctest::Approx(enum_value(gg.instance, gg.payoffs)).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("mixture coverage equals the reported marginals") {
    Rng rng(7777);
    auto gg = patrol::testing::small_grid(rng);
    auto res = baseline::solve_no_leakage(gg.instance, gg.payoffs);
    int nt = num_targets(gg.instance);
    std::vector<double> cov(nt, 0.0);
    for (size_t j = 0; j < res.mixture.support.size(); ++j)
        for (int v = 0; v < nt; ++v)
            if (res.mixture.support[j].covered[v]) cov[v] += res.mixture.probs[j];
    for (int v = 0; v < nt; ++v) CHECK(res.marginals[v] == doctest::Approx(cov[v]).epsilon(1e-9));
}

TEST_CASE("best-response column chases the weighted target") {
    auto g = build_grid(2, 3, 1, complete_moves(2, 3));
    std::vector<double> w(6, 0.0);
    w[g.target(1, 1)] = 1.0;
    auto s = baseline::best_response_column(Instance{g}, w);
    CHECK(s.covered[g.target(1, 1)]);

    auto fi = build_fams({fl(0.0, "c"), fl(0.5, "c")}, {fl(5.0, "c"), fl(6.0, "c")}, 1.0, 9.0, 1);
    std::vector<double> wf(4, 0.0);
    wf[1] = 2.0;
    wf[3] = 1.0;
    auto sf = baseline::best_response_column(Instance{fi}, wf);
    CHECK(sf.covered[1]);
    CHECK(sf.covered[3]);
}

TEST_CASE("a vacuous leak does not change the value") {
    // the only two-patroller assignment covers all four flights, so the
    // leaked bit is constant and both leak models collapse to the baseline
    auto fi = build_fams({fl(0.0, "c"), fl(0.5, "c")}, {fl(5.0, "c"), fl(6.0, "c")}, 1.0, 9.0, 2);
    Payoffs pay{{7.0, 6.0, 5.0, 4.0}, {-1.0, -2.0, -3.0, -4.0}};
    auto base = baseline::solve_no_leakage(Instance{fi}, pay);
    CHECK(base.value == doctest::Approx(-1.0));

    baseline::LeakageModel prob;
    prob.mu = {{0, 1.0}};
    auto r1 = baseline::rigoropt_mini(Instance{fi}, pay, prob);
    CHECK(r1.value == doctest::Approx(base.value).epsilon(1e-7));

    baseline::LeakageModel adv;
    adv.kind = baseline::LeakageModel::Kind::Adversarial;
    adv.candidates = {0, 2};
    auto r2 = baseline::rigoropt_mini(Instance{fi}, pay, adv);
    CHECK(r2.value == doctest::Approx(base.value).epsilon(1e-7));
}

TEST_CASE("a fully revealing leak forces the informed value") {
    // two pure strategies; watching outbound flight 0 reveals which one runs
    auto fi = build_fams({fl(0.0, "c"), fl(1.0, "c")}, {fl(5.0, "c")}, 1.0, 9.0, 1);
    Payoffs pay{{5.0, 5.0, 5.0}, {-5.0, -5.0, -5.0}};
    auto base = baseline::solve_no_leakage(Instance{fi}, pay);
    CHECK(base.value == doctest::Approx(0.0).epsilon(1e-7));

    baseline::LeakageModel leak;
    leak.mu = {{0, 1.0}};
    auto res = baseline::rigoropt_mini(Instance{fi}, pay, leak);
    CHECK(res.value == doctest::Approx(5.0).epsilon(1e-7));

    // leak probability 1/2: half the time the attacker knows everything
    baseline::LeakageModel half;
    half.mu = {{0, 0.5}, {1, 0.5}};
    auto rh = baseline::rigoropt_mini(Instance{fi}, pay, half);
    CHECK(rh.value >= base.value - 1e-9);
    CHECK(rh.value <= res.value + 1e-9);
}

TEST_CASE("adversarial leak dominates every probabilistic one") {
    Rng rng(1212);
    for (int rep = 0; rep < 4; ++rep) {
        auto gg = patrol::testing::small_grid(rng);
        auto obs = observable_targets(gg.instance);
        if (obs.size() < 2) continue;
        baseline::LeakageModel adv;
        adv.kind = baseline::LeakageModel::Kind::Adversarial;
        adv.candidates = {obs[0], obs[1]};
        auto ra = baseline::rigoropt_mini(gg.instance, gg.payoffs, adv);

        baseline::LeakageModel prob;
        prob.mu = {{obs[0], 0.5}, {obs[1], 0.5}};
        auto rp = baseline::rigoropt_mini(gg.instance, gg.payoffs, prob);
        CHECK(ra.value >= rp.value - 1e-7);
        // and any leak only helps the attacker
        auto base = baseline::solve_no_leakage(gg.instance, gg.payoffs);
        CHECK(rp.value >= base.value - 1e-7);
    }
}

TEST_CASE("column-generation marginals admit a max-entropy fit") {
    Rng rng(5510);
    int converged = 0;
    for (int rep = 0; rep < 3; ++rep) {
        auto gg = patrol::testing::small_grid(rng);
        auto res = baseline::solve_no_leakage(gg.instance, gg.payoffs);
        auto oracle = make_oracle(gg.instance);
        auto fw = fit(*oracle, res.marginals);
        if (fw.status == FitStatus::Converged) {
            ++converged;
            CHECK(fw.residual <= 1e-4);
        }
    }
    CHECK(converged >= 2);
}

TEST_CASE("bad leak inputs are rejected") {
    auto g = build_grid(2, 1, 1, complete_moves(2, 1));
    Payoffs pay{{1.0, 1.0}, {-1.0, -1.0}};
    baseline::LeakageModel empty;
    CHECK_THROWS_AS(baseline::rigoropt_mini(Instance{g}, pay, empty), Error);
    baseline::LeakageModel noc;
    noc.kind = baseline::LeakageModel::Kind::Adversarial;
    CHECK_THROWS_AS(baseline::rigoropt_mini(Instance{g}, pay, noc), Error);
}
