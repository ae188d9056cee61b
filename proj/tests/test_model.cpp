#include <doctest.h>

#include <algorithm>
#include <array>
#include <set>
#include <string>

#include "oracles.hpp"
#include "patrol/model.hpp"

using namespace patrol;

namespace {

std::vector<std::array<int, 3>> complete_moves(int T, int N) {
    std::vector<std::array<int, 3>> mv;
    for (int t = 0; t + 1 < T; ++t)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) mv.push_back({t, i, j});
    return mv;
}

// cells on a line, moves to same or adjacent cell
std::vector<std::array<int, 3>> line_moves(int T, int N) {
    std::vector<std::array<int, 3>> mv;
    for (int t = 0; t + 1 < T; ++t)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (std::abs(i - j) <= 1) mv.push_back({t, i, j});
    return mv;
}

Flight fl(double time, const std::string& city) { return Flight{time, city}; }

}  // namespace

TEST_CASE("single-layer grid needs no moves") {
    auto g = build_grid(1, 4, 2, {});
    CHECK(g.num_targets() == 4);
    CHECK(g.moves.empty());
}

TEST_CASE("three layers of four cells make twelve targets") {
    auto g = build_grid(3, 4, 2, line_moves(3, 4));
    CHECK(g.num_targets() == 12);
    CHECK(g.target(2, 3) == 11);
}

TEST_CASE("grid with no continuation is rejected") {
    CHECK_THROWS_AS(build_grid(2, 2, 1, {}), DisconnectedLayer);
    // only cell 0 has a continuation; cell 1 is a dead end
    CHECK_THROWS_AS(build_grid(2, 2, 1, {{{0, 0, 0}}}), DisconnectedLayer);
}

TEST_CASE("flight window rule produces the single consistent edge") {
    auto fi = build_fams({fl(10.0, "x")}, {fl(11.0, "x")}, 0.5, 2.0, 1);
    REQUIRE(fi.comps.size() == 1);
    CHECK(fi.comps[0].edges.size() == 1);
    CHECK(fi.edge_ok(0, 0));
}

TEST_CASE("cities split the flight graph into components") {
    auto fi = build_fams({fl(10, "a"), fl(10, "b")}, {fl(11, "a"), fl(11, "b")}, 0.5, 2.0, 1);
    CHECK(fi.comps.size() == 2);
    CHECK_FALSE(fi.edge_ok(0, 1));
}

TEST_CASE("inverted or nonpositive windows are rejected") {
    CHECK_THROWS_AS(build_fams({fl(10, "x")}, {fl(11, "x")}, 2.0, 1.0, 1), Error);
    CHECK_THROWS_AS(build_fams({fl(10, "x")}, {fl(11, "x")}, 0.0, 1.0, 1), Error);
}

TEST_CASE("k beyond the best matching is rejected") {
    CHECK_THROWS_AS(build_fams({fl(10, "x")}, {fl(11, "x")}, 0.5, 2.0, 2), InfeasibleK);
    // two outbound flights but a single return: max matching is 1
    CHECK_THROWS_AS(build_fams({fl(9, "x"), fl(10, "x")}, {fl(11, "x")}, 0.5, 3.0, 2),
                    InfeasibleK);
}

TEST_CASE("enumeration of a single-layer two-cell pair game") {
    auto g = build_grid(1, 2, 2, {});
    auto all = enumerate_pure(g);
    CHECK(all.size() == 4);  // ordered pairs
    std::set<std::vector<uint8_t>> covers;
    for (const auto& s : all) covers.insert(s.covered);
    CHECK(covers.size() == 3);  // {0}, {1}, {0,1}
}

TEST_CASE("complete 2x2 flight instance has one ordered 2-matching") {
    auto fi = build_fams({fl(9, "x"), fl(10, "x")}, {fl(11, "x"), fl(12, "x")}, 0.5, 4.0, 2);
    auto all = enumerate_pure(fi);
    REQUIRE(all.size() == 1);
    const auto& r = std::get<FamsRealization>(all[0].detail);
    CHECK(r.edges == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
}

TEST_CASE("two-layer two-cell path enumeration") {
    auto g = build_grid(2, 2, 1, complete_moves(2, 2));
    CHECK(enumerate_pure(g).size() == 4);
}

TEST_CASE("enumeration cap throws") {
    auto g = build_grid(2, 2, 1, complete_moves(2, 2));
    CHECK_THROWS_AS(enumerate_pure(g, 3), TooLarge);
}

TEST_CASE("random games are reproducible and payoffs sit in their ranges") {
    GridParams gp;
    auto a = random_grid_game(gp, 42);
    auto b = random_grid_game(gp, 42);
    CHECK(instance_to_json(a.instance) == instance_to_json(b.instance));
    CHECK(a.payoffs.u_unc == b.payoffs.u_unc);
    CHECK(instance_to_json(a.instance) != instance_to_json(random_grid_game(gp, 43).instance));

    FamsParams fp;
    auto c = random_fams_game(fp, 7);
    auto d = random_fams_game(fp, 7);
    CHECK(instance_to_json(c.instance) == instance_to_json(d.instance));

    for (const auto& game : {a, c}) {
        for (double u : game.payoffs.u_unc) {
            CHECK(u > 0);
            CHECK(u <= 10);
        }
        for (double u : game.payoffs.u_cov) {
            CHECK(u >= -10);
            CHECK(u < 0);
        }
    }
}

TEST_CASE("deployment-to-saturation ratio fixes the marshal count") {
    FamsParams fp;
    fp.flights = 60;
    fp.dts = 0.5;
    auto g = random_fams_game(fp, 7);
    CHECK(std::get<FamsInstance>(g.instance).k == 15);
}

TEST_CASE("attackable and observable target sets") {
    auto g = build_grid(3, 4, 2, line_moves(3, 4));
    CHECK(attackable_targets(g) == std::vector<int>{8, 9, 10, 11});
    CHECK(observable_targets(g) == std::vector<int>{0, 1, 2, 3});

    auto fi = build_fams({fl(9, "x"), fl(10, "x")}, {fl(11, "x"), fl(12, "x")}, 0.5, 4.0, 1);
    CHECK(attackable_targets(fi).size() == 4);
    CHECK(observable_targets(fi).size() == 4);
}

TEST_CASE("covered-set sizes match the realization structure") {
    Rng rng(2024);
    for (int trial = 0; trial < 8; ++trial) {
        auto game = testing::small_grid(rng);
        const auto& g = std::get<GridGame>(game.instance);
        for (const auto& s : enumerate_pure(game.instance, 200000)) {
            int cov = int(std::count(s.covered.begin(), s.covered.end(), uint8_t(1)));
            CHECK(cov <= g.k * g.T);
            CHECK(cov >= g.T);  // one patroller covers at least one cell per layer
        }
    }
    for (int trial = 0; trial < 8; ++trial) {
        auto game = testing::small_fams(rng);
        const auto& fi = std::get<FamsInstance>(game.instance);
        for (const auto& s : enumerate_pure(game.instance, 200000)) {
            int cov = int(std::count(s.covered.begin(), s.covered.end(), uint8_t(1)));
            CHECK(cov == 2 * fi.k);
        }
    }
}

TEST_CASE("strategy keys separate distinct realizations") {
    auto g = build_grid(2, 2, 2, complete_moves(2, 2));
    auto all = enumerate_pure(g);
    std::set<std::string> keys;
    for (const auto& s : all) keys.insert(s.key());
    CHECK(keys.size() == all.size());
}

TEST_CASE("instance json round trip") {
    Rng rng(5);
    auto game = testing::small_grid(rng);
    auto j = instance_to_json(game.instance);
    CHECK(instance_to_json(instance_from_json(j)) == j);

    auto fgame = testing::small_fams(rng);
    auto fj = instance_to_json(fgame.instance);
    CHECK(instance_to_json(instance_from_json(fj)) == fj);

    auto pj = payoffs_to_json(game.payoffs);
    auto p2 = payoffs_from_json(pj, num_targets(game.instance));
    CHECK(p2.u_unc == game.payoffs.u_unc);
    CHECK(p2.u_cov == game.payoffs.u_cov);
}
