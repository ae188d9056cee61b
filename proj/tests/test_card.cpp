#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "patrol/baseline.hpp"
#include "patrol/card.hpp"
#include "patrol/model.hpp"

using namespace patrol;
using card::PolytopeD;
using card::PolytopeQ;

namespace {

std::vector<std::array<int, 3>> complete_moves(int T, int N) {
    std::vector<std::array<int, 3>> mv;
    for (int t = 0; t + 1 < T; ++t)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) mv.push_back({t, i, j});
    return mv;
}

Flight fl(double time, const std::string& city) { return Flight{time, city}; }

PolytopeD box(int n, double hi) {
    PolytopeD P;
    P.n = n;
    for (int j = 0; j < n; ++j) {
        std::vector<double> row(n, 0.0);
        row[j] = 1.0;
        P.A.push_back(row);
        P.b.push_back(hi);
    }
    return P;
}

template <class T>
void check_decomposition(const PolytopeD& P, const std::vector<double>& x,
                         const card::Decomposition<T>& dec, double tol) {
    REQUIRE(!dec.vertices.empty());
    CHECK(int(dec.vertices.size()) <= P.n + 1);
    double wsum = 0.0;
    std::vector<double> recon(P.n, 0.0);
    for (size_t i = 0; i < dec.vertices.size(); ++i) {
        double w;
        if constexpr (std::is_same_v<T, Rational>)
            w = dec.weights[i].template convert_to<double>();
        else
            w = dec.weights[i];
        CHECK(w > 0.0);
        wsum += w;
        for (int j = 0; j < P.n; ++j) {
            double v;
            if constexpr (std::is_same_v<T, Rational>)
                v = dec.vertices[i][j].template convert_to<double>();
            else
                v = dec.vertices[i][j];
            recon[j] += w * v;
        }
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
    for (int j = 0; j < P.n; ++j) CHECK(std::abs(recon[j] - x[j]) <= tol);
}

}  // namespace

TEST_CASE("midpoint of a segment splits into its endpoints") {
    auto P = box(1, 1.0);
    Rng rng(12);
    auto dec = card::decompose(P, {0.5}, rng);
    REQUIRE(dec.vertices.size() == 2);
    std::vector<double> vs = {dec.vertices[0][0], dec.vertices[1][0]};
    std::sort(vs.begin(), vs.end());
    CHECK(vs[0] == doctest::Approx(0.0));
    CHECK(vs[1] == doctest::Approx(1.0));
    CHECK(dec.weights[0] == doctest::Approx(0.5));
    CHECK(dec.weights[1] == doctest::Approx(0.5));
}

TEST_CASE("a vertex decomposes into itself") {
    auto P = box(1, 1.0);
    for (uint64_t seed = 0; seed < 8; ++seed) {
        Rng rng(seed);
        auto dec = card::decompose(P, {1.0}, rng);
        REQUIRE(dec.vertices.size() == 1);
        CHECK(dec.weights[0] == doctest::Approx(1.0));
        CHECK(dec.vertices[0][0] == doctest::Approx(1.0));
    }
}

TEST_CASE("interior square point uses at most three integral corners") {
    auto P = box(2, 1.0);
    Rng rng(77);
    std::vector<double> x = {0.3, 0.6};
    auto dec = card::decompose(P, x, rng);
    check_decomposition(P, x, dec, 1e-7);
    CHECK(dec.vertices.size() <= 3);
    for (const auto& v : dec.vertices)
        for (double z : v) CHECK((std::abs(z) < 1e-7 || std::abs(z - 1.0) < 1e-7));
}

TEST_CASE("points outside are rejected") {
    auto P = box(1, 1.0);
    Rng rng(5);
    CHECK_THROWS_AS(card::decompose(P, {1.5}, rng), NotInPolytope);
    CHECK_THROWS_AS(card::decompose(P, {-0.5}, rng), NotInPolytope);
}

TEST_CASE("rational arithmetic reconstructs the point exactly") {
    auto Pd = box(2, 1.0);
    auto P = card::to_rational(Pd);
    std::vector<Rational> x = {Rational(3, 10), Rational(3, 5)};
    Rng rng(99);
    auto dec = card::decompose(P, x, rng);
    Rational wsum(0);
    std::vector<Rational> recon(2, Rational(0));
    for (size_t i = 0; i < dec.vertices.size(); ++i) {
        wsum += dec.weights[i];
        for (int j = 0; j < 2; ++j) recon[j] += dec.weights[i] * dec.vertices[i][j];
    }
    CHECK(wsum == Rational(1));
    CHECK(recon[0] == x[0]);
    CHECK(recon[1] == x[1]);
}

TEST_CASE("random bounded polytopes decompose cleanly") {
    Rng rng(86753);
    for (int rep = 0; rep < 15; ++rep) {
        int n = 2 + int(rng() % 3);
        auto P = box(n, 3.0);
        std::vector<double> x0(n);
        for (auto& v : x0) v = (1 + int(rng() % 16)) / 8.0;  // in (0, 2]
        int extra = 2 + int(rng() % 3);
        for (int i = 0; i < extra; ++i) {
            std::vector<double> row(n);
            double dot = 0.0;
            for (int j = 0; j < n; ++j) {
                row[j] = int(rng() % 7) - 3;
                dot += row[j] * x0[j];
            }
            P.A.push_back(row);
            P.b.push_back(dot + int(rng() % 3));  // keeps x0 feasible
        }
        if (rep % 3 == 0) {  // pin the coordinate sum to hit the equality path
            std::vector<double> ones(n, 1.0);
            double s = 0.0;
            for (double v : x0) s += v;
            P.M.push_back(ones);
            P.c.push_back(s);
        }
        card::validate_polytope(P, true);
        auto dec = card::decompose(P, x0, rng);
        check_decomposition(P, x0, dec, 1e-6);
        for (const auto& v : dec.vertices) card::check_membership(P, v, 1e-6);
    }
}

TEST_CASE("polytope JSON round trip and boundedness check") {
    auto P = box(2, 1.0);
    P.M.push_back({1.0, 1.0});
    P.c.push_back(1.0);
    auto back = card::polytope_from_json(card::polytope_to_json(P));
    CHECK(back.n == P.n);
    CHECK(back.A == P.A);
    CHECK(back.b == P.b);
    CHECK(back.M == P.M);
    CHECK(back.c == P.c);

    PolytopeD open;
    open.n = 1;
    CHECK_THROWS_AS(card::validate_polytope(open, true), Unbounded);
}

TEST_CASE("grid flow point decomposes into paths, with and without the oracle") {
    auto g = build_grid(2, 2, 1, complete_moves(2, 2));
    auto flow = card::make_grid_flow(g);
    card::validate_polytope(flow.P, true);

    auto pures = enumerate_pure(Instance{g});
    REQUIRE(pures.size() == 4);
    ExplicitStrategy mix;
    mix.support = pures;
    mix.probs = {0.1, 0.2, 0.3, 0.4};
    auto x = card::grid_flow_point(g, flow.layout, mix);

    auto oracle = card::make_grid_vertex_oracle(g, flow.layout);
    Rng rng(314);
    auto dec = card::decompose(flow.P, x, rng, oracle);
    check_decomposition(flow.P, x, dec, 1e-7);
    for (const auto& v : dec.vertices) {
        auto r = card::decode_grid_vertex(g, flow.layout, v);
        REQUIRE(r.paths.size() == 1);
        CHECK(g.allowed(0, r.paths[0][0], r.paths[0][1]));
    }

    Rng rng2(314);
    auto dec2 = card::decompose(flow.P, x, rng2);  // generic LP path
    check_decomposition(flow.P, x, dec2, 1e-7);
    for (const auto& v : dec2.vertices) card::decode_grid_vertex(g, flow.layout, v);
}

TEST_CASE("two-patroller flow vertices decode to valid pairs") {
    Rng grng(2);
    auto gg = random_grid_game({2, 3, 2, 0.8}, 11);
    const auto& rg = std::get<GridGame>(gg.instance);
    auto res = baseline::solve_no_leakage(gg.instance, gg.payoffs);
    auto rflow = card::make_grid_flow(rg);
    auto x = card::grid_flow_point(rg, rflow.layout, res.mixture);
    auto oracle = card::make_grid_vertex_oracle(rg, rflow.layout);
    auto dec = card::decompose(rflow.P, x, grng, oracle);
    check_decomposition(rflow.P, x, dec, 1e-7);
    for (const auto& v : dec.vertices) {
        auto r = card::decode_grid_vertex(rg, rflow.layout, v);
        CHECK(int(r.paths.size()) == rg.k);
        for (const auto& path : r.paths)
            for (int t = 0; t + 1 < rg.T; ++t) CHECK(rg.allowed(t, path[t], path[t + 1]));
    }
}

TEST_CASE("matching polytope vertices select exactly k edges") {
    auto fi = build_fams({fl(0.0, "c"), fl(0.5, "c")}, {fl(5.0, "c"), fl(6.0, "c")}, 1.0, 9.0, 1);
    auto fm = card::make_fams_matching(fi);
    card::validate_polytope(fm.P, true);
    REQUIRE(fm.P.n == 4);

    auto pures = enumerate_pure(Instance{fi});
    REQUIRE(pures.size() == 4);
    ExplicitStrategy mix;
    mix.support = pures;
    mix.probs = std::vector<double>(4, 0.25);
    auto x = card::fams_edge_point(fi, fm, mix);

    Rng rng(21);
    auto dec = card::decompose(fm.P, x, rng);
    check_decomposition(fm.P, x, dec, 1e-7);
    for (const auto& v : dec.vertices) {
        auto r = card::decode_fams_vertex(fi, fm, v);
        CHECK(int(r.edges.size()) == fi.k);
        for (auto [i, j] : r.edges) CHECK(fi.edge_ok(i, j));
    }
}

TEST_CASE("card draws reproduce the mixture coverage") {
    auto fi = build_fams({fl(0.0, "c"), fl(0.3, "c"), fl(0.6, "c")},
                         {fl(4.0, "c"), fl(4.5, "c"), fl(5.0, "c")}, 1.0, 9.0, 2);
    auto fm = card::make_fams_matching(fi);
    auto pures = enumerate_pure(Instance{fi});
    ExplicitStrategy mix;
    mix.support = pures;
    mix.probs.assign(pures.size(), 1.0 / double(pures.size()));
    auto x = card::fams_edge_point(fi, fm, mix);

    std::vector<double> x_cov(fi.num_targets(), 0.0);
    for (size_t s = 0; s < pures.size(); ++s)
        for (int v = 0; v < fi.num_targets(); ++v)
            if (pures[s].covered[v]) x_cov[v] += mix.probs[s];

    Rng crng(505);
    auto decode = [&](const std::vector<double>& z) {
        return strategy_from_edges(fi, card::decode_fams_vertex(fi, fm, z).edges);
    };
    card::CardSampler sampler(fm.P, x, decode, 8, crng);
    CHECK(sampler.support_size() >= 2);
    CHECK(card::coverage_shortfall(x_cov, sampler.mixture()) == doctest::Approx(0.0).epsilon(1e-6));

    Rng draw_rng(99);
    std::vector<double> emp(fi.num_targets(), 0.0);
    const int n = 50000;
    for (int s = 0; s < n; ++s) {
        auto ps = sampler.sample(draw_rng);
        for (int v = 0; v < fi.num_targets(); ++v)
            if (ps.covered[v]) emp[v] += 1.0;
    }
    for (int v = 0; v < fi.num_targets(); ++v) CHECK(std::abs(emp[v] / n - x_cov[v]) < 0.02);

    // same construction seed, same mixture
    Rng crng2(505);
    card::CardSampler again(fm.P, x, decode, 8, crng2);
    auto m1 = sampler.mixture();
    auto m2 = again.mixture();
    REQUIRE(m1.support.size() == m2.support.size());
    for (size_t i = 0; i < m1.support.size(); ++i) {
        CHECK(m1.support[i].key() == m2.support[i].key());
        CHECK(m1.probs[i] == doctest::Approx(m2.probs[i]).epsilon(1e-12));
    }
}
