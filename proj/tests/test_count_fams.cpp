#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "patrol/count_fams.hpp"
#include "patrol/model.hpp"

using namespace patrol;
using patrol::testing::brute_count;
using patrol::testing::random_weights;

namespace {

Flight fl(double time, const std::string& city) { return Flight{time, city}; }

// both outbound flights can pair with both returns
FamsInstance complete22(int k) {
    return build_fams({fl(0.0, "c"), fl(0.5, "c")}, {fl(5.0, "c"), fl(6.0, "c")}, 1.0, 9.0, k);
}

double log_weight(const FamsInstance& fi, const std::vector<double>& alpha,
                  const PureStrategy& s) {
    double lw = 0.0;
    for (int v = 0; v < fi.num_targets(); ++v)
        if (s.covered[v]) lw += std::log(alpha[v]);
    return lw;
}

// all k-matchings over the compatibility graph, crossing ones included
void all_matchings(const FamsInstance& fi, int next_a, int k, std::vector<uint8_t>& used_b,
                   std::vector<std::pair<int, int>>& cur,
                   std::vector<std::vector<std::pair<int, int>>>& out) {
    if (k == 0) {
        out.push_back(cur);
        return;
    }
    int na = int(fi.a.size());
    if (na - next_a < k) return;
    // skip outbound flight next_a
    all_matchings(fi, next_a + 1, k, used_b, cur, out);
    for (int j = 0; j < int(fi.b.size()); ++j) {
        if (used_b[j] || !fi.edge_ok(next_a, j)) continue;
        used_b[j] = 1;
        cur.push_back({next_a, j});
        all_matchings(fi, next_a + 1, k - 1, used_b, cur, out);
        cur.pop_back();
        used_b[j] = 0;
    }
}

std::string covered_key(const std::vector<uint8_t>& covered) {
    std::string s(covered.begin(), covered.end());
    for (auto& c : s) c += '0';
    return s;
}

}  // namespace

TEST_CASE("uncrossing maps the crossed pair to the ordered one") {
    auto fi = complete22(2);
    auto ps = fams::canonicalize(fi, {{0, 1}, {1, 0}});
    std::vector<std::pair<int, int>> want = {{0, 0}, {1, 1}};
    CHECK(std::get<FamsRealization>(ps.detail).edges == want);

    // already ordered: fixed point
    auto ps2 = fams::canonicalize(fi, {{0, 0}, {1, 1}});
    CHECK(std::get<FamsRealization>(ps2.detail).edges == want);

    CHECK_THROWS_AS(fams::canonicalize(fi, {{0, 0}, {0, 1}}), NotAMatching);
}

TEST_CASE("pair counts on the complete two-by-two instance") {
    auto two = complete22(2);
    std::vector<double> ones(4, 1.0);
    // the crossing matching uncrosses into the ordered one: a single strategy
    CHECK(fams::log_count(two, ones) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fams::exact_count(two, {Rational(2), Rational(3), Rational(1), Rational(1)}) ==
          Rational(6));

    auto one = complete22(1);
    CHECK(fams::log_count(one, ones) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("flight marginals: forced coverage, isolation, symmetry") {
    auto two = complete22(2);
    std::vector<double> ones(4, 1.0);
    for (double m : fams::flight_marginals(two, ones)) CHECK(m == doctest::Approx(1.0));

    auto one = complete22(1);
    for (double m : fams::flight_marginals(one, ones)) CHECK(m == doctest::Approx(0.5));

    // outbound flight departing after every return never matches
    auto iso = build_fams({fl(0.0, "c"), fl(20.0, "c")}, {fl(5.0, "c")}, 1.0, 9.0, 1);
    auto m = fams::flight_marginals(iso, std::vector<double>(3, 1.0));
    CHECK(m[0] == doctest::Approx(1.0));
    CHECK(m[1] == doctest::Approx(0.0));
    CHECK(m[2] == doctest::Approx(1.0));
}

TEST_CASE("marginals match direct enumeration") {
    Rng rng(9042);
    for (int rep = 0; rep < 8; ++rep) {
        auto gg = patrol::testing::small_fams(rng);
        const auto& fi = std::get<FamsInstance>(gg.instance);
        int nt = fi.num_targets();
        auto w = random_weights(nt, rng);
        auto [logC, got] = fams::log_count_and_marginals(fi, w);
        std::vector<double> want(nt, 0.0);
        for (const auto& s : enumerate_pure(gg.instance)) {
            double p = std::exp(log_weight(fi, w, s) - logC);
            for (int v = 0; v < nt; ++v)
                if (s.covered[v]) want[v] += p;
        }
        for (int v = 0; v < nt; ++v) CHECK(got[v] == doctest::Approx(want[v]).epsilon(1e-9));
    }
}

TEST_CASE("chain probability equals matching weight over total") {
    Rng rng(5151);
    for (int rep = 0; rep < 6; ++rep) {
        auto gg = patrol::testing::small_fams(rng);
        const auto& fi = std::get<FamsInstance>(gg.instance);
        auto w = random_weights(fi.num_targets(), rng);
        fams::Sampler sampler(fi, w);
        double total = 0.0;
        for (const auto& s : enumerate_pure(gg.instance)) {
            double lp = sampler.chain_log_prob(std::get<FamsRealization>(s.detail));
            double want = log_weight(fi, w, s) - sampler.log_count();
            CHECK(lp == doctest::Approx(want).epsilon(1e-12));
            total += std::exp(lp);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("sampling the forced pair and the uniform single") {
    auto two = complete22(2);
    std::vector<double> ones(4, 1.0);
    fams::Sampler forced(two, ones);
    Rng rng(31);
    std::vector<std::pair<int, int>> want = {{0, 0}, {1, 1}};
    for (int s = 0; s < 50; ++s) {
        auto r = forced.draw(rng);
        std::sort(r.edges.begin(), r.edges.end());
        CHECK(r.edges == want);
    }

    auto one = complete22(1);
    fams::Sampler uni(one, ones);
    std::map<std::pair<int, int>, int> freq;
    const int n = 40000;
    for (int s = 0; s < n; ++s) freq[uni.draw(rng).edges[0]]++;
    CHECK(freq.size() == 4);
    for (const auto& [e, cnt] : freq) CHECK(double(cnt) / n == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("empirical coverage matches marginals on a five-by-five instance") {
    std::vector<Flight> a, b;
    for (int i = 0; i < 5; ++i) a.push_back(fl(0.1 * i, "c"));
    for (int j = 0; j < 5; ++j) b.push_back(fl(4.0 + 0.7 * j, "c"));
    auto fi = build_fams(a, b, 1.0, 9.0, 3);
    Rng wrng(17);
    auto w = random_weights(fi.num_targets(), wrng);
    auto marg = fams::flight_marginals(fi, w);

    fams::Sampler sampler(fi, w);
    Rng rng(7273);
    std::vector<double> emp(fi.num_targets(), 0.0);
    const int n = 100000;
    for (int s = 0; s < n; ++s) {
        auto ps = strategy_from_edges(fi, sampler.draw(rng).edges);
        for (int v = 0; v < fi.num_targets(); ++v)
            if (ps.covered[v]) emp[v] += 1.0;
    }
    for (int v = 0; v < fi.num_targets(); ++v) CHECK(std::abs(emp[v] / n - marg[v]) < 0.02);
}

TEST_CASE("every matching uncrosses to an enumerated strategy with the same coverage") {
    Rng rng(2718);
    for (int rep = 0; rep < 10; ++rep) {
        auto gg = patrol::testing::small_fams(rng);
        const auto& fi = std::get<FamsInstance>(gg.instance);

        std::vector<std::vector<std::pair<int, int>>> raw;
        std::vector<uint8_t> used_b(fi.b.size(), 0);
        std::vector<std::pair<int, int>> cur;
        all_matchings(fi, 0, fi.k, used_b, cur, raw);
        REQUIRE(!raw.empty());

        auto pures = enumerate_pure(gg.instance);
        std::set<std::string> ordered_cov;
        for (const auto& s : pures) ordered_cov.insert(covered_key(s.covered));
        // ordered matchings are coverage-distinct
        CHECK(ordered_cov.size() == pures.size());

        std::set<std::string> raw_cov;
        for (auto& m : raw) {
            PureStrategy direct = strategy_from_edges(fi, m);
            raw_cov.insert(covered_key(direct.covered));
            auto canon = fams::canonicalize(fi, m);
            CHECK(covered_key(canon.covered) == covered_key(direct.covered));
            const auto& ce = std::get<FamsRealization>(canon.detail).edges;
            for (size_t e = 0; e + 1 < ce.size(); ++e) {
                // canonical form is grouped by city, non-crossing within it
                if (fi.a[ce[e].first].city == fi.a[ce[e + 1].first].city) {
                    CHECK(fi.a[ce[e].first].time <= fi.a[ce[e + 1].first].time);
                    CHECK(fi.b[ce[e].second].time <= fi.b[ce[e + 1].second].time);
                }
            }
        }
        CHECK(raw_cov == ordered_cov);
    }
}

TEST_CASE("random instances: DP count equals enumeration sum") {
    Rng rng(40912);
    for (int rep = 0; rep < 50; ++rep) {
        auto gg = patrol::testing::small_fams(rng);
        const auto& fi = std::get<FamsInstance>(gg.instance);
        int nt = fi.num_targets();
        std::vector<Rational> wq(nt);
        std::vector<double> wd(nt);
        for (int v = 0; v < nt; ++v) {
            int num = 1 + int(rng() % 32);
            wq[v] = Rational(num, 16);
            wd[v] = num / 16.0;
        }
        CHECK(fams::exact_count(fi, wq) == brute_count(gg.instance, wq));
        double want = patrol::testing::brute_log_count(gg.instance, wd);
        CHECK(fams::log_count(fi, wd) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("best response maximizes total covered weight") {
    Rng rng(6372);
    for (int rep = 0; rep < 12; ++rep) {
        auto gg = patrol::testing::small_fams(rng);
        const auto& fi = std::get<FamsInstance>(gg.instance);
        int nt = fi.num_targets();
        std::vector<double> w(nt);  // pricing weights are duals, always >= 0
        for (auto& v : w) v = 3.0 * double(rng() % 1000) / 999.0;

        auto br = fams::best_response(fi, w);
        auto bs = strategy_from_edges(fi, br.edges);
        double got = 0.0;
        for (int v = 0; v < nt; ++v)
            if (bs.covered[v]) got += w[v];

        double best = -1e300;
        for (const auto& s : enumerate_pure(gg.instance)) {
            double val = 0.0;
            for (int v = 0; v < nt; ++v)
                if (s.covered[v]) val += w[v];
            best = std::max(best, val);
        }
        CHECK(got == doctest::Approx(best).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("zero weights leave nothing to sample") {
    auto fi = complete22(1);
    std::vector<double> zero(4, 0.0);
    CHECK_THROWS_AS(fams::Sampler(fi, zero), NoFeasiblePath);
    CHECK_THROWS_AS(fams::log_count_and_marginals(fi, zero), NoFeasiblePath);
}
