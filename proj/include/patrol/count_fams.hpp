#pragma once

// Counting, marginals and exact sampling for flight round-trip schedules.
//
// Within one city component, flights are time-sorted and a pure assignment
// of d patrollers is an ordered d-matching: edges ascending in both
// endpoints (the non-crossing canonical form; any matching uncrosses to
// exactly one of these without changing the covered set). The table
// dp[d][l][r] accumulates weighted ordered d-matchings among the first l
// outbound and r return flights; the step adds the matchings whose top edge
// lies on the (l, r) boundary -- a matching has at most one such edge, its
// maximum. Components compose by convolution over the per-component sizes.
//
// Edge weight = alpha[outbound] * alpha[return]; summed over matchings this
// is C(alpha) over covered flight sets.

#include <memory>
#include <utility>
#include <vector>

#include "patrol/logspace.hpp"
#include "patrol/model.hpp"
#include "patrol/rational.hpp"

namespace patrol::fams {

template <class V>
struct CompTable {
    int na = 0, nb = 0;
    std::vector<std::pair<int, int>> edges;  // local 0-based, lexicographic
    std::vector<V> ew;
    std::vector<std::vector<V>> dp;  // dp[d][l*(nb+1)+r]

    const V& at(int d, int l, int r) const { return dp[d][l * (nb + 1) + r]; }
    V& at(int d, int l, int r) { return dp[d][l * (nb + 1) + r]; }
};

template <class V>
CompTable<V> comp_table(const FamsInstance& fi, const FamsInstance::Component& comp,
                        const std::vector<V>& alpha, int kmax, bool reversed) {
    CompTable<V> t;
    t.na = int(comp.a_idx.size());
    t.nb = int(comp.b_idx.size());
    for (auto [i, j] : comp.edges) {
        auto e = reversed ? std::pair{t.na - 1 - i, t.nb - 1 - j} : std::pair{i, j};
        t.edges.push_back(e);
        V w = alpha[fi.target_a(comp.a_idx[i])] * alpha[fi.target_b(comp.b_idx[j])];
        t.ew.push_back(w);
    }

    t.dp.assign(kmax + 1, std::vector<V>(size_t(t.na + 1) * (t.nb + 1), ring<V>::zero()));
    for (auto& v : t.dp[0]) v = ring<V>::one();
    std::vector<std::vector<int>> by_row(t.na), by_col(t.nb);
    for (int e = 0; e < int(t.edges.size()); ++e) {
        by_row[t.edges[e].first].push_back(e);
        by_col[t.edges[e].second].push_back(e);
    }
    for (int d = 1; d <= kmax; ++d)
        for (int l = 1; l <= t.na; ++l)
            for (int r = 1; r <= t.nb; ++r) {
                V acc = t.at(d, l - 1, r - 1);
                for (int e : by_row[l - 1])  // top edge in row l
                    if (t.edges[e].second + 1 <= r)
                        acc += t.ew[e] * t.at(d - 1, l - 1, t.edges[e].second);
                for (int e : by_col[r - 1])  // top edge in column r, row < l
                    if (t.edges[e].first + 1 <= l - 1)
                        acc += t.ew[e] * t.at(d - 1, t.edges[e].first, r - 1);
                t.at(d, l, r) = acc;
            }
    return t;
}

template <class V>
struct FamsTables {
    int k = 0;
    std::vector<CompTable<V>> comps;
    std::vector<std::vector<V>> sizes;     // sizes[c][d] = dp[d][na][nb]
    std::vector<std::vector<V>> pre, suf;  // size-convolutions over component prefixes/suffixes
    V total = ring<V>::zero();
};

template <class V>
std::vector<V> conv_trunc(const std::vector<V>& a, const std::vector<V>& b, int kmax) {
    std::vector<V> out(kmax + 1, ring<V>::zero());
    for (int s = 0; s <= kmax && s < int(a.size()); ++s)
        for (int d = 0; s + d <= kmax && d < int(b.size()); ++d) out[s + d] += a[s] * b[d];
    return out;
}

template <class V>
FamsTables<V> make_tables(const FamsInstance& fi, const std::vector<V>& alpha) {
    FamsTables<V> tb;
    tb.k = fi.k;
    int nc = int(fi.comps.size());
    std::vector<V> unit(fi.k + 1, ring<V>::zero());
    unit[0] = ring<V>::one();
    tb.pre.assign(nc + 1, {});
    tb.suf.assign(nc + 1, {});
    tb.pre[0] = unit;
    tb.suf[nc] = unit;
    for (int c = 0; c < nc; ++c) {
        tb.comps.push_back(comp_table(fi, fi.comps[c], alpha, fi.k, false));
        std::vector<V> sz(fi.k + 1);
        for (int d = 0; d <= fi.k; ++d) sz[d] = tb.comps[c].at(d, tb.comps[c].na, tb.comps[c].nb);
        tb.sizes.push_back(std::move(sz));
        tb.pre[c + 1] = conv_trunc(tb.pre[c], tb.sizes[c], fi.k);
    }
    for (int c = nc - 1; c >= 0; --c) tb.suf[c] = conv_trunc(tb.sizes[c], tb.suf[c + 1], fi.k);
    tb.total = tb.suf[0][fi.k];
    return tb;
}

template <class V>
V weighted_count(const FamsInstance& fi, const std::vector<V>& alpha) {
    return make_tables(fi, alpha).total;
}

inline Rational exact_count(const FamsInstance& fi, const std::vector<Rational>& alpha) {
    return weighted_count<Rational>(fi, alpha);
}

// per-flight totals of weights of strategies covering the flight; dividing
// by the total count gives coverage marginals
template <class V>
std::vector<V> covered_counts(const FamsInstance& fi, const FamsTables<V>& tb,
                              const std::vector<V>& alpha) {
    std::vector<V> out(fi.num_targets(), ring<V>::zero());
    int nc = int(fi.comps.size());
    for (int c = 0; c < nc; ++c) {
        const auto& comp = fi.comps[c];
        auto rev = comp_table(fi, comp, alpha, fi.k, true);
        auto rest = conv_trunc(tb.pre[c], tb.suf[c + 1], fi.k);
        const auto& fwd = tb.comps[c];
        for (int e = 0; e < int(comp.edges.size()); ++e) {
            auto [i, j] = comp.edges[e];
            // matchings through edge e: prefix strictly below x suffix strictly above
            std::vector<V> through(fi.k + 1, ring<V>::zero());
            for (int d1 = 0; d1 < fi.k; ++d1)
                for (int d2 = 0; d1 + d2 < fi.k; ++d2) {
                    V m = fwd.at(d1, i, j) * rev.at(d2, fwd.na - 1 - i, fwd.nb - 1 - j);
                    through[d1 + d2 + 1] += m * fwd.ew[e];
                }
            V tot = ring<V>::zero();
            for (int d = 1; d <= fi.k; ++d) tot += through[d] * rest[fi.k - d];
            out[fi.target_a(comp.a_idx[i])] += tot;
            out[fi.target_b(comp.b_idx[j])] += tot;
        }
    }
    return out;
}

template <class V>
std::vector<V> covered_counts(const FamsInstance& fi, const std::vector<V>& alpha) {
    return covered_counts(fi, make_tables(fi, alpha), alpha);
}

double log_count(const FamsInstance& fi, const std::vector<double>& alpha);
std::vector<double> flight_marginals(const FamsInstance& fi, const std::vector<double>& alpha);
std::pair<double, std::vector<double>> log_count_and_marginals(const FamsInstance& fi,
                                                              const std::vector<double>& alpha);

// Backward sampler over the same tables: component sizes first, then edges
// top-down within each component. Chain probabilities telescope to
// weight(S)/C.
class Sampler {
  public:
    Sampler(const FamsInstance& fi, const std::vector<double>& alpha);  // NoFeasiblePath if C=0

    double log_count() const { return logC_; }
    FamsRealization draw(Rng& rng);
    double chain_log_prob(const FamsRealization& r) const;

  private:
    FamsInstance fi_;  // own copy
    double logC_ = 0;
    // all tables as plain log-doubles
    struct Comp {
        int na, nb;
        std::vector<std::pair<int, int>> edges;
        std::vector<double> lew;
        std::vector<std::vector<double>> ldp;
        std::vector<std::vector<int>> by_row, by_col;
        double at(int d, int l, int r) const { return ldp[d][l * (nb + 1) + r]; }
    };
    std::vector<Comp> comps_;
    std::vector<std::vector<double>> lsizes_, lsuf_;

    // walks one component chain; if out != nullptr, draws with rng, else
    // scores the fixed edge list (largest first) into *score
    bool walk_comp(int c, int d, Rng* rng, std::vector<std::pair<int, int>>* out,
                   const std::vector<std::pair<int, int>>* fixed, double* score) const;
};

FamsRealization sample(const FamsInstance& fi, const std::vector<double>& alpha, Rng& rng);
double chain_log_prob(const FamsInstance& fi, const std::vector<double>& alpha,
                      const FamsRealization& r);

// uncross + sort an arbitrary matching (global flight index pairs) into its
// canonical ordered form; throws NotAMatching on repeated endpoints or
// non-edges
PureStrategy canonicalize(const FamsInstance& fi, std::vector<std::pair<int, int>> edges);

// max-weight ordered k-matching, weights per flight, shared nothing (a
// matching covers each flight at most once); ColG pricing oracle
FamsRealization best_response(const FamsInstance& fi, const std::vector<double>& weights);

}  // namespace patrol::fams
