#pragma once

// Counting, marginals and exact sampling for grid patrol strategies.
//
// A pure strategy is an ordered k-tuple of paths through the layered grid.
// The DP runs over position tuples (i_1..i_k), one layer at a time; a
// tuple's weight multiplies alpha over its *distinct* cells, so nodes shared
// by co-located patrollers are counted once, and summing tuple weights over
// all feasible tuple sequences gives  C(alpha) = sum_S prod_{v in S} alpha_v
// with S ranging over covered-node unions.
//
// Templated over the scalar: LogReal for overflow-free counting, Rational
// for exact verification, MaxPlus for best-response maximization.

#include <array>
#include <vector>

#include "patrol/logspace.hpp"
#include "patrol/model.hpp"
#include "patrol/rational.hpp"

namespace patrol::grid {

inline int pow_int(int n, int k) {
    int r = 1;
    while (k-- > 0) r *= n;
    return r;
}

inline void decode_tuple(int code, int N, int k, std::array<int, 8>& pos) {
    for (int m = 0; m < k; ++m) {
        pos[m] = code % N;
        code /= N;
    }
}

template <class V>
V tuple_weight(const GridGame& g, int t, int code, const std::vector<V>& alpha) {
    std::array<int, 8> pos;
    decode_tuple(code, g.N, g.k, pos);
    V w = ring<V>::one();
    for (int m = 0; m < g.k; ++m) {
        bool seen = false;
        for (int m2 = 0; m2 < m && !seen; ++m2) seen = pos[m2] == pos[m];
        if (!seen) w *= alpha[g.target(t, pos[m])];
    }
    return w;
}

// out[..., i at coord m, ...] = sum_j [j -> i allowed] in[..., j at coord m, ...]
template <class V>
void contract_coord(int N, int k, int m, const std::vector<uint8_t>& adjmat, bool predecessors,
                    const std::vector<V>& in, std::vector<V>& out) {
    const int stride = pow_int(N, m);
    const int codes = pow_int(N, k);
    for (int base = 0; base < codes; ++base) {
        if ((base / stride) % N != 0) continue;
        for (int i = 0; i < N; ++i) {
            V acc = ring<V>::zero();
            for (int j = 0; j < N; ++j) {
                bool ok = predecessors ? adjmat[size_t(j) * N + i] : adjmat[size_t(i) * N + j];
                if (ok) acc += in[base + j * stride];
            }
            out[base + i * stride] = acc;
        }
    }
}

template <class V>
struct Tables {
    int T = 0, N = 0, k = 0, codes = 0;
    std::vector<std::vector<V>> w;  // [T][codes] tuple weights
    std::vector<std::vector<V>> F;  // F[t][c] = sum of weighted prefixes ending at tuple c
    std::vector<std::vector<V>> B;  // B[t][c] = sum of weighted suffixes after tuple c
    V total = ring<V>::zero();      // C(alpha)
};

template <class V>
Tables<V> make_tables(const GridGame& g, const std::vector<V>& alpha, bool need_backward) {
    Tables<V> tb;
    tb.T = g.T;
    tb.N = g.N;
    tb.k = g.k;
    tb.codes = pow_int(g.N, g.k);
    tb.w.assign(g.T, std::vector<V>(tb.codes, ring<V>::zero()));
    for (int t = 0; t < g.T; ++t)
        for (int c = 0; c < tb.codes; ++c) tb.w[t][c] = tuple_weight(g, t, c, alpha);

    tb.F.assign(g.T, std::vector<V>(tb.codes, ring<V>::zero()));
    tb.F[0] = tb.w[0];
    std::vector<V> tmp(tb.codes), tmp2(tb.codes);
    for (int t = 1; t < g.T; ++t) {
        tmp = tb.F[t - 1];
        for (int m = 0; m < g.k; ++m) {
            contract_coord(g.N, g.k, m, g.adj[t - 1], true, tmp, tmp2);
            std::swap(tmp, tmp2);
        }
        for (int c = 0; c < tb.codes; ++c) tb.F[t][c] = tb.w[t][c] * tmp[c];
    }
    tb.total = ring<V>::zero();
    for (int c = 0; c < tb.codes; ++c) tb.total += tb.F[g.T - 1][c];

    if (need_backward) {
        tb.B.assign(g.T, std::vector<V>(tb.codes, ring<V>::one()));
        for (int t = g.T - 2; t >= 0; --t) {
            for (int c = 0; c < tb.codes; ++c) tmp[c] = tb.w[t + 1][c] * tb.B[t + 1][c];
            for (int m = 0; m < g.k; ++m) {
                contract_coord(g.N, g.k, m, g.adj[t], false, tmp, tmp2);
                std::swap(tmp, tmp2);
            }
            tb.B[t] = tmp;
        }
    }
    return tb;
}

template <class V>
V weighted_count(const GridGame& g, const std::vector<V>& alpha) {
    return make_tables(g, alpha, false).total;
}

inline Rational exact_count(const GridGame& g, const std::vector<Rational>& alpha) {
    return weighted_count<Rational>(g, alpha);
}

double log_count(const GridGame& g, const std::vector<double>& alpha);

// Precomputes the backward tables once; draws and chain probabilities are
// then cheap. Not thread-safe across concurrent draws.
class Sampler {
  public:
    // throws NoFeasiblePath when C(alpha) = 0
    Sampler(const GridGame& g, const std::vector<double>& alpha);

    double log_count() const { return logC_; }
    std::vector<double> node_marginals() const;
    GridRealization draw(Rng& rng);
    // log probability the backward chain assigns to r; -inf if infeasible
    double chain_log_prob(const GridRealization& r) const;

  private:
    int codes_ = 0;
    GridGame g_;  // own copy, keeps draws valid past the argument's lifetime
    std::vector<std::vector<double>> lw_, lF_, lB_;
    double logC_ = 0;
    std::vector<double> prob_;  // scratch
    std::vector<int> cand_;

    bool feasible_step(int t, int prev, int next) const;
};

std::vector<double> node_marginals(const GridGame& g, const std::vector<double>& alpha);
GridRealization sample(const GridGame& g, const std::vector<double>& alpha, Rng& rng);
double chain_log_prob(const GridGame& g, const std::vector<double>& alpha,
                      const GridRealization& r);

// max-weight strategy: argmax_S sum of weights over the covered union;
// deterministic tie-breaking (lowest tuple codes). Used as the ColG pricing
// oracle.
GridRealization best_response(const GridGame& g, const std::vector<double>& weights);

}  // namespace patrol::grid
