#include "patrol/count_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace patrol::grid {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<LogReal> to_logreal(const GridGame& g, const std::vector<double>& alpha) {
    if (int(alpha.size()) != g.num_targets())
        throw Error("grid weights: expected one entry per target");
    std::vector<LogReal> out;
    out.reserve(alpha.size());
    for (double a : alpha) {
        if (a < 0 || !std::isfinite(a)) throw Error("grid weights must be finite and >= 0");
        out.push_back(LogReal(a));
    }
    return out;
}

int encode(const std::vector<int>& cells, int N) {
    int code = 0;
    for (int m = int(cells.size()) - 1; m >= 0; --m) code = code * N + cells[m];
    return code;
}

}  // namespace

double log_count(const GridGame& g, const std::vector<double>& alpha) {
    auto tb = make_tables<LogReal>(g, to_logreal(g, alpha), false);
    std::vector<double> lgs;
    lgs.reserve(tb.codes);
    for (const auto& v : tb.F[g.T - 1]) lgs.push_back(v.log());
    return log_sum_exp(lgs);
}

Sampler::Sampler(const GridGame& g, const std::vector<double>& alpha) : g_(g) {
    auto tb = make_tables<LogReal>(g, to_logreal(g, alpha), true);
    codes_ = tb.codes;
    auto strip = [&](const std::vector<std::vector<LogReal>>& src) {
        std::vector<std::vector<double>> out(src.size());
        for (size_t t = 0; t < src.size(); ++t) {
            out[t].resize(src[t].size());
            for (size_t c = 0; c < src[t].size(); ++c) out[t][c] = src[t][c].log();
        }
        return out;
    };
    lw_ = strip(tb.w);
    lF_ = strip(tb.F);
    lB_ = strip(tb.B);
    std::vector<double> lgs;
    lgs.reserve(codes_);
    for (int c = 0; c < codes_; ++c) lgs.push_back(lF_[g.T - 1][c]);
    logC_ = log_sum_exp(lgs);
    if (logC_ == kNegInf) throw NoFeasiblePath("grid sampler: zero total weight");
    prob_.resize(codes_);
    cand_.resize(codes_);
}

bool Sampler::feasible_step(int t, int prev, int next) const {
    for (int m = 0; m < g_.k; ++m) {
        if (!g_.adj[t][size_t(prev % g_.N) * g_.N + next % g_.N]) return false;
        prev /= g_.N;
        next /= g_.N;
    }
    return true;
}

GridRealization Sampler::draw(Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> codes(g_.T);
    for (int t = 0; t < g_.T; ++t) {
        double denom = t == 0 ? logC_ : lB_[t - 1][codes[t - 1]];
        int nc = 0;
        for (int c = 0; c < codes_; ++c) {
            if (t > 0 && !feasible_step(t - 1, codes[t - 1], c)) continue;
            double lp = lw_[t][c] + lB_[t][c];
            if (lp == kNegInf) continue;
            cand_[nc] = c;
            prob_[nc] = std::exp(lp - denom);
            ++nc;
        }
        if (nc == 0) throw OracleFailure("grid sampler: no feasible continuation");
        double u = unif(rng), cum = 0;
        int pick = nc - 1;
        for (int ci = 0; ci < nc; ++ci) {
            cum += prob_[ci];
            if (u < cum) {
                pick = ci;
                break;
            }
        }
        codes[t] = cand_[pick];
    }
    GridRealization r;
    r.paths.assign(g_.k, std::vector<int>(g_.T));
    std::array<int, 8> pos;
    for (int t = 0; t < g_.T; ++t) {
        decode_tuple(codes[t], g_.N, g_.k, pos);
        for (int m = 0; m < g_.k; ++m) r.paths[m][t] = pos[m];
    }
    return r;
}

double Sampler::chain_log_prob(const GridRealization& r) const {
    if (int(r.paths.size()) != g_.k) throw Error("chain_log_prob: expected k paths");
    for (const auto& p : r.paths)
        if (int(p.size()) != g_.T) throw Error("chain_log_prob: path length != T");
    std::vector<int> cells(g_.k);
    double lp = 0;
    int prev = 0;
    for (int t = 0; t < g_.T; ++t) {
        for (int m = 0; m < g_.k; ++m) {
            int c = r.paths[m][t];
            if (c < 0 || c >= g_.N) throw Error("chain_log_prob: cell out of range");
            cells[m] = c;
        }
        int code = encode(cells, g_.N);
        if (t > 0 && !feasible_step(t - 1, prev, code)) return kNegInf;
        double denom = t == 0 ? logC_ : lB_[t - 1][prev];
        double num = lw_[t][code] + lB_[t][code];
        if (num == kNegInf) return kNegInf;
        lp += num - denom;
        prev = code;
    }
    return lp;
}

std::vector<double> Sampler::node_marginals() const {
    std::vector<double> x(g_.num_targets(), 0.0);
    std::array<int, 8> pos;
    std::vector<std::vector<double>> acc(g_.N);
    for (int t = 0; t < g_.T; ++t) {
        for (auto& v : acc) v.clear();
        for (int c = 0; c < codes_; ++c) {
            double v = lF_[t][c] + lB_[t][c];
            if (v == kNegInf) continue;
            decode_tuple(c, g_.N, g_.k, pos);
            for (int m = 0; m < g_.k; ++m) {
                bool seen = false;
                for (int m2 = 0; m2 < m && !seen; ++m2) seen = pos[m2] == pos[m];
                if (!seen) acc[pos[m]].push_back(v);
            }
        }
        for (int i = 0; i < g_.N; ++i)
            x[g_.target(t, i)] = std::clamp(std::exp(log_sum_exp(acc[i]) - logC_), 0.0, 1.0);
    }
    return x;
}

std::vector<double> node_marginals(const GridGame& g, const std::vector<double>& alpha) {
    return Sampler(g, alpha).node_marginals();
}

GridRealization sample(const GridGame& g, const std::vector<double>& alpha, Rng& rng) {
    return Sampler(g, alpha).draw(rng);
}

double chain_log_prob(const GridGame& g, const std::vector<double>& alpha,
                      const GridRealization& r) {
    return Sampler(g, alpha).chain_log_prob(r);
}

GridRealization best_response(const GridGame& g, const std::vector<double>& weights) {
    if (int(weights.size()) != g.num_targets())
        throw Error("best_response: expected one weight per target");
    std::vector<MaxPlus> w;
    w.reserve(weights.size());
    for (double v : weights) {
        if (v < 0 || !std::isfinite(v)) throw Error("best_response: weights must be >= 0");
        w.push_back(MaxPlus(v));
    }
    auto tb = make_tables<MaxPlus>(g, w, false);

    std::vector<int> codes(g.T);
    int best = 0;
    for (int c = 1; c < tb.codes; ++c)
        if (tb.F[g.T - 1][c].v > tb.F[g.T - 1][best].v) best = c;
    codes[g.T - 1] = best;
    for (int t = g.T - 1; t > 0; --t) {
        int cur = codes[t];
        // the maximizing predecessor reproduces F[t][cur] bit for bit
        int found = -1;
        for (int c = 0; c < tb.codes && found < 0; ++c) {
            if (tb.F[t - 1][c].is_zero()) continue;
            bool ok = true;
            int pc = c, cc = cur;
            for (int m = 0; m < g.k && ok; ++m) {
                ok = g.allowed(t - 1, pc % g.N, cc % g.N);
                pc /= g.N;
                cc /= g.N;
            }
            if (ok && tb.w[t][cur].v + tb.F[t - 1][c].v == tb.F[t][cur].v) found = c;
        }
        if (found < 0) throw OracleFailure("best_response: backtrack failed");
        codes[t - 1] = found;
    }

    GridRealization r;
    r.paths.assign(g.k, std::vector<int>(g.T));
    std::array<int, 8> pos;
    for (int t = 0; t < g.T; ++t) {
        decode_tuple(codes[t], g.N, g.k, pos);
        for (int m = 0; m < g.k; ++m) r.paths[m][t] = pos[m];
    }
    return r;
}

}  // namespace patrol::grid
