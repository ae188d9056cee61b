#include "patrol/count_fams.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace patrol::fams {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<LogReal> to_logreal(const FamsInstance& fi, const std::vector<double>& alpha) {
    if (int(alpha.size()) != fi.num_targets())
        throw Error("flight weights: expected one entry per target");
    std::vector<LogReal> out;
    out.reserve(alpha.size());
    for (double a : alpha) {
        if (a < 0 || !std::isfinite(a)) throw Error("flight weights must be finite and >= 0");
        out.push_back(LogReal(a));
    }
    return out;
}

}  // namespace

double log_count(const FamsInstance& fi, const std::vector<double>& alpha) {
    return weighted_count<LogReal>(fi, to_logreal(fi, alpha)).log();
}

std::pair<double, std::vector<double>> log_count_and_marginals(const FamsInstance& fi,
                                                               const std::vector<double>& alpha) {
    auto la = to_logreal(fi, alpha);
    auto tb = make_tables<LogReal>(fi, la);
    if (tb.total.is_zero()) throw NoFeasiblePath("flight_marginals: zero total weight");
    auto counts = covered_counts(fi, tb, la);
    std::vector<double> x(fi.num_targets());
    for (int v = 0; v < fi.num_targets(); ++v)
        x[v] = std::clamp(std::exp(counts[v].log() - tb.total.log()), 0.0, 1.0);
    return {tb.total.log(), x};
}

std::vector<double> flight_marginals(const FamsInstance& fi, const std::vector<double>& alpha) {
    return log_count_and_marginals(fi, alpha).second;
}

Sampler::Sampler(const FamsInstance& fi, const std::vector<double>& alpha) : fi_(fi) {
    auto tb = make_tables<LogReal>(fi, to_logreal(fi, alpha));
    logC_ = tb.total.log();
    if (logC_ == kNegInf) throw NoFeasiblePath("flight sampler: zero total weight");
    int nc = int(tb.comps.size());
    comps_.resize(nc);
    for (int c = 0; c < nc; ++c) {
        auto& dst = comps_[c];
        const auto& src = tb.comps[c];
        dst.na = src.na;
        dst.nb = src.nb;
        dst.edges = src.edges;
        dst.lew.reserve(src.ew.size());
        for (const auto& w : src.ew) dst.lew.push_back(w.log());
        dst.ldp.resize(src.dp.size());
        for (size_t d = 0; d < src.dp.size(); ++d) {
            dst.ldp[d].resize(src.dp[d].size());
            for (size_t i = 0; i < src.dp[d].size(); ++i) dst.ldp[d][i] = src.dp[d][i].log();
        }
        dst.by_row.assign(dst.na, {});
        dst.by_col.assign(dst.nb, {});
        for (int e = 0; e < int(dst.edges.size()); ++e) {
            dst.by_row[dst.edges[e].first].push_back(e);
            dst.by_col[dst.edges[e].second].push_back(e);
        }
    }
    auto strip = [](const std::vector<std::vector<LogReal>>& src) {
        std::vector<std::vector<double>> out(src.size());
        for (size_t i = 0; i < src.size(); ++i) {
            out[i].resize(src[i].size());
            for (size_t j = 0; j < src[i].size(); ++j) out[i][j] = src[i][j].log();
        }
        return out;
    };
    lsizes_ = strip(tb.sizes);
    lsuf_ = strip(tb.suf);
}

// One component's backward chain from state (na, nb, d): either every edge
// lies below-left of the boundary (shrink diagonally) or the top edge sits
// on it (emit). In draw mode edges are emitted into *out; in score mode the
// chain is evaluated against *fixed (edges descending) and accumulated into
// *score. Returns false when the scored sequence has probability zero.
bool Sampler::walk_comp(int c, int d, Rng* rng, std::vector<std::pair<int, int>>* out,
                        const std::vector<std::pair<int, int>>* fixed, double* score) const {
    const Comp& t = comps_[c];
    int l = t.na, r = t.nb;
    size_t next_fixed = 0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (d > 0) {
        if (l == 0 || r == 0) return false;
        double denom = t.at(d, l, r);
        if (denom == kNegInf) return false;
        if (rng != nullptr) {
            double u = unif(*rng);
            double cum = std::exp(t.at(d, l - 1, r - 1) - denom);
            int chosen = -1;  // -1 = shrink
            if (u >= cum) {
                bool done = false;
                for (int e : t.by_row[l - 1]) {
                    if (t.edges[e].second + 1 > r) continue;
                    cum += std::exp(t.lew[e] + t.at(d - 1, l - 1, t.edges[e].second) - denom);
                    if (u < cum) {
                        chosen = e;
                        done = true;
                        break;
                    }
                }
                if (!done)
                    for (int e : t.by_col[r - 1]) {
                        if (t.edges[e].first + 1 > l - 1) continue;
                        cum += std::exp(t.lew[e] + t.at(d - 1, t.edges[e].first, r - 1) - denom);
                        if (u < cum) {
                            chosen = e;
                            done = true;
                            break;
                        }
                    }
                if (!done) {
                    // rounding residue: fall back to the last positive branch
                    chosen = -1;
                    for (int e = int(t.edges.size()) - 1; e >= 0 && chosen < 0; --e) {
                        auto [i, j] = t.edges[e];
                        if ((i + 1 == l && j + 1 <= r) || (j + 1 == r && i + 1 <= l - 1))
                            if (t.lew[e] + t.at(d - 1, i, j) > kNegInf) chosen = e;
                    }
                    if (chosen < 0 && t.at(d, l - 1, r - 1) == kNegInf)
                        throw OracleFailure("flight sampler: no positive branch");
                }
            }
            if (chosen < 0) {
                --l;
                --r;
            } else {
                out->push_back(t.edges[chosen]);
                l = t.edges[chosen].first;
                r = t.edges[chosen].second;
                --d;
            }
        } else {
            if (next_fixed >= fixed->size()) return false;
            auto [i, j] = (*fixed)[next_fixed];
            if (i + 1 > l || j + 1 > r) return false;
            if (i + 1 < l && j + 1 < r) {
                double p = t.at(d, l - 1, r - 1) - denom;
                if (p == kNegInf) return false;
                *score += p;
                --l;
                --r;
            } else {
                double p = kNegInf;
                for (int e : t.by_row[l - 1])
                    if (t.edges[e] == std::pair{i, j}) p = t.lew[e] + t.at(d - 1, i, j) - denom;
                if (p == kNegInf)
                    for (int e : t.by_col[r - 1])
                        if (t.edges[e] == std::pair{i, j} && i + 1 <= l - 1)
                            p = t.lew[e] + t.at(d - 1, i, j) - denom;
                if (p == kNegInf) return false;
                *score += p;
                l = i;
                r = j;
                --d;
                ++next_fixed;
            }
        }
    }
    return rng != nullptr || next_fixed == fixed->size();
}

FamsRealization Sampler::draw(Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int nc = int(comps_.size());
    std::vector<int> sizes(nc, 0);
    int s = fi_.k;
    for (int c = 0; c < nc; ++c) {
        double denom = lsuf_[c][s];
        double u = unif(rng), cum = 0;
        int pick = -1;
        for (int d = 0; d <= s; ++d) {
            if (d >= int(lsizes_[c].size())) break;
            double lp = lsizes_[c][d] + lsuf_[c + 1][s - d];
            if (lp == kNegInf) continue;
            cum += std::exp(lp - denom);
            pick = d;
            if (u < cum) break;
        }
        if (pick < 0) throw OracleFailure("flight sampler: no feasible component size");
        sizes[c] = pick;
        s -= pick;
    }

    FamsRealization r;
    for (int c = 0; c < nc; ++c) {
        if (sizes[c] == 0) continue;
        std::vector<std::pair<int, int>> local;
        walk_comp(c, sizes[c], &rng, &local, nullptr, nullptr);
        for (auto [i, j] : local)
            r.edges.push_back({fi_.comps[c].a_idx[i], fi_.comps[c].b_idx[j]});
    }
    std::sort(r.edges.begin(), r.edges.end(), [&](const auto& x, const auto& y) {
        return fi_.where_a[x.first] < fi_.where_a[y.first];
    });
    return r;
}

double Sampler::chain_log_prob(const FamsRealization& r) const {
    if (int(r.edges.size()) != fi_.k) throw NotAMatching("chain_log_prob: expected k edges");
    int nc = int(comps_.size());
    std::vector<std::vector<std::pair<int, int>>> local(nc);
    std::set<int> used_a, used_b;
    for (auto [gi, gj] : r.edges) {
        if (gi < 0 || gi >= int(fi_.a.size()) || gj < 0 || gj >= int(fi_.b.size()))
            throw NotAMatching("chain_log_prob: flight index out of range");
        if (!fi_.edge_ok(gi, gj)) throw NotAMatching("chain_log_prob: pair is not an edge");
        if (!used_a.insert(gi).second || !used_b.insert(gj).second)
            throw NotAMatching("chain_log_prob: repeated endpoint");
        auto [c, li] = fi_.where_a[gi];
        local[c].push_back({li, fi_.where_b[gj].second});
    }
    double score = 0;
    int s = fi_.k;
    for (int c = 0; c < nc; ++c) {
        int d = int(local[c].size());
        if (d > s) return kNegInf;
        double lp = (d < int(lsizes_[c].size()) ? lsizes_[c][d] : kNegInf);
        if (lp == kNegInf || lsuf_[c + 1][s - d] == kNegInf) return kNegInf;
        score += lp + lsuf_[c + 1][s - d] - lsuf_[c][s];
        s -= d;
    }
    for (int c = 0; c < nc; ++c) {
        if (local[c].empty()) continue;
        std::sort(local[c].begin(), local[c].end(), std::greater<>());
        if (!walk_comp(c, int(local[c].size()), nullptr, nullptr, &local[c], &score))
            return kNegInf;
    }
    return score;
}

FamsRealization sample(const FamsInstance& fi, const std::vector<double>& alpha, Rng& rng) {
    return Sampler(fi, alpha).draw(rng);
}

double chain_log_prob(const FamsInstance& fi, const std::vector<double>& alpha,
                      const FamsRealization& r) {
    return Sampler(fi, alpha).chain_log_prob(r);
}

PureStrategy canonicalize(const FamsInstance& fi, std::vector<std::pair<int, int>> edges) {
    int nc = int(fi.comps.size());
    std::vector<std::vector<std::pair<int, int>>> local(nc);
    std::set<int> used_a, used_b;
    for (auto [gi, gj] : edges) {
        if (gi < 0 || gi >= int(fi.a.size()) || gj < 0 || gj >= int(fi.b.size()))
            throw NotAMatching("canonicalize: flight index out of range");
        if (!fi.edge_ok(gi, gj)) throw NotAMatching("canonicalize: pair is not an edge");
        if (!used_a.insert(gi).second || !used_b.insert(gj).second)
            throw NotAMatching("canonicalize: repeated endpoint");
        auto [c, li] = fi.where_a[gi];
        local[c].push_back({li, fi.where_b[gj].second});
    }

    std::vector<std::pair<int, int>> out;
    for (int c = 0; c < nc; ++c) {
        auto& m = local[c];
        // uncross until fixed point; each swap strictly lowers sum |i-j|^2
        bool changed = true;
        while (changed) {
            changed = false;
            long long before = 0;
            for (auto [i, j] : m) before += (long long)(i - j) * (i - j);
            for (size_t x = 0; x < m.size() && !changed; ++x)
                for (size_t y = x + 1; y < m.size() && !changed; ++y) {
                    auto [i1, j1] = m[x];
                    auto [i2, j2] = m[y];
                    if ((i1 - i2) * (long long)(j1 - j2) < 0) {
                        std::swap(m[x].second, m[y].second);
                        changed = true;
                    }
                }
            if (changed) {
                long long after = 0;
                for (auto [i, j] : m) after += (long long)(i - j) * (i - j);
                if (after >= before) throw OracleFailure("canonicalize: potential did not drop");
            }
        }
        std::sort(m.begin(), m.end());
        for (auto [i, j] : m) out.push_back({fi.comps[c].a_idx[i], fi.comps[c].b_idx[j]});
    }
    return strategy_from_edges(fi, std::move(out));
}

FamsRealization best_response(const FamsInstance& fi, const std::vector<double>& weights) {
    if (int(weights.size()) != fi.num_targets())
        throw Error("best_response: expected one weight per target");
    std::vector<MaxPlus> w;
    w.reserve(weights.size());
    for (double v : weights) {
        if (v < 0 || !std::isfinite(v)) throw Error("best_response: weights must be >= 0");
        w.push_back(MaxPlus(v));
    }
    auto tb = make_tables<MaxPlus>(fi, w);
    if (tb.total.is_zero()) throw NoFeasiblePath("best_response: no ordered k-matching");

    int nc = int(fi.comps.size());
    FamsRealization r;
    int s = fi.k;
    for (int c = 0; c < nc; ++c) {
        int dc = -1;
        for (int d = 0; d <= s && dc < 0; ++d)
            if (!tb.sizes[c][d].is_zero() && !tb.suf[c + 1][s - d].is_zero() &&
                tb.sizes[c][d].v + tb.suf[c + 1][s - d].v == tb.suf[c][s].v)
                dc = d;
        if (dc < 0) throw OracleFailure("best_response: size backtrack failed");

        const auto& t = tb.comps[c];
        int l = t.na, rr = t.nb, d = dc;
        while (d > 0) {
            if (l == 0 || rr == 0) throw OracleFailure("best_response: empty prefix");
            MaxPlus cur = t.at(d, l, rr);
            if (t.at(d, l - 1, rr - 1).v == cur.v) {
                --l;
                --rr;
                continue;
            }
            int chosen = -1;
            for (int e = 0; e < int(t.edges.size()) && chosen < 0; ++e) {
                auto [i, j] = t.edges[e];
                bool boundary = (i + 1 == l && j + 1 <= rr) || (j + 1 == rr && i + 1 <= l - 1);
                if (!boundary || t.at(d - 1, i, j).is_zero()) continue;
                if (t.ew[e].v + t.at(d - 1, i, j).v == cur.v) chosen = e;
            }
            if (chosen < 0) throw OracleFailure("best_response: edge backtrack failed");
            auto [i, j] = t.edges[chosen];
            r.edges.push_back({fi.comps[c].a_idx[i], fi.comps[c].b_idx[j]});
            l = i;
            rr = j;
            --d;
        }
        s -= dc;
    }
    std::sort(r.edges.begin(), r.edges.end(), [&](const auto& x, const auto& y) {
        return fi.where_a[x.first] < fi.where_a[y.first];
    });
    return r;
}

}  // namespace patrol::fams
