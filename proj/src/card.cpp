#include "patrol/card.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "patrol/count_fams.hpp"

namespace patrol::card {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int categorical(const std::vector<double>& w, Rng& rng) {
    double total = 0.0;
    for (double v : w) total += v;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng) * total;
    double acc = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (u <= acc) return int(i);
    }
    return int(w.size()) - 1;
}

}  // namespace

Decomposition<double> decompose(const PolytopeD& P, std::vector<double> x, Rng& rng,
                                const VertexOracle& oracle, const DecomposeOptions& opt) {
    if (!oracle) return decompose(P, std::move(x), rng, opt);
    if (!P.A.empty()) throw Error("decompose: vertex oracle requires a bounds-only polytope");
    check_membership(P, x, opt.membership_tol);
    Decomposition<double> out;
    std::vector<uint8_t> pinned(P.n, 0);
    double scale = 1.0;
    int max_levels = opt.max_levels > 0 ? opt.max_levels : P.n + 2;
    for (int level = 0; level < max_levels; ++level) {
        ++out.depth;
        auto a = detail::random_objective<double>(P.n, rng);
        auto v1 = oracle(a, pinned);
        double dist = 0.0;
        for (int j = 0; j < P.n; ++j) dist = std::max(dist, std::abs(x[j] - v1[j]));
        if (dist <= opt.stall_tol) {
            out.vertices.push_back(v1);
            out.weights.push_back(scale);
            return out;
        }
        auto hit = detail::shoot_ray(P, x, v1, opt.facet_tol);
        if (!hit.found)
            throw NumericalStall("decompose: no facet blocks the ray but x is not a vertex");
        double w1 = scale * hit.t / (1.0 + hit.t);
        if (w1 > 0.0) {
            out.vertices.push_back(v1);
            out.weights.push_back(w1);
        }
        scale /= 1.0 + hit.t;
        for (int j = 0; j < P.n; ++j) x[j] += hit.t * (x[j] - v1[j]);
        x[hit.bound_coord] = 0.0;
        pinned[hit.bound_coord] = 1;
    }
    throw NumericalStall("decompose: level limit exceeded");
}

// --- grid flow -------------------------------------------------------------

GridFlow make_grid_flow(const GridGame& g) {
    GridFlow out;
    auto& L = out.layout;
    L.T = g.T;
    L.N = g.N;
    L.k = g.k;
    L.edge_id.assign(std::max(0, g.T - 1), std::vector<int>(g.N * g.N, -1));
    int off = g.N;
    for (int t = 0; t + 1 < g.T; ++t)
        for (int i = 0; i < g.N; ++i)
            for (int j = 0; j < g.N; ++j)
                if (g.allowed(t, i, j)) L.edge_id[t][i * g.N + j] = off++;
    L.per_factor = off;

    out.P.n = g.k * L.per_factor;
    auto add_row = [&](std::vector<double> row, double rhs) {
        out.P.M.push_back(std::move(row));
        out.P.c.push_back(rhs);
    };
    for (int f = 0; f < g.k; ++f) {
        std::vector<double> src_row(out.P.n, 0.0);
        for (int i = 0; i < g.N; ++i) src_row[L.src(f, i)] = 1.0;
        add_row(std::move(src_row), 1.0);
        for (int t = 0; t + 1 < g.T; ++t)
            for (int i = 0; i < g.N; ++i) {
                // flow into node (t, i) minus flow out through layer t edges
                std::vector<double> row(out.P.n, 0.0);
                if (t == 0) {
                    row[L.src(f, i)] = 1.0;
                } else {
                    for (int p = 0; p < g.N; ++p) {
                        int id = L.edge_id[t - 1][p * g.N + i];
                        if (id >= 0) row[L.var(f, id)] = 1.0;
                    }
                }
                for (int j = 0; j < g.N; ++j) {
                    int id = L.edge_id[t][i * g.N + j];
                    if (id >= 0) row[L.var(f, id)] -= 1.0;
                }
                add_row(std::move(row), 0.0);
            }
    }
    return out;
}

VertexOracle make_grid_vertex_oracle(const GridGame& g, const GridFlowLayout& layout) {
    return [g, layout](const std::vector<double>& a,
                       const std::vector<uint8_t>& pinned) -> std::vector<double> {
        std::vector<double> z(g.k * layout.per_factor, 0.0);
        for (int f = 0; f < g.k; ++f) {
            std::vector<std::vector<double>> dp(g.T, std::vector<double>(g.N, kNegInf));
            for (int i = 0; i < g.N; ++i) {
                int v = layout.src(f, i);
                if (!pinned[v]) dp[0][i] = a[v];
            }
            for (int t = 0; t + 1 < g.T; ++t)
                for (int i = 0; i < g.N; ++i) {
                    if (dp[t][i] == kNegInf) continue;
                    for (int j = 0; j < g.N; ++j) {
                        int id = layout.edge_id[t][i * g.N + j];
                        if (id < 0) continue;
                        int v = layout.var(f, id);
                        if (pinned[v]) continue;
                        double cand = dp[t][i] + a[v];
                        if (cand > dp[t + 1][j]) dp[t + 1][j] = cand;
                    }
                }
            int cur = -1;
            for (int j = 0; j < g.N; ++j)
                if (dp[g.T - 1][j] != kNegInf && (cur < 0 || dp[g.T - 1][j] > dp[g.T - 1][cur]))
                    cur = j;
            if (cur < 0) throw OracleFailure("grid vertex oracle: face admits no path");
            std::vector<int> path(g.T);
            path[g.T - 1] = cur;
            for (int t = g.T - 2; t >= 0; --t) {
                int pick = -1;
                for (int i = 0; i < g.N && pick < 0; ++i) {
                    int id = layout.edge_id[t][i * g.N + cur];
                    if (id < 0) continue;
                    int v = layout.var(f, id);
                    if (pinned[v] || dp[t][i] == kNegInf) continue;
                    if (dp[t][i] + a[v] == dp[t + 1][cur]) pick = i;
                }
                if (pick < 0) throw OracleFailure("grid vertex oracle: backtrack failed");
                cur = pick;
                path[t] = cur;
            }
            z[layout.src(f, path[0])] = 1.0;
            for (int t = 0; t + 1 < g.T; ++t)
                z[layout.var(f, layout.edge_id[t][path[t] * g.N + path[t + 1]])] = 1.0;
        }
        return z;
    };
}

std::vector<double> grid_flow_point(const GridGame& g, const GridFlowLayout& layout,
                                    const ExplicitStrategy& mix) {
    std::vector<double> z(g.k * layout.per_factor, 0.0);
    for (size_t s = 0; s < mix.support.size(); ++s) {
        const auto* gr = std::get_if<GridRealization>(&mix.support[s].detail);
        if (!gr) throw Error("grid_flow_point: strategy lacks path detail");
        double p = mix.probs[s];
        for (int f = 0; f < g.k; ++f) {
            const auto& path = gr->paths[f];
            z[layout.src(f, path[0])] += p;
            for (int t = 0; t + 1 < g.T; ++t) {
                int id = layout.edge_id[t][path[t] * g.N + path[t + 1]];
                if (id < 0) throw Error("grid_flow_point: path uses a forbidden move");
                z[layout.var(f, id)] += p;
            }
        }
    }
    return z;
}

GridRealization decode_grid_vertex(const GridGame& g, const GridFlowLayout& layout,
                                   const std::vector<double>& z) {
    for (double v : z)
        if (std::abs(v - std::round(v)) > 1e-6 || std::round(v) < 0 || std::round(v) > 1)
            throw NonIntegralVertex("grid vertex has a coordinate away from {0,1}");
    GridRealization out;
    out.paths.assign(g.k, std::vector<int>(g.T, -1));
    for (int f = 0; f < g.k; ++f) {
        int cur = -1;
        for (int i = 0; i < g.N; ++i)
            if (z[layout.src(f, i)] > 0.5) {
                if (cur >= 0) throw NonIntegralVertex("grid vertex starts two paths in one block");
                cur = i;
            }
        if (cur < 0) throw NonIntegralVertex("grid vertex has no source flow in a block");
        out.paths[f][0] = cur;
        for (int t = 0; t + 1 < g.T; ++t) {
            int next = -1;
            for (int j = 0; j < g.N; ++j) {
                int id = layout.edge_id[t][cur * g.N + j];
                if (id >= 0 && z[layout.var(f, id)] > 0.5) {
                    if (next >= 0) throw NonIntegralVertex("grid vertex branches");
                    next = j;
                }
            }
            if (next < 0) throw NonIntegralVertex("grid vertex path breaks off");
            cur = next;
            out.paths[f][t + 1] = cur;
        }
    }
    return out;
}

// --- FAMS matching ---------------------------------------------------------

FamsMatching make_fams_matching(const FamsInstance& fi) {
    FamsMatching out;
    for (const auto& comp : fi.comps)
        for (const auto& [li, lj] : comp.edges)
            out.edges.push_back({comp.a_idx[li], comp.b_idx[lj]});
    int n = int(out.edges.size());
    out.P.n = n;
    int na = int(fi.a.size()), nb = int(fi.b.size());
    out.P.A.assign(na + nb, std::vector<double>(n, 0.0));
    out.P.b.assign(na + nb, 1.0);
    for (int e = 0; e < n; ++e) {
        out.P.A[out.edges[e].first][e] = 1.0;
        out.P.A[na + out.edges[e].second][e] = 1.0;
    }
    out.P.M.assign(1, std::vector<double>(n, 1.0));
    out.P.c.assign(1, double(fi.k));
    return out;
}

std::vector<double> fams_edge_point(const FamsInstance& fi, const FamsMatching& fm,
                                    const ExplicitStrategy& mix) {
    (void)fi;
    std::map<std::pair<int, int>, int> idx;
    for (int e = 0; e < int(fm.edges.size()); ++e) idx[fm.edges[e]] = e;
    std::vector<double> z(fm.P.n, 0.0);
    for (size_t s = 0; s < mix.support.size(); ++s) {
        const auto* fr = std::get_if<FamsRealization>(&mix.support[s].detail);
        if (!fr) throw Error("fams_edge_point: strategy lacks edge detail");
        for (const auto& e : fr->edges) {
            auto it = idx.find(e);
            if (it == idx.end()) throw Error("fams_edge_point: unknown edge in mixture");
            z[it->second] += mix.probs[s];
        }
    }
    return z;
}

FamsRealization decode_fams_vertex(const FamsInstance& fi, const FamsMatching& fm,
                                   const std::vector<double>& z) {
    FamsRealization out;
    for (int e = 0; e < int(z.size()); ++e) {
        double r = std::round(z[e]);
        if (std::abs(z[e] - r) > 1e-6 || r < 0 || r > 1)
            throw NonIntegralVertex("matching vertex has a coordinate away from {0,1}");
        if (r > 0.5) out.edges.push_back(fm.edges[e]);
    }
    if (int(out.edges.size()) != fi.k)
        throw NonIntegralVertex("matching vertex does not select exactly k edges");
    return out;
}

// --- sampling --------------------------------------------------------------

PureStrategy card_sample(const PolytopeD& P, const std::vector<double>& x, const DecodeFn& decode,
                         Rng& rng, const VertexOracle& oracle) {
    auto dec = oracle ? decompose(P, x, rng, oracle) : decompose(P, x, rng);
    int i = categorical(dec.weights, rng);
    return decode(dec.vertices[i]);
}

CardSampler::CardSampler(PolytopeD P, std::vector<double> x, DecodeFn decode,
                         int num_decompositions, Rng& rng, const VertexOracle& oracle)
    : P_(std::move(P)), x_(std::move(x)), decode_(std::move(decode)) {
    decs_.reserve(num_decompositions);
    decoded_.reserve(num_decompositions);
    for (int d = 0; d < num_decompositions; ++d) {
        decs_.push_back(oracle ? decompose(P_, x_, rng, oracle) : decompose(P_, x_, rng));
        std::vector<PureStrategy> ds;
        ds.reserve(decs_.back().vertices.size());
        for (const auto& v : decs_.back().vertices) ds.push_back(decode_(v));
        decoded_.push_back(std::move(ds));
    }
}

PureStrategy CardSampler::sample(Rng& rng) const {
    std::uniform_int_distribution<int> pick(0, int(decs_.size()) - 1);
    int d = pick(rng);
    return decoded_[d][categorical(decs_[d].weights, rng)];
}

ExplicitStrategy CardSampler::mixture() const {
    std::map<std::string, std::pair<PureStrategy, double>> acc;
    double per_dec = 1.0 / double(decs_.size());
    for (size_t d = 0; d < decs_.size(); ++d)
        for (size_t i = 0; i < decoded_[d].size(); ++i) {
            auto& slot = acc[decoded_[d][i].key()];
            slot.first = decoded_[d][i];
            slot.second += per_dec * decs_[d].weights[i];
        }
    ExplicitStrategy out;
    for (auto& [key, sp] : acc) {
        out.support.push_back(std::move(sp.first));
        out.probs.push_back(sp.second);
    }
    return out;
}

int CardSampler::support_size() const {
    std::map<std::string, int> seen;
    for (const auto& ds : decoded_)
        for (const auto& s : ds) seen[s.key()] = 1;
    return int(seen.size());
}

// --- utilities -------------------------------------------------------------

double coverage_shortfall(const std::vector<double>& x_cov, const ExplicitStrategy& mix) {
    std::vector<double> emp(x_cov.size(), 0.0);
    for (size_t s = 0; s < mix.support.size(); ++s)
        for (size_t v = 0; v < emp.size(); ++v)
            if (mix.support[s].covered[v]) emp[v] += mix.probs[s];
    double total = 0.0;
    for (size_t v = 0; v < emp.size(); ++v) total += std::max(0.0, x_cov[v] - emp[v]);
    return total;
}

void validate_polytope(const PolytopeD& P, bool check_bounded) {
    lp::Problem<double> p;
    p.n = P.n;
    p.c.assign(P.n, 0.0);
    p.A = P.A;
    p.b = P.b;
    p.E = P.M;
    p.f = P.c;
    if (lp::solve(p).status == lp::Status::Infeasible) throw Infeasible("polytope is empty");
    if (!check_bounded) return;
    p.maximize = true;
    for (int j = 0; j < P.n; ++j) {
        std::fill(p.c.begin(), p.c.end(), 0.0);
        p.c[j] = 1.0;
        if (lp::solve(p).status == lp::Status::Unbounded)
            throw Unbounded("polytope is unbounded in a coordinate");
    }
}

nlohmann::json polytope_to_json(const PolytopeD& P) {
    return {{"n", P.n}, {"A", P.A}, {"b", P.b}, {"M", P.M}, {"c", P.c}};
}

PolytopeD polytope_from_json(const nlohmann::json& j) {
    PolytopeD P;
    P.n = j.at("n").get<int>();
    P.A = j.at("A").get<std::vector<std::vector<double>>>();
    P.b = j.at("b").get<std::vector<double>>();
    P.M = j.at("M").get<std::vector<std::vector<double>>>();
    P.c = j.at("c").get<std::vector<double>>();
    return P;
}

PolytopeQ to_rational(const PolytopeD& P) {
    PolytopeQ Q;
    Q.n = P.n;
    auto conv_mat = [](const std::vector<std::vector<double>>& m) {
        std::vector<std::vector<Rational>> out(m.size());
        for (size_t i = 0; i < m.size(); ++i) out[i].assign(m[i].begin(), m[i].end());
        return out;
    };
    Q.A = conv_mat(P.A);
    Q.M = conv_mat(P.M);
    Q.b.assign(P.b.begin(), P.b.end());
    Q.c.assign(P.c.begin(), P.c.end());
    return Q;
}

}  // namespace patrol::card
