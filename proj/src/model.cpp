#include "patrol/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace patrol {

namespace {

constexpr uint64_t kSatCap = std::numeric_limits<uint64_t>::max() / 4;

uint64_t sat_add(uint64_t a, uint64_t b) {
    uint64_t s = a + b;
    return (s < a || s > kSatCap) ? kSatCap : s;
}

uint64_t sat_mul(uint64_t a, uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > kSatCap / b) return kSatCap;
    return a * b;
}

}  // namespace

std::string PureStrategy::key() const {
    std::ostringstream os;
    if (const auto* g = std::get_if<GridRealization>(&detail)) {
        os << "g";
        for (const auto& path : g->paths) {
            os << "|";
            for (int c : path) os << c << ",";
        }
    } else {
        const auto& f = std::get<FamsRealization>(detail);
        os << "f";
        for (auto [i, j] : f.edges) os << "|" << i << "," << j;
    }
    return os.str();
}

int num_targets(const Instance& inst) {
    return std::visit([](const auto& g) { return g.num_targets(); }, inst);
}

std::vector<int> attackable_targets(const Instance& inst) {
    std::vector<int> out;
    if (const auto* g = std::get_if<GridGame>(&inst)) {
        for (int i = 0; i < g->N; ++i) out.push_back(g->target(g->T - 1, i));
    } else {
        const auto& fi = std::get<FamsInstance>(inst);
        for (int v = 0; v < fi.num_targets(); ++v) out.push_back(v);
    }
    return out;
}

std::vector<int> observable_targets(const Instance& inst) {
    std::vector<int> out;
    if (const auto* g = std::get_if<GridGame>(&inst)) {
        for (int i = 0; i < g->N; ++i) out.push_back(g->target(0, i));
    } else {
        const auto& fi = std::get<FamsInstance>(inst);
        for (int v = 0; v < fi.num_targets(); ++v) out.push_back(v);
    }
    return out;
}

GridGame build_grid(int T, int N, int k, const std::vector<std::array<int, 3>>& moves) {
    if (T < 1 || N < 1 || k < 1) throw Error("build_grid: T, N, k must be positive");
    uint64_t tuples = 1;
    for (int m = 0; m < k; ++m) tuples = sat_mul(tuples, uint64_t(N));
    if (tuples > (uint64_t(1) << 26))
        throw TooLarge("build_grid: N^k position tuples exceed the supported size");

    GridGame g;
    g.T = T;
    g.N = N;
    g.k = k;
    g.adj.assign(std::max(0, T - 1), std::vector<uint8_t>(size_t(N) * N, 0));
    for (const auto& mv : moves) {
        auto [t, i, j] = mv;
        if (t < 0 || t >= T - 1 || i < 0 || i >= N || j < 0 || j >= N)
            throw Error("build_grid: move out of range");
        g.adj[t][size_t(i) * N + j] = 1;
    }
    g.moves = moves;
    std::sort(g.moves.begin(), g.moves.end());
    g.moves.erase(std::unique(g.moves.begin(), g.moves.end()), g.moves.end());

    for (int t = 0; t + 1 < T; ++t) {
        for (int i = 0; i < N; ++i) {
            bool out = false;
            for (int j = 0; j < N && !out; ++j) out = g.allowed(t, i, j);
            if (!out)
                throw DisconnectedLayer("build_grid: cell " + std::to_string(i) + " in layer " +
                                        std::to_string(t) + " has no outgoing move");
        }
    }
    return g;
}

FamsInstance build_fams(std::vector<Flight> a, std::vector<Flight> b, double t1, double t2, int k) {
    if (k < 1) throw Error("build_fams: k must be positive");
    if (t1 <= 0 || t1 > t2) throw Error("build_fams: window must satisfy 0 < T1 <= T2");
    FamsInstance fi;
    fi.a = std::move(a);
    fi.b = std::move(b);
    fi.t1 = t1;
    fi.t2 = t2;
    fi.k = k;

    std::map<std::string, int> comp_of_city;  // sorted by city name, deterministic
    for (const auto& f : fi.a) comp_of_city.emplace(f.city, 0);
    for (const auto& f : fi.b) comp_of_city.emplace(f.city, 0);
    int nc = 0;
    for (auto& [city, idx] : comp_of_city) idx = nc++;

    fi.comps.resize(nc);
    fi.where_a.resize(fi.a.size());
    fi.where_b.resize(fi.b.size());
    for (int c = 0; c < nc; ++c) {
        auto& comp = fi.comps[c];
        for (int i = 0; i < int(fi.a.size()); ++i)
            if (comp_of_city.at(fi.a[i].city) == c) comp.a_idx.push_back(i);
        for (int j = 0; j < int(fi.b.size()); ++j)
            if (comp_of_city.at(fi.b[j].city) == c) comp.b_idx.push_back(j);
        auto by_time = [&](const std::vector<Flight>& fl) {
            return [&fl](int x, int y) {
                return fl[x].time != fl[y].time ? fl[x].time < fl[y].time : x < y;
            };
        };
        std::sort(comp.a_idx.begin(), comp.a_idx.end(), by_time(fi.a));
        std::sort(comp.b_idx.begin(), comp.b_idx.end(), by_time(fi.b));
        for (int li = 0; li < int(comp.a_idx.size()); ++li) fi.where_a[comp.a_idx[li]] = {c, li};
        for (int lj = 0; lj < int(comp.b_idx.size()); ++lj) fi.where_b[comp.b_idx[lj]] = {c, lj};
        for (int li = 0; li < int(comp.a_idx.size()); ++li)
            for (int lj = 0; lj < int(comp.b_idx.size()); ++lj)
                if (fi.edge_ok(comp.a_idx[li], comp.b_idx[lj])) comp.edges.push_back({li, lj});
    }

    if (max_matching_size(fi) < k)
        throw InfeasibleK("build_fams: no k-matching in the compatibility graph");
    return fi;
}

int max_matching_size(const FamsInstance& fi) {
    int n1 = int(fi.a.size()), n2 = int(fi.b.size());
    std::vector<std::vector<int>> adj(n1);
    for (const auto& comp : fi.comps)
        for (auto [li, lj] : comp.edges) adj[comp.a_idx[li]].push_back(comp.b_idx[lj]);
    std::vector<int> match_b(n2, -1);
    std::vector<uint8_t> seen;
    // Kuhn's augmenting paths
    std::function<bool(int)> try_aug = [&](int i) -> bool {
        for (int j : adj[i]) {
            if (seen[j]) continue;
            seen[j] = 1;
            if (match_b[j] < 0 || try_aug(match_b[j])) {
                match_b[j] = i;
                return true;
            }
        }
        return false;
    };
    int size = 0;
    for (int i = 0; i < n1; ++i) {
        seen.assign(n2, 0);
        if (try_aug(i)) ++size;
    }
    return size;
}

PureStrategy strategy_from_paths(const GridGame& g, std::vector<std::vector<int>> paths) {
    PureStrategy s;
    s.covered.assign(g.num_targets(), 0);
    for (const auto& path : paths)
        for (int t = 0; t < g.T; ++t) s.covered[g.target(t, path[t])] = 1;
    s.detail = GridRealization{std::move(paths)};
    return s;
}

PureStrategy strategy_from_edges(const FamsInstance& fi, std::vector<std::pair<int, int>> edges) {
    std::sort(edges.begin(), edges.end(), [&](const auto& x, const auto& y) {
        return fi.where_a[x.first] < fi.where_a[y.first];
    });
    PureStrategy s;
    s.covered.assign(fi.num_targets(), 0);
    for (auto [i, j] : edges) {
        s.covered[fi.target_a(i)] = 1;
        s.covered[fi.target_b(j)] = 1;
    }
    s.detail = FamsRealization{std::move(edges)};
    return s;
}

namespace {

std::vector<std::vector<int>> all_paths(const GridGame& g) {
    std::vector<std::vector<int>> paths;
    std::vector<int> cur(g.T);
    std::function<void(int)> rec = [&](int t) {
        if (t == g.T) {
            paths.push_back(cur);
            return;
        }
        for (int j = 0; j < g.N; ++j) {
            if (t > 0 && !g.allowed(t - 1, cur[t - 1], j)) continue;
            cur[t] = j;
            rec(t + 1);
        }
    };
    rec(0);
    return paths;
}

uint64_t grid_path_count(const GridGame& g) {
    std::vector<uint64_t> cnt(g.N, 1);  // completions from the last layer
    for (int t = g.T - 2; t >= 0; --t) {
        std::vector<uint64_t> nxt(g.N, 0);
        for (int i = 0; i < g.N; ++i)
            for (int j = 0; j < g.N; ++j)
                if (g.allowed(t, i, j)) nxt[i] = sat_add(nxt[i], cnt[j]);
        cnt = std::move(nxt);
    }
    uint64_t total = 0;
    for (int i = 0; i < g.N; ++i) total = sat_add(total, cnt[i]);
    return total;
}

std::vector<PureStrategy> enumerate_grid(const GridGame& g, uint64_t cap) {
    uint64_t per = grid_path_count(g), total = 1;
    for (int m = 0; m < g.k; ++m) total = sat_mul(total, per);
    if (total > cap) throw TooLarge("enumerate_pure: grid strategy count exceeds cap");

    auto paths = all_paths(g);
    std::vector<PureStrategy> out;
    out.reserve(total);
    std::vector<size_t> pick(g.k, 0);
    while (true) {
        std::vector<std::vector<int>> tuple(g.k);
        for (int m = 0; m < g.k; ++m) tuple[m] = paths[pick[m]];
        out.push_back(strategy_from_paths(g, std::move(tuple)));
        int m = g.k - 1;
        while (m >= 0 && ++pick[m] == paths.size()) pick[m--] = 0;
        if (m < 0) break;
    }
    return out;
}

// ordered matchings of one component with a given size, edges ascending in
// both endpoints; enumeration keyed by the first (lowest) edge
void component_matchings(const FamsInstance::Component& comp, int d, int min_i, int min_j,
                         std::vector<std::pair<int, int>>& cur,
                         std::vector<std::vector<std::pair<int, int>>>& out) {
    if (d == 0) {
        out.push_back(cur);
        return;
    }
    for (auto [i, j] : comp.edges) {
        if (i < min_i || j < min_j) continue;
        cur.push_back({i, j});
        component_matchings(comp, d - 1, i + 1, j + 1, cur, out);
        cur.pop_back();
    }
}

uint64_t component_matching_count(const FamsInstance::Component& comp, int d) {
    int na = int(comp.a_idx.size()), nb = int(comp.b_idx.size());
    if (d == 0) return 1;
    if (d > std::min(na, nb)) return 0;
    // cnt[i][j] over suffixes for the current size
    std::vector<std::vector<uint64_t>> prev(na + 1, std::vector<uint64_t>(nb + 1, 1));
    std::vector<std::vector<uint64_t>> cur(na + 1, std::vector<uint64_t>(nb + 1, 0));
    for (int size = 1; size <= d; ++size) {
        for (int i = na; i >= 0; --i)
            for (int j = nb; j >= 0; --j) {
                uint64_t c = 0;
                for (auto [p, q] : comp.edges)
                    if (p >= i && q >= j) c = sat_add(c, prev[p + 1][q + 1]);
                cur[i][j] = c;
            }
        std::swap(prev, cur);
    }
    return prev[0][0];
}

std::vector<PureStrategy> enumerate_fams(const FamsInstance& fi, uint64_t cap) {
    int nc = int(fi.comps.size());
    std::vector<std::vector<uint64_t>> cnt(nc);
    for (int c = 0; c < nc; ++c) {
        cnt[c].resize(fi.k + 1);
        for (int d = 0; d <= fi.k; ++d) cnt[c][d] = component_matching_count(fi.comps[c], d);
    }
    // convolve component counts up to total size k
    std::vector<uint64_t> acc(fi.k + 1, 0);
    acc[0] = 1;
    for (int c = 0; c < nc; ++c) {
        std::vector<uint64_t> nxt(fi.k + 1, 0);
        for (int s = 0; s <= fi.k; ++s)
            for (int d = 0; d + s <= fi.k; ++d)
                nxt[s + d] = sat_add(nxt[s + d], sat_mul(acc[s], cnt[c][d]));
        acc = std::move(nxt);
    }
    if (acc[fi.k] > cap) throw TooLarge("enumerate_pure: flight strategy count exceeds cap");

    // per-component matching lists per size, then all compositions of k
    std::vector<std::vector<std::vector<std::vector<std::pair<int, int>>>>> lists(nc);
    for (int c = 0; c < nc; ++c) {
        lists[c].resize(fi.k + 1);
        for (int d = 0; d <= fi.k; ++d) {
            if (cnt[c][d] == 0) continue;
            std::vector<std::pair<int, int>> cur;
            component_matchings(fi.comps[c], d, 0, 0, cur, lists[c][d]);
        }
    }

    std::vector<PureStrategy> out;
    out.reserve(acc[fi.k]);
    std::vector<int> sizes(nc, 0);
    std::function<void(int, int)> compose = [&](int c, int left) {
        if (c == nc) {
            if (left != 0) return;
            std::vector<size_t> pick(nc, 0);
            while (true) {
                std::vector<std::pair<int, int>> edges;
                for (int cc = 0; cc < nc; ++cc) {
                    const auto& comp = fi.comps[cc];
                    for (auto [li, lj] : lists[cc][sizes[cc]][pick[cc]])
                        edges.push_back({comp.a_idx[li], comp.b_idx[lj]});
                }
                out.push_back(strategy_from_edges(fi, std::move(edges)));
                int cc = nc - 1;
                while (cc >= 0 && ++pick[cc] == lists[cc][sizes[cc]].size()) pick[cc--] = 0;
                if (cc < 0) break;
            }
            return;
        }
        for (int d = 0; d <= left; ++d) {
            if (lists[c][d].empty()) continue;
            sizes[c] = d;
            compose(c + 1, left - d);
        }
    };
    compose(0, fi.k);
    return out;
}

}  // namespace

std::vector<PureStrategy> enumerate_pure(const Instance& inst, uint64_t cap) {
    if (const auto* g = std::get_if<GridGame>(&inst)) return enumerate_grid(*g, cap);
    return enumerate_fams(std::get<FamsInstance>(inst), cap);
}

namespace {

Payoffs draw_payoffs(int n, Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Payoffs p;
    p.u_unc.resize(n);
    p.u_cov.resize(n);
    for (int v = 0; v < n; ++v) {
        p.u_unc[v] = 10.0 - 10.0 * u01(rng);  // (0, 10]
        p.u_cov[v] = 10.0 * u01(rng) - 10.0;  // [-10, 0)
    }
    return p;
}

}  // namespace

GeneratedGame random_grid_game(const GridParams& p, uint64_t seed) {
    Rng rng(mix64(seed, 0x67726964ULL));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<std::array<int, 3>> moves;
    for (int t = 0; t + 1 < p.T; ++t)
        for (int i = 0; i < p.N; ++i) {
            moves.push_back({t, i, i});  // staying put is always allowed
            for (int j = 0; j < p.N; ++j)
                if (j != i && u01(rng) < p.density) moves.push_back({t, i, j});
        }
    GeneratedGame gg;
    gg.instance = build_grid(p.T, p.N, p.k, moves);
    gg.payoffs = draw_payoffs(p.T * p.N, rng);
    return gg;
}

GeneratedGame random_fams_game(const FamsParams& p, uint64_t seed) {
    Rng rng(mix64(seed, 0x66616d73ULL));
    std::uniform_real_distribution<double> hours(0.0, 24.0);
    int n1 = p.flights / 2, n2 = p.flights - n1;
    int k = std::max(1, int(std::llround(p.dts * p.flights / 2.0)));
    // Reject draws with an unboardable flight: one isolated flight pins the
    // game value at its uncovered utility and collapses every solver to a
    // near-pure strategy, which swamps the statistics of interest.
    auto all_boardable = [&](const std::vector<Flight>& a, const std::vector<Flight>& b) {
        auto ok = [&](const Flight& x, const Flight& y) {
            return x.city == y.city && y.time - x.time >= p.t1 && y.time - x.time <= p.t2;
        };
        for (const auto& fa : a)
            if (std::none_of(b.begin(), b.end(), [&](const Flight& fb) { return ok(fa, fb); }))
                return false;
        for (const auto& fb : b)
            if (std::none_of(a.begin(), a.end(), [&](const Flight& fa) { return ok(fa, fb); }))
                return false;
        return true;
    };
    for (int attempt = 0; attempt < 500; ++attempt) {
        std::uniform_int_distribution<int> city(0, p.cities - 1);
        std::vector<Flight> a(n1), b(n2);
        for (auto& f : a) f = {hours(rng), "C" + std::to_string(city(rng))};
        for (auto& f : b) f = {hours(rng), "C" + std::to_string(city(rng))};
        if (!all_boardable(a, b)) continue;
        try {
            GeneratedGame gg;
            gg.instance = build_fams(std::move(a), std::move(b), p.t1, p.t2, k);
            gg.payoffs = draw_payoffs(n1 + n2, rng);
            return gg;
        } catch (const InfeasibleK&) {
            continue;
        }
    }
    // High dts or tight windows can defeat rejection.  Fall back to planting
    // a full pairing: return i departs a legal turnaround after outbound i,
    // from its city, so every flight is boardable and any k <= n/2 works.
    std::uniform_int_distribution<int> city(0, p.cities - 1);
    std::uniform_real_distribution<double> turnaround(p.t1, p.t2);
    std::vector<Flight> a(n1), b(n2);
    for (auto& f : a) f = {hours(rng), "C" + std::to_string(city(rng))};
    for (int i = 0; i < n2; ++i) {
        const Flight& src = a[i % n1];
        b[i] = {src.time + turnaround(rng), src.city};
    }
    GeneratedGame gg;
    gg.instance = build_fams(std::move(a), std::move(b), p.t1, p.t2, k);
    gg.payoffs = draw_payoffs(n1 + n2, rng);
    return gg;
}

nlohmann::json instance_to_json(const Instance& inst) {
    nlohmann::json j;
    if (const auto* g = std::get_if<GridGame>(&inst)) {
        j["kind"] = "grid";
        j["T"] = g->T;
        j["N"] = g->N;
        j["k"] = g->k;
        auto& mv = j["moves"] = nlohmann::json::array();
        for (const auto& m : g->moves) mv.push_back({m[0], m[1], m[2]});
    } else {
        const auto& fi = std::get<FamsInstance>(inst);
        j["kind"] = "fams";
        auto& fa = j["flights_A"] = nlohmann::json::array();
        for (const auto& f : fi.a) fa.push_back({{"arr", f.time}, {"city", f.city}});
        auto& fb = j["flights_B"] = nlohmann::json::array();
        for (const auto& f : fi.b) fb.push_back({{"dep", f.time}, {"city", f.city}});
        j["T1"] = fi.t1;
        j["T2"] = fi.t2;
        j["k"] = fi.k;
    }
    return j;
}

Instance instance_from_json(const nlohmann::json& j) {
    try {
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "grid") {
            std::vector<std::array<int, 3>> moves;
            for (const auto& m : j.at("moves"))
                moves.push_back({m.at(0).get<int>(), m.at(1).get<int>(), m.at(2).get<int>()});
            return build_grid(j.at("T").get<int>(), j.at("N").get<int>(), j.at("k").get<int>(),
                              moves);
        }
        if (kind == "fams") {
            std::vector<Flight> a, b;
            for (const auto& f : j.at("flights_A"))
                a.push_back({f.at("arr").get<double>(), f.at("city").get<std::string>()});
            for (const auto& f : j.at("flights_B"))
                b.push_back({f.at("dep").get<double>(), f.at("city").get<std::string>()});
            return build_fams(std::move(a), std::move(b), j.at("T1").get<double>(),
                              j.at("T2").get<double>(), j.at("k").get<int>());
        }
        throw Error("instance_from_json: unknown kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("instance_from_json: ") + e.what());
    }
}

nlohmann::json payoffs_to_json(const Payoffs& p) {
    return {{"u_unc", p.u_unc}, {"u_cov", p.u_cov}};
}

Payoffs payoffs_from_json(const nlohmann::json& j, int n_targets) {
    try {
        Payoffs p;
        p.u_unc = j.at("u_unc").get<std::vector<double>>();
        p.u_cov = j.at("u_cov").get<std::vector<double>>();
        if (int(p.u_unc.size()) != n_targets || int(p.u_cov.size()) != n_targets)
            throw Error("payoffs_from_json: arrays must match the target count");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("payoffs_from_json: ") + e.what());
    }
}

}  // namespace patrol
