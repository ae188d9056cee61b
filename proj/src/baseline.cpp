#include "patrol/baseline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "patrol/count_fams.hpp"
#include "patrol/count_grid.hpp"
#include "patrol/lp.hpp"

namespace patrol::baseline {

namespace {

void check_payoffs(const Payoffs& pay, int nt) {
    if (int(pay.u_unc.size()) != nt || int(pay.u_cov.size()) != nt)
        throw Error("payoff vectors do not match the target count");
}

ExplicitStrategy cleanup_mixture(std::vector<PureStrategy> support, std::vector<double> probs) {
    double total = 0.0;
    for (double& p : probs) {
        if (p < 0.0) p = 0.0;
        total += p;
    }
    if (total <= 0.0) throw OracleFailure("mixture collapsed to zero mass");
    ExplicitStrategy out;
    for (size_t j = 0; j < support.size(); ++j) {
        if (probs[j] / total < 1e-12) continue;
        out.support.push_back(std::move(support[j]));
        out.probs.push_back(probs[j] / total);
    }
    return out;
}

// The pricing oracle breaks exact ties toward the lowest tuple code, so on
// games where many paths cover the same targets every column would share the
// same early-layer cells and the mixture would look deterministic to an
// observer of those layers.  Real masters do not behave that way: any
// optimal column is as good as another.  Spreading ties with a fixed
// per-round jitter (about 1e-10, far below improve_tol) keeps runs
// bit-reproducible while letting the support sample the tie set.
void spread_ties(std::vector<double>& w, int round) {
    Rng rng(mix64(0x7072696365ULL, uint64_t(round)));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (double& v : w) v += 1e-10 * u01(rng);
}

std::vector<double> mixture_marginals(const ExplicitStrategy& mix, int nt) {
    std::vector<double> x(nt, 0.0);
    for (size_t j = 0; j < mix.support.size(); ++j)
        for (int i = 0; i < nt; ++i)
            if (mix.support[j].covered[i]) x[i] += mix.probs[j];
    for (double& v : x) v = std::clamp(v, 0.0, 1.0);
    return x;
}

}  // namespace

PureStrategy best_response_column(const Instance& inst, const std::vector<double>& weights) {
    if (int(weights.size()) != num_targets(inst))
        throw Error("best_response_column: weight vector size mismatch");
    if (const auto* g = std::get_if<GridGame>(&inst))
        return strategy_from_paths(*g, grid::best_response(*g, weights).paths);
    const auto& fi = std::get<FamsInstance>(inst);
    return strategy_from_edges(fi, fams::best_response(fi, weights).edges);
}

ColgResult solve_no_leakage(const Instance& inst, const Payoffs& pay, double improve_tol,
                            int max_iters) {
    int nt = num_targets(inst);
    check_payoffs(pay, nt);
    auto attackable = attackable_targets(inst);
    int na = int(attackable.size());

    std::vector<PureStrategy> cols;
    std::set<std::string> keys;
    {
        std::vector<double> w(nt, 0.0);
        for (int i : attackable) w[i] = 1.0;
        spread_ties(w, 0);
        cols.push_back(best_response_column(inst, w));
        keys.insert(cols.back().key());
    }

    ColgResult res;
    std::vector<double> probs;
    for (int iter = 0; iter < max_iters; ++iter) {
        res.iterations = iter + 1;
        int nc = int(cols.size());
        lp::Problem<double> p;
        p.n = nc + 1;  // column probabilities, then the epigraph utility u
        p.c.assign(p.n, 0.0);
        p.c.back() = 1.0;
        p.free_var.assign(p.n, 0);
        p.free_var.back() = 1;
        p.A.assign(na, std::vector<double>(p.n, 0.0));
        p.b.assign(na, 0.0);
        for (int a = 0; a < na; ++a) {
            for (int j = 0; j < nc; ++j)
                p.A[a][j] = attacker_utility(pay, cols[j].covered, attackable[a]);
            p.A[a][nc] = -1.0;
        }
        p.E.assign(1, std::vector<double>(p.n, 1.0));
        p.E[0][nc] = 0.0;
        p.f.assign(1, 1.0);
        auto sol = lp::solve(p);
        if (sol.status != lp::Status::Optimal) throw OracleFailure("colg: master LP failed");
        res.value = sol.objective;
        probs.assign(sol.x.begin(), sol.x.begin() + nc);

        std::vector<double> w(nt, 0.0);
        for (int a = 0; a < na; ++a) {
            double y = std::max(0.0, sol.dual_ineq[a]);
            w[attackable[a]] = y * (pay.u_unc[attackable[a]] - pay.u_cov[attackable[a]]);
            if (w[attackable[a]] < 0.0) w[attackable[a]] = 0.0;
        }
        spread_ties(w, iter + 1);
        auto cand = best_response_column(inst, w);
        double reduced = sol.dual_eq[0];
        for (int a = 0; a < na; ++a)
            reduced +=
                std::max(0.0, sol.dual_ineq[a]) * attacker_utility(pay, cand.covered, attackable[a]);
        if (reduced >= -improve_tol) break;
        if (!keys.insert(cand.key()).second) {
            logf("colg: pricing repeated a known column (reduced %.3g), stopping", reduced);
            break;
        }
        cols.push_back(std::move(cand));
        if (iter + 1 == max_iters) throw OracleFailure("colg: iteration limit reached");
    }
    res.mixture = cleanup_mixture(std::move(cols), std::move(probs));
    res.marginals = mixture_marginals(res.mixture, nt);
    return res;
}

RigorResult rigoropt_mini(const Instance& inst, const Payoffs& pay, const LeakageModel& model,
                          long long enumerate_cap) {
    int nt = num_targets(inst);
    check_payoffs(pay, nt);
    auto attackable = attackable_targets(inst);
    int na = int(attackable.size());

    auto all = enumerate_pure(inst, enumerate_cap);
    std::map<std::string, int> seen;  // dedupe by covered set; utilities only see coverage
    std::vector<PureStrategy> sets;
    for (auto& s : all) {
        std::string ck(s.covered.begin(), s.covered.end());
        if (seen.emplace(std::move(ck), int(sets.size())).second) sets.push_back(std::move(s));
    }
    int m = int(sets.size());

    std::vector<std::pair<int, double>> mu;
    std::vector<int> leaks;
    if (model.kind == LeakageModel::Kind::Probabilistic) {
        double total = 0.0;
        for (auto [k, p] : model.mu) {
            if (k < 0 || k >= nt || p < 0.0) throw Error("rigoropt_mini: bad leak distribution");
            total += p;
        }
        if (total <= 0.0) throw Error("rigoropt_mini: leak distribution has no mass");
        for (auto [k, p] : model.mu)
            if (p > 0.0) {
                mu.push_back({k, p / total});
                leaks.push_back(k);
            }
    } else {
        if (model.candidates.empty()) throw Error("rigoropt_mini: no leak candidates");
        for (int k : model.candidates) {
            if (k < 0 || k >= nt) throw Error("rigoropt_mini: candidate out of range");
            leaks.push_back(k);
        }
    }
    int K = int(leaks.size());
    bool adversarial = model.kind == LeakageModel::Kind::Adversarial;

    // p_1..p_m, then u_{k,b} epigraphs, then v for the adversarial max
    lp::Problem<double> p;
    p.n = m + 2 * K + (adversarial ? 1 : 0);
    p.c.assign(p.n, 0.0);
    p.free_var.assign(p.n, 0);
    for (int t = m; t < p.n; ++t) p.free_var[t] = 1;
    if (adversarial) {
        p.c.back() = 1.0;
    } else {
        for (int ki = 0; ki < K; ++ki)
            for (int b = 0; b < 2; ++b) p.c[m + 2 * ki + b] = mu[ki].second;
    }
    for (int ki = 0; ki < K; ++ki)
        for (int b = 0; b < 2; ++b)
            for (int a = 0; a < na; ++a) {
                std::vector<double> row(p.n, 0.0);
                for (int j = 0; j < m; ++j)
                    if (int(sets[j].covered[leaks[ki]]) == b)
                        row[j] = attacker_utility(pay, sets[j].covered, attackable[a]);
                row[m + 2 * ki + b] = -1.0;
                p.A.push_back(std::move(row));
                p.b.push_back(0.0);
            }
    if (adversarial)
        for (int ki = 0; ki < K; ++ki) {
            std::vector<double> row(p.n, 0.0);
            row[m + 2 * ki] = 1.0;
            row[m + 2 * ki + 1] = 1.0;
            row.back() = -1.0;
            p.A.push_back(std::move(row));
            p.b.push_back(0.0);
        }
    p.E.assign(1, std::vector<double>(p.n, 0.0));
    for (int j = 0; j < m; ++j) p.E[0][j] = 1.0;
    p.f.assign(1, 1.0);

    auto sol = lp::solve(p);
    if (sol.status != lp::Status::Optimal) throw OracleFailure("rigoropt_mini: LP failed");
    RigorResult out;
    out.value = sol.objective;
    out.mixture = cleanup_mixture(std::move(sets), {sol.x.begin(), sol.x.begin() + m});
    return out;
}

}  // namespace patrol::baseline
