#include "patrol/leakage.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

namespace patrol::leakage {

namespace {

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log1p(-p);
}

int strategy_dim(const MixedStrategy& strat) {
    if (const auto* ex = std::get_if<ExplicitStrategy>(&strat)) {
        if (ex->support.empty()) throw Error("evaluate: empty mixture");
        return int(ex->support[0].covered.size());
    }
    const auto& pf = std::get<ProductForm>(strat);
    if (!pf.oracle) throw UnconditionableStrategy("product-form strategy carries no oracle");
    return pf.oracle->dim();
}

uint64_t pattern_bits(const std::vector<uint8_t>& covered, const std::vector<int>& monitored) {
    uint64_t bits = 0;
    for (size_t t = 0; t < monitored.size(); ++t)
        if (covered[monitored[t]]) bits |= uint64_t(1) << t;
    return bits;
}

double eval_explicit_exact(const ExplicitStrategy& mix, const Payoffs& pay,
                           const ObservationScenario& sc) {
    size_t na = sc.attackable.size();
    std::unordered_map<uint64_t, std::vector<double>> util;  // per pattern, per attackable
    for (size_t s = 0; s < mix.support.size(); ++s) {
        uint64_t bits = pattern_bits(mix.support[s].covered, sc.monitored);
        auto& u = util[bits];
        if (u.empty()) u.assign(na, 0.0);
        for (size_t a = 0; a < na; ++a)
            u[a] += mix.probs[s] * attacker_utility(pay, mix.support[s].covered, sc.attackable[a]);
    }
    double value = 0.0;
    for (const auto& [bits, u] : util) value += *std::max_element(u.begin(), u.end());
    return value;
}

struct ZeroSetTables {
    std::vector<double> logc;                // per subset mask of the monitored set
    std::vector<std::vector<double>> marg;
};

ZeroSetTables zero_set_tables(const ProductForm& pf, const std::vector<int>& monitored) {
    int m = int(monitored.size());
    ZeroSetTables tb;
    tb.logc.assign(size_t(1) << m, -std::numeric_limits<double>::infinity());
    tb.marg.assign(size_t(1) << m, {});
    for (uint64_t z = 0; z < (uint64_t(1) << m); ++z) {
        auto lam = pf.lambda;
        for (int t = 0; t < m; ++t)
            if (z >> t & 1) lam[monitored[t]] = 0.0;
        try {
            auto [logc, marg] = pf.oracle->count_and_marginals(lam);
            tb.logc[z] = logc;
            tb.marg[z] = std::move(marg);
        } catch (const NoFeasiblePath&) {
            // every strategy touches a zeroed target; the subset has count 0
        }
    }
    return tb;
}

double eval_product_exact(const ProductForm& pf, const Payoffs& pay,
                          const ObservationScenario& sc) {
    int m = int(sc.monitored.size());
    if (m > 16) throw Error("evaluate: monitored set too large for exact conditioning");
    auto tb = zero_set_tables(pf, sc.monitored);
    double shift = tb.logc[0];
    size_t na = sc.attackable.size();
    uint64_t full = (uint64_t(1) << m) - 1;
    double value = 0.0;
    std::vector<double> util(na);
    // pattern bit = 1 means observed covered; sum over zero sets Z = W0 | V,
    // V a subset of the covered part, signed by |V| parity
    for (uint64_t pat = 0; pat <= full; ++pat) {
        uint64_t w0 = full & ~pat;
        double weight = 0.0;
        std::fill(util.begin(), util.end(), 0.0);
        uint64_t v = pat;
        while (true) {
            uint64_t z = w0 | v;
            double c = std::exp(tb.logc[z] - shift);
            if (c > 0.0) {
                double sgn = (std::popcount(v) & 1) ? -1.0 : 1.0;
                weight += sgn * c;
                for (size_t a = 0; a < na; ++a) {
                    int i = sc.attackable[a];
                    double e = pay.u_unc[i] + tb.marg[z][i] * (pay.u_cov[i] - pay.u_unc[i]);
                    util[a] += sgn * c * e;
                }
            }
            if (v == 0) break;
            v = (v - 1) & pat;
        }
        if (weight <= 1e-14) continue;
        value += *std::max_element(util.begin(), util.end());
    }
    return value;
}

double eval_monte_carlo(const MixedStrategy& strat, const Payoffs& pay,
                        const ObservationScenario& sc, Rng& rng) {
    size_t na = sc.attackable.size();
    std::unordered_map<uint64_t, std::vector<double>> util;
    auto record = [&](const PureStrategy& s) {
        auto& u = util[pattern_bits(s.covered, sc.monitored)];
        if (u.empty()) u.assign(na, 0.0);
        for (size_t a = 0; a < na; ++a)
            u[a] += attacker_utility(pay, s.covered, sc.attackable[a]);
    };
    if (const auto* ex = std::get_if<ExplicitStrategy>(&strat)) {
        std::discrete_distribution<int> pick(ex->probs.begin(), ex->probs.end());
        for (int n = 0; n < sc.mc_samples; ++n) record(ex->support[pick(rng)]);
    } else {
        const auto& pf = std::get<ProductForm>(strat);
        auto sampler = pf.oracle->make_sampler(pf.lambda);
        for (int n = 0; n < sc.mc_samples; ++n) record(sampler->draw(rng));
    }
    double value = 0.0;
    for (const auto& [bits, u] : util) value += *std::max_element(u.begin(), u.end());
    return value / double(sc.mc_samples);
}

}  // namespace

ObservationScenario make_scenario(const Instance& inst, std::vector<int> monitored) {
    ObservationScenario sc;
    auto obs = observable_targets(inst);
    std::set<int> ok(obs.begin(), obs.end());
    for (int t : monitored)
        if (!ok.count(t)) throw Error("make_scenario: target is not observable at the first layer");
    sc.monitored = std::move(monitored);
    sc.attackable = attackable_targets(inst);
    return sc;
}

double evaluate(const MixedStrategy& strat, const Payoffs& pay, const ObservationScenario& sc,
                Rng* rng) {
    int dim = strategy_dim(strat);
    if (int(pay.u_unc.size()) != dim || int(pay.u_cov.size()) != dim)
        throw Error("evaluate: payoff size mismatch");
    for (int t : sc.monitored)
        if (t < 0 || t >= dim) throw Error("evaluate: monitored target out of range");
    if (sc.attackable.empty()) throw Error("evaluate: no attackable targets");

    auto mode = sc.mode;
    if (mode == ObservationScenario::Mode::Auto) {
        const auto* ex = std::get_if<ExplicitStrategy>(&strat);
        mode = (ex && ex->support.size() > 10000) ? ObservationScenario::Mode::MonteCarlo
                                                  : ObservationScenario::Mode::Exact;
    }
    if (mode == ObservationScenario::Mode::MonteCarlo) {
        if (!rng) throw Error("evaluate: Monte-Carlo mode needs a generator");
        return eval_monte_carlo(strat, pay, sc, *rng);
    }
    if (const auto* ex = std::get_if<ExplicitStrategy>(&strat))
        return eval_explicit_exact(*ex, pay, sc);
    return eval_product_exact(std::get<ProductForm>(strat), pay, sc);
}

EntropyReport entropy_report(const MixedStrategy& strat, const std::vector<int>& candidates) {
    int dim = strategy_dim(strat);
    EntropyReport rep;
    const auto* ex = std::get_if<ExplicitStrategy>(&strat);
    const ProductForm* pf = ex ? nullptr : &std::get<ProductForm>(strat);

    std::vector<double> x(dim, 0.0);
    double base_logc = 0.0;
    if (ex) {
        for (size_t s = 0; s < ex->support.size(); ++s)
            for (int i = 0; i < dim; ++i)
                if (ex->support[s].covered[i]) x[i] += ex->probs[s];
    } else {
        auto [logc, marg] = pf->oracle->count_and_marginals(pf->lambda);
        base_logc = logc;
        x = std::move(marg);
    }
    rep.marginal = x;
    rep.entropy.resize(dim);
    for (int i = 0; i < dim; ++i) rep.entropy[i] = binary_entropy(x[i]);

    for (int k : candidates) {
        if (k < 0 || k >= dim) throw Error("entropy_report: candidate out of range");
        EntropyReport::Candidate cand;
        cand.k = k;
        double pr1, pr0;
        std::vector<double> x1(dim, 0.0), x0(dim, 0.0);
        if (ex) {
            pr1 = x[k];
            pr0 = 1.0 - pr1;
            if (pr1 > 1e-12 && pr0 > 1e-12) {
                std::vector<double> joint(dim, 0.0);
                for (size_t s = 0; s < ex->support.size(); ++s) {
                    if (!ex->support[s].covered[k]) continue;
                    for (int i = 0; i < dim; ++i)
                        if (ex->support[s].covered[i]) joint[i] += ex->probs[s];
                }
                for (int i = 0; i < dim; ++i) {
                    x1[i] = joint[i] / pr1;
                    x0[i] = (x[i] - joint[i]) / pr0;
                }
            }
        } else {
            auto lam = pf->lambda;
            lam[k] = 0.0;
            try {
                auto [logc0, marg0] = pf->oracle->count_and_marginals(lam);
                pr0 = std::exp(logc0 - base_logc);
                x0 = std::move(marg0);
            } catch (const NoFeasiblePath&) {
                pr0 = 0.0;
            }
            pr1 = 1.0 - pr0;
            if (pr1 > 1e-12 && pr0 > 1e-12)
                for (int i = 0; i < dim; ++i)
                    x1[i] = std::clamp((x[i] - pr0 * x0[i]) / pr1, 0.0, 1.0);
        }
        if (pr1 <= 1e-12 || pr0 <= 1e-12) {
            cand.trivial = true;
            cand.cond_entropy = rep.entropy;
        } else {
            cand.cond_entropy.resize(dim);
            for (int i = 0; i < dim; ++i)
                cand.cond_entropy[i] = pr1 * binary_entropy(x1[i]) + pr0 * binary_entropy(x0[i]);
        }
        for (int i = 0; i < dim; ++i) {
            if (i == k) continue;
            cand.conditional_sum += cand.cond_entropy[i];
            cand.unconditional_sum += rep.entropy[i];
        }
        cand.gap = cand.trivial ? 0.0 : cand.unconditional_sum - cand.conditional_sum;
        rep.candidates.push_back(std::move(cand));
    }
    return rep;
}

double mixture_entropy(const ExplicitStrategy& mix) {
    double h = 0.0;
    for (double p : mix.probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

}  // namespace patrol::leakage
