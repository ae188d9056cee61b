#pragma once

// Attacker-side simulation: the attacker watches the real-time coverage bits
// of a monitored target set, forms the exact posterior over the defender's
// realization, and attacks the best attackable target.  Works on explicit
// mixtures (Bayes over the support) and on product-form max-entropy
// strategies (inclusion-exclusion over zeroed-weight counts, exponential
// only in the monitored set size).

#include <memory>
#include <variant>
#include <vector>

#include "patrol/model.hpp"
#include "patrol/oracle.hpp"

namespace patrol::leakage {

struct ProductForm {
    std::shared_ptr<const CountingOracle> oracle;
    std::vector<double> lambda;  // per-target weights, pure strategy S drawn prop. to prod lambda
};

using MixedStrategy = std::variant<ExplicitStrategy, ProductForm>;

struct ObservationScenario {
    std::vector<int> monitored;   // coverage bits the attacker sees
    std::vector<int> attackable;  // targets the attacker may hit
    enum class Mode { Auto, Exact, MonteCarlo } mode = Mode::Auto;
    int mc_samples = 100000;
};

// monitored targets must be observable in the instance (grid: first layer)
ObservationScenario make_scenario(const Instance& inst, std::vector<int> monitored);

// expected attacker utility; rng only consulted in Monte-Carlo mode
double evaluate(const MixedStrategy& strat, const Payoffs& pay, const ObservationScenario& sc,
                Rng* rng = nullptr);

struct EntropyReport {
    std::vector<double> marginal;  // x_i
    std::vector<double> entropy;   // H(X_i) in nats
    struct Candidate {
        int k = -1;
        bool trivial = false;              // Pr[X_k] is 0 or 1: observing it is vacuous
        std::vector<double> cond_entropy;  // E over X_k of H(X_i | X_k)
        double conditional_sum = 0.0;      // over i != k
        double unconditional_sum = 0.0;
        double gap = 0.0;
    };
    std::vector<Candidate> candidates;
};

EntropyReport entropy_report(const MixedStrategy& strat, const std::vector<int>& candidates);

// Shannon entropy of an explicit mixture, nats
double mixture_entropy(const ExplicitStrategy& mix);

}  // namespace patrol::leakage
