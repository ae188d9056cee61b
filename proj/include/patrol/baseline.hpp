#pragma once

// No-leakage optimal defense via column generation, plus an exact
// leakage-aware LP for instances small enough to enumerate.  Both produce
// explicit mixtures; the column-generation marginals feed the max-entropy
// and decomposition pipelines.

#include <utility>
#include <vector>

#include "patrol/model.hpp"

namespace patrol::baseline {

struct ColgResult {
    ExplicitStrategy mixture;
    std::vector<double> marginals;  // per-target coverage of the mixture
    double value = 0.0;             // optimal attacker utility (BaseLine)
    int iterations = 0;
};

// zero-sum master: min u subject to sum_j p_j U_att(i, S_j) <= u per
// attackable target i, p a distribution; pricing adds the best-response
// column until none improves by more than improve_tol
ColgResult solve_no_leakage(const Instance& inst, const Payoffs& pay, double improve_tol = 1e-7,
                            int max_iters = 3000);

// max-weight pure strategy for nonnegative per-target weights
PureStrategy best_response_column(const Instance& inst, const std::vector<double>& weights);

struct LeakageModel {
    enum class Kind { Probabilistic, Adversarial } kind = Kind::Probabilistic;
    std::vector<std::pair<int, double>> mu;  // probabilistic: (target, probability)
    std::vector<int> candidates;             // adversarial: possible leaking targets
};

struct RigorResult {
    ExplicitStrategy mixture;
    double value = 0.0;
};

// exact optimum against the leakage model, by LP over the deduplicated
// covered sets of the full enumeration; tiny instances only
RigorResult rigoropt_mini(const Instance& inst, const Payoffs& pay, const LeakageModel& model,
                          long long enumerate_cap = 200000);

}  // namespace patrol::baseline
