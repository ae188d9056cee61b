#pragma once

// Seeded sweep harness: for each sweep point and seed, build a random
// zero-sum game, solve it leakage-oblivious (column generation), re-implement
// the optimal marginals by max-entropy and Caratheodory sampling, then score
// every strategy against a partial-observation attacker.  Output is a flat
// CSV, deterministic under fixed seed count and parallelism-independent.

#include <cstdint>
#include <string>
#include <vector>

namespace patrol::experiment {

struct Row {
    std::string sweep;  // sweep point label: T / #MoT / DtS value, or scenario name
    int sweep_index = 0;
    uint64_t seed = 0;
    std::string algorithm;  // colg | maxen | card | rigoropt
    double attacker_utility = 0.0;
    double baseline = 0.0;       // no-leakage optimum of the same game
    long long support_size = 0;  // 0 when not measured
    double entropy = 0.0;        // mixture Shannon entropy, nats
};

struct SuiteOptions {
    int seeds = 20;
    int parallel = 1;
    int card_decompositions = 10;
    int maxen_support_draws = 100000;  // support suite only
};

// fig5a: grid, T in {3,5,7,9}, N=9, k=2, 2 monitored targets
// fig5b: grid, T=9, monitored-set size 1..6 (nested sets)
// fig5c: FAMS, 60 flights, DtS in {0.1,0.3,0.5,0.7,0.9}, 2 monitored
// fig4b: tiny grid, probabilistic leak: accurate / inaccurate / manipulation
// fig4c: tiny grid, adversarial leak: same three scenarios
// support: FAMS, 100 flights, DtS=0.5, distinct-strategy counts
std::vector<std::string> suite_names();

std::vector<Row> scenario_suite(const std::string& name, const SuiteOptions& opt = {});

void write_csv(const std::vector<Row>& rows, const std::string& path);

// per-(sweep point, algorithm) seed means, same deterministic ordering
void write_summary(const std::vector<Row>& rows, const std::string& path);

}  // namespace patrol::experiment
