#pragma once

// Game model: layered-grid patrol instances, flight round-trip instances,
// pure strategies and their enumeration, random generators, JSON I/O.
//
// Target indexing. Grid: target (t,i) has index t*N+i, t=0..T-1 top to
// bottom. Flights: outbound flight i is target i, return flight j is target
// n_a + j. All indices 0-based, also in JSON.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "patrol/common.hpp"

#include <json.hpp>

namespace patrol {

struct GridGame {
    int T = 0, N = 0, k = 0;
    std::vector<std::array<int, 3>> moves;       // (t, i, j): layer t cell i -> layer t+1 cell j
    std::vector<std::vector<uint8_t>> adj;       // [T-1] matrices, row-major N*N

    int num_targets() const { return T * N; }
    int target(int t, int i) const { return t * N + i; }
    bool allowed(int t, int i, int j) const { return adj[t][i * N + j] != 0; }
};

struct Flight {
    double time = 0;  // arrival (outbound) or departure (return), fractional hours
    std::string city;
};

struct FamsInstance {
    std::vector<Flight> a;  // outbound
    std::vector<Flight> b;  // return
    double t1 = 0, t2 = 0;  // allowed dep-arr gap, inclusive
    int k = 0;

    // one component per city; flight lists time-sorted, edges in local indices
    struct Component {
        std::vector<int> a_idx, b_idx;
        std::vector<std::pair<int, int>> edges;
    };
    std::vector<Component> comps;
    std::vector<std::pair<int, int>> where_a, where_b;  // original index -> (comp, local)

    int num_targets() const { return int(a.size() + b.size()); }
    int target_a(int i) const { return i; }
    int target_b(int j) const { return int(a.size()) + j; }
    bool edge_ok(int i, int j) const {
        double gap = b[j].time - a[i].time;
        return a[i].city == b[j].city && gap >= t1 && gap <= t2;
    }
};

using Instance = std::variant<GridGame, FamsInstance>;

struct GridRealization {
    std::vector<std::vector<int>> paths;  // paths[m][t] = cell of patroller m at layer t
};
struct FamsRealization {
    std::vector<std::pair<int, int>> edges;  // (outbound, return) original indices
};

struct PureStrategy {
    std::vector<uint8_t> covered;  // indicator over targets
    std::variant<GridRealization, FamsRealization> detail;

    std::string key() const;  // realization identity, distinct tuples/matchings distinct
};

struct ExplicitStrategy {
    std::vector<PureStrategy> support;
    std::vector<double> probs;
};

struct Payoffs {
    std::vector<double> u_unc, u_cov;  // attacker's utility, uncovered/covered
};

inline double attacker_utility(const Payoffs& pay, const std::vector<uint8_t>& covered, int i) {
    return covered[i] ? pay.u_cov[i] : pay.u_unc[i];
}

int num_targets(const Instance& inst);
std::vector<int> attackable_targets(const Instance& inst);  // grid: last layer; flights: all
std::vector<int> observable_targets(const Instance& inst);  // grid: first layer; flights: all

// Validates and derives adjacency. Throws DisconnectedLayer when a cell above
// the last layer has no outgoing move, TooLarge when N^k overflows the
// position-tuple index space.
GridGame build_grid(int T, int N, int k, const std::vector<std::array<int, 3>>& moves);

// Splits flights into per-city components and checks a k-matching exists
// (throws InfeasibleK otherwise).
FamsInstance build_fams(std::vector<Flight> a, std::vector<Flight> b, double t1, double t2, int k);

// All pure strategies in a fixed deterministic order; throws TooLarge when
// the count exceeds cap.
std::vector<PureStrategy> enumerate_pure(const Instance& inst, uint64_t cap = 10'000'000);

PureStrategy strategy_from_paths(const GridGame& g, std::vector<std::vector<int>> paths);
PureStrategy strategy_from_edges(const FamsInstance& fi, std::vector<std::pair<int, int>> edges);

struct GridParams {
    int T = 3, N = 4, k = 2;
    double density = 0.35;  // probability of each non-stay move
};
struct FamsParams {
    int flights = 60;  // split evenly between outbound and return
    int cities = 3;
    double dts = 0.5;  // defender-to-target ratio, k = round(dts * flights / 2)
    double t1 = 1.0, t2 = 12.0;
};

struct GeneratedGame {
    Instance instance;
    Payoffs payoffs;
};

// Same seed, same game. Payoffs drawn per target: u_unc in (0,10], u_cov in
// [-10,0). The flight generator redraws times until a k-matching exists.
GeneratedGame random_grid_game(const GridParams& p, uint64_t seed);
GeneratedGame random_fams_game(const FamsParams& p, uint64_t seed);

// max bipartite matching size on the instance's compatibility graph
int max_matching_size(const FamsInstance& fi);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);
nlohmann::json payoffs_to_json(const Payoffs& p);
Payoffs payoffs_from_json(const nlohmann::json& j, int n_targets);

}  // namespace patrol
