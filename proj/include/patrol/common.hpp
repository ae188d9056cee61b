#pragma once

// Shared error types, logging and small utilities.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>

namespace patrol {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// model
struct DisconnectedLayer : Error { using Error::Error; };
struct InfeasibleK : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };

// counting / sampling
struct NoFeasiblePath : Error { using Error::Error; };
struct NotAMatching : Error { using Error::Error; };

// lp / card
struct Infeasible : Error { using Error::Error; };
struct Unbounded : Error { using Error::Error; };
struct NotInPolytope : Error { using Error::Error; };
struct NonIntegralVertex : Error { using Error::Error; };
struct NumericalStall : Error { using Error::Error; };

// leakage / oracles
struct UnconditionableStrategy : Error { using Error::Error; };
struct OracleFailure : Error { using Error::Error; };

using Rng = std::mt19937_64;

// splitmix64, used to derive independent streams from a user seed
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }

inline uint64_t mix64(uint64_t a, uint64_t b, uint64_t c) { return mix64(mix64(a, b), c); }

// Diagnostics go to stderr when MAXENT_PATROL_LOG is set to a nonempty value.
inline bool log_enabled() {
    static const bool on = [] {
        const char* v = std::getenv("MAXENT_PATROL_LOG");
        return v != nullptr && v[0] != '\0';
    }();
    return on;
}

template <class... Args>
void logf(const char* fmt, Args... args) {
    if (!log_enabled()) return;
    std::fprintf(stderr, "[maxent-patrol] ");
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

inline void logf(const char* msg) {
    if (!log_enabled()) return;
    std::fprintf(stderr, "[maxent-patrol] %s\n", msg);
}

}  // namespace patrol
