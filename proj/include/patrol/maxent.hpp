#pragma once

// Max-entropy coverage: fit per-target weights lambda so that the
// product-form distribution p_S ∝ prod_{v in S} lambda_v matches a marginal
// vector, by minimizing the convex dual f(theta) = log C(e^theta) - <x, theta>.

#include <string>
#include <vector>

#include "patrol/oracle.hpp"

#include <json.hpp>

namespace patrol::maxent {

enum class FitStatus { Converged, NotImplementable };

struct FitOptions {
    double tol = 1e-4;
    int max_iters = 5000;
    double clamp_eps = 1e-6;   // {0,1} marginals pulled to {eps, 1-eps}
    int plateau_window = 50;   // iterations
    double plateau_rel = 1e-10;
};

struct FittedWeights {
    std::vector<double> theta;  // lambda = exp(theta)
    double residual = 0;        // ‖marginals(lambda) − clamped x‖∞
    std::vector<int> clamped;
    FitStatus status = FitStatus::Converged;
    int iterations = 0;
    std::string stop_reason;

    std::vector<double> lambda() const;
};

FittedWeights fit(const CountingOracle& oracle, const std::vector<double>& x,
                  const FitOptions& opt = {});

std::vector<PureStrategy> sample_maxent(const CountingOracle& oracle, const FittedWeights& fw,
                                        int count, Rng& rng);

// entropy of the fitted distribution in nats: log C(lambda) - sum_i
// marginals(lambda)_i * theta_i
double entropy(const CountingOracle& oracle, const FittedWeights& fw);

nlohmann::json fitted_to_json(const FittedWeights& fw);
FittedWeights fitted_from_json(const nlohmann::json& j);

}  // namespace patrol::maxent
