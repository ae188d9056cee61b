#pragma once

// Counting-oracle interface: everything the entropy fitter and the leakage
// evaluator need from a strategy family -- weighted counts, coverage
// marginals under reweighted targets, and exact samplers.

#include <memory>
#include <utility>
#include <vector>

#include "patrol/model.hpp"

namespace patrol {

class StrategySampler {
  public:
    virtual ~StrategySampler() = default;
    virtual PureStrategy draw(Rng& rng) = 0;
    virtual double chain_log_prob(const PureStrategy& s) const = 0;
};

class CountingOracle {
  public:
    virtual ~CountingOracle() = default;
    virtual int dim() const = 0;  // number of targets
    virtual double log_count(const std::vector<double>& alpha) const = 0;
    // returns (log C(alpha), coverage marginals); throws NoFeasiblePath when
    // C(alpha) = 0
    virtual std::pair<double, std::vector<double>> count_and_marginals(
        const std::vector<double>& alpha) const = 0;
    virtual std::unique_ptr<StrategySampler> make_sampler(const std::vector<double>& alpha) const = 0;

    PureStrategy sample(const std::vector<double>& alpha, Rng& rng) const {
        return make_sampler(alpha)->draw(rng);
    }
};

class GridOracle final : public CountingOracle {
  public:
    explicit GridOracle(GridGame g) : g_(std::move(g)) {}
    const GridGame& game() const { return g_; }

    int dim() const override { return g_.num_targets(); }
    double log_count(const std::vector<double>& alpha) const override;
    std::pair<double, std::vector<double>> count_and_marginals(
        const std::vector<double>& alpha) const override;
    std::unique_ptr<StrategySampler> make_sampler(const std::vector<double>& alpha) const override;

  private:
    GridGame g_;
};

class FamsOracle final : public CountingOracle {
  public:
    explicit FamsOracle(FamsInstance fi) : fi_(std::move(fi)) {}
    const FamsInstance& instance() const { return fi_; }

    int dim() const override { return fi_.num_targets(); }
    double log_count(const std::vector<double>& alpha) const override;
    std::pair<double, std::vector<double>> count_and_marginals(
        const std::vector<double>& alpha) const override;
    std::unique_ptr<StrategySampler> make_sampler(const std::vector<double>& alpha) const override;

  private:
    FamsInstance fi_;
};

// oracle for an Instance variant
std::shared_ptr<CountingOracle> make_oracle(const Instance& inst);

}  // namespace patrol
