#include "patrol/oracle.hpp"

#include "patrol/count_fams.hpp"
#include "patrol/count_grid.hpp"

namespace patrol {

namespace {

class GridStrategySampler final : public StrategySampler {
  public:
    GridStrategySampler(const GridGame& g, const std::vector<double>& alpha)
        : g_(g), s_(g, alpha) {}

    PureStrategy draw(Rng& rng) override { return strategy_from_paths(g_, s_.draw(rng).paths); }

    double chain_log_prob(const PureStrategy& s) const override {
        const auto* r = std::get_if<GridRealization>(&s.detail);
        if (r == nullptr) throw Error("chain_log_prob: strategy is not a grid realization");
        return s_.chain_log_prob(*r);
    }

  private:
    GridGame g_;
    grid::Sampler s_;
};

class FamsStrategySampler final : public StrategySampler {
  public:
    FamsStrategySampler(const FamsInstance& fi, const std::vector<double>& alpha)
        : fi_(fi), s_(fi, alpha) {}

    PureStrategy draw(Rng& rng) override { return strategy_from_edges(fi_, s_.draw(rng).edges); }

    double chain_log_prob(const PureStrategy& s) const override {
        const auto* r = std::get_if<FamsRealization>(&s.detail);
        if (r == nullptr) throw Error("chain_log_prob: strategy is not a flight realization");
        return s_.chain_log_prob(*r);
    }

  private:
    FamsInstance fi_;
    fams::Sampler s_;
};

}  // namespace

double GridOracle::log_count(const std::vector<double>& alpha) const {
    return grid::log_count(g_, alpha);
}

std::pair<double, std::vector<double>> GridOracle::count_and_marginals(
    const std::vector<double>& alpha) const {
    grid::Sampler s(g_, alpha);
    return {s.log_count(), s.node_marginals()};
}

std::unique_ptr<StrategySampler> GridOracle::make_sampler(const std::vector<double>& alpha) const {
    return std::make_unique<GridStrategySampler>(g_, alpha);
}

double FamsOracle::log_count(const std::vector<double>& alpha) const {
    return fams::log_count(fi_, alpha);
}

std::pair<double, std::vector<double>> FamsOracle::count_and_marginals(
    const std::vector<double>& alpha) const {
    return fams::log_count_and_marginals(fi_, alpha);
}

std::unique_ptr<StrategySampler> FamsOracle::make_sampler(const std::vector<double>& alpha) const {
    return std::make_unique<FamsStrategySampler>(fi_, alpha);
}

std::shared_ptr<CountingOracle> make_oracle(const Instance& inst) {
    if (const auto* g = std::get_if<GridGame>(&inst)) return std::make_shared<GridOracle>(*g);
    return std::make_shared<FamsOracle>(std::get<FamsInstance>(inst));
}

}  // namespace patrol
