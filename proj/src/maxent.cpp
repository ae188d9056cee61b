#include "patrol/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace patrol::maxent {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double linf(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::vector<double> exp_vec(const std::vector<double>& theta) {
    std::vector<double> a(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) a[i] = std::exp(theta[i]);
    return a;
}

}  // namespace

std::vector<double> FittedWeights::lambda() const { return exp_vec(theta); }

FittedWeights fit(const CountingOracle& oracle, const std::vector<double>& x,
                  const FitOptions& opt) {
    const int n = oracle.dim();
    if (int(x.size()) != n) throw Error("fit: marginal vector size mismatch");
    FittedWeights fw;
    std::vector<double> xt(x);
    for (int i = 0; i < n; ++i) {
        if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw Error("fit: marginals must lie in [0,1]");
        if (x[i] < opt.clamp_eps || x[i] > 1.0 - opt.clamp_eps) {
            xt[i] = std::clamp(x[i], opt.clamp_eps, 1.0 - opt.clamp_eps);
            fw.clamped.push_back(i);
        }
    }

    std::vector<double> theta(n, 0.0), grad(n), theta_prev, grad_prev;
    auto [logc, marg] = oracle.count_and_marginals(exp_vec(theta));
    double f = logc - dot(xt, theta);
    for (int i = 0; i < n; ++i) grad[i] = marg[i] - xt[i];

    std::vector<double> f_hist;
    double step = 1.0;
    fw.status = FitStatus::NotImplementable;
    fw.stop_reason = "iteration limit";
    int iter = 0;
    for (; iter < opt.max_iters; ++iter) {
        double res = linf(grad);
        if (res <= opt.tol) {
            fw.status = FitStatus::Converged;
            fw.stop_reason = "converged";
            break;
        }
        // unattainable marginals push theta to +-inf; stop well before
        // exp(theta) overflows (per-iteration movement is capped at 50)
        if (linf(theta) > 400.0) {
            fw.stop_reason = "weights diverged";
            break;
        }
        f_hist.push_back(f);
        if (iter >= opt.plateau_window) {
            double drop = f_hist[iter - opt.plateau_window] - f;
            if (drop <= opt.plateau_rel * (1.0 + std::abs(f))) {
                fw.stop_reason = "plateau";
                break;
            }
        }

        // Barzilai-Borwein estimate for the trial step, then Armijo
        if (!theta_prev.empty()) {
            double ss = 0, sy = 0;
            for (int i = 0; i < n; ++i) {
                double s = theta[i] - theta_prev[i], y = grad[i] - grad_prev[i];
                ss += s * s;
                sy += s * y;
            }
            if (sy > 1e-300) step = std::clamp(ss / sy, 1e-10, 1e6);
        }
        step = std::min(step, 50.0 / std::max(res, 1e-12));  // keep exp(theta) in range

        double gg = dot(grad, grad);
        std::vector<double> theta_try(n);
        double f_try = 0;
        bool accepted = false;
        double trial = step;
        for (int ls = 0; ls < 60; ++ls) {
            for (int i = 0; i < n; ++i) theta_try[i] = theta[i] - trial * grad[i];
            f_try = oracle.log_count(exp_vec(theta_try)) - dot(xt, theta_try);
            if (f_try <= f - 1e-4 * trial * gg) {
                accepted = true;
                break;
            }
            trial *= 0.5;
        }
        if (!accepted) {
            fw.stop_reason = "line search stall";
            break;
        }
        step = trial;

        theta_prev = theta;
        grad_prev = grad;
        theta = theta_try;
        auto [logc2, marg2] = oracle.count_and_marginals(exp_vec(theta));
        double f_new = logc2 - dot(xt, theta);
        if (f_new > f + 1e-9 * (1.0 + std::abs(f)))
            throw OracleFailure("fit: dual objective increased on an accepted step");
        f = f_new;
        for (int i = 0; i < n; ++i) grad[i] = marg2[i] - xt[i];
    }

    fw.theta = std::move(theta);
    fw.residual = linf(grad);
    fw.iterations = iter;
    if (fw.residual <= opt.tol) {
        fw.status = FitStatus::Converged;
        fw.stop_reason = "converged";
    }
    logf("fit: %s after %d iters, residual %.3g", fw.stop_reason.c_str(), fw.iterations,
         fw.residual);
    return fw;
}

std::vector<PureStrategy> sample_maxent(const CountingOracle& oracle, const FittedWeights& fw,
                                        int count, Rng& rng) {
    std::vector<PureStrategy> out;
    if (count <= 0) return out;
    out.reserve(count);
    auto sampler = oracle.make_sampler(fw.lambda());
    for (int i = 0; i < count; ++i) out.push_back(sampler->draw(rng));
    return out;
}

double entropy(const CountingOracle& oracle, const FittedWeights& fw) {
    auto [logc, marg] = oracle.count_and_marginals(fw.lambda());
    double h = logc - dot(marg, fw.theta);
    return std::max(h, 0.0);
}

nlohmann::json fitted_to_json(const FittedWeights& fw) {
    return {{"theta", fw.theta},
            {"residual", fw.residual},
            {"clamped", fw.clamped},
            {"status", fw.status == FitStatus::Converged ? "converged" : "not_implementable"},
            {"iterations", fw.iterations},
            {"stop_reason", fw.stop_reason}};
}

FittedWeights fitted_from_json(const nlohmann::json& j) {
    try {
        FittedWeights fw;
        fw.theta = j.at("theta").get<std::vector<double>>();
        fw.residual = j.at("residual").get<double>();
        fw.clamped = j.value("clamped", std::vector<int>{});
        fw.status = j.value("status", std::string("converged")) == "converged"
                        ? FitStatus::Converged
                        : FitStatus::NotImplementable;
        fw.iterations = j.value("iterations", 0);
        fw.stop_reason = j.value("stop_reason", std::string());
        return fw;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("fitted_from_json: ") + e.what());
    }
}

}  // namespace patrol::maxent
