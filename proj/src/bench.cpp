#include "oulc/bench.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "oulc/parallel.hpp"
#include "oulc/rng.hpp"
#include "oulc/simulate.hpp"

namespace oulc {

ModelMetrics aggregate_metrics(const ScenarioSpec& spec,
                               const std::vector<ReplicateEstimate>& estimates,
                               std::size_t failures) {
    const std::array<double, 5> truth = {spec.params0.mu, spec.params1.mu,
                                         spec.params0.sigma2, spec.params1.sigma2,
                                         static_cast<double>(spec.tau_true)};
    ModelMetrics out;
    out.failures = failures;
    for (std::size_t p = 0; p < kParamNames.size(); ++p) {
        ParamMetrics pm;
        pm.true_value = truth[p];
        double sum = 0.0, sq = 0.0;
        for (const auto& est : estimates) {
            const double v = p == 0   ? est.mu0
                             : p == 1 ? est.mu1
                             : p == 2 ? est.sigma2_0
                             : p == 3 ? est.sigma2_1
                                      : static_cast<double>(est.tau);
            sum += v;
            sq += (v - truth[p]) * (v - truth[p]);
        }
        const double r = static_cast<double>(estimates.size());
        pm.mean = estimates.empty() ? std::numeric_limits<double>::quiet_NaN() : sum / r;
        pm.rmse = estimates.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : std::sqrt(sq / r);
        pm.re = truth[p] != 0.0 ? pm.rmse / std::abs(truth[p])
                                : std::numeric_limits<double>::quiet_NaN();
        out.params[kParamNames[p]] = pm;
    }
    return out;
}

ScenarioMetrics run_scenario(const ScenarioSpec& spec, const NRConfig& nr_cfg,
                             const TruncationPolicy& policy, unsigned threads,
                             bool keep_raw) {
    if (!spec.valid()) {
        throw Error("invalid scenario spec");
    }

    const std::size_t R = spec.replications;
    const std::size_t n_models = spec.models.size();
    std::vector<std::vector<std::optional<ReplicateEstimate>>> results(
        n_models, std::vector<std::optional<ReplicateEstimate>>(R));

    parallel_for(R, threads, [&](std::size_t r) {
        SimSpec sim;
        sim.n = spec.n;
        sim.tau = spec.tau_true;
        sim.params0 = spec.params0;
        sim.params1 = spec.params1;
        sim.o1 = 0.0;
        sim.substeps = spec.substeps;
        sim.seed = derive_seed(spec.seed, StreamTag::Bench, r + 1);
        const Series series = simulate_series(sim);
        for (std::size_t m = 0; m < n_models; ++m) {
            try {
                const ChangePointFit fit = spec.models[m] == Model::OULC
                                               ? detect_oulc(series, nr_cfg, policy, 5, 1)
                                               : detect_oc(series);
                results[m][r] = ReplicateEstimate{fit.tau_hat, fit.params0.mu,
                                                  fit.params1.mu, fit.params0.sigma2,
                                                  fit.params1.sigma2};
            } catch (const Error&) {
                // excluded from moments, counted below
            }
        }
    });

    ScenarioMetrics out;
    out.name = spec.name;
    for (std::size_t m = 0; m < n_models; ++m) {
        std::vector<ReplicateEstimate> ok;
        ok.reserve(R);
        for (const auto& est : results[m]) {
            if (est) {
                ok.push_back(*est);
            }
        }
        const std::size_t failures = R - ok.size();
        out.models[model_name(spec.models[m])] = aggregate_metrics(spec, ok, failures);
        if (keep_raw) {
            out.raw.emplace_back(spec.models[m], std::move(ok));
        }
    }
    return out;
}

}  // namespace oulc
