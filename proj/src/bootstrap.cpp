#include "oulc/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "oulc/parallel.hpp"
#include "oulc/rng.hpp"

namespace oulc {

namespace {

// 1-based ceil(alpha*B/2) and ceil(B*(1-alpha/2)) order statistics. The tiny
// slack keeps products like 0.05*1000/2 from ceiling one slot too high when
// they land a few ulps above the intended integer.
Interval percentile_ci(std::vector<double> values, double alpha) {
    std::sort(values.begin(), values.end());
    const double b = static_cast<double>(values.size());
    const auto ceil_index = [](double x) {
        return static_cast<std::size_t>(std::ceil(x - 1e-9));
    };
    const std::size_t lo = ceil_index(alpha * b / 2.0);
    const std::size_t hi = ceil_index(b * (1.0 - alpha / 2.0));
    return {values[std::max<std::size_t>(lo, 1) - 1], values[hi - 1]};
}

}  // namespace

std::pair<std::vector<std::size_t>, double>
tau_confidence_set(const std::vector<std::size_t>& tau_samples, double alpha) {
    if (tau_samples.empty()) {
        throw Error("tau_confidence_set needs at least one sample");
    }
    std::map<std::size_t, std::size_t> freq;
    for (const std::size_t t : tau_samples) {
        ++freq[t];
    }
    // descending frequency, ties by ascending tau (map order preserves it)
    std::vector<std::pair<std::size_t, std::size_t>> ordered(freq.begin(), freq.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    const double total = static_cast<double>(tau_samples.size());
    std::vector<std::size_t> chosen;
    std::size_t cum = 0;
    for (const auto& [tau, count] : ordered) {
        chosen.push_back(tau);
        cum += count;
        if (static_cast<double>(cum) / total >= 1.0 - alpha) {
            break;
        }
    }
    std::sort(chosen.begin(), chosen.end());
    return {std::move(chosen), static_cast<double>(cum) / total};
}

BootstrapResult bootstrap_ci(const Series& series, const ChangePointFit& fit,
                             const BootstrapConfig& cfg, const NRConfig& nr_cfg,
                             const TruncationPolicy& policy, unsigned threads,
                             const SimulatorFn& simulator) {
    if (!cfg.valid()) {
        throw Error("invalid bootstrap configuration");
    }
    const SimulatorFn simulate = simulator ? simulator : SimulatorFn(&simulate_series);
    constexpr std::size_t kMaxAttemptsPerSlot = 10;

    std::vector<ReplicateEstimate> estimates(cfg.B);
    std::vector<std::size_t> attempts_used(cfg.B, 0);
    std::vector<bool> exhausted(cfg.B, false);

    parallel_for(cfg.B, threads, [&](std::size_t b) {
        SimSpec spec;
        spec.n = series.size();
        spec.tau = fit.tau_hat;
        spec.params0 = fit.params0;
        spec.params1 = fit.params1;
        spec.o1 = series[0].o;
        spec.substeps = cfg.substeps;
        for (std::size_t attempt = 0; attempt < kMaxAttemptsPerSlot; ++attempt) {
            spec.seed = derive_seed(cfg.seed, StreamTag::Bootstrap, b + 1, attempt);
            try {
                const Series replicate = simulate(spec);
                const ChangePointFit refit =
                    fit.model == Model::OULC
                        ? detect_oulc(replicate, nr_cfg, policy, 5, 1)
                        : detect_oc(replicate);
                estimates[b] = ReplicateEstimate{refit.tau_hat, refit.params0.mu,
                                                 refit.params1.mu, refit.params0.sigma2,
                                                 refit.params1.sigma2};
                attempts_used[b] = attempt + 1;
                return;
            } catch (const Error&) {
                continue;
            }
        }
        exhausted[b] = true;
    });

    std::size_t redraws = 0;
    for (std::size_t b = 0; b < cfg.B; ++b) {
        if (exhausted[b]) {
            throw BootstrapExhausted("replicate " + std::to_string(b + 1) +
                                     " failed " + std::to_string(kMaxAttemptsPerSlot) +
                                     " attempts");
        }
        redraws += attempts_used[b] - 1;
    }

    std::vector<double> mu0(cfg.B), mu1(cfg.B), s0(cfg.B), s1(cfg.B);
    std::vector<std::size_t> taus(cfg.B);
    for (std::size_t b = 0; b < cfg.B; ++b) {
        mu0[b] = estimates[b].mu0;
        mu1[b] = estimates[b].mu1;
        s0[b] = estimates[b].sigma2_0;
        s1[b] = estimates[b].sigma2_1;
        taus[b] = estimates[b].tau;
    }

    BootstrapResult out;
    out.ci_mu0 = percentile_ci(std::move(mu0), cfg.alpha);
    out.ci_mu1 = percentile_ci(std::move(mu1), cfg.alpha);
    out.ci_sigma2_0 = percentile_ci(std::move(s0), cfg.alpha);
    out.ci_sigma2_1 = percentile_ci(std::move(s1), cfg.alpha);
    auto [set, mass] = tau_confidence_set(taus, cfg.alpha);
    out.tau_set = std::move(set);
    out.tau_set_mass = mass;
    out.redraws = redraws;
    if (cfg.keep_replicates) {
        out.replicate_fits = std::move(estimates);
    }
    return out;
}

}  // namespace oulc
