#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "oulc/estimate.hpp"
#include "oulc/simulate.hpp"

namespace oulc {

struct BootstrapConfig {
    std::size_t B = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::size_t substeps = 1000;
    bool keep_replicates = false;

    bool valid() const { return B >= 2 && alpha > 0.0 && alpha < 1.0 && substeps >= 2; }
};

struct ReplicateEstimate {
    std::size_t tau = 0;
    double mu0 = 0.0;
    double mu1 = 0.0;
    double sigma2_0 = 0.0;
    double sigma2_1 = 0.0;
};

using Interval = std::pair<double, double>;

struct BootstrapResult {
    Interval ci_mu0;
    Interval ci_mu1;
    Interval ci_sigma2_0;
    Interval ci_sigma2_1;
    std::vector<std::size_t> tau_set;  // ascending
    double tau_set_mass = 0.0;
    std::size_t redraws = 0;  // failed replicates that were redrawn
    std::optional<std::vector<ReplicateEstimate>> replicate_fits;
};

// Highest-frequency confidence set for tau: distinct values ordered by
// descending frequency (ties by ascending tau), accumulated until their
// relative frequency reaches 1 - alpha. Returns the set sorted ascending
// and the mass actually achieved.
std::pair<std::vector<std::size_t>, double>
tau_confidence_set(const std::vector<std::size_t>& tau_samples, double alpha);

// Test seam: replaces the model simulator for replicate generation.
using SimulatorFn = std::function<Series(const SimSpec&)>;

// Parametric bootstrap around a fitted model: re-simulate B series from the
// fitted parameters (anchored at the observed first open), re-estimate each
// with the same detector, and take percentile intervals of the estimates.
// Replicate b draws its RNG stream from (cfg.seed, b, attempt); a replicate
// whose re-estimation fails is redrawn with the next attempt stream, at most
// 10 per slot (so at most 10*B attempts overall).
BootstrapResult bootstrap_ci(const Series& series, const ChangePointFit& fit,
                             const BootstrapConfig& cfg, const NRConfig& nr_cfg = {},
                             const TruncationPolicy& policy = {}, unsigned threads = 1,
                             const SimulatorFn& simulator = {});

}  // namespace oulc
