#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oulc/bootstrap.hpp"
#include "oulc/estimate.hpp"

namespace oulc {

struct ScenarioSpec {
    std::string name;
    std::size_t n = 250;
    std::size_t tau_true = 25;
    SegmentParams params0;
    SegmentParams params1;
    std::size_t replications = 1000;
    std::uint64_t seed = 0;
    std::vector<Model> models{Model::OULC, Model::OC};
    std::size_t substeps = 1000;

    bool valid() const {
        return n >= 7 && tau_true >= 3 && tau_true + 3 <= n && replications >= 1 &&
               !models.empty() && substeps >= 2 && params0.valid() && params1.valid();
    }
};

// Per-parameter accuracy summary across replications.
struct ParamMetrics {
    double true_value = 0.0;
    double mean = 0.0;
    double rmse = 0.0;
    double re = 0.0;  // rmse / |true value|
};

inline constexpr std::array<const char*, 5> kParamNames = {"mu0", "mu1", "sigma2_0",
                                                           "sigma2_1", "tau"};

struct ModelMetrics {
    std::map<std::string, ParamMetrics> params;  // keyed by kParamNames
    std::size_t failures = 0;
};

struct ScenarioMetrics {
    std::string name;
    std::map<std::string, ModelMetrics> models;  // keyed by model_name()
    std::vector<std::pair<Model, std::vector<ReplicateEstimate>>> raw;  // per model
};

// Pure aggregation: mean, RMSE = sqrt(mean squared error) and RE = RMSE/|true|
// per parameter, given the per-replicate estimates that succeeded.
ModelMetrics aggregate_metrics(const ScenarioSpec& spec,
                               const std::vector<ReplicateEstimate>& estimates,
                               std::size_t failures);

// Simulates `replications` series with derived seeds, runs each requested
// detector, and aggregates. Failed replicates are counted and excluded from
// the moments (they are not redrawn: the harness measures the estimator as-is).
ScenarioMetrics run_scenario(const ScenarioSpec& spec, const NRConfig& nr_cfg = {},
                             const TruncationPolicy& policy = {}, unsigned threads = 1,
                             bool keep_raw = false);

}  // namespace oulc
