#pragma once

#include "oulc/types.hpp"

namespace oulc {

// Controls truncation of the two-sided reflection series. Summation walks
// rings |k| = 0,1,2,... outward and stops once the last ring's magnitude
// drops below rel_tol times the accumulated magnitude, but never before
// k_min rings (the k = 0 ring is identically zero) and never past k_max.
struct TruncationPolicy {
    double rel_tol = 1e-12;
    int k_min = 3;
    int k_max = 64;

    bool valid() const {
        return rel_tol > 0.0 && rel_tol < 1.0 && k_min >= 1 && k_min <= k_max;
    }
};

// Floor applied when the truncated signed series evaluates non-positive.
inline constexpr double kLogDensityFloor = -700.0;

struct LogDensityValue {
    double log_f = 0.0;
    int k_used = 0;
    bool clamped = false;
};

// Joint density of (max, min, close) given the open for one unit-length day
// of Brownian motion with drift, evaluated in log space. The alternating
// series is accumulated as scaled signed terms with max-exponent factoring,
// so values stay representable down to sigma2 ~ 1e-6 and far beyond.
LogDensityValue log_density_oulc(const IntervalBar& bar, const SegmentParams& params,
                                 const TruncationPolicy& policy = {});

// d/d(sigma2) of log_density_oulc, from closed-form derivatives of the
// series factors, sharing the truncation radius of the density itself.
// Returns 0 (with clamped set) when the density was floored.
double dlogf_dsigma2(const IntervalBar& bar, const SegmentParams& params,
                     const TruncationPolicy& policy = {});

// Density and gradient in one pass; the building block for Newton steps.
struct DensityEval {
    double log_f = 0.0;
    double dlogf_dsigma2 = 0.0;
    int k_used = 0;
    bool clamped = false;
};

DensityEval eval_log_density(const IntervalBar& bar, const SegmentParams& params,
                             const TruncationPolicy& policy = {});

// Gaussian log-density of (c - o) under drift mu, variance sigma2: one day's
// contribution to the open/close-only likelihood.
double log_density_oc(double o, double c, const SegmentParams& params);

}  // namespace oulc
