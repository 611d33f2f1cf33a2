#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "oulc/density.hpp"
#include "oulc/types.hpp"

namespace oulc {

// Newton-Raphson settings for the per-segment volatility fit. The iteration
// runs in zeta = log(sigma) so the parameter is unconstrained; the second
// derivative is a central finite difference of the analytic gradient.
struct NRConfig {
    double eps = 1e-6;
    int max_iter = 100;
    double step_clamp = 1.0;
    std::vector<double> init_multipliers{0.5, 1.0, 2.0};
    double fd_step = 1e-5;

    bool valid() const {
        return eps > 0.0 && max_iter >= 1 && step_clamp > 0.0 &&
               !init_multipliers.empty() && fd_step > 0.0;
    }
};

struct SegmentDiagnostics {
    int iterations = 0;        // NR iterations summed over all starts
    int starts_converged = 0;
    bool used_fallback = false;  // golden-section rescue engaged
    int clamped_bars = 0;        // floored densities at the returned optimum
    double grad_at_opt = 0.0;    // d(loglik)/d(zeta) at the returned point
};

struct SegmentFit {
    double sigma2 = 0.0;
    double loglik = 0.0;
    SegmentDiagnostics diag;
};

struct FitDiagnostics {
    long nr_iterations = 0;
    int fallback_fits = 0;
    int clamped_bars = 0;    // at the winning tau's optimum
    double clamped_fraction = 0.0;
    bool excessive_clamping = false;  // more than 1% of bars floored
    std::vector<std::size_t> skipped_taus;
};

// Result of a one-change-point fit: the change is after day tau_hat
// (1-based), params0 governs days 1..tau_hat, params1 the rest.
struct ChangePointFit {
    std::size_t tau_hat = 0;
    SegmentParams params0;
    SegmentParams params1;
    double loglik = 0.0;
    double aic = 0.0;
    Model model = Model::OULC;
    FitDiagnostics diagnostics;
};

// 2k - 2*loglik. The change point is counted as a parameter, so k defaults
// to 5 (mu0, mu1, sigma2_0, sigma2_1, tau).
double aic(double loglik, int k = 5);

// Closed-form drift estimates at a given tau: segment means of (c_i - o_i).
// Serves both models. Requires 3 <= tau <= n - 3.
std::pair<double, double> mu_hats(std::span<const IntervalBar> bars, std::size_t tau);

// Maximizes the segment log-likelihood over sigma2 at fixed mu. Multi-start
// Newton in zeta = log(sigma), anchored at the segment's open/close variance,
// with step clamping and a golden-section fallback when no start converges.
SegmentFit fit_sigma2_newton(std::span<const IntervalBar> bars, double mu,
                             const NRConfig& cfg = {}, const TruncationPolicy& policy = {});

struct ProfilePoint {
    SegmentParams params0;
    SegmentParams params1;
    double loglik = 0.0;
    SegmentDiagnostics diag0;
    SegmentDiagnostics diag1;
};

// Profile log-likelihood at one tau: drifts in closed form, the two
// volatilities fitted independently (the two segment sums share nothing).
ProfilePoint profile_loglik_oulc(const Series& series, std::size_t tau,
                                 const NRConfig& cfg = {}, const TruncationPolicy& policy = {});

// Scans tau over {3,...,n-3}, keeping the profile-likelihood argmax with
// ties broken toward the smallest tau. A tau whose fit fails is skipped and
// recorded; only total failure raises. threads = 0 picks the hardware count.
ChangePointFit detect_oulc(const Series& series, const NRConfig& cfg = {},
                           const TruncationPolicy& policy = {}, int aic_k = 5,
                           unsigned threads = 1);

// Same scan for the open/close-only model, fully closed form. A segment with
// zero variance is degenerate: that tau is skipped and recorded.
ChangePointFit detect_oc(const Series& series, int aic_k = 5);

}  // namespace oulc
