#include "oulc/density.hpp"

#include <cmath>
#include <limits>

namespace oulc {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727417803297364056;

// Scaled signed accumulator: the running sums are stored relative to the
// largest exponent seen so far, so no individual term can underflow or
// overflow regardless of how extreme sigma2 is.
struct ScaledSums {
    double scale = -std::numeric_limits<double>::infinity();
    double signed_sum = 0.0;   // density polynomial sum
    double abs_sum = 0.0;      // running magnitude, for the truncation rule
    double deriv_sum = 0.0;    // derivative polynomial sum
    double ring_mag = 0.0;     // magnitude contributed by the current ring

    void add(double exponent, double poly_f, double poly_d) {
        if (exponent > scale) {
            const double shrink = std::exp(scale - exponent);
            signed_sum *= shrink;
            abs_sum *= shrink;
            deriv_sum *= shrink;
            ring_mag *= shrink;
            scale = exponent;
        }
        const double e = std::exp(exponent - scale);
        signed_sum += poly_f * e;
        abs_sum += std::abs(poly_f) * e;
        deriv_sum += poly_d * e;
        ring_mag += std::abs(poly_f) * e;
    }
};

// Canonical orientation: evaluate the mirrored bar (o,u,l,c) -> (-o,-l,-u,-c)
// with mu negated whenever c < o. The density is invariant under this
// reflection, and routing both orientations through one term ordering makes
// the invariance hold bit-for-bit.
struct Frame {
    double z1;    // c - o
    double z2;    // c + o - 2u
    double d;     // u - l
    double mu;
};

Frame canonical_frame(const IntervalBar& bar, double mu) {
    const double z1 = bar.c - bar.o;
    const double wick_hi = bar.u - std::max(bar.o, bar.c);
    const double wick_lo = std::min(bar.o, bar.c) - bar.l;
    if (z1 < 0.0 || (z1 == 0.0 && wick_hi < wick_lo)) {
        return Frame{-z1, -bar.c - bar.o + 2.0 * bar.l, bar.u - bar.l, -mu};
    }
    return Frame{z1, bar.c + bar.o - 2.0 * bar.u, bar.u - bar.l, mu};
}

DensityEval eval_impl(const IntervalBar& bar, const SegmentParams& params,
                      const TruncationPolicy& policy) {
    require_valid(bar);
    require_valid(params);
    if (!policy.valid()) {
        throw Error("truncation policy requires 0 < rel_tol < 1 and 1 <= k_min <= k_max");
    }

    const Frame fr = canonical_frame(bar, params.mu);
    const double s = params.sigma2;
    const double inv_s = 1.0 / s;
    const double e_mu = (-0.5 * fr.mu * fr.mu + fr.mu * fr.z1) * inv_s;

    ScaledSums acc;

    // One signed term of the series: A * (1 - q^2/s) * exp(-q^2/(2s) + e_mu),
    // plus its closed-form d/d(sigma2) companion A * [w - (1-w)(x + 3/2)]
    // where w = q^2/s and x is the term's exponent.
    const auto add_term = [&](double coeff, double q) {
        const double w = q * q * inv_s;
        const double x = -0.5 * w + e_mu;
        const double one_minus_w = 1.0 - w;
        const double poly_f = coeff * one_minus_w;
        const double poly_d = coeff * w - poly_f * (x + 1.5);
        acc.add(x, poly_f, poly_d);
    };

    const auto add_index = [&](int k) {
        const double kd = 2.0 * k * fr.d;
        // reflection series: + 4k(k+1) terms against the upper barrier,
        // - 4k^2 terms against the straight-through argument
        add_term(4.0 * k * (k + 1.0), fr.z2 - kd);
        add_term(-4.0 * k * k, fr.z1 - kd);
    };

    int k_used = 0;
    bool converged = false;
    for (int ring = 0; ring <= policy.k_max; ++ring) {
        acc.ring_mag = 0.0;
        add_index(ring);
        if (ring > 0) {
            add_index(-ring);
        }
        k_used = ring;
        // the comparison is against the signed sum, not the accumulated
        // magnitude: with strongly cancelling rings the tail must keep
        // shrinking relative to what survives the cancellation
        if (ring >= policy.k_min &&
            acc.ring_mag < policy.rel_tol * std::abs(acc.signed_sum)) {
            converged = true;
            break;
        }
    }

    DensityEval out;
    out.k_used = k_used;
    // Floor everything the truncated series cannot resolve: non-positive
    // sums, sums drowned in cancellation noise, series still ringing at
    // k_max (the u - l << sigma regime), and values below the floor itself.
    const bool noise = !(acc.signed_sum > acc.abs_sum * 1e-13);
    double log_f = std::numeric_limits<double>::quiet_NaN();
    if (converged && !noise && std::isfinite(acc.signed_sum)) {
        log_f = std::log(acc.signed_sum) + acc.scale - kHalfLog2Pi - 1.5 * std::log(s);
    }
    if (!(log_f > kLogDensityFloor)) {
        out.log_f = kLogDensityFloor;
        out.dlogf_dsigma2 = 0.0;
        out.clamped = true;
        return out;
    }
    out.log_f = log_f;
    out.dlogf_dsigma2 = acc.deriv_sum / acc.signed_sum * inv_s;
    out.clamped = false;
    return out;
}

}  // namespace

DensityEval eval_log_density(const IntervalBar& bar, const SegmentParams& params,
                             const TruncationPolicy& policy) {
    return eval_impl(bar, params, policy);
}

LogDensityValue log_density_oulc(const IntervalBar& bar, const SegmentParams& params,
                                 const TruncationPolicy& policy) {
    const DensityEval e = eval_impl(bar, params, policy);
    return LogDensityValue{e.log_f, e.k_used, e.clamped};
}

double dlogf_dsigma2(const IntervalBar& bar, const SegmentParams& params,
                     const TruncationPolicy& policy) {
    return eval_impl(bar, params, policy).dlogf_dsigma2;
}

double log_density_oc(double o, double c, const SegmentParams& params) {
    require_valid(params);
    const double r = c - o - params.mu;
    return -kHalfLog2Pi - 0.5 * std::log(params.sigma2) -
           0.5 * r * r / params.sigma2;
}

}  // namespace oulc
