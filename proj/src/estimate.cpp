#include "oulc/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "oulc/parallel.hpp"

namespace oulc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct Sweep {
    double loglik = 0.0;
    double grad_zeta = 0.0;  // d(loglik)/d(zeta), zeta = log(sigma)
    int clamped = 0;
};

Sweep sweep_segment(std::span<const IntervalBar> bars, double mu, double zeta,
                    const TruncationPolicy& policy) {
    const double sigma2 = std::exp(2.0 * zeta);
    const SegmentParams p{mu, sigma2};
    const double dsigma2_dzeta = 2.0 * sigma2;
    Sweep out;
    for (const auto& bar : bars) {
        const DensityEval e = eval_log_density(bar, p, policy);
        out.loglik += e.log_f;
        out.grad_zeta += e.dlogf_dsigma2 * dsigma2_dzeta;
        out.clamped += e.clamped ? 1 : 0;
    }
    return out;
}

struct Candidate {
    double zeta = 0.0;
    double loglik = -std::numeric_limits<double>::infinity();
    double grad = 0.0;
    bool converged = false;
};

struct NewtonRun {
    Candidate result;
    Candidate best_seen;   // best iterate even if not converged
    double init_loglik = -std::numeric_limits<double>::infinity();
    int iterations = 0;
};

NewtonRun run_newton(std::span<const IntervalBar> bars, double mu, double zeta0,
                     const NRConfig& cfg, const TruncationPolicy& policy) {
    NewtonRun run;
    double zeta = zeta0;
    double last_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= cfg.max_iter; ++it) {
        const Sweep sw = sweep_segment(bars, mu, zeta, policy);
        if (it == 0) {
            run.init_loglik = sw.loglik;
        }
        if (sw.loglik > run.best_seen.loglik) {
            run.best_seen = Candidate{zeta, sw.loglik, sw.grad_zeta, false};
        }
        const double stat_tol = 10.0 * cfg.eps * std::max(1.0, std::abs(sw.loglik));
        if (std::abs(last_step) < cfg.eps && std::abs(sw.grad_zeta) <= stat_tol) {
            run.result = Candidate{zeta, sw.loglik, sw.grad_zeta, true};
            return run;
        }
        if (it == cfg.max_iter) {
            break;
        }
        const double h = cfg.fd_step * std::max(1.0, std::abs(zeta));
        const double gp = sweep_segment(bars, mu, zeta + h, policy).grad_zeta;
        const double gm = sweep_segment(bars, mu, zeta - h, policy).grad_zeta;
        const double curvature = (gp - gm) / (2.0 * h);
        double step;
        if (std::isfinite(curvature) && curvature < 0.0) {
            step = -sw.grad_zeta / curvature;
        } else {
            // wrong curvature sign: move uphill by the full clamp instead
            step = std::copysign(cfg.step_clamp, sw.grad_zeta);
        }
        if (!std::isfinite(step)) {
            step = std::copysign(cfg.step_clamp, sw.grad_zeta);
        }
        step = std::clamp(step, -cfg.step_clamp, cfg.step_clamp);
        zeta += step;
        last_step = step;
        ++run.iterations;
    }
    run.result = run.best_seen;
    return run;
}

Candidate golden_section(std::span<const IntervalBar> bars, double mu, double lo,
                         double hi, double eps, const TruncationPolicy& policy) {
    constexpr double inv_phi = 0.6180339887498948482045868343656;
    auto value = [&](double z) { return sweep_segment(bars, mu, z, policy).loglik; };
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = value(c), fd = value(d);
    while (b - a > eps) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = value(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = value(d);
        }
    }
    const double zeta = 0.5 * (a + b);
    const Sweep sw = sweep_segment(bars, mu, zeta, policy);
    return Candidate{zeta, sw.loglik, sw.grad_zeta, true};
}

double oc_variance(std::span<const IntervalBar> bars, double mu) {
    double ss = 0.0;
    for (const auto& bar : bars) {
        const double r = bar.c - bar.o - mu;
        ss += r * r;
    }
    return ss / static_cast<double>(bars.size());
}

}  // namespace

double aic(double loglik, int k) {
    if (!std::isfinite(loglik)) {
        throw Error("aic requires a finite log-likelihood");
    }
    return 2.0 * k - 2.0 * loglik;
}

std::pair<double, double> mu_hats(std::span<const IntervalBar> bars, std::size_t tau) {
    const std::size_t n = bars.size();
    if (tau < 3 || tau + 3 > n) {
        throw TauOutOfRange("tau = " + std::to_string(tau) +
                            " outside {3,...," + std::to_string(n) + "-3}");
    }
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < tau; ++i) {
        head += bars[i].c - bars[i].o;
    }
    for (std::size_t i = tau; i < n; ++i) {
        tail += bars[i].c - bars[i].o;
    }
    return {head / static_cast<double>(tau), tail / static_cast<double>(n - tau)};
}

SegmentFit fit_sigma2_newton(std::span<const IntervalBar> bars, double mu,
                             const NRConfig& cfg, const TruncationPolicy& policy) {
    if (bars.size() < 3) {
        throw SegmentTooShort("segment has " + std::to_string(bars.size()) +
                              " bars, need at least 3");
    }
    if (!cfg.valid()) {
        throw Error("invalid Newton configuration");
    }
    if (!std::isfinite(mu)) {
        throw Error("mu must be finite");
    }

    // Anchor at the open/close closed-form variance; if the diffs are
    // degenerate, fall back to the mean squared range (E[range^2] = 4 log 2
    // per unit variance for driftless Brownian motion).
    double anchor = oc_variance(bars, mu);
    if (!(anchor > 0.0) || !std::isfinite(anchor)) {
        double msr = 0.0;
        for (const auto& bar : bars) {
            const double d = bar.u - bar.l;
            msr += d * d;
        }
        anchor = msr / static_cast<double>(bars.size()) / (4.0 * std::numbers::ln2);
    }
    const double zeta_anchor = 0.5 * std::log(anchor);

    SegmentDiagnostics diag;
    Candidate winner;
    double best_init_loglik = -std::numeric_limits<double>::infinity();
    Candidate best_effort;  // best iterate across everything, for error payloads

    for (const double mult : cfg.init_multipliers) {
        if (!(mult > 0.0)) {
            throw Error("init multipliers must be positive");
        }
        const NewtonRun run =
            run_newton(bars, mu, 0.5 * std::log(mult * anchor), cfg, policy);
        diag.iterations += run.iterations;
        best_init_loglik = std::max(best_init_loglik, run.init_loglik);
        if (run.best_seen.loglik > best_effort.loglik) {
            best_effort = run.best_seen;
        }
        if (run.result.converged) {
            ++diag.starts_converged;
            if (run.result.loglik > winner.loglik) {
                winner = run.result;
            }
        }
    }

    if (diag.starts_converged == 0 || winner.loglik < best_init_loglik) {
        const Candidate rescue = golden_section(bars, mu, zeta_anchor - 3.0,
                                                zeta_anchor + 3.0, cfg.eps, policy);
        diag.used_fallback = true;
        if (rescue.loglik > winner.loglik) {
            winner = rescue;
        }
        if (winner.loglik < best_effort.loglik) {
            winner = best_effort;
        }
    }
    if (!std::isfinite(winner.loglik)) {
        throw NoConvergence("volatility fit failed to converge",
                            std::exp(2.0 * best_effort.zeta), best_effort.loglik);
    }

    const Sweep at_opt = sweep_segment(bars, mu, winner.zeta, policy);
    diag.clamped_bars = at_opt.clamped;
    diag.grad_at_opt = at_opt.grad_zeta;
    return SegmentFit{std::exp(2.0 * winner.zeta), at_opt.loglik, diag};
}

ProfilePoint profile_loglik_oulc(const Series& series, std::size_t tau,
                                 const NRConfig& cfg, const TruncationPolicy& policy) {
    const auto& bars = series.bars();
    const auto [mu0, mu1] = mu_hats(bars, tau);
    const std::span<const IntervalBar> head(bars.data(), tau);
    const std::span<const IntervalBar> tail(bars.data() + tau, bars.size() - tau);

    SegmentFit fit0, fit1;
    try {
        fit0 = fit_sigma2_newton(head, mu0, cfg, policy);
    } catch (const Error& e) {
        throw Error("segment 0 at tau=" + std::to_string(tau) + ": " + e.what());
    }
    try {
        fit1 = fit_sigma2_newton(tail, mu1, cfg, policy);
    } catch (const Error& e) {
        throw Error("segment 1 at tau=" + std::to_string(tau) + ": " + e.what());
    }

    ProfilePoint point;
    point.params0 = SegmentParams{mu0, fit0.sigma2};
    point.params1 = SegmentParams{mu1, fit1.sigma2};
    point.loglik = fit0.loglik + fit1.loglik;
    point.diag0 = fit0.diag;
    point.diag1 = fit1.diag;
    return point;
}

ChangePointFit detect_oulc(const Series& series, const NRConfig& cfg,
                           const TruncationPolicy& policy, int aic_k,
                           unsigned threads) {
    const std::size_t n = series.size();
    const std::size_t tau_lo = 3;
    const std::size_t tau_hi = n - 3;
    const std::size_t count = tau_hi - tau_lo + 1;

    std::vector<std::optional<ProfilePoint>> points(count);
    std::vector<std::string> errors(count);
    parallel_for(count, threads, [&](std::size_t idx) {
        try {
            points[idx] = profile_loglik_oulc(series, tau_lo + idx, cfg, policy);
        } catch (const std::exception& e) {
            errors[idx] = e.what();
        }
    });

    FitDiagnostics diag;
    std::size_t best_idx = count;
    double best_loglik = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < count; ++idx) {
        if (!points[idx]) {
            diag.skipped_taus.push_back(tau_lo + idx);
            continue;
        }
        const ProfilePoint& p = *points[idx];
        diag.nr_iterations += p.diag0.iterations + p.diag1.iterations;
        diag.fallback_fits += (p.diag0.used_fallback ? 1 : 0) + (p.diag1.used_fallback ? 1 : 0);
        if (p.loglik > best_loglik) {
            best_loglik = p.loglik;
            best_idx = idx;
        }
    }
    if (best_idx == count) {
        throw Error("change-point scan failed at every tau; first failure: " +
                    (errors.empty() ? std::string("none") : errors.front()));
    }

    const ProfilePoint& best = *points[best_idx];
    diag.clamped_bars = best.diag0.clamped_bars + best.diag1.clamped_bars;
    diag.clamped_fraction = static_cast<double>(diag.clamped_bars) / static_cast<double>(n);
    diag.excessive_clamping = diag.clamped_fraction > 0.01;

    ChangePointFit fit;
    fit.tau_hat = tau_lo + best_idx;
    fit.params0 = best.params0;
    fit.params1 = best.params1;
    fit.loglik = best.loglik;
    fit.aic = aic(best.loglik, aic_k);
    fit.model = Model::OULC;
    fit.diagnostics = std::move(diag);
    return fit;
}

ChangePointFit detect_oc(const Series& series, int aic_k) {
    const auto& bars = series.bars();
    const std::size_t n = bars.size();

    FitDiagnostics diag;
    bool found = false;
    ChangePointFit fit;
    fit.model = Model::OC;
    double best_loglik = -std::numeric_limits<double>::infinity();

    for (std::size_t tau = 3; tau + 3 <= n; ++tau) {
        const auto [mu0, mu1] = mu_hats(bars, tau);
        double ss0 = 0.0, ss1 = 0.0;
        for (std::size_t i = 0; i < tau; ++i) {
            const double r = bars[i].c - bars[i].o - mu0;
            ss0 += r * r;
        }
        for (std::size_t i = tau; i < n; ++i) {
            const double r = bars[i].c - bars[i].o - mu1;
            ss1 += r * r;
        }
        const double s0 = ss0 / static_cast<double>(tau);
        const double s1 = ss1 / static_cast<double>(n - tau);
        if (!(s0 > 0.0) || !(s1 > 0.0)) {
            diag.skipped_taus.push_back(tau);
            continue;
        }
        const double loglik =
            -0.5 * tau * (kLog2Pi + std::log(s0)) - ss0 / (2.0 * s0) -
            0.5 * (n - tau) * (kLog2Pi + std::log(s1)) - ss1 / (2.0 * s1);
        if (loglik > best_loglik) {
            best_loglik = loglik;
            fit.tau_hat = tau;
            fit.params0 = SegmentParams{mu0, s0};
            fit.params1 = SegmentParams{mu1, s1};
            fit.loglik = loglik;
            found = true;
        }
    }
    if (!found) {
        throw DegenerateSegment("every tau produced a zero-variance segment");
    }
    fit.aic = aic(fit.loglik, aic_k);
    fit.diagnostics = std::move(diag);
    return fit;
}

}  // namespace oulc
