// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Run with a list of criterion numbers to restrict, e.g.
//   oulc_acceptance 1 3 7
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oulc/bench.hpp"
#include "oulc/bootstrap.hpp"
#include "oulc/density.hpp"
#include "oulc/estimate.hpp"
#include "oulc/io.hpp"
#include "oulc/parallel.hpp"
#include "oulc/rng.hpp"
#include "oulc/simulate.hpp"
#include "support/oracles.hpp"

using namespace oulc;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }
    void note(const std::string& s) {
        detail << (detail.str().empty() ? "" : "; ") << s;
    }
};

std::string fixture_path() { return std::string(OULC_SOURCE_DIR) + "/data/sp500_2022.csv"; }

Series simulated(std::size_t n, std::size_t tau, SegmentParams p0, SegmentParams p1,
                 std::uint64_t seed, std::size_t substeps = 1000) {
    SimSpec spec;
    spec.n = n;
    spec.tau = tau;
    spec.params0 = p0;
    spec.params1 = p1;
    spec.substeps = substeps;
    spec.seed = seed;
    return simulate_series(spec);
}

// ---------------------------------------------------------------- criterion 1
void criterion_density_normalization(Check& c) {
    const double sigmas[] = {1e-4, 1.69e-4, 7.84e-4, 1.0};
    const double mus[] = {-0.01, 0.0, 0.0008, 0.01};
    double worst = 0.0;
    for (const double s2 : sigmas) {
        for (const double mu : mus) {
            const double integral =
                oracle::density_normalization(SegmentParams{mu, s2}, {}, 64);
            worst = std::max(worst, std::abs(integral - 1.0));
            c.require(std::abs(integral - 1.0) <= 1e-3,
                      "integral at (mu=" + std::to_string(mu) +
                          ", s2=" + std::to_string(s2) + ") = " + std::to_string(integral));
        }
    }
    c.note("16 grid points, worst |I-1| = " + std::to_string(worst));
}

// ---------------------------------------------------------------- criterion 2
void criterion_density_vs_monte_carlo(Check& c) {
    const std::vector<IntervalBar> probes = {
        {0.0, 1.0, -1.0, 0.0},  {0.0, 0.7, -0.7, 0.2}, {0.0, 1.2, -0.5, 0.5},
        {0.0, 0.5, -1.3, -0.6}, {0.0, 0.9, -0.9, 0.6},
    };
    const SegmentParams params{0.0, 1.0};
    const std::size_t paths = 1'000'000, substeps = 10'000;
    const double cell = 0.0625;
    const auto est = oracle::mc_density(probes, params, paths, substeps, cell, 99);

    // The histogram estimates the cell average of the density of the
    // discrete-grid extremes; grid maxima sit about 0.5826*sigma/sqrt(m)
    // below the continuous ones, so evaluate the analytic density averaged
    // over the matching shifted cell.
    const double shift = 0.5826 / std::sqrt(static_cast<double>(substeps));
    const oracle::Quadrature q = oracle::gauss_legendre(8);
    const auto cell_avg = [&](const IntervalBar& probe) {
        double sum = 0.0;
        for (std::size_t a = 0; a < q.nodes.size(); ++a) {
            for (std::size_t b = 0; b < q.nodes.size(); ++b) {
                for (std::size_t d = 0; d < q.nodes.size(); ++d) {
                    const IntervalBar at{probe.o, probe.u + shift + cell * q.nodes[a],
                                         probe.l - shift + cell * q.nodes[b],
                                         probe.c + cell * q.nodes[d]};
                    const double w = q.weights[a] * q.weights[b] * q.weights[d];
                    sum += w * std::exp(log_density_oulc(at, params).log_f);
                }
            }
        }
        return sum / 8.0;  // weights integrate to 2 per dimension
    };

    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double ours = cell_avg(probes[i]);
        const double gap = std::abs(ours - est[i].density);
        c.require(gap <= 3.0 * est[i].stderr_,
                  "probe " + std::to_string(i) + ": |" + std::to_string(ours) + " - " +
                      std::to_string(est[i].density) + "| > 3*" +
                      std::to_string(est[i].stderr_));
    }
    c.note("1e6 paths x 1e4 substeps, 5 probes within 3 MC standard errors");
}

// ---------------------------------------------------------------- criterion 3
void criterion_gradient(Check& c) {
    int checked = 0;
    double worst = 0.0;
    const std::pair<double, double> regimes[] = {
        {0.0, 1e-4}, {0.0008, 1.69e-4}, {-0.01, 1.0}, {0.01, 7.84e-4}};
    for (const auto& [mu, s2] : regimes) {
        const Series bars = simulated(25, 12, {mu, s2}, {mu, s2}, 555 + checked, 256);
        for (const auto& bar : bars) {
            const double mult = 0.5 + (checked % 3) * 0.5;
            const SegmentParams p{mu, s2 * mult};
            const double analytic = dlogf_dsigma2(bar, p);
            const double fd = oracle::fd_dlogf_dsigma2(bar, p);
            const double rel = std::abs(analytic - fd) /
                               std::max(std::abs(fd), 1e-300);
            worst = std::max(worst, rel);
            ++checked;
        }
    }
    c.require(worst <= 1e-4, "worst relative error " + std::to_string(worst));
    c.note(std::to_string(checked) + " fixtures, worst rel err = " + std::to_string(worst));
}

// ---------------------------------------------------------------- criterion 4
void criterion_mle_equivalence(Check& c) {
    int tau_matches = 0;
    const int series_count = 20;
    for (int k = 0; k < series_count; ++k) {
        const double jump = (k % 2 == 0) ? 4.0 : 1.0;
        const double mu1 = (k % 3 == 0) ? 0.003 : 0.0005;
        const Series series = simulated(
            12, 3 + (k % 7), {0.0005, 2e-4}, {mu1, 2e-4 * jump}, 9000 + k, 512);

        const ChangePointFit fit = detect_oulc(series);
        const oracle::GridFit ref = oracle::grid_detect(series);
        if (fit.tau_hat == ref.tau) {
            ++tau_matches;
        } else {
            c.require(false, "series " + std::to_string(k) + ": tau " +
                                 std::to_string(fit.tau_hat) + " vs grid " +
                                 std::to_string(ref.tau));
        }
        c.require(std::abs(fit.loglik - ref.loglik) <= 1e-3,
                  "series " + std::to_string(k) + ": loglik gap " +
                      std::to_string(fit.loglik - ref.loglik));

        // open/close model against its closed forms, recomputed here
        const ChangePointFit oc = detect_oc(series);
        const auto& bars = series.bars();
        double best_ll = -INFINITY;
        std::size_t best_tau = 0;
        for (std::size_t tau = 3; tau + 3 <= bars.size(); ++tau) {
            const auto [m0, m1] = mu_hats(bars, tau);
            double ss0 = 0.0, ss1 = 0.0;
            for (std::size_t i = 0; i < bars.size(); ++i) {
                const double d = bars[i].c - bars[i].o;
                (i < tau ? ss0 : ss1) +=
                    (d - (i < tau ? m0 : m1)) * (d - (i < tau ? m0 : m1));
            }
            const double s0 = ss0 / tau, s1 = ss1 / (bars.size() - tau);
            const double ll = -0.5 * tau * std::log(2.0 * M_PI * s0) -
                              ss0 / (2.0 * s0) -
                              0.5 * (bars.size() - tau) * std::log(2.0 * M_PI * s1) -
                              ss1 / (2.0 * s1);
            if (ll > best_ll) {
                best_ll = ll;
                best_tau = tau;
            }
        }
        c.require(oc.tau_hat == best_tau && std::abs(oc.loglik - best_ll) <= 1e-9,
                  "series " + std::to_string(k) + ": oc closed-form mismatch");
    }
    c.note(std::to_string(tau_matches) + "/" + std::to_string(series_count) +
           " exact tau matches vs the grid oracle");
}

// ------------------------------------------------------------ criteria 5 and 6
ScenarioMetrics scaled_study(double mu1, double sigma2_1, std::uint64_t seed) {
    ScenarioSpec spec;
    spec.name = "scaled";
    spec.n = 250;
    spec.tau_true = 25;
    spec.params0 = {0.0008, 1.69e-4};
    spec.params1 = {mu1, sigma2_1};
    spec.replications = 100;
    spec.seed = seed;
    spec.substeps = 1000;
    return run_scenario(spec, {}, {}, resolve_threads(0));
}

void criterion_sigma_study(Check& c) {
    const ScenarioMetrics m = scaled_study(0.0008, 7.84e-4, 320);
    const auto& oulc_m = m.models.at("oulc");
    const auto& oc_m = m.models.at("oc");
    const double oulc_tau_rmse = oulc_m.params.at("tau").rmse;
    const double oc_tau_rmse = oc_m.params.at("tau").rmse;
    c.require(oulc_tau_rmse < 2.0, "oulc tau rmse " + std::to_string(oulc_tau_rmse));
    c.require(oc_tau_rmse > 5.0, "oc tau rmse " + std::to_string(oc_tau_rmse));
    for (const char* p : kParamNames) {
        c.require(oulc_m.params.at(p).rmse < oc_m.params.at(p).rmse,
                  std::string("rmse ordering violated for ") + p);
    }
    c.note("R=100: oulc tau-rmse " + std::to_string(oulc_tau_rmse) + ", oc " +
           std::to_string(oc_tau_rmse) + ", oulc mean tau " +
           std::to_string(oulc_m.params.at("tau").mean));
}

void criterion_mu_study(Check& c) {
    const ScenarioMetrics m = scaled_study(0.004, 1.69e-4, 640);
    const double oulc_tau_rmse = m.models.at("oulc").params.at("tau").rmse;
    const double oc_tau_rmse = m.models.at("oc").params.at("tau").rmse;
    c.require(oulc_tau_rmse < 10.0, "oulc tau rmse " + std::to_string(oulc_tau_rmse));
    c.require(oc_tau_rmse > 50.0, "oc tau rmse " + std::to_string(oc_tau_rmse));
    c.note("R=100: oulc tau-rmse " + std::to_string(oulc_tau_rmse) + ", oc " +
           std::to_string(oc_tau_rmse) + ", oc mean tau " +
           std::to_string(m.models.at("oc").params.at("tau").mean));
}

// ---------------------------------------------------------------- criterion 7
void criterion_empirical_fixture(Check& c) {
    const auto data = io::ingest(fixture_path());
    c.require(data.series.size() == 97,
              "fixture has " + std::to_string(data.series.size()) + " rows");

    const ChangePointFit fit_oulc = detect_oulc(data.series, {}, {}, 5, resolve_threads(0));
    const ChangePointFit fit_oc = detect_oc(data.series);
    c.require(data.dates.at(fit_oulc.tau_hat - 1) == "2022-04-19",
              "oulc tau date " + data.dates.at(fit_oulc.tau_hat - 1));
    c.require(data.dates.at(fit_oc.tau_hat - 1) == "2022-04-20",
              "oc tau date " + data.dates.at(fit_oc.tau_hat - 1));

    const bool k5_ok = std::abs(fit_oulc.aic - (-2207.14)) <= 0.5 &&
                       std::abs(fit_oc.aic - (-565.36)) <= 0.5;
    if (k5_ok) {
        c.note("k=5 convention matches: aic_oulc=" + std::to_string(fit_oulc.aic) +
               ", aic_oc=" + std::to_string(fit_oc.aic));
    } else {
        const double aic_oulc_k4 = aic(fit_oulc.loglik, 4);
        const double aic_oc_k4 = aic(fit_oc.loglik, 4);
        const bool k4_ok = std::abs(aic_oulc_k4 - (-2207.14)) <= 0.5 &&
                           std::abs(aic_oc_k4 - (-565.36)) <= 0.5;
        c.require(k4_ok, "neither k=5 (" + std::to_string(fit_oulc.aic) + ", " +
                             std::to_string(fit_oc.aic) + ") nor k=4 (" +
                             std::to_string(aic_oulc_k4) + ", " +
                             std::to_string(aic_oc_k4) + ") lands within 0.5");
        if (k4_ok) {
            c.note("k=4 convention matches instead of the default k=5");
        }
    }
}

// ---------------------------------------------------------------- criterion 8
void criterion_bootstrap(Check& c) {
    // minimal-set properties on randomized frequency vectors
    std::mt19937_64 rng(20220419);
    for (int trial = 0; trial < 500; ++trial) {
        const int support = 1 + static_cast<int>(rng() % 15);
        std::vector<std::size_t> samples;
        std::vector<std::size_t> freq(support);
        for (int v = 0; v < support; ++v) {
            freq[v] = 1 + rng() % 60;
            samples.insert(samples.end(), freq[v], 3 + v);
        }
        const double alpha = 0.01 + 0.4 * (rng() % 1000) / 1000.0;
        const auto [set, mass] = tau_confidence_set(samples, alpha);
        c.require(mass >= 1.0 - alpha, "tau set mass below 1-alpha");
        if (set.size() > 1) {
            std::size_t min_freq = ~0ull;
            for (const std::size_t t : set) {
                min_freq = std::min(min_freq, freq[t - 3]);
            }
            c.require(mass - static_cast<double>(min_freq) / samples.size() <
                          1.0 - alpha,
                      "tau set not minimal");
        }
        const auto [wider, wmass] = tau_confidence_set(samples, alpha / 2.0);
        c.require(std::includes(wider.begin(), wider.end(), set.begin(), set.end()),
                  "alpha monotonicity violated");
    }

    // percentile order-statistic indices, checked against retained replicates
    {
        const Series series = simulated(24, 12, {0.0, 1.69e-4}, {0.0, 1.2e-3}, 31, 96);
        const ChangePointFit fit = detect_oc(series);
        BootstrapConfig cfg;
        cfg.B = 40;
        cfg.alpha = 0.1;
        cfg.seed = 9;
        cfg.substeps = 96;
        cfg.keep_replicates = true;
        const BootstrapResult res =
            bootstrap_ci(series, fit, cfg, {}, {}, resolve_threads(0));
        std::vector<double> mu0;
        for (const auto& r : *res.replicate_fits) {
            mu0.push_back(r.mu0);
        }
        std::sort(mu0.begin(), mu0.end());
        c.require(res.ci_mu0.first == mu0[1] && res.ci_mu0.second == mu0[37],
                  "percentile order statistics off (B=40, alpha=0.1)");
    }

    // coverage smoke: nominal 95% CI for mu0 across 50 outer replications
    {
        int covered = 0;
        const double mu_true = 0.0008;
        for (int rep = 0; rep < 50; ++rep) {
            const Series series = simulated(250, 125, {mu_true, 1.69e-4},
                                            {mu_true, 7.84e-4}, 5000 + rep, 500);
            const ChangePointFit fit = detect_oulc(series, {}, {}, 5, resolve_threads(0));
            BootstrapConfig cfg;
            cfg.B = 100;
            cfg.alpha = 0.05;
            cfg.seed = 777 + rep;
            cfg.substeps = 500;
            const BootstrapResult res =
                bootstrap_ci(series, fit, cfg, {}, {}, resolve_threads(0));
            if (res.ci_mu0.first <= mu_true && mu_true <= res.ci_mu0.second) {
                ++covered;
            }
        }
        c.require(covered >= 43, "coverage " + std::to_string(covered) + "/50");
        c.note("mu0 coverage " + std::to_string(covered) + "/50 at nominal 95%");
    }

    // fixture tau set across three seeds
    {
        const auto data = io::ingest(fixture_path());
        const ChangePointFit fit = detect_oulc(data.series, {}, {}, 5, resolve_threads(0));
        for (const std::uint64_t seed : {42ull, 7ull, 2024ull}) {
            BootstrapConfig cfg;
            cfg.B = 1000;
            cfg.alpha = 0.05;
            cfg.seed = seed;
            cfg.substeps = 1000;
            const BootstrapResult res =
                bootstrap_ci(data.series, fit, cfg, {}, {}, resolve_threads(0));
            const long lo = static_cast<long>(res.tau_set.front());
            const long hi = static_cast<long>(res.tau_set.back());
            c.require(std::abs(lo - 70) <= 2 && std::abs(hi - 79) <= 2,
                      "seed " + std::to_string(seed) + ": tau set (" +
                          std::to_string(lo) + "," + std::to_string(hi) + ")");
            c.require(std::abs(res.ci_sigma2_0.first / 0.0000958 - 1.0) <= 0.10 &&
                          std::abs(res.ci_sigma2_0.second / 0.0001170 - 1.0) <= 0.10,
                      "seed " + std::to_string(seed) + ": sigma2_0 ci (" +
                          std::to_string(res.ci_sigma2_0.first) + "," +
                          std::to_string(res.ci_sigma2_0.second) + ")");
            c.note("seed " + std::to_string(seed) + " set (" + std::to_string(lo) +
                   "," + std::to_string(hi) + ") mass " +
                   std::to_string(res.tau_set_mass));
        }
    }
}

// ---------------------------------------------------------------- criterion 9
void criterion_determinism(Check& c) {
    // library level: every stage bitwise identical across worker counts
    const Series series = simulated(40, 15, {0.0008, 1.69e-4}, {0.0, 9e-4}, 11, 200);
    const ChangePointFit f1 = detect_oulc(series, {}, {}, 5, 1);
    const ChangePointFit f3 = detect_oulc(series, {}, {}, 5, 3);
    c.require(f1.loglik == f3.loglik && f1.tau_hat == f3.tau_hat &&
                  f1.params0.sigma2 == f3.params0.sigma2,
              "detect_oulc differs across worker counts");

    BootstrapConfig bcfg;
    bcfg.B = 32;
    bcfg.seed = 5;
    bcfg.substeps = 100;
    const BootstrapResult b1 = bootstrap_ci(series, f1, bcfg, {}, {}, 1);
    const BootstrapResult b3 = bootstrap_ci(series, f1, bcfg, {}, {}, 3);
    c.require(b1.ci_mu0 == b3.ci_mu0 && b1.ci_sigma2_1 == b3.ci_sigma2_1 &&
                  b1.tau_set == b3.tau_set,
              "bootstrap differs across worker counts");

    ScenarioSpec spec;
    spec.name = "det";
    spec.n = 30;
    spec.tau_true = 10;
    spec.params0 = {0.0, 1.69e-4};
    spec.params1 = {0.0, 1.5e-3};
    spec.replications = 6;
    spec.seed = 3;
    spec.substeps = 100;
    const ScenarioMetrics m1 = run_scenario(spec, {}, {}, 1);
    const ScenarioMetrics m3 = run_scenario(spec, {}, {}, 3);
    for (const char* p : kParamNames) {
        c.require(m1.models.at("oulc").params.at(p).rmse ==
                          m3.models.at("oulc").params.at(p).rmse &&
                      m1.models.at("oc").params.at(p).mean ==
                          m3.models.at("oc").params.at(p).mean,
                  std::string("bench metrics differ for ") + p);
    }

    // CLI level: machine-readable bytes identical across runs and workers
    const fs::path dir = fs::temp_directory_path() / "oulc_acceptance";
    fs::create_directories(dir);
    const std::string cli = OULC_CLI_PATH;
    const fs::path sim_csv = dir / "sim.csv";
    const auto shell = [&](const std::string& cmd) {
        const int rc = std::system(cmd.c_str());
        c.require(rc == 0, "command failed: " + cmd);
    };
    shell(cli + " simulate --n 30 --tau 10 --mu0 0.0008 --mu1 0 --sigma2-0 0.000169" +
          " --sigma2-1 0.0012 --substeps 120 --seed 77 --raw-log --out " +
          sim_csv.string());
    const auto read_file = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    shell(cli + " simulate --n 30 --tau 10 --mu0 0.0008 --mu1 0 --sigma2-0 0.000169" +
          " --sigma2-1 0.0012 --substeps 120 --seed 77 --raw-log --out " +
          (dir / "sim2.csv").string());
    c.require(read_file(sim_csv) == read_file(dir / "sim2.csv"),
              "simulate output not reproducible");

    for (const char* threads : {"1", "3"}) {
        shell(cli + " detect --input " + sim_csv.string() + " --no-log --threads " +
              threads + " --out " + (dir / ("det" + std::string(threads) + ".json")).string());
        shell(cli + " ci --input " + sim_csv.string() +
              " --no-log --model oc --B 20 --seed 4 --substeps 80 --threads " + threads +
              " --out " + (dir / ("ci" + std::string(threads) + ".json")).string());
    }
    c.require(read_file(dir / "det1.json") == read_file(dir / "det3.json"),
              "detect json differs across worker counts");
    c.require(read_file(dir / "ci1.json") == read_file(dir / "ci3.json"),
              "ci json differs across worker counts");

    {
        std::ofstream cfg(dir / "bench.json");
        cfg << R"({"scenarios":[{"name":"d","n":24,"tau":8,"mu0":0,"mu1":0,)"
            << R"("sigma2_0":0.000169,"sigma2_1":0.0015,"replications":3,)"
            << R"("seed":6,"substeps":80}]})";
    }
    shell(cli + " bench --config " + (dir / "bench.json").string() + " --out-dir " +
          (dir / "b1").string() + " --threads 1 > /dev/null");
    shell(cli + " bench --config " + (dir / "bench.json").string() + " --out-dir " +
          (dir / "b3").string() + " --threads 3 > /dev/null");
    c.require(read_file(dir / "b1" / "metrics.json") == read_file(dir / "b3" / "metrics.json"),
              "bench metrics json differs across worker counts");
    c.note("simulate/detect/bootstrap/bench byte-identical across runs and workers");
}

}  // namespace

int main(int argc, char** argv) {
    struct Entry {
        int id;
        const char* name;
        std::function<void(Check&)> fn;
    };
    const std::vector<Entry> entries = {
        {1, "density normalization on the 16-point parameter grid", criterion_density_normalization},
        {2, "density matches the brute-force path-simulation oracle", criterion_density_vs_monte_carlo},
        {3, "analytic sigma2 gradient vs central finite differences", criterion_gradient},
        {4, "detectors match the dense-grid oracle and closed forms", criterion_mle_equivalence},
        {5, "scaled variance-shift study reproduces the model ordering", criterion_sigma_study},
        {6, "scaled drift-shift study reproduces the model ordering", criterion_mu_study},
        {7, "bundled index fixture: tau dates and AIC values", criterion_empirical_fixture},
        {8, "bootstrap index/set properties, coverage, and fixture tau set", criterion_bootstrap},
        {9, "seeded pipelines are bitwise deterministic", criterion_determinism},
    };

    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) {
        wanted.insert(std::atoi(argv[i]));
    }

    int failures = 0;
    for (const auto& entry : entries) {
        if (!wanted.empty() && wanted.count(entry.id) == 0) {
            continue;
        }
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            entry.fn(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        std::cout << (check.pass ? "[PASS]" : "[FAIL]") << " criterion " << entry.id
                  << ": " << entry.name;
        if (!check.detail.str().empty()) {
            std::cout << " — " << check.detail.str();
        }
        std::cout << " (" << secs << "s)" << std::endl;
        failures += check.pass ? 0 : 1;
    }
    if (failures != 0) {
        std::cout << failures << " criterion(s) failed" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
