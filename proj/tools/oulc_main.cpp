#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oulc/bench.hpp"
#include "oulc/bootstrap.hpp"
#include "oulc/estimate.hpp"
#include "oulc/io.hpp"
#include "oulc/simulate.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string output = "json";
    std::string out_path;
    unsigned threads = 0;
    int aic_k = 5;
    oulc::NRConfig nr;
    oulc::TruncationPolicy policy;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "master seed for any randomized stage");
    cmd->add_option("--output", opts.output, "output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", opts.out_path, "write output to this file (default stdout)");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
    cmd->add_option("--aic-k", opts.aic_k, "parameter count in AIC = 2k - 2*loglik");
    cmd->add_option("--nr-eps", opts.nr.eps, "Newton convergence threshold on |dzeta|");
    cmd->add_option("--nr-max-iter", opts.nr.max_iter, "Newton iteration cap per start");
    cmd->add_option("--step-clamp", opts.nr.step_clamp, "max |dzeta| per Newton step");
    cmd->add_option("--fd-step", opts.nr.fd_step,
                    "relative step for the finite-difference second derivative");
    cmd->add_option("--init-multipliers", opts.nr.init_multipliers,
                    "multi-start multipliers on the anchor variance");
    cmd->add_option("--rel-tol", opts.policy.rel_tol, "series truncation tolerance");
    cmd->add_option("--k-min", opts.policy.k_min, "minimum series radius");
    cmd->add_option("--k-max", opts.policy.k_max, "maximum series radius");
}

void emit(const CommonOpts& opts, const std::string& payload) {
    if (opts.out_path.empty()) {
        std::cout << payload;
        if (payload.empty() || payload.back() != '\n') {
            std::cout << '\n';
        }
        return;
    }
    std::ofstream out(opts.out_path);
    if (!out) {
        throw oulc::Error("cannot write '" + opts.out_path + "'");
    }
    out << payload;
    if (payload.empty() || payload.back() != '\n') {
        out << '\n';
    }
}

std::vector<oulc::Model> parse_models(const std::string& model) {
    if (model == "oulc") {
        return {oulc::Model::OULC};
    }
    if (model == "oc") {
        return {oulc::Model::OC};
    }
    return {oulc::Model::OULC, oulc::Model::OC};
}

int run(int argc, char** argv) {
    CLI::App app{"change-point detection for open/up/low/close interval time series"};
    app.require_subcommand(1);

    // ----- detect -----
    CommonOpts detect_opts;
    std::string detect_input, detect_model = "both";
    bool detect_no_log = false;
    auto* detect = app.add_subcommand("detect", "fit the one-change-point model(s)");
    detect->add_option("--input", detect_input, "input CSV")->required();
    detect->add_option("--model", detect_model, "oulc, oc, or both")
        ->check(CLI::IsMember({"oulc", "oc", "both"}));
    detect->add_flag("--no-log", detect_no_log,
                     "input values are already log prices; skip the ln transform");
    add_common(detect, detect_opts);

    // ----- ci -----
    CommonOpts ci_opts;
    std::string ci_input, ci_model = "oulc";
    bool ci_no_log = false;
    oulc::BootstrapConfig boot_cfg;
    auto* ci = app.add_subcommand("ci", "detect, then bootstrap confidence intervals");
    ci->add_option("--input", ci_input, "input CSV")->required();
    ci->add_option("--model", ci_model, "oulc or oc")
        ->check(CLI::IsMember({"oulc", "oc"}));
    ci->add_flag("--no-log", ci_no_log, "input values are already log prices");
    ci->add_option("--B", boot_cfg.B, "bootstrap replications");
    ci->add_option("--alpha", boot_cfg.alpha, "significance level");
    ci->add_option("--substeps", boot_cfg.substeps, "intra-day grid for replicates");
    ci->add_flag("--keep-replicates", boot_cfg.keep_replicates,
                 "include per-replicate estimates in the output");
    add_common(ci, ci_opts);

    // ----- simulate -----
    CommonOpts sim_opts;
    oulc::SimSpec sim_spec;
    std::string sim_start_date = "2020-01-01";
    bool sim_raw_log = false;
    auto* simulate = app.add_subcommand("simulate", "write a synthetic series CSV");
    simulate->add_option("--n", sim_spec.n, "days");
    simulate->add_option("--tau", sim_spec.tau, "change day (params switch after it)");
    simulate->add_option("--mu0", sim_spec.params0.mu, "drift before the change");
    simulate->add_option("--mu1", sim_spec.params1.mu, "drift after the change");
    simulate->add_option("--sigma2-0", sim_spec.params0.sigma2, "variance before");
    simulate->add_option("--sigma2-1", sim_spec.params1.sigma2, "variance after");
    simulate->add_option("--o1", sim_spec.o1, "initial log price");
    simulate->add_option("--substeps", sim_spec.substeps, "intra-day grid size");
    simulate->add_option("--start-date", sim_start_date, "first calendar date");
    simulate->add_flag("--raw-log", sim_raw_log,
                       "write log values verbatim instead of exp() prices");
    add_common(simulate, sim_opts);

    // ----- bench -----
    CommonOpts bench_opts;
    std::string bench_config, bench_out_dir = ".";
    bool bench_raw = false;
    auto* bench = app.add_subcommand("bench", "run scenario studies from a config file");
    bench->add_option("--config", bench_config, "scenario config JSON")->required();
    bench->add_option("--out-dir", bench_out_dir, "directory for metrics files");
    bench->add_flag("--raw-estimates", bench_raw, "also write per-replicate estimates");
    add_common(bench, bench_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints the message / help text
        return code == 0 ? 0 : kExitUsage;
    }

    if (detect->parsed()) {
        const auto data = oulc::io::ingest(detect_input, !detect_no_log);
        std::vector<oulc::ChangePointFit> fits;
        for (const oulc::Model m : parse_models(detect_model)) {
            fits.push_back(m == oulc::Model::OULC
                               ? oulc::detect_oulc(data.series, detect_opts.nr,
                                                   detect_opts.policy, detect_opts.aic_k,
                                                   detect_opts.threads)
                               : oulc::detect_oc(data.series, detect_opts.aic_k));
        }
        if (detect_opts.output == "csv") {
            emit(detect_opts, oulc::io::fits_to_csv(fits, &data.dates));
        } else {
            oulc::io::json j;
            j["schema_version"] = oulc::io::kSchemaVersion;
            j["input"] = detect_input;
            j["fits"] = oulc::io::json::array();
            for (const auto& fit : fits) {
                j["fits"].push_back(oulc::io::fit_to_json(fit, &data.dates));
            }
            emit(detect_opts, j.dump(2));
        }
        return 0;
    }

    if (ci->parsed()) {
        const auto data = oulc::io::ingest(ci_input, !ci_no_log);
        boot_cfg.seed = ci_opts.seed;
        const oulc::Model model = parse_models(ci_model).front();
        const oulc::ChangePointFit fit =
            model == oulc::Model::OULC
                ? oulc::detect_oulc(data.series, ci_opts.nr, ci_opts.policy,
                                    ci_opts.aic_k, ci_opts.threads)
                : oulc::detect_oc(data.series, ci_opts.aic_k);
        const oulc::BootstrapResult res = oulc::bootstrap_ci(
            data.series, fit, boot_cfg, ci_opts.nr, ci_opts.policy, ci_opts.threads);
        if (ci_opts.output == "csv") {
            emit(ci_opts, oulc::io::fits_to_csv({fit}, &data.dates) +
                              oulc::io::bootstrap_to_csv(res));
        } else {
            oulc::io::json j;
            j["schema_version"] = oulc::io::kSchemaVersion;
            j["input"] = ci_input;
            j["fit"] = oulc::io::fit_to_json(fit, &data.dates);
            j["bootstrap"] = oulc::io::bootstrap_to_json(res, boot_cfg);
            emit(ci_opts, j.dump(2));
        }
        return 0;
    }

    if (simulate->parsed()) {
        sim_spec.seed = sim_opts.seed;
        const oulc::Series series = oulc::simulate_series(sim_spec);
        const auto dates = oulc::io::weekday_dates(sim_start_date, series.size());
        std::ostringstream buf;
        oulc::io::write_series_csv(buf, series, dates, !sim_raw_log);
        emit(sim_opts, buf.str());
        return 0;
    }

    if (bench->parsed()) {
        std::ifstream cfg_in(bench_config);
        if (!cfg_in) {
            throw oulc::ParseError(0, "cannot open '" + bench_config + "'");
        }
        oulc::io::json cfg = oulc::io::json::parse(cfg_in);
        auto scenarios = oulc::io::parse_scenarios(cfg);
        std::vector<std::pair<oulc::ScenarioSpec, oulc::ScenarioMetrics>> runs;
        for (auto& spec : scenarios) {
            if (bench_opts.seed != 0) {
                spec.seed = bench_opts.seed;
            }
            runs.emplace_back(spec, oulc::run_scenario(spec, bench_opts.nr,
                                                       bench_opts.policy,
                                                       bench_opts.threads, bench_raw));
        }
        const std::filesystem::path dir(bench_out_dir);
        std::filesystem::create_directories(dir);
        {
            std::ofstream out(dir / "metrics.json");
            out << oulc::io::metrics_to_json(runs).dump(2) << '\n';
        }
        {
            std::ofstream out(dir / "metrics.csv");
            out << oulc::io::metrics_to_csv(runs);
        }
        if (bench_raw) {
            std::ofstream out(dir / "estimates.csv");
            out << oulc::io::raw_estimates_to_csv(runs);
        }
        std::cout << "wrote " << (dir / "metrics.json").string() << " and metrics.csv\n";
        return 0;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const oulc::ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const oulc::InvariantViolation& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const oulc::TooShort& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const oulc::InvalidBar& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const oulc::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
