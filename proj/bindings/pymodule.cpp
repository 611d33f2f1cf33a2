#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "oulc/bench.hpp"
#include "oulc/bootstrap.hpp"
#include "oulc/density.hpp"
#include "oulc/estimate.hpp"
#include "oulc/io.hpp"
#include "oulc/simulate.hpp"

namespace py = pybind11;
using namespace oulc;

namespace {

Series series_from_arrays(const std::vector<double>& o, const std::vector<double>& u,
                          const std::vector<double>& l, const std::vector<double>& c) {
    if (o.size() != u.size() || o.size() != l.size() || o.size() != c.size()) {
        throw Error("o, u, l, c must have equal length");
    }
    std::vector<IntervalBar> bars(o.size());
    for (std::size_t i = 0; i < o.size(); ++i) {
        bars[i] = IntervalBar{o[i], u[i], l[i], c[i]};
    }
    return Series(std::move(bars));
}

py::dict diagnostics_dict(const FitDiagnostics& d) {
    py::dict out;
    out["nr_iterations"] = d.nr_iterations;
    out["fallback_fits"] = d.fallback_fits;
    out["clamped_bars"] = d.clamped_bars;
    out["clamped_fraction"] = d.clamped_fraction;
    out["excessive_clamping"] = d.excessive_clamping;
    out["skipped_taus"] = d.skipped_taus;
    return out;
}

py::dict metrics_dict(const ScenarioMetrics& m) {
    py::dict out;
    out["name"] = m.name;
    py::dict models;
    for (const auto& [name, mm] : m.models) {
        py::dict params;
        for (const auto& [pname, pm] : mm.params) {
            py::dict p;
            p["true"] = pm.true_value;
            p["mean"] = pm.mean;
            p["rmse"] = pm.rmse;
            p["re"] = pm.re;
            params[pname.c_str()] = p;
        }
        py::dict entry;
        entry["failures"] = mm.failures;
        entry["params"] = params;
        models[name.c_str()] = entry;
    }
    out["models"] = models;
    return out;
}

}  // namespace

PYBIND11_MODULE(_oulc, m) {
    m.doc() = "change-point detection for open/up/low/close interval time series";

    py::register_exception<Error>(m, "OulcError", PyExc_RuntimeError);

    py::class_<IntervalBar>(m, "IntervalBar")
        .def(py::init<double, double, double, double>(), py::arg("o"), py::arg("u"),
             py::arg("l"), py::arg("c"))
        .def_readwrite("o", &IntervalBar::o)
        .def_readwrite("u", &IntervalBar::u)
        .def_readwrite("l", &IntervalBar::l)
        .def_readwrite("c", &IntervalBar::c)
        .def("__repr__", [](const IntervalBar& b) {
            return "IntervalBar(o=" + std::to_string(b.o) + ", u=" + std::to_string(b.u) +
                   ", l=" + std::to_string(b.l) + ", c=" + std::to_string(b.c) + ")";
        });

    py::class_<SegmentParams>(m, "SegmentParams")
        .def(py::init<double, double>(), py::arg("mu"), py::arg("sigma2"))
        .def_readwrite("mu", &SegmentParams::mu)
        .def_readwrite("sigma2", &SegmentParams::sigma2)
        .def("__repr__", [](const SegmentParams& p) {
            return "SegmentParams(mu=" + std::to_string(p.mu) +
                   ", sigma2=" + std::to_string(p.sigma2) + ")";
        });

    py::class_<TruncationPolicy>(m, "TruncationPolicy")
        .def(py::init([](double rel_tol, int k_min, int k_max) {
                 return TruncationPolicy{rel_tol, k_min, k_max};
             }),
             py::arg("rel_tol") = 1e-12, py::arg("k_min") = 3, py::arg("k_max") = 64)
        .def_readwrite("rel_tol", &TruncationPolicy::rel_tol)
        .def_readwrite("k_min", &TruncationPolicy::k_min)
        .def_readwrite("k_max", &TruncationPolicy::k_max);

    py::class_<NRConfig>(m, "NRConfig")
        .def(py::init<>())
        .def_readwrite("eps", &NRConfig::eps)
        .def_readwrite("max_iter", &NRConfig::max_iter)
        .def_readwrite("step_clamp", &NRConfig::step_clamp)
        .def_readwrite("init_multipliers", &NRConfig::init_multipliers)
        .def_readwrite("fd_step", &NRConfig::fd_step);

    py::class_<LogDensityValue>(m, "LogDensityValue")
        .def_readonly("log_f", &LogDensityValue::log_f)
        .def_readonly("k_used", &LogDensityValue::k_used)
        .def_readonly("clamped", &LogDensityValue::clamped);

    py::class_<Series>(m, "Series")
        .def(py::init<std::vector<IntervalBar>>(), py::arg("bars"))
        .def(py::init(&series_from_arrays), py::arg("o"), py::arg("u"), py::arg("l"),
             py::arg("c"))
        .def("__len__", &Series::size)
        .def("__getitem__",
             [](const Series& s, std::size_t i) {
                 if (i >= s.size()) {
                     throw py::index_error();
                 }
                 return s[i];
             })
        .def("opens", [](const Series& s) {
            std::vector<double> v;
            for (const auto& b : s) v.push_back(b.o);
            return v;
        })
        .def("highs", [](const Series& s) {
            std::vector<double> v;
            for (const auto& b : s) v.push_back(b.u);
            return v;
        })
        .def("lows", [](const Series& s) {
            std::vector<double> v;
            for (const auto& b : s) v.push_back(b.l);
            return v;
        })
        .def("closes", [](const Series& s) {
            std::vector<double> v;
            for (const auto& b : s) v.push_back(b.c);
            return v;
        });

    py::class_<ChangePointFit>(m, "ChangePointFit")
        .def_readonly("tau_hat", &ChangePointFit::tau_hat)
        .def_readonly("params0", &ChangePointFit::params0)
        .def_readonly("params1", &ChangePointFit::params1)
        .def_readonly("loglik", &ChangePointFit::loglik)
        .def_readonly("aic", &ChangePointFit::aic)
        .def_property_readonly("model",
                               [](const ChangePointFit& f) { return model_name(f.model); })
        .def_property_readonly("diagnostics", [](const ChangePointFit& f) {
            return diagnostics_dict(f.diagnostics);
        });

    py::class_<ReplicateEstimate>(m, "ReplicateEstimate")
        .def_readonly("tau", &ReplicateEstimate::tau)
        .def_readonly("mu0", &ReplicateEstimate::mu0)
        .def_readonly("mu1", &ReplicateEstimate::mu1)
        .def_readonly("sigma2_0", &ReplicateEstimate::sigma2_0)
        .def_readonly("sigma2_1", &ReplicateEstimate::sigma2_1);

    py::class_<BootstrapResult>(m, "BootstrapResult")
        .def_readonly("ci_mu0", &BootstrapResult::ci_mu0)
        .def_readonly("ci_mu1", &BootstrapResult::ci_mu1)
        .def_readonly("ci_sigma2_0", &BootstrapResult::ci_sigma2_0)
        .def_readonly("ci_sigma2_1", &BootstrapResult::ci_sigma2_1)
        .def_readonly("tau_set", &BootstrapResult::tau_set)
        .def_readonly("tau_set_mass", &BootstrapResult::tau_set_mass)
        .def_readonly("redraws", &BootstrapResult::redraws)
        .def_readonly("replicate_fits", &BootstrapResult::replicate_fits);

    m.def("log_density_oulc", &log_density_oulc, py::arg("bar"), py::arg("params"),
          py::arg("policy") = TruncationPolicy{});
    m.def("dlogf_dsigma2", &dlogf_dsigma2, py::arg("bar"), py::arg("params"),
          py::arg("policy") = TruncationPolicy{});
    m.def("log_density_oc", &log_density_oc, py::arg("o"), py::arg("c"),
          py::arg("params"));

    m.def(
        "simulate_series",
        [](std::size_t n, std::size_t tau, const SegmentParams& params0,
           const SegmentParams& params1, double o1, std::size_t substeps,
           std::uint64_t seed) {
            SimSpec spec{n, tau, params0, params1, o1, substeps, seed};
            return simulate_series(spec);
        },
        py::arg("n"), py::arg("tau"), py::arg("params0"), py::arg("params1"),
        py::arg("o1") = 0.0, py::arg("substeps") = 1000, py::arg("seed") = 0);

    m.def("mu_hats",
          [](const Series& s, std::size_t tau) { return mu_hats(s.bars(), tau); },
          py::arg("series"), py::arg("tau"));

    m.def("detect_oulc", &detect_oulc, py::arg("series"), py::arg("nr") = NRConfig{},
          py::arg("policy") = TruncationPolicy{}, py::arg("aic_k") = 5,
          py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
    m.def("detect_oc", &detect_oc, py::arg("series"), py::arg("aic_k") = 5,
          py::call_guard<py::gil_scoped_release>());

    m.def(
        "bootstrap_ci",
        [](const Series& series, const ChangePointFit& fit, std::size_t B, double alpha,
           std::uint64_t seed, std::size_t substeps, bool keep_replicates,
           const NRConfig& nr, const TruncationPolicy& policy, unsigned threads) {
            BootstrapConfig cfg{B, alpha, seed, substeps, keep_replicates};
            py::gil_scoped_release release;
            return bootstrap_ci(series, fit, cfg, nr, policy, threads);
        },
        py::arg("series"), py::arg("fit"), py::arg("B") = 1000, py::arg("alpha") = 0.05,
        py::arg("seed") = 0, py::arg("substeps") = 1000,
        py::arg("keep_replicates") = false, py::arg("nr") = NRConfig{},
        py::arg("policy") = TruncationPolicy{}, py::arg("threads") = 1);

    m.def("tau_confidence_set", &tau_confidence_set, py::arg("tau_samples"),
          py::arg("alpha"));

    m.def(
        "run_scenario",
        [](const std::string& name, std::size_t n, std::size_t tau,
           const SegmentParams& params0, const SegmentParams& params1,
           std::size_t replications, std::uint64_t seed,
           const std::vector<std::string>& models, std::size_t substeps,
           const NRConfig& nr, const TruncationPolicy& policy, unsigned threads) {
            ScenarioSpec spec;
            spec.name = name;
            spec.n = n;
            spec.tau_true = tau;
            spec.params0 = params0;
            spec.params1 = params1;
            spec.replications = replications;
            spec.seed = seed;
            spec.substeps = substeps;
            spec.models.clear();
            for (const auto& mn : models) {
                if (mn == "oulc") {
                    spec.models.push_back(Model::OULC);
                } else if (mn == "oc") {
                    spec.models.push_back(Model::OC);
                } else {
                    throw Error("unknown model '" + mn + "'");
                }
            }
            ScenarioMetrics metrics;
            {
                py::gil_scoped_release release;
                metrics = run_scenario(spec, nr, policy, threads, false);
            }
            return metrics_dict(metrics);
        },
        py::arg("name"), py::arg("n"), py::arg("tau"), py::arg("params0"),
        py::arg("params1"), py::arg("replications"), py::arg("seed") = 0,
        py::arg("models") = std::vector<std::string>{"oulc", "oc"},
        py::arg("substeps") = 1000, py::arg("nr") = NRConfig{},
        py::arg("policy") = TruncationPolicy{}, py::arg("threads") = 1);

    m.def(
        "ingest",
        [](const std::filesystem::path& path, bool log_transform) {
            auto data = io::ingest(path, log_transform);
            return py::make_tuple(std::move(data.series), std::move(data.dates));
        },
        py::arg("path"), py::arg("log_transform") = true);
}
