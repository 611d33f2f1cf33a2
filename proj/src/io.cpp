#include "oulc/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace oulc::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string trim(std::string s) {
    const auto is_space = [](unsigned char ch) { return std::isspace(ch) != 0; };
    while (!s.empty() && is_space(s.front())) {
        s.erase(s.begin());
    }
    while (!s.empty() && is_space(s.back())) {
        s.pop_back();
    }
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

double parse_double(const std::string& field, long line) {
    const std::string t = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ParseError(line, "cannot parse number '" + field + "'");
    }
    return value;
}

bool iso_date_form(const std::string& d) {
    if (d.size() != 10 || d[4] != '-' || d[7] != '-') {
        return false;
    }
    for (const std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(d[i]))) {
            return false;
        }
    }
    return true;
}

// days-from-civil / civil-from-days (Howard Hinnant's algorithms)
long days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

std::array<int, 3> civil_from_days(long z) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 40> buf;
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

Dataset ingest(const std::filesystem::path& path, bool log_transform) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError(0, "cannot open '" + path.string() + "'");
    }
    std::string line;
    long line_no = 0;

    if (!std::getline(in, line)) {
        throw ParseError(1, "empty file");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = split_csv_line(line);
    constexpr std::array<const char*, 5> wanted = {"date", "open", "high", "low", "close"};
    std::array<std::size_t, 5> col{};
    for (std::size_t w = 0; w < wanted.size(); ++w) {
        bool found = false;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (lower(trim(header[i])) == wanted[w]) {
                col[w] = i;
                found = true;
                break;
            }
        }
        if (!found) {
            throw ParseError(1, std::string("missing required column '") + wanted[w] + "'");
        }
    }

    std::vector<IntervalBar> bars;
    std::vector<std::string> dates;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        const std::size_t max_col = *std::max_element(col.begin(), col.end());
        if (fields.size() <= max_col) {
            throw ParseError(line_no, "expected at least " + std::to_string(max_col + 1) +
                                          " fields, got " + std::to_string(fields.size()));
        }
        const std::string date = trim(fields[col[0]]);
        if (!iso_date_form(date)) {
            throw ParseError(line_no, "date '" + date + "' is not ISO yyyy-mm-dd");
        }
        if (!dates.empty() && date <= dates.back()) {
            throw ParseError(line_no, "dates must be strictly increasing");
        }
        double o = parse_double(fields[col[1]], line_no);
        double u = parse_double(fields[col[2]], line_no);
        double l = parse_double(fields[col[3]], line_no);
        double c = parse_double(fields[col[4]], line_no);
        if (log_transform) {
            if (!(o > 0.0) || !(u > 0.0) || !(l > 0.0) || !(c > 0.0)) {
                throw InvariantViolation(line_no, "prices must be positive");
            }
            o = std::log(o);
            u = std::log(u);
            l = std::log(l);
            c = std::log(c);
        }
        const IntervalBar bar{o, u, l, c};
        if (bar.u == bar.l) {
            throw InvariantViolation(line_no, "high equals low");
        }
        if (!bar.valid()) {
            throw InvariantViolation(line_no,
                                     "requires low <= min(open,close) <= max(open,close) <= high");
        }
        bars.push_back(bar);
        dates.push_back(date);
    }
    if (bars.size() < 7) {
        throw TooShort("need at least 7 rows, got " + std::to_string(bars.size()));
    }
    return Dataset{Series(std::move(bars)), std::move(dates)};
}

void write_series_csv(std::ostream& out, const Series& series,
                      const std::vector<std::string>& dates, bool as_prices) {
    if (dates.size() != series.size()) {
        throw Error("dates and series lengths differ");
    }
    out << "date,open,high,low,close\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const IntervalBar& b = series[i];
        const auto emit = [&](double v) {
            return format_double(as_prices ? std::exp(v) : v);
        };
        out << dates[i] << ',' << emit(b.o) << ',' << emit(b.u) << ',' << emit(b.l)
            << ',' << emit(b.c) << '\n';
    }
}

std::vector<std::string> weekday_dates(const std::string& start, std::size_t n) {
    if (!iso_date_form(start)) {
        throw Error("start date '" + start + "' is not ISO yyyy-mm-dd");
    }
    const int y = std::stoi(start.substr(0, 4));
    const int m = std::stoi(start.substr(5, 2));
    const int d = std::stoi(start.substr(8, 2));
    long z = days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
    std::vector<std::string> out;
    out.reserve(n);
    while (out.size() < n) {
        // weekday: 1970-01-01 (z = 0) was a Thursday
        const long wd = ((z % 7) + 11) % 7;  // 0 = Sunday
        if (wd != 0 && wd != 6) {
            const auto [yy, mm, dd] = civil_from_days(z);
            char buf[11];
            std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", yy, mm, dd);
            out.emplace_back(buf);
        }
        ++z;
    }
    return out;
}

json fit_to_json(const ChangePointFit& fit, const std::vector<std::string>* dates) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["model"] = model_name(fit.model);
    j["tau_hat"] = fit.tau_hat;
    if (dates != nullptr && fit.tau_hat >= 1 && fit.tau_hat <= dates->size()) {
        j["tau_date"] = (*dates)[fit.tau_hat - 1];
    }
    j["params0"] = {{"mu", fit.params0.mu}, {"sigma2", fit.params0.sigma2}};
    j["params1"] = {{"mu", fit.params1.mu}, {"sigma2", fit.params1.sigma2}};
    j["loglik"] = fit.loglik;
    j["aic"] = fit.aic;
    j["diagnostics"] = {{"nr_iterations", fit.diagnostics.nr_iterations},
                        {"fallback_fits", fit.diagnostics.fallback_fits},
                        {"clamped_bars", fit.diagnostics.clamped_bars},
                        {"clamped_fraction", fit.diagnostics.clamped_fraction},
                        {"excessive_clamping", fit.diagnostics.excessive_clamping},
                        {"skipped_taus", fit.diagnostics.skipped_taus}};
    return j;
}

json bootstrap_to_json(const BootstrapResult& res, const BootstrapConfig& cfg) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["B"] = cfg.B;
    j["alpha"] = cfg.alpha;
    j["seed"] = cfg.seed;
    j["ci_mu0"] = {res.ci_mu0.first, res.ci_mu0.second};
    j["ci_mu1"] = {res.ci_mu1.first, res.ci_mu1.second};
    j["ci_sigma2_0"] = {res.ci_sigma2_0.first, res.ci_sigma2_0.second};
    j["ci_sigma2_1"] = {res.ci_sigma2_1.first, res.ci_sigma2_1.second};
    j["tau_set"] = res.tau_set;
    j["tau_set_mass"] = res.tau_set_mass;
    j["redraws"] = res.redraws;
    if (res.replicate_fits) {
        json reps = json::array();
        for (const auto& r : *res.replicate_fits) {
            reps.push_back({{"tau", r.tau},
                            {"mu0", r.mu0},
                            {"mu1", r.mu1},
                            {"sigma2_0", r.sigma2_0},
                            {"sigma2_1", r.sigma2_1}});
        }
        j["replicates"] = std::move(reps);
    }
    return j;
}

namespace {

json scenario_to_json(const ScenarioSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["n"] = spec.n;
    j["tau"] = spec.tau_true;
    j["mu0"] = spec.params0.mu;
    j["mu1"] = spec.params1.mu;
    j["sigma2_0"] = spec.params0.sigma2;
    j["sigma2_1"] = spec.params1.sigma2;
    j["replications"] = spec.replications;
    j["seed"] = spec.seed;
    j["substeps"] = spec.substeps;
    return j;
}

}  // namespace

json metrics_to_json(const std::vector<std::pair<ScenarioSpec, ScenarioMetrics>>& runs) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["scenarios"] = json::array();
    for (const auto& [spec, metrics] : runs) {
        json j = scenario_to_json(spec);
        json models;
        for (const auto& [name, mm] : metrics.models) {
            json pj;
            for (const auto& [pname, pm] : mm.params) {
                pj[pname] = {{"true", pm.true_value},
                             {"mean", pm.mean},
                             {"rmse", pm.rmse},
                             {"re", pm.re}};
            }
            models[name] = {{"failures", mm.failures}, {"params", std::move(pj)}};
        }
        j["models"] = std::move(models);
        out["scenarios"].push_back(std::move(j));
    }
    return out;
}

std::string fits_to_csv(const std::vector<ChangePointFit>& fits,
                        const std::vector<std::string>* dates) {
    std::ostringstream out;
    out << "model,tau_hat,tau_date,mu0,sigma2_0,mu1,sigma2_1,loglik,aic\n";
    for (const auto& fit : fits) {
        std::string date;
        if (dates != nullptr && fit.tau_hat >= 1 && fit.tau_hat <= dates->size()) {
            date = (*dates)[fit.tau_hat - 1];
        }
        out << model_name(fit.model) << ',' << fit.tau_hat << ',' << date << ','
            << format_double(fit.params0.mu) << ',' << format_double(fit.params0.sigma2)
            << ',' << format_double(fit.params1.mu) << ','
            << format_double(fit.params1.sigma2) << ',' << format_double(fit.loglik)
            << ',' << format_double(fit.aic) << '\n';
    }
    return out.str();
}

std::string bootstrap_to_csv(const BootstrapResult& res) {
    std::ostringstream out;
    out << "quantity,lower,upper\n";
    const auto row = [&](const char* name, const Interval& ci) {
        out << name << ',' << format_double(ci.first) << ',' << format_double(ci.second)
            << '\n';
    };
    row("mu0", res.ci_mu0);
    row("mu1", res.ci_mu1);
    row("sigma2_0", res.ci_sigma2_0);
    row("sigma2_1", res.ci_sigma2_1);
    out << "tau_set,";
    for (std::size_t i = 0; i < res.tau_set.size(); ++i) {
        out << (i ? ";" : "") << res.tau_set[i];
    }
    out << ',' << format_double(res.tau_set_mass) << '\n';
    return out.str();
}

std::string metrics_to_csv(const std::vector<std::pair<ScenarioSpec, ScenarioMetrics>>& runs) {
    std::ostringstream out;
    out << "scenario,model,parameter,true,mean,rmse,re,failures\n";
    for (const auto& [spec, metrics] : runs) {
        for (const auto& [name, mm] : metrics.models) {
            for (const char* pname : kParamNames) {
                const ParamMetrics& pm = mm.params.at(pname);
                out << spec.name << ',' << name << ',' << pname << ','
                    << format_double(pm.true_value) << ',' << format_double(pm.mean) << ','
                    << format_double(pm.rmse) << ',' << format_double(pm.re) << ','
                    << mm.failures << '\n';
            }
        }
    }
    return out.str();
}

std::string raw_estimates_to_csv(
    const std::vector<std::pair<ScenarioSpec, ScenarioMetrics>>& runs) {
    std::ostringstream out;
    out << "scenario,model,replicate,tau,mu0,mu1,sigma2_0,sigma2_1\n";
    for (const auto& [spec, metrics] : runs) {
        for (const auto& [model, estimates] : metrics.raw) {
            for (std::size_t r = 0; r < estimates.size(); ++r) {
                const ReplicateEstimate& e = estimates[r];
                out << spec.name << ',' << model_name(model) << ',' << (r + 1) << ','
                    << e.tau << ',' << format_double(e.mu0) << ',' << format_double(e.mu1)
                    << ',' << format_double(e.sigma2_0) << ',' << format_double(e.sigma2_1)
                    << '\n';
            }
        }
    }
    return out.str();
}

std::vector<ScenarioSpec> parse_scenarios(const json& config) {
    if (!config.contains("scenarios") || !config["scenarios"].is_array()) {
        throw Error("bench config needs a 'scenarios' array");
    }
    std::vector<ScenarioSpec> out;
    for (const auto& j : config["scenarios"]) {
        ScenarioSpec spec;
        spec.name = j.value("name", "scenario" + std::to_string(out.size() + 1));
        spec.n = j.value("n", spec.n);
        spec.tau_true = j.value("tau", spec.tau_true);
        spec.params0 = SegmentParams{j.value("mu0", 0.0), j.value("sigma2_0", 1.0)};
        spec.params1 = SegmentParams{j.value("mu1", 0.0), j.value("sigma2_1", 1.0)};
        spec.replications = j.value("replications", spec.replications);
        spec.seed = j.value("seed", spec.seed);
        spec.substeps = j.value("substeps", spec.substeps);
        if (j.contains("models")) {
            spec.models.clear();
            for (const auto& m : j["models"]) {
                const std::string name = m.get<std::string>();
                if (name == "oulc") {
                    spec.models.push_back(Model::OULC);
                } else if (name == "oc") {
                    spec.models.push_back(Model::OC);
                } else {
                    throw Error("unknown model '" + name + "' in bench config");
                }
            }
        }
        if (!spec.valid()) {
            throw Error("invalid scenario '" + spec.name + "' in bench config");
        }
        out.push_back(std::move(spec));
    }
    return out;
}

}  // namespace oulc::io
