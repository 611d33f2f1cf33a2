#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "oulc/bench.hpp"
#include "oulc/bootstrap.hpp"
#include "oulc/estimate.hpp"

namespace oulc::io {

using json = nlohmann::ordered_json;

// Schema version stamped into every machine-readable output.
inline constexpr int kSchemaVersion = 1;

struct Dataset {
    Series series;
    std::vector<std::string> dates;  // ISO-8601, parallel to the bars
};

// Reads `date,open,high,low,close` CSV (extra columns such as adjusted close
// are ignored). With log_transform the four prices must be positive and are
// mapped through ln; without it the file values are taken as log prices
// directly. Rows violating the bar ordering, or with high == low, raise
// InvariantViolation with their 1-based line number.
Dataset ingest(const std::filesystem::path& path, bool log_transform = true);

// Writes the ingestible CSV schema. With as_prices the bars pass through
// exp(); otherwise values are written verbatim with round-trip precision so
// ingest(..., false) reproduces the series bit-for-bit.
void write_series_csv(std::ostream& out, const Series& series,
                      const std::vector<std::string>& dates, bool as_prices);

// n weekdays starting at an ISO date (weekend dates roll forward first).
std::vector<std::string> weekday_dates(const std::string& start, std::size_t n);

// Round-trip (shortest exact) decimal form of a double.
std::string format_double(double v);

json fit_to_json(const ChangePointFit& fit, const std::vector<std::string>* dates = nullptr);
json bootstrap_to_json(const BootstrapResult& res, const BootstrapConfig& cfg);
json metrics_to_json(const std::vector<std::pair<ScenarioSpec, ScenarioMetrics>>& runs);

std::string fits_to_csv(const std::vector<ChangePointFit>& fits,
                        const std::vector<std::string>* dates = nullptr);
std::string bootstrap_to_csv(const BootstrapResult& res);
std::string metrics_to_csv(const std::vector<std::pair<ScenarioSpec, ScenarioMetrics>>& runs);
std::string raw_estimates_to_csv(const std::vector<std::pair<ScenarioSpec, ScenarioMetrics>>& runs);

// Scenario list for the bench command, `{"scenarios": [...]}`.
std::vector<ScenarioSpec> parse_scenarios(const json& config);

}  // namespace oulc::io
