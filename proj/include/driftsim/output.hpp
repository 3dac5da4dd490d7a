#pragma once

#include <string>
#include <vector>

#include "driftsim/simulation.hpp"

namespace driftsim {

/// Write `timeseries.csv`, `metrics.json` and `scenario.yaml` (verbatim echo)
/// into out_dir. Output bytes are deterministic for a deterministic run.
void emit(const RunResult& result, const Scenario& scenario, const std::string& out_dir);

std::string timeseries_csv(const std::vector<TimeSeriesRecord>& records);

std::string metrics_json(const RunMetrics& metrics, const std::string& scenario_name);

/// Recompute metrics from an emitted time-series CSV (drift detection,
/// error statistics and utilization maxima are all derivable from the
/// recorded columns).
RunMetrics metrics_from_csv(const std::string& csv_path);

/// Scenario name recorded in an emitted metrics.json.
std::string scenario_name_from_metrics(const std::string& metrics_path);

}  // namespace driftsim
