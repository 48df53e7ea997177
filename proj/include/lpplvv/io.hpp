#pragma once

// JSON and CSV forms of the artifacts the pipeline persists.

#include <string>
#include <vector>

#include <json.hpp>

#include "lpplvv/abcde.hpp"
#include "lpplvv/estimators.hpp"
#include "lpplvv/pipeline.hpp"

namespace lpplvv::io {

using Json = nlohmann::ordered_json;

Json to_json(const LpplParams& p);
Json to_json(const ExpTrendParams& p);
Json to_json(const LogDivergentParams& p);
Json to_json(const FitParams& p);
Json to_json(const WindowSpec& w);
Json to_json(const DrawdownEvent& e);
Json to_json(const FitResult& f);
Json to_json(const SimulationRecord& r);
Json to_json(const ReportTable& t);
Json to_json(const ComparisonSummary& c);

LpplParams lppl_params_from_json(const nlohmann::json& j);

// Batch manifest: preset, seed, dt, horizon and per-run status.
Json batch_manifest(const abcde::BatchConfig& cfg, const abcde::BatchResult& result);

// `hypothesis,p_raw,p_corrected,n`; corrected values above 1 render ">1".
std::string report_csv(const ReportTable& t);
ReportTable read_report_csv(const std::string& path);

// Aligned text table: Hypothesis | P-value | P-value* | N.
std::string report_text(const ReportTable& t);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace lpplvv::io
