#include "lpplvv/io.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lpplvv/error.hpp"

namespace lpplvv::io {

Json to_json(const LpplParams& p) {
  return Json{{"A", p.A}, {"B", p.B}, {"C", p.C}, {"m", p.m},
              {"omega", p.omega}, {"psi", p.psi}, {"tc", p.tc}};
}

Json to_json(const ExpTrendParams& p) {
  return Json{{"A", p.A}, {"B", p.B}, {"m", p.m}, {"t_ref", p.t_ref}};
}

Json to_json(const LogDivergentParams& p) {
  return Json{{"B", p.B}, {"D", p.D}, {"omega", p.omega}, {"psi", p.psi}, {"tc", p.tc}};
}

Json to_json(const FitParams& p) {
  if (const auto* l = std::get_if<LpplParams>(&p)) return to_json(*l);
  const auto& pt = std::get<PhaseTransitionParams>(p);
  return Json{{"trend", to_json(pt.trend)}, {"log_divergent", to_json(pt.residual)}};
}

Json to_json(const WindowSpec& w) {
  Json j{{"start_index", w.start_index}, {"end_index", w.end_index}, {"label", to_string(w.label)}};
  if (w.subsample_id >= 0) j["subsample_id"] = w.subsample_id;
  return j;
}

Json to_json(const DrawdownEvent& e) {
  Json j{{"peak_index", e.peak_index},     {"peak_value", e.peak_value},
         {"trough_index", e.trough_index}, {"trough_value", e.trough_value},
         {"end_index", nullptr},           {"magnitude", e.magnitude}};
  if (e.end_index) j["end_index"] = *e.end_index;
  return j;
}

Json to_json(const FitResult& f) {
  return Json{{"algorithm", to_string(f.algorithm)},
              {"params", to_json(f.params)},
              {"sse", f.sse},
              {"window", to_json(f.window)},
              {"converged", f.converged},
              {"evaluations", f.evaluations}};
}

Json to_json(const SimulationRecord& r) {
  Json j;
  j["id"] = r.id;
  j["status"] = r.ok ? "ok" : "skipped";
  j["reason"] = r.reason;
  j["series_file"] = r.series_file;
  j["tc"] = r.tc;
  j["tc_index"] = r.tc_index;
  j["peak_value"] = r.peak_value;
  Json ev = Json::array();
  for (const auto& e : r.events) ev.push_back(to_json(e));
  j["drawdowns"] = ev;
  Json ws = Json::array();
  for (const auto& w : r.windows) {
    Json wj;
    wj["class"] = to_string(w.window_class);
    wj["window"] = w.window ? to_json(*w.window) : Json(nullptr);
    wj["reason"] = w.reason;
    Json al = Json::array();
    for (const auto& a : w.algorithms) {
      Json aj;
      aj["algorithm"] = to_string(a.algorithm);
      aj["ok"] = a.ok;
      aj["reason"] = a.reason;
      aj["median"] = a.median ? to_json(*a.median) : Json(nullptr);
      aj["tc_hat"] = a.tc_hat;
      aj["abs_error"] = a.abs_error;
      aj["fits_total"] = a.fits_total;
      aj["fits_converged"] = a.fits_converged;
      al.push_back(aj);
    }
    wj["algorithms"] = al;
    ws.push_back(wj);
  }
  j["windows"] = ws;
  return j;
}

Json to_json(const ReportTable& t) {
  Json j;
  j["algorithm"] = to_string(t.algorithm);
  j["fingerprint"] = t.fingerprint;
  j["n"] = t.n;
  j["runs_ok"] = t.runs_ok;
  j["runs_skipped"] = t.runs_skipped;
  j["paired"] = t.paired;
  j["holm"] = stats::to_string(t.holm);
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back(Json{{"hypothesis", r.label}, {"p_raw", r.p_raw},
                        {"p_corrected", r.p_corrected}, {"n", r.n}});
  }
  j["rows"] = rows;
  Json mae;
  for (const auto& [c, v] : t.mae) mae[to_string(c)] = v;
  j["mae"] = mae;
  return j;
}

Json to_json(const ComparisonSummary& c) {
  Json j;
  j["n"] = c.n;
  Json classes;
  for (const auto& [cls, r] : c.ratio) {
    classes[to_string(cls)] = {{"mae_subordinated", c.mae_subordinated.at(cls)},
                               {"mae_phase_transition", c.mae_phase_transition.at(cls)},
                               {"ratio", r}};
  }
  j["classes"] = classes;
  j["aggregate_ratio"] = c.aggregate_ratio;
  return j;
}

LpplParams lppl_params_from_json(const nlohmann::json& j) {
  try {
    LpplParams p;
    p.A = j.at("A").get<double>();
    p.B = j.at("B").get<double>();
    p.C = j.at("C").get<double>();
    p.m = j.at("m").get<double>();
    p.omega = j.at("omega").get<double>();
    p.psi = j.at("psi").get<double>();
    p.tc = j.at("tc").get<double>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("bad LPPL parameter object: ") + e.what());
  }
}

Json batch_manifest(const abcde::BatchConfig& cfg, const abcde::BatchResult& result) {
  Json j;
  j["preset"] = cfg.preset;
  j["seed"] = cfg.seed;
  j["dt"] = cfg.dt;
  j["substeps"] = cfg.substeps;
  j["horizon"] = cfg.horizon;
  j["jitter"] = cfg.jitter;
  j["params"] = {{"sigma", cfg.params.sigma}, {"rho", cfg.params.rho},
                 {"beta", cfg.params.beta},   {"a1", cfg.params.a1},
                 {"a2", cfg.params.a2},       {"alpha", cfg.params.alpha},
                 {"epsilon", cfg.params.epsilon}};
  Json runs = Json::array();
  for (const auto& r : result.runs) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%04zu.csv", r.id);
    Json rj{{"id", r.id}, {"status", r.ok ? "ok" : "failed"}, {"reason", r.reason}};
    rj["file"] = r.ok ? Json(name) : Json(nullptr);
    rj["failed_step"] = r.failed_step ? Json(*r.failed_step) : Json(nullptr);
    runs.push_back(rj);
  }
  j["runs"] = runs;
  j["failed"] = result.failed();
  return j;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string report_csv(const ReportTable& t) {
  std::ostringstream out;
  out << "hypothesis,p_raw,p_corrected,n\n";
  for (const auto& r : t.rows) {
    const std::string corrected =
        (t.holm == stats::HolmMode::paper_naive && r.p_corrected > 1.0) ? ">1" : num(r.p_corrected);
    out << r.label << ',' << num(r.p_raw) << ',' << corrected << ',' << r.n << '\n';
  }
  return out.str();
}

ReportTable read_report_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("hypothesis,p_raw,p_corrected,n", 0) != 0) {
    throw Error(ErrorKind::invalid_input, "'" + path + "' is not a report CSV");
  }
  ReportTable t;
  t.holm = stats::HolmMode::standard;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (cols.size() != 4) throw Error(ErrorKind::invalid_input, "bad report row: " + line);
    stats::HypothesisTestRow row;
    row.label = cols[0];
    try {
      row.p_raw = std::stod(cols[1]);
      if (cols[2] == ">1") {
        row.p_corrected = 2.0;  // only the rendering survives the round trip
        t.holm = stats::HolmMode::paper_naive;
      } else {
        row.p_corrected = std::stod(cols[2]);
        if (row.p_corrected > 1.0) t.holm = stats::HolmMode::paper_naive;
      }
      row.n = static_cast<std::size_t>(std::stoull(cols[3]));
    } catch (const std::exception&) {
      throw Error(ErrorKind::invalid_input, "bad report row: " + line);
    }
    t.rows.push_back(row);
  }
  t.n = t.rows.empty() ? 0 : t.rows.front().n;
  return t;
}

std::string report_text(const ReportTable& t) {
  const std::string headers[4] = {"Hypothesis", "P-value", "P-value*", "N"};
  std::vector<std::array<std::string, 4>> cells;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    // N is printed once, on the first row.
    cells.push_back({r.label, stats::format_p(r.p_raw), stats::format_p(r.p_corrected),
                     i == 0 ? std::to_string(r.n) : "-"});
  }
  std::size_t width[4];
  for (int c = 0; c < 4; ++c) {
    width[c] = headers[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[static_cast<std::size_t>(c)].size());
  }
  std::ostringstream out;
  auto line = [&](const std::array<std::string, 4>& row) {
    out << '|';
    for (int c = 0; c < 4; ++c) {
      const auto& s = row[static_cast<std::size_t>(c)];
      out << ' ' << s << std::string(width[c] - s.size(), ' ') << " |";
    }
    out << '\n';
  };
  auto rule = [&] {
    out << '+';
    for (int c = 0; c < 4; ++c) out << std::string(width[c] + 2, '-') << '+';
    out << '\n';
  };
  rule();
  line({headers[0], headers[1], headers[2], headers[3]});
  rule();
  for (const auto& row : cells) line(row);
  rule();
  return out.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lpplvv::io
