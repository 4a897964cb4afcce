#include "splitsqp/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace splitsqp {

namespace {

using nlohmann::json;

json breakdown_to_json(const kkt::ResidualBreakdown& b) {
  return json{{"stationarity_x", b.stationarity_x},
              {"stationarity_y", b.stationarity_y},
              {"stationarity_z", b.stationarity_z},
              {"sign_violation", b.sign_violation},
              {"complementarity", b.complementarity},
              {"box_violation", b.box_violation},
              {"feasibility", b.feasibility},
              {"total", b.total}};
}

kkt::ResidualBreakdown breakdown_from_json(const json& j) {
  kkt::ResidualBreakdown b;
  b.stationarity_x = j.value("stationarity_x", 0.0);
  b.stationarity_y = j.value("stationarity_y", 0.0);
  b.stationarity_z = j.value("stationarity_z", 0.0);
  b.sign_violation = j.value("sign_violation", 0.0);
  b.complementarity = j.value("complementarity", 0.0);
  b.box_violation = j.value("box_violation", 0.0);
  b.feasibility = j.value("feasibility", 0.0);
  b.total = j.value("total", 0.0);
  return b;
}

json trace_to_json(const IterationTrace& t) {
  return json{{"k", t.k},
              {"merit_before", t.merit_before},
              {"merit_after", t.merit_after},
              {"merit_after_dual", t.merit_after_dual},
              {"step_size", t.step_size},
              {"backtracks", t.backtracks},
              {"direction_inf", t.direction_inf},
              {"quad_norm", t.quad_norm},
              {"feasibility_inf", t.feasibility_inf},
              {"feasibility_sqnorm", t.feasibility_sqnorm},
              {"dual_update_norm", t.dual_update_norm},
              {"inner_iterations_x", t.inner_iterations_x},
              {"inner_iterations_y", t.inner_iterations_y},
              {"wall_ms", t.wall_ms}};
}

IterationTrace trace_from_json(const json& j) {
  IterationTrace t;
  t.k = j.value("k", 0);
  t.merit_before = j.value("merit_before", 0.0);
  t.merit_after = j.value("merit_after", 0.0);
  t.merit_after_dual = j.value("merit_after_dual", 0.0);
  t.step_size = j.value("step_size", 0.0);
  t.backtracks = j.value("backtracks", 0);
  t.direction_inf = j.value("direction_inf", 0.0);
  t.quad_norm = j.value("quad_norm", 0.0);
  t.feasibility_inf = j.value("feasibility_inf", 0.0);
  t.feasibility_sqnorm = j.value("feasibility_sqnorm", 0.0);
  t.dual_update_norm = j.value("dual_update_norm", 0.0);
  t.inner_iterations_x = j.value("inner_iterations_x", 0);
  t.inner_iterations_y = j.value("inner_iterations_y", 0);
  t.wall_ms = j.value("wall_ms", 0.0);
  return t;
}

std::string status_name(SolveStatus s) { return to_string(s); }

SolveStatus status_from_name(const std::string& s) {
  if (s == "converged") return SolveStatus::Converged;
  if (s == "max_iterations") return SolveStatus::MaxIterations;
  if (s == "dual_stalled") return SolveStatus::DualStalled;
  if (s == "aborted") return SolveStatus::Aborted;
  throw std::invalid_argument("report json: unknown status \"" + s + "\"");
}

std::string hessian_mode_name(HessianMode m) {
  switch (m) {
    case HessianMode::Exact: return "exact";
    case HessianMode::User: return "user";
    case HessianMode::IdentityShift: return "identity-shift";
  }
  return "exact";
}

HessianMode hessian_mode_from_name(const std::string& s) {
  if (s == "exact") return HessianMode::Exact;
  if (s == "user") return HessianMode::User;
  if (s == "identity-shift") return HessianMode::IdentityShift;
  throw std::invalid_argument("report json: unknown hessian mode \"" + s + "\"");
}

json config_to_json(const SolverConfig& c) {
  return json{{"rho", c.rho},
              {"sigma", c.sigma},
              {"beta", c.beta},
              {"xi", c.xi},
              {"tol_direction", c.tol_direction},
              {"tol_feasibility", c.tol_feasibility},
              {"max_iterations", c.max_iterations},
              {"max_backtracks", c.max_backtracks},
              {"hessian_mode", hessian_mode_name(c.hessian_mode)},
              {"identity_shift", c.identity_shift},
              {"qp_tolerance", c.qp_tolerance},
              {"max_dual_stalls", c.max_dual_stalls},
              {"parallel_subproblems", c.parallel_subproblems},
              {"set_tolerance", c.set_tolerance},
              {"set_budget", c.set_budget}};
}

SolverConfig config_from_json(const json& j) {
  SolverConfig c;
  c.rho = j.value("rho", c.rho);
  c.sigma = j.value("sigma", c.sigma);
  c.beta = j.value("beta", c.beta);
  c.xi = j.value("xi", c.xi);
  c.tol_direction = j.value("tol_direction", c.tol_direction);
  c.tol_feasibility = j.value("tol_feasibility", c.tol_feasibility);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.max_backtracks = j.value("max_backtracks", c.max_backtracks);
  c.hessian_mode = hessian_mode_from_name(j.value("hessian_mode", std::string("exact")));
  c.identity_shift = j.value("identity_shift", c.identity_shift);
  c.qp_tolerance = j.value("qp_tolerance", c.qp_tolerance);
  c.max_dual_stalls = j.value("max_dual_stalls", c.max_dual_stalls);
  c.parallel_subproblems = j.value("parallel_subproblems", c.parallel_subproblems);
  c.set_tolerance = j.value("set_tolerance", c.set_tolerance);
  c.set_budget = j.value("set_budget", c.set_budget);
  return c;
}

json multipliers_to_json(const kkt::MultiplierSet& m) {
  return json{{"lambda", m.lambda},   {"alpha_x", m.alpha_x}, {"gamma_x", m.gamma_x},
              {"alpha_y", m.alpha_y}, {"gamma_y", m.gamma_y}, {"alpha_z", m.alpha_z},
              {"gamma_z", m.gamma_z}};
}

kkt::MultiplierSet multipliers_from_json(const json& j) {
  kkt::MultiplierSet m;
  m.lambda = j.value("lambda", Vec{});
  m.alpha_x = j.value("alpha_x", Vec{});
  m.gamma_x = j.value("gamma_x", Vec{});
  m.alpha_y = j.value("alpha_y", Vec{});
  m.gamma_y = j.value("gamma_y", Vec{});
  m.alpha_z = j.value("alpha_z", Vec{});
  m.gamma_z = j.value("gamma_z", Vec{});
  return m;
}

}  // namespace

std::string report_document_to_json(const ReportDocument& doc, int indent) {
  const SolveReport& r = doc.report;
  json j;
  j["version"] = 1;
  j["algorithm"] = r.algorithm;
  j["status"] = status_name(r.status);
  j["message"] = r.message;
  j["iterations"] = r.iterations;
  j["objective"] = r.objective;
  j["feasibility_inf"] = r.feasibility_inf;
  j["direction_inf"] = r.direction_inf;
  j["stationarity_inf"] = r.stationarity_inf;
  j["solve_seconds"] = r.solve_seconds;
  j["config"] = config_to_json(doc.config);
  j["final"] = json{{"x", r.final_iterate.x},
                    {"y", r.final_iterate.y},
                    {"z", r.final_iterate.z},
                    {"lambda", r.final_iterate.lambda},
                    {"k", r.final_iterate.k}};
  j["multipliers"] = multipliers_to_json(r.multipliers);
  j["kkt_reformulated"] = breakdown_to_json(r.kkt_reformulated);
  j["kkt_original"] = breakdown_to_json(r.kkt_original);
  j["trace"] = json::array();
  for (const auto& t : r.trace) j["trace"].push_back(trace_to_json(t));
  j["instance_kind"] = doc.instance_kind;
  if (doc.instance_json.empty())
    j["instance"] = nullptr;
  else
    j["instance"] = json::parse(doc.instance_json);
  return j.dump(indent);
}

ReportDocument report_document_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("report json: parse error: ") + e.what());
  }
  if (!j.contains("version") || j.at("version").get<int>() != 1)
    throw std::invalid_argument("report json: missing or unsupported version");

  ReportDocument doc;
  SolveReport& r = doc.report;
  r.algorithm = j.value("algorithm", std::string());
  r.status = status_from_name(j.value("status", std::string("aborted")));
  r.message = j.value("message", std::string());
  r.iterations = j.value("iterations", 0);
  r.objective = j.value("objective", 0.0);
  r.feasibility_inf = j.value("feasibility_inf", 0.0);
  r.direction_inf = j.value("direction_inf", 0.0);
  r.stationarity_inf = j.value("stationarity_inf", 0.0);
  r.solve_seconds = j.value("solve_seconds", 0.0);
  doc.config = config_from_json(j.value("config", json::object()));
  const json& fin = j.at("final");
  r.final_iterate.x = fin.value("x", Vec{});
  r.final_iterate.y = fin.value("y", Vec{});
  r.final_iterate.z = fin.value("z", Vec{});
  r.final_iterate.lambda = fin.value("lambda", Vec{});
  r.final_iterate.k = fin.value("k", 0);
  r.multipliers = multipliers_from_json(j.value("multipliers", json::object()));
  r.kkt_reformulated = breakdown_from_json(j.value("kkt_reformulated", json::object()));
  r.kkt_original = breakdown_from_json(j.value("kkt_original", json::object()));
  if (j.contains("trace"))
    for (const auto& t : j.at("trace")) r.trace.push_back(trace_from_json(t));
  doc.instance_kind = j.value("instance_kind", std::string("none"));
  if (j.contains("instance") && !j.at("instance").is_null())
    doc.instance_json = j.at("instance").dump();
  return doc;
}

void save_report_document(const ReportDocument& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << report_document_to_json(doc) << "\n";
}

ReportDocument load_report_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return report_document_from_json(buf.str());
}

double compute_re(double f_split, double f_baseline) {
  if (f_baseline == 0.0)
    throw std::invalid_argument("relative error: baseline objective is zero");
  return (f_split - f_baseline) / f_baseline * 100.0;
}

std::string table_csv_header() {
  return "no,algorithm,iter,objective,phi_eq,ct_seconds,re_percent";
}

std::string table_csv_row(int instance_no, const std::string& algorithm,
                          const SolveReport& rep, double re_percent) {
  std::ostringstream out;
  out.precision(10);
  out << instance_no << "," << algorithm << "," << rep.iterations << "," << rep.objective
      << "," << rep.feasibility_inf << "," << rep.solve_seconds << "," << re_percent;
  return out.str();
}

}  // namespace splitsqp
