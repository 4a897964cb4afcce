#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "splitsqp/al_sqp.hpp"
#include "splitsqp/convex_sets.hpp"
#include "splitsqp/ed.hpp"
#include "splitsqp/report.hpp"
#include "splitsqp/splitting.hpp"

namespace {

using namespace splitsqp;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

struct CommonOptions {
  double beta = 2000.0;
  double xi = 0.001;
  double rho = 0.8;
  double sigma = 0.8;
  double tol = 0.005;
  double tol_feas = -1.0;
  int max_iter = 500;
  unsigned seed = 0;
  bool parallel = false;
};

void add_common_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--beta", o.beta, "penalty parameter");
  cmd->add_option("--xi", o.xi, "dual step length");
  cmd->add_option("--rho", o.rho, "Armijo decrease fraction");
  cmd->add_option("--sigma", o.sigma, "backtracking ratio");
  cmd->add_option("--tol", o.tol, "direction inf-norm tolerance");
  cmd->add_option("--tol-feas", o.tol_feas,
                  "equality residual tolerance (<=0: 1e-4*(1+|c|_inf))");
  cmd->add_option("--max-iter", o.max_iter, "iteration limit");
  cmd->add_option("--seed", o.seed, "seed for generated demand jitter");
  cmd->add_flag("--parallel-subproblems", o.parallel,
                "solve the x and y subproblems concurrently");
}

SolverConfig make_config(const CommonOptions& o) {
  SolverConfig c;
  c.beta = o.beta;
  c.xi = o.xi;
  c.rho = o.rho;
  c.sigma = o.sigma;
  c.tol_direction = o.tol;
  c.tol_feasibility = o.tol_feas;
  c.max_iterations = o.max_iter;
  c.parallel_subproblems = o.parallel;
  return c;
}

struct LoadedInstance {
  std::string kind;  // "ed" or "problem"
  std::string raw_json;
  TwoBlockProblem problem;
  ed::EDInstance ed_instance;  // valid when kind == "ed"
};

LoadedInstance load_any_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  LoadedInstance out;
  out.raw_json = buf.str();
  const auto j = nlohmann::json::parse(out.raw_json);
  if (j.contains("units")) {
    out.kind = "ed";
    out.ed_instance = ed::instance_from_json(out.raw_json);
    out.problem = ed::build_ed_problem(out.ed_instance);
  } else {
    out.kind = "problem";
    out.problem = problem_from_json(out.raw_json);
  }
  return out;
}

Iterate starting_iterate(const LoadedInstance& inst, const ReformulatedProblem& rp) {
  if (inst.kind == "ed") {
    const auto sp = ed::feasible_start(inst.ed_instance);
    Iterate w;
    w.x = sp.x0;
    w.y = sp.y0;
    w.z = sp.z0;
    w.lambda = Vec(rp.m1 + rp.m2, 1.0);
    return w;
  }
  return make_initial_iterate(rp, Vec(rp.n1(), 0.0), Vec(rp.n2(), 0.0));
}

SolveReport run_algorithm(const std::string& algorithm, const ReformulatedProblem& rp,
                          const Iterate& w0, const SolverConfig& config) {
  if (algorithm == "split") return solve_splitting(rp, w0, config);
  if (algorithm == "al") return solve_baseline(rp, w0, config);
  if (algorithm == "set-ext") {
    // The extension solver run over the problem's own boxes as projectable sets.
    return solve_with_sets(rp, make_box_set(rp.l, rp.u), make_box_set(rp.p, rp.q), w0,
                           config);
  }
  throw std::runtime_error("unknown algorithm \"" + algorithm + "\"");
}

void print_summary(const SolveReport& rep) {
  std::cout << "algorithm=" << rep.algorithm << " status=" << to_string(rep.status)
            << " iterations=" << rep.iterations << " objective=" << rep.objective
            << " phi_eq=" << rep.feasibility_inf << " d_inf=" << rep.direction_inf
            << " seconds=" << rep.solve_seconds << "\n";
  if (!rep.message.empty()) std::cout << "  " << rep.message << "\n";
}

Vec jittered_profile(std::size_t T, unsigned seed) {
  Vec profile = ed::default_demand_profile(T);
  if (seed != 0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-0.02, 0.02);
    for (double& f : profile) f = std::min(std::max(f + dist(rng), 0.40), 0.95);
  }
  return profile;
}

int cmd_solve(const std::string& instance_path, const std::string& algorithm,
              const std::string& out_path, const std::string& csv_path,
              const std::string& schedule_path, const CommonOptions& opts) {
  const LoadedInstance inst = load_any_instance(instance_path);
  const ReformulatedProblem rp = reformulate(inst.problem);
  const SolverConfig config = make_config(opts);
  const Iterate w0 = starting_iterate(inst, rp);
  const SolveReport rep = run_algorithm(algorithm, rp, w0, config);
  print_summary(rep);

  if (!schedule_path.empty()) {
    if (inst.kind != "ed")
      throw std::runtime_error("--schedule-csv needs a dispatch instance");
    std::ofstream sched(schedule_path);
    if (!sched) throw std::runtime_error("cannot open " + schedule_path + " for writing");
    sched << ed::schedule_csv(inst.ed_instance, rep.final_iterate.x, rep.final_iterate.y);
  }

  if (!out_path.empty()) {
    ReportDocument doc;
    doc.report = rep;
    doc.config = config;
    doc.instance_kind = inst.kind;
    doc.instance_json = inst.raw_json;
    save_report_document(doc, out_path);
    std::cout << "report written to " << out_path << "\n";
  }
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open " + csv_path + " for writing");
    csv << table_csv_header() << "\n"
        << table_csv_row(0, rep.algorithm, rep, 0.0) << "\n";
  }
  return rep.converged() ? kExitOk : kExitNotConverged;
}

int cmd_bench(int table1_row, const std::string& instance_path, std::size_t periods,
              const std::string& csv_path, const std::string& out_dir,
              const CommonOptions& opts) {
  ed::EDInstance inst;
  int no = table1_row;
  if (!instance_path.empty()) {
    inst = ed::load_instance(instance_path);
    no = 0;
  } else {
    inst = ed::replicate_instance(ed::synthetic_five_units(), ed::table1_counts(table1_row),
                                  periods, jittered_profile(periods, opts.seed));
  }
  const TwoBlockProblem problem = ed::build_ed_problem(inst);
  const ReformulatedProblem rp = reformulate(problem);
  const SolverConfig config = make_config(opts);
  const auto sp = ed::feasible_start(inst);
  Iterate w0;
  w0.x = sp.x0;
  w0.y = sp.y0;
  w0.z = sp.z0;
  w0.lambda = Vec(rp.m1 + rp.m2, 1.0);

  const SolveReport split = solve_splitting(rp, w0, config);
  const SolveReport al = solve_baseline(rp, w0, config);
  const double re = compute_re(split.objective, al.objective);

  std::ostringstream table;
  table << table_csv_header() << "\n"
        << table_csv_row(no, "split", split, re) << "\n"
        << table_csv_row(no, "al", al, 0.0) << "\n";
  std::cout << table.str();
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open " + csv_path + " for writing");
    csv << table.str();
  }
  if (!out_dir.empty()) {
    for (const auto* rep : {&split, &al}) {
      ReportDocument doc;
      doc.report = *rep;
      doc.config = config;
      doc.instance_kind = "ed";
      doc.instance_json = ed::instance_to_json(inst);
      save_report_document(doc, out_dir + "/report_" + rep->algorithm + ".json");
    }
  }
  return split.converged() && al.converged() ? kExitOk : kExitNotConverged;
}

bool close_enough(double a, double b, double tol = 1e-7) {
  return std::fabs(a - b) <= tol * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

int cmd_verify(const std::string& report_path) {
  const ReportDocument doc = load_report_document(report_path);
  if (doc.instance_kind == "none" || doc.instance_json.empty()) {
    std::cerr << "verify: report does not embed an instance\n";
    return kExitUsage;
  }
  TwoBlockProblem problem;
  if (doc.instance_kind == "ed")
    problem = ed::build_ed_problem(ed::instance_from_json(doc.instance_json));
  else
    problem = problem_from_json(doc.instance_json);
  const ReformulatedProblem rp = reformulate(problem);
  const SolveReport& rep = doc.report;
  const Iterate& w = rep.final_iterate;

  int mismatches = 0;
  auto expect = [&](const char* what, double stored, double recomputed) {
    if (!close_enough(stored, recomputed)) {
      std::cerr << "verify: " << what << " mismatch (stored " << stored << ", recomputed "
                << recomputed << ")\n";
      ++mismatches;
    }
  };

  expect("objective", rep.objective, rp.objective(w.x, w.y));
  {
    const auto fr = feasibility_residual(rp, w);
    expect("feasibility_inf", rep.feasibility_inf, fr.inf_norm);
  }
  if (rep.algorithm == "set-ext") {
    const double st = stationarity_residual_B(rp, w, make_box_set(rp.l, rp.u),
                                              make_box_set(rp.p, rp.q));
    expect("stationarity_inf", rep.stationarity_inf, st);
  } else {
    const auto ref =
        kkt::kkt_residual_reformulated(rp, w.x, w.y, w.z, rep.multipliers);
    expect("kkt_reformulated.total", rep.kkt_reformulated.total, ref.total);
    const auto orig = kkt::kkt_residual_original(
        rp, w.x, w.y, kkt::map_multipliers_to_original(rep.multipliers, rp.m1));
    expect("kkt_original.total", rep.kkt_original.total, orig.total);
  }
  if (!box_feasible(rp, w.x, w.y, w.z)) {
    std::cerr << "verify: final iterate violates the box constraints\n";
    ++mismatches;
  }

  if (mismatches == 0) {
    std::cout << "verify: OK (" << report_path << ")\n";
    return kExitOk;
  }
  return kExitNotConverged;
}

int cmd_gen(int table1_row, std::size_t periods, const std::string& out_path,
            unsigned seed) {
  const auto inst = ed::replicate_instance(
      ed::synthetic_five_units(), ed::table1_counts(table1_row), periods,
      jittered_profile(periods, seed));
  ed::save_instance(inst, out_path);
  std::cout << "instance with " << inst.n_units() << " units over " << inst.T
            << " periods written to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Two-block splitting SQP solver and economic-dispatch benchmark driver"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve one instance with one algorithm");
  std::string solve_instance, solve_algorithm = "split", solve_out, solve_csv,
      solve_schedule;
  CommonOptions solve_opts;
  solve->add_option("--instance", solve_instance, "instance JSON path")->required();
  solve->add_option("--algorithm", solve_algorithm, "split | al | set-ext")
      ->check(CLI::IsMember({"split", "al", "set-ext"}));
  solve->add_option("--out", solve_out, "write report JSON here");
  solve->add_option("--csv", solve_csv, "write a summary CSV row here");
  solve->add_option("--schedule-csv", solve_schedule,
                    "write the dispatched unit schedule here (dispatch instances)");
  add_common_flags(solve, solve_opts);

  // bench
  auto* bench = app.add_subcommand("bench", "paired split/al run with relative error");
  int bench_row = 1;
  std::string bench_instance, bench_csv, bench_out_dir;
  std::size_t bench_periods = 24;
  CommonOptions bench_opts;
  bench->add_option("--table1-row", bench_row, "benchmark structure row (1..20)")
      ->check(CLI::Range(1, 20));
  bench->add_option("--instance", bench_instance, "explicit instance JSON path");
  bench->add_option("--t", bench_periods, "number of periods for generated instances");
  bench->add_option("--csv", bench_csv, "write the comparison CSV here");
  bench->add_option("--out-dir", bench_out_dir, "write both report JSONs here");
  add_common_flags(bench, bench_opts);

  // verify
  auto* verify = app.add_subcommand("verify", "re-check a saved report's residuals");
  std::string verify_path;
  verify->add_option("report", verify_path, "report JSON path")->required();

  // gen
  auto* gen = app.add_subcommand("gen", "emit a replicated instance");
  int gen_row = 1;
  std::size_t gen_periods = 24;
  std::string gen_out;
  unsigned gen_seed = 0;
  gen->add_option("--table1-row", gen_row, "benchmark structure row (1..20)")
      ->check(CLI::Range(1, 20));
  gen->add_option("--t", gen_periods, "number of periods");
  gen->add_option("--out", gen_out, "output path")->required();
  gen->add_option("--seed", gen_seed, "demand jitter seed (0: none)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return cmd_solve(solve_instance, solve_algorithm, solve_out, solve_csv,
                       solve_schedule, solve_opts);
    if (bench->parsed())
      return cmd_bench(bench_row, bench_instance, bench_periods, bench_csv, bench_out_dir,
                       bench_opts);
    if (verify->parsed()) return cmd_verify(verify_path);
    if (gen->parsed()) return cmd_gen(gen_row, gen_periods, gen_out, gen_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
