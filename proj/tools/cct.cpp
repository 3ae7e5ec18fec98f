// Copyright 2026 the cct authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command line front end: gen, validate, check-feasibility, solve, sweep,
// oracle, and lp subcommands with machine-readable output.
//
// Exit codes: 0 success, 1 mathematical failure (infeasible instance,
// iteration limit, invalid data), 2 usage error.

#include <charconv>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cct/continuation.hpp"
#include "cct/feasibility.hpp"
#include "cct/instance.hpp"
#include "cct/lp_toy.hpp"
#include "cct/oracle.hpp"
#include "cct/penalty.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitMath = 1;
constexpr int kExitUsage = 2;

// Shortest decimal rendering that round-trips the exact double.
std::string str(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ordered_json matrix_json(const cct::Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json cells_json(const std::vector<std::pair<int, int>>& cells) {
  ordered_json out = ordered_json::array();
  for (const auto& [i, j] : cells) out.push_back(ordered_json::array({i, j}));
  return out;
}

ordered_json violating_pair_json(const cct::ViolatingPair& pair) {
  return ordered_json{{"sources", pair.sources}, {"sinks", pair.sinks}, {"excess", pair.excess}};
}

ordered_json verdict_json(const cct::FeasibilityVerdict& verdict, bool include_witness) {
  ordered_json out;
  out["feasible"] = verdict.feasible;
  if (verdict.witness_coupling && include_witness)
    out["witness_coupling"] = matrix_json(*verdict.witness_coupling);
  if (verdict.violating_pair) out["violating_pair"] = violating_pair_json(*verdict.violating_pair);
  return out;
}

ordered_json solution_json(const cct::PenalizedSolution& sol) {
  ordered_json out;
  out["eps"] = sol.eps;
  out["iterations"] = sol.iterations;
  out["kkt_residual"] = sol.kkt_residual;
  out["relaxed_value"] = sol.relaxed_value;
  out["linear_value"] = sol.linear_value;
  out["marginal_residual_x"] = sol.marginal_residual_x;
  out["marginal_residual_y"] = sol.marginal_residual_y;
  out["active_upper"] = cells_json(sol.active_upper);
  out["active_lower"] = cells_json(sol.active_lower);
  out["h_eps"] = matrix_json(sol.h_eps);
  return out;
}

ordered_json certificate_json(const cct::CertificateReport& cert) {
  return ordered_json{{"duality_identity_residual", cert.duality_identity_residual},
                      {"comp_slack_1", cert.comp_slack_1},
                      {"comp_slack_2", cert.comp_slack_2},
                      {"el_violation", cert.el_violation},
                      {"dual_feasible", cert.dual_feasible}};
}

void print_json(const ordered_json& doc) { std::cout << doc.dump(2) << "\n"; }

int fail_math(const std::string& kind, const std::string& message,
              std::optional<ordered_json> payload = {}) {
  ordered_json out{{"error", kind}, {"message", message}};
  if (payload) out["detail"] = *payload;
  print_json(out);
  return kExitMath;
}

std::vector<double> read_numbers(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw cct::ParseError(std::string(what) + ": cannot read file " + path);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw cct::ParseError(std::string(what) + ": non-numeric token in " + path);
  return out;
}

cct::Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cct::ParseError(std::string("A: cannot read file ") + path);
  int m = 0, n = 0;
  if (!(in >> m >> n) || m < 1 || n < 1)
    throw cct::ParseError("A: file must start with 'rows cols'");
  cct::Matrix out(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (!(in >> out(i, j))) throw cct::ParseError("A: expected " + std::to_string(m * n) + " entries");
  return out;
}

cct::Coupling read_coupling(const std::string& path, int m, int n) {
  const std::vector<double> vals = read_numbers(path, "init");
  if (static_cast<int>(vals.size()) != m * n)
    throw cct::ParseError("init: expected " + std::to_string(m * n) + " numbers, got " +
                          std::to_string(vals.size()));
  cct::Coupling h(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = vals[i * n + j];
  return h;
}

struct SweepParams {
  double eps0 = 1.0;
  double ratio = 0.5;
  int steps = 18;
  double tol = 1e-8;
  int max_iter = 200000;
  bool oracle = false;
  int jobs = 1;
};

std::string sweep_csv(const cct::SweepReport& report) {
  std::ostringstream csv;
  csv << "eps,relaxed_value,linear_value,dual_J,dual_J_eps,eps_u_norm_sq,eps_v_norm_sq,"
         "marginal_residual_sq,oracle_gap,iterations\n";
  for (const auto& row : report.rows) {
    csv << str(row.eps) << ',' << str(row.relaxed_value) << ',' << str(row.linear_value) << ','
        << str(row.dual_J) << ',' << str(row.dual_J_eps) << ',' << str(row.eps_u_norm_sq) << ','
        << str(row.eps_v_norm_sq) << ',' << str(row.marginal_residual_sq) << ','
        << (row.oracle_gap ? str(*row.oracle_gap) : std::string()) << ',' << row.iterations
        << '\n';
  }
  return csv.str();
}

ordered_json sweep_summary_json(const std::string& instance, const cct::SweepReport& report) {
  ordered_json out;
  out["instance"] = instance;
  out["rows"] = report.rows.size();
  out["final_eps"] = report.rows.empty() ? 0.0 : report.rows.back().eps;
  out["final_primal_estimate"] = report.final_primal_estimate;
  out["final_dual_estimate"] = report.final_dual_estimate;
  if (report.oracle_value) {
    out["oracle_value"] = *report.oracle_value;
    out["final_oracle_gap"] = report.rows.empty() ? 0.0 : *report.rows.back().oracle_gap;
  }
  return out;
}

int run_sweeps(const std::vector<std::string>& paths, const SweepParams& params,
               const std::optional<std::string>& output) {
  if (output && paths.size() != 1) {
    std::cerr << "sweep: -o requires exactly one instance\n";
    return kExitUsage;
  }
  cct::SweepSchedule sched;
  sched.eps0 = params.eps0;
  sched.ratio = params.ratio;
  sched.steps = params.steps;
  sched.tol_kkt = params.tol;
  sched.max_iter = params.max_iter;

  struct Outcome {
    std::string text;
    int exit = kExitOk;
  };
  std::vector<Outcome> outcomes(paths.size());

  // Instances fan out across jobs; each sweep stays sequential.
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&]() {
    while (true) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= paths.size()) return;
        idx = next++;
      }
      std::ostringstream text;
      try {
        const cct::TransportInstance inst = cct::load_and_validate(paths[idx]);
        const cct::SweepReport report = cct::sweep(inst, sched, params.oracle);
        text << sweep_csv(report) << sweep_summary_json(paths[idx], report).dump(2) << "\n";
      } catch (const cct::InfeasibleError& e) {
        ordered_json out{{"error", "infeasible"},
                         {"message", e.what()},
                         {"detail", violating_pair_json(e.pair)}};
        text << out.dump(2) << "\n";
        outcomes[idx].exit = kExitMath;
      } catch (const cct::Error& e) {
        ordered_json out{{"error", "failed"}, {"message", e.what()}};
        text << out.dump(2) << "\n";
        outcomes[idx].exit = kExitMath;
      }
      outcomes[idx].text = text.str();
    }
  };

  const int jobs = std::max(1, std::min<int>(params.jobs, static_cast<int>(paths.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int exit = kExitOk;
  for (std::size_t idx = 0; idx < paths.size(); ++idx) {
    if (output && outcomes[idx].exit == kExitOk) {
      std::ofstream out(*output, std::ios::binary);
      if (!out) {
        std::cerr << "sweep: cannot write " << *output << "\n";
        return kExitMath;
      }
      out << outcomes[idx].text;
    } else {
      std::cout << outcomes[idx].text;
    }
    exit = std::max(exit, outcomes[idx].exit);
  }
  return exit;
}

int run_lp(const std::string& mode, const cct::LPInstance& lp, double eps, double tol,
           int max_iter, const SweepParams& params) {
  if (mode == "oracle") {
    const cct::LPOracleResult res = cct::lp_vertex_oracle(lp);
    ordered_json out;
    out["status"] = res.status == cct::LPStatus::kOptimal
                        ? "optimal"
                        : (res.status == cct::LPStatus::kUnbounded ? "unbounded" : "infeasible");
    if (res.status == cct::LPStatus::kOptimal) {
      out["value"] = res.value;
      out["argmax"] = res.argmax;
    }
    print_json(out);
    return kExitOk;
  }
  if (mode == "solve") {
    const cct::LPPenalizedSolution sol = cct::solve_penalized_lp(lp, eps, tol, max_iter);
    ordered_json out;
    out["eps"] = sol.eps;
    out["iterations"] = sol.iterations;
    out["kkt_residual"] = sol.kkt_residual;
    out["diverged"] = sol.diverged;
    out["cap_active"] = sol.cap_active;
    out["I_eps"] = sol.I_eps;
    out["J_eps"] = sol.J_eps;
    out["constraint_violation"] = sol.constraint_violation;
    out["y_eps"] = sol.y_eps;
    out["x_eps"] = sol.x_eps;
    print_json(out);
    return kExitOk;
  }
  // sweep
  cct::SweepSchedule sched;
  sched.eps0 = params.eps0;
  sched.ratio = params.ratio;
  sched.steps = params.steps;
  sched.tol_kkt = params.tol;
  sched.max_iter = params.max_iter;
  const cct::LPSweepReport report = cct::lp_sweep(lp, sched);
  std::ostringstream csv;
  csv << "eps,I_eps,J_eps,constraint_violation,gap_vs_oracle,cap_active,diverged\n";
  for (const auto& row : report.rows) {
    csv << str(row.eps) << ',' << str(row.I_eps) << ',' << str(row.J_eps) << ','
        << str(row.constraint_violation) << ','
        << (row.gap_vs_oracle ? str(*row.gap_vs_oracle) : std::string()) << ','
        << (row.cap_active ? 1 : 0) << ',' << (row.diverged ? 1 : 0) << '\n';
  }
  std::cout << csv.str();
  ordered_json summary;
  summary["status"] = report.oracle.status == cct::LPStatus::kOptimal
                          ? "optimal"
                          : (report.oracle.status == cct::LPStatus::kUnbounded ? "unbounded"
                                                                               : "infeasible");
  if (report.oracle.status == cct::LPStatus::kOptimal) summary["oracle_value"] = report.oracle.value;
  if (!report.rows.empty()) {
    summary["final_eps"] = report.rows.back().eps;
    summary["final_J_eps"] = report.rows.back().J_eps;
  }
  print_json(summary);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capacity-constrained transport: penalized solves, duality certificates, "
               "continuation, and exact oracles"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random feasible instance");
  std::uint64_t gen_seed = 0;
  int gen_m = 3, gen_n = 3;
  double gen_slack = 0.5;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "random seed")->required();
  gen->add_option("--m", gen_m, "source count")->required();
  gen->add_option("--n", gen_n, "sink count")->required();
  gen->add_option("--slack", gen_slack, "capacity margin in (0,1], smaller is looser");
  gen->add_option("-o,--output", gen_out, "output path (stdout when omitted)");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check an instance file");
  std::string validate_path;
  validate_cmd->add_option("instance", validate_path, "instance file")->required();

  // check-feasibility
  auto* feas = app.add_subcommand("check-feasibility", "decide whether any coupling exists");
  std::string feas_path;
  std::string feas_method = "maxflow";
  bool feas_witness = false;
  feas->add_option("instance", feas_path, "instance file")->required();
  feas->add_option("--method", feas_method, "maxflow | kellerer | both")
      ->check(CLI::IsMember({"maxflow", "kellerer", "both"}));
  feas->add_flag("--witness", feas_witness, "include the witness coupling in the output");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "penalized solve at a fixed eps");
  std::string solve_path, solve_init = "zero";
  double solve_eps = 0.1, solve_tol = 1e-8, solve_tau = -1.0;
  int solve_max_iter = 200000;
  bool solve_momentum = false;
  solve_cmd->add_option("instance", solve_path, "instance file")->required();
  solve_cmd->add_option("--eps", solve_eps, "penalty parameter")->required();
  solve_cmd->add_option("--tol", solve_tol, "KKT residual tolerance");
  solve_cmd->add_option("--max-iter", solve_max_iter, "iteration limit");
  solve_cmd->add_option("--init", solve_init, "zero | hbar | <coupling file>");
  solve_cmd->add_option("--tau-active", solve_tau, "active-set band (default 1e-7*max(hbar))");
  solve_cmd->add_flag("--momentum", solve_momentum, "accelerated steps with restarts");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "eps -> 0 continuation with warm starts");
  std::vector<std::string> sweep_paths;
  SweepParams sweep_params;
  std::optional<std::string> sweep_out;
  sweep_cmd->add_option("instance", sweep_paths, "instance file(s)")->required();
  sweep_cmd->add_option("--eps0", sweep_params.eps0, "initial eps");
  sweep_cmd->add_option("--ratio", sweep_params.ratio, "geometric decay in (0,1)");
  sweep_cmd->add_option("--steps", sweep_params.steps, "number of eps values");
  sweep_cmd->add_option("--tol", sweep_params.tol, "per-row KKT tolerance");
  sweep_cmd->add_option("--max-iter", sweep_params.max_iter, "per-row base iteration budget");
  sweep_cmd->add_flag("--oracle", sweep_params.oracle, "also solve exactly and report gaps");
  sweep_cmd->add_option("--jobs", sweep_params.jobs, "parallel instances (per-sweep stays sequential)");
  std::string sweep_out_raw;
  sweep_cmd->add_option("-o,--output", sweep_out_raw, "write the report to a file");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "exact min-cost-flow optimum");
  std::string oracle_path;
  oracle_cmd->add_option("instance", oracle_path, "instance file")->required();

  // lp
  auto* lp_cmd = app.add_subcommand("lp", "finite-dimensional penalized LP duality");
  std::string lp_mode, lp_a, lp_b, lp_c, lp_ycap;
  double lp_eps = 0.1;
  SweepParams lp_params;
  lp_params.steps = 18;
  lp_cmd->add_option("mode", lp_mode, "solve | sweep | oracle")
      ->required()
      ->check(CLI::IsMember({"solve", "sweep", "oracle"}));
  lp_cmd->add_option("--A", lp_a, "matrix file: 'rows cols' then entries")->required();
  lp_cmd->add_option("--b", lp_b, "right-hand side file")->required();
  lp_cmd->add_option("--c", lp_c, "objective file")->required();
  lp_cmd->add_option("--ycap", lp_ycap, "optional capacity bound on y");
  lp_cmd->add_option("--eps", lp_eps, "penalty parameter (solve mode)");
  lp_cmd->add_option("--eps0", lp_params.eps0, "initial eps (sweep mode)");
  lp_cmd->add_option("--ratio", lp_params.ratio, "geometric decay (sweep mode)");
  lp_cmd->add_option("--steps", lp_params.steps, "rows (sweep mode)");
  lp_cmd->add_option("--tol", lp_params.tol, "KKT residual tolerance");
  lp_cmd->add_option("--max-iter", lp_params.max_iter, "iteration limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      const cct::TransportInstance inst = cct::gen_random(gen_seed, gen_m, gen_n, gen_slack);
      if (gen_out.empty()) {
        std::cout << cct::to_json(inst);
      } else {
        cct::save(inst, gen_out);
      }
      return kExitOk;
    }

    if (validate_cmd->parsed()) {
      try {
        cct::load_and_validate(validate_path);
      } catch (const cct::ValidationError& e) {
        ordered_json violations = ordered_json::array();
        for (const auto& v : e.report.violations)
          violations.push_back(
              {{"field", v.field}, {"index", v.index}, {"description", v.description}});
        print_json({{"ok", false}, {"violations", violations}});
        return kExitMath;
      }
      print_json({{"ok", true}, {"violations", ordered_json::array()}});
      return kExitOk;
    }

    if (feas->parsed()) {
      const cct::TransportInstance inst = cct::load_and_validate(feas_path);
      ordered_json out;
      bool feasible = true;
      if (feas_method == "maxflow" || feas_method == "both") {
        const auto verdict = cct::maxflow_feasible(inst);
        out["maxflow"] = verdict_json(verdict, feas_witness);
        feasible = verdict.feasible;
      }
      if (feas_method == "kellerer" || feas_method == "both") {
        const auto verdict = cct::kellerer_check(inst);
        out["kellerer"] = verdict_json(verdict, feas_witness);
        feasible = feasible && verdict.feasible;
      }
      print_json(out);
      return feasible ? kExitOk : kExitMath;
    }

    if (solve_cmd->parsed()) {
      const cct::TransportInstance inst = cct::load_and_validate(solve_path);
      cct::Coupling init(inst.m, inst.n, 0.0);
      if (solve_init == "hbar")
        init = inst.hbar;
      else if (solve_init != "zero")
        init = read_coupling(solve_init, inst.m, inst.n);
      cct::SolveOptions options;
      options.momentum = solve_momentum;
      cct::PenalizedSolution sol;
      try {
        sol = cct::solve_penalized(inst, solve_eps, init, solve_tol, solve_max_iter, options);
      } catch (const cct::IterationLimitError& e) {
        return fail_math("iteration_limit", e.what(), solution_json(e.best));
      }
      const cct::DualTriple triple = cct::dual_from_primal(inst, sol);
      const double tau = solve_tau > 0.0 ? solve_tau : cct::default_tau_active(inst);
      const cct::CertificateReport cert = cct::certify(inst, sol, triple, tau);
      ordered_json out = solution_json(sol);
      out["dual"] = ordered_json{{"u", triple.u}, {"v", triple.v}, {"w", matrix_json(triple.w)}};
      out["certificate"] = certificate_json(cert);
      print_json(out);
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      if (!sweep_out_raw.empty()) sweep_out = sweep_out_raw;
      return run_sweeps(sweep_paths, sweep_params, sweep_out);
    }

    if (oracle_cmd->parsed()) {
      const cct::TransportInstance inst = cct::load_and_validate(oracle_path);
      cct::ExactSolution sol;
      try {
        sol = cct::mcf_solve(inst);
      } catch (const cct::InfeasibleError& e) {
        return fail_math("infeasible", e.what(), violating_pair_json(e.pair));
      }
      const cct::OptimalityCheck cert = cct::check_oracle_certificate(inst, sol);
      ordered_json out;
      out["value"] = sol.value;
      out["fractional_cells"] = sol.fractional_cells;
      out["certificate"] =
          ordered_json{{"ok", cert.ok}, {"worst_violation", cert.worst_violation}};
      out["h_star"] = matrix_json(sol.h_star);
      out["potentials"] = sol.potentials;
      print_json(out);
      return kExitOk;
    }

    if (lp_cmd->parsed()) {
      cct::LPInstance lp;
      lp.A = read_matrix(lp_a);
      lp.b = read_numbers(lp_b, "b");
      lp.c = read_numbers(lp_c, "c");
      if (!lp_ycap.empty()) lp.ycap = read_numbers(lp_ycap, "ycap");
      try {
        return run_lp(lp_mode, lp, lp_eps, lp_params.tol, lp_params.max_iter, lp_params);
      } catch (const cct::LpIterationLimitError& e) {
        return fail_math("iteration_limit", e.what());
      }
    }
  } catch (const cct::InfeasibleError& e) {
    return fail_math("infeasible", e.what(), violating_pair_json(e.pair));
  } catch (const cct::ValidationError& e) {
    return fail_math("invalid_instance", e.what());
  } catch (const cct::ParseError& e) {
    return fail_math("parse_error", e.what());
  } catch (const cct::Error& e) {
    return fail_math("failed", e.what());
  }
  return kExitUsage;
}
