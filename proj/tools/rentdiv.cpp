#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rentdiv/incentives.hpp"
#include "rentdiv/json_io.hpp"
#include "rentdiv/service.hpp"

using namespace rentdiv;

namespace {

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open file", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str());
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write file", path);
  out << doc.dump(2) << "\n";
}

// Accepts a bare economy or a request document with an "economy" field.
Economy load_economy(const std::string& path) {
  Json doc = read_json_file(path);
  return economy_from_json(doc.contains("economy") ? doc["economy"] : doc);
}

ReportGrid grid_for(const Economy& e, const std::string& step, const std::string& range) {
  const Rational s = parse_rational(step), r = parse_rational(range);
  return ReportGrid::quasi_linear(e.size(), -r, r, s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Envy-free rent division: solver, verifier, oracle, incentive experiments and service"};
  app.require_subcommand(1);

  std::string economy_path, allocation_path, objective = "maxmin-utility", trace_path;
  auto* solve_cmd = app.add_subcommand("solve", "Compute a selection from the envy-free set");
  solve_cmd->add_option("economy", economy_path, "Economy JSON")->required();
  solve_cmd->add_option("--objective", objective, "maxmin-utility | maxmin-rent | minmax-utility | minmax-rent");
  solve_cmd->add_option("--trace", trace_path, "Write the iteration trace to this file");

  auto* verify_cmd = app.add_subcommand("verify", "Check an allocation against the selection certificate");
  verify_cmd->add_option("economy", economy_path, "Economy JSON")->required();
  verify_cmd->add_option("allocation", allocation_path, "Allocation JSON")->required();
  verify_cmd->add_option("--objective", objective, "Objective name");

  bool table = false;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force optimum over all assignments (n <= 6)");
  oracle_cmd->add_option("economy", economy_path, "Economy JSON")->required();
  oracle_cmd->add_option("--objective", objective, "Objective name");
  oracle_cmd->add_flag("--table", table, "Include the per-assignment table");

  std::string agent, grid_step = "5", grid_range = "100";
  auto* manip_cmd = app.add_subcommand("manipulate", "Best response of one agent on a quasi-linear report grid");
  manip_cmd->add_option("economy", economy_path, "Economy JSON (true preferences)")->required();
  manip_cmd->add_option("--agent", agent, "Agent id")->required();
  manip_cmd->add_option("--grid-step", grid_step, "Grid step for reported values");
  manip_cmd->add_option("--grid-range", grid_range, "Reported value differences lie in [-range, range]");

  std::vector<std::string> epsilons;
  auto* eq_cmd = app.add_subcommand("equilibria", "Enumerate grid epsilon-equilibria and their distance to F(u)");
  eq_cmd->add_option("economy", economy_path, "Economy JSON (true preferences)")->required();
  eq_cmd->add_option("--epsilon", epsilons, "One or more epsilon values, largest first")->required();
  eq_cmd->add_option("--grid-step", grid_step, "Grid step for reported values");
  eq_cmd->add_option("--grid-range", grid_range, "Reported value differences lie in [-range, range]");

  int port = 8080;
  std::string host = "127.0.0.1", store_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--port", port, "Port");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--store", store_dir, "Directory for file-backed sessions (memory when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      const Economy e = load_economy(economy_path);
      const Objective obj = Objective::of(parse_objective_kind(objective));
      SolveResult r = solve(e, obj);
      if (!trace_path.empty()) write_json_file(trace_path, trace_json(e, r.trace));
      std::cout << solve_result_json(e, r, false).dump(2) << "\n";
      return r.certificate.holds ? 0 : 3;
    }
    if (*verify_cmd) {
      const Economy e = load_economy(economy_path);
      const Allocation z = allocation_from_json(e, read_json_file(allocation_path));
      validate_allocation(e, z, e.total_rent());
      SelectionCertificate c = is_selection(e, z, Objective::of(parse_objective_kind(objective)));
      std::cout << certificate_json(e, c).dump(2) << "\n";
      return c.holds ? 0 : 1;
    }
    if (*oracle_cmd) {
      const Economy e = load_economy(economy_path);
      OracleResult r = brute_force_selection(e, Objective::of(parse_objective_kind(objective)), table);
      Json out = oracle_result_json(e, r);
      if (!table) out.erase("table");
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*manip_cmd) {
      const Economy e = load_economy(economy_path);
      const AgentIndex i = e.agent_index(agent);
      BestResponse br = best_response(e, i, grid_for(e, grid_step, grid_range));
      Json report = Json::object();
      for (RoomIndex a = 0; a < e.size(); ++a) report[e.rooms()[a]] = rational_json(br.report.values[a]);
      std::cout << Json{{"agent", agent},
                        {"report", {{"values", report},
                                    {"budget", rational_json(br.report.budget)},
                                    {"rho", rational_json(br.report.rho)}}},
                        {"utility", rational_json(br.utility)},
                        {"truthful_utility", rational_json(br.current_utility)},
                        {"gain", rational_json(br.gain())}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (*eq_cmd) {
      const Economy e = load_economy(economy_path);
      std::vector<LimitStage> stages;
      for (const std::string& eps : epsilons) stages.push_back({parse_rational(eps), grid_for(e, grid_step, grid_range)});
      LimitReport rep = limit_equilibrium_experiment(e, stages);
      Json rows = Json::array();
      for (const LimitRow& row : rep.rows) {
        Json x{{"epsilon", rational_json(row.epsilon)},
               {"resolution", rational_json(row.resolution)},
               {"profiles", row.profiles},
               {"equilibria", row.equilibria},
               {"max_distance", rational_json(row.max_distance)}};
        if (row.farthest) x["farthest"] = allocation_json(e, *row.farthest);
        rows.push_back(x);
      }
      std::cout << Json{{"rows", rows}, {"non_increasing", rep.non_increasing}}.dump(2) << "\n";
      return 0;
    }
    if (*serve_cmd) {
      std::shared_ptr<SessionStore> store;
      if (store_dir.empty())
        store = std::make_shared<MemoryStore>();
      else
        store = std::make_shared<FileStore>(store_dir);
      Service service(store);
      httplib::Server server;
      service.mount(server);
      std::cerr << "listening on " << host << ":" << port << "\n";
      return server.listen(host, port) ? 0 : 1;
    }
  } catch (const Error& err) {
    std::cerr << error_json(err).dump(2) << "\n";
    return 2;
  }
  return 0;
}
