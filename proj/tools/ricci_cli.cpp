// Command-line front end: field exports, batch runs, presets, telemetry
// analysis and the session server.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "ricci/curvature.hpp"
#include "ricci/entropy.hpp"
#include "ricci/experiment.hpp"
#include "ricci/gateway.hpp"
#include "ricci/graph_io.hpp"
#include "ricci/telemetry_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

int cmd_curvature(const std::string& path, bool as_json, std::size_t workers) {
  auto g = ricci::load_graph(path);
  auto f = ricci::curvature_field(g, workers);
  if (as_json) {
    ricci::json edges = ricci::json::array();
    for (ricci::EdgeId e = 0; e < g.edge_count(); ++e)
      edges.push_back({{"u", ricci::label_to_json(g.label(g.edge(e).u))},
                       {"v", ricci::label_to_json(g.label(g.edge(e).v))},
                       {"w", g.weight(e)},
                       {"kappa", f.values[e]}});
    std::cout << ricci::json{{"edges", std::move(edges)},
                             {"kappa_mean_unweighted", f.mean_unweighted},
                             {"kappa_mean_weighted", f.mean_mass_weighted}}
                     .dump(2)
              << '\n';
    return kExitOk;
  }
  std::cout << "u,v,w,kappa\n";
  for (ricci::EdgeId e = 0; e < g.edge_count(); ++e)
    std::cout << g.label(g.edge(e).u) << ',' << g.label(g.edge(e).v) << ',' << ricci::format_exact(g.weight(e))
              << ',' << ricci::format_exact(f.values[e]) << '\n';
  return kExitOk;
}

int cmd_entropy(const std::string& path, const std::string& weighting) {
  auto g = ricci::load_graph(path);
  auto r = ricci::network_entropy(
      g, weighting == "uniform" ? ricci::EntropyWeighting::uniform : ricci::EntropyWeighting::stationary);
  ricci::json nodes = ricci::json::array();
  for (ricci::NodeId x = 0; x < g.node_count(); ++x)
    nodes.push_back({{"node", ricci::label_to_json(g.label(x))}, {"S", r.node_entropies[x]}, {"pi", r.stationary[x]}});
  std::cout << ricci::json{{"H", r.network_entropy}, {"weighting", weighting}, {"nodes", std::move(nodes)}}.dump(2)
            << '\n';
  return kExitOk;
}

void print_result_line(const ricci::ExperimentSpec& spec, const ricci::ExperimentResult& r) {
  auto s = ricci::analyze(r.telemetry);
  std::cout << spec.name << ": " << r.telemetry.rows.size() - 1 << " steps, sign agreement "
            << (s.agreement_fraction ? ricci::format_value(*s.agreement_fraction) : std::string("NA"));
  if (!spec.output.path.empty()) std::cout << ", written to " << spec.output.path;
  std::cout << '\n';
}

int cmd_simulate(const std::string& path, const std::string& out) {
  auto spec = ricci::spec_from_json(ricci::parse_json_text(ricci::read_text_file(path), path));
  if (!out.empty()) spec.output.path = out;
  auto r = ricci::run_experiment(spec);
  if (spec.output.path.empty()) {
    ricci::write_telemetry_csv(std::cout, r.telemetry);
  } else {
    print_result_line(spec, r);
  }
  return kExitOk;
}

int cmd_experiment(const std::string& preset, const ricci::PresetOverrides& o) {
  for (const auto& spec : ricci::preset_specs(preset, o)) print_result_line(spec, ricci::run_experiment(spec));
  return kExitOk;
}

int cmd_analyze(const std::string& path, const ricci::AnalysisOptions& opt) {
  auto tel = ricci::load_telemetry(path);
  std::cout << ricci::summary_to_json(ricci::analyze(tel, opt)).dump(2) << '\n';
  return kExitOk;
}

int cmd_serve(const std::string& host, int port) {
  ricci::SessionManager manager;
  httplib::Server server;
  ricci::mount_routes(server, manager);
  if (port == 0) {
    port = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    port = -1;
  }
  if (port < 0) throw ricci::IoError("cannot bind " + host + ":" + std::to_string(port));
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cout << "listening on http://" << host << ':' << port << std::endl;
  server.listen_after_bind();
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ollivier-Ricci flow control toolkit"};
  app.require_subcommand(1);

  std::string graph_path, spec_path, telemetry_path, preset, out, weighting = "stationary", host = "127.0.0.1";
  bool as_json = false;
  std::size_t workers = 1;

  auto* curv = app.add_subcommand("curvature", "Per-edge curvature of a graph file (CSV, or JSON with --json)");
  curv->add_option("graph", graph_path, "Edge list or .json graph")->required();
  curv->add_flag("--json", as_json, "Emit JSON with both means");
  curv->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* ent = app.add_subcommand("entropy", "Network entropy of a graph file");
  ent->add_option("graph", graph_path, "Edge list or .json graph")->required();
  ent->add_option("--weighting", weighting, "stationary or uniform")
      ->check(CLI::IsMember({"stationary", "uniform"}));

  auto* sim = app.add_subcommand("simulate", "Run an experiment spec");
  sim->add_option("spec", spec_path, "Experiment spec JSON")->required();
  sim->add_option("--out", out, "Output directory (overrides the spec)");

  ricci::PresetOverrides overrides;
  std::size_t n = 0, m = 0, steps = 0;
  std::uint64_t seed = 0;
  double beta2 = 0.0, dt = 0.0;
  auto* exp = app.add_subcommand("experiment", "Run a preset: fig2, fig2_full, fig2_cutoff, fig3, fig4, fig5");
  exp->add_option("preset", preset, "Preset name")->required();
  auto* opt_n = exp->add_option("--n", n, "Node count");
  auto* opt_m = exp->add_option("--m", m, "Attachment count");
  auto* opt_seed = exp->add_option("--seed", seed, "Generator seed");
  auto* opt_beta = exp->add_option("--beta2", beta2, "Control gain beta^2");
  auto* opt_dt = exp->add_option("--dt", dt, "Euler step");
  auto* opt_steps = exp->add_option("--steps", steps, "Iterations");
  overrides.out = "out";
  exp->add_option("--out", overrides.out, "Parent output directory")->capture_default_str();

  ricci::AnalysisOptions aopt;
  auto* ana = app.add_subcommand("analyze", "Sign-agreement and event-window summary of a telemetry file");
  ana->add_option("telemetry", telemetry_path, "Telemetry CSV or JSON")->required();
  ana->add_option("--noise-floor", aopt.noise_floor, "Minimum |delta kappa| for a qualifying step");
  ana->add_option("--window", aopt.window, "Rows on each side of an event");
  ana->add_flag("--weighted", aopt.weighted_kappa, "Use the mass-weighted kappa mean");

  int port = 8080;
  auto* srv = app.add_subcommand("serve", "Start the session server");
  srv->add_option("--port", port, "TCP port, 0 for any free port")->check(CLI::Range(0, 65535));
  srv->add_option("--host", host, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*curv) return cmd_curvature(graph_path, as_json, workers);
    if (*ent) return cmd_entropy(graph_path, weighting);
    if (*sim) return cmd_simulate(spec_path, out);
    if (*exp) {
      if (*opt_n) overrides.n = n;
      if (*opt_m) overrides.m = m;
      if (*opt_seed) overrides.seed = seed;
      if (*opt_beta) overrides.beta_sq = beta2;
      if (*opt_dt) overrides.dt = dt;
      if (*opt_steps) overrides.steps = steps;
      return cmd_experiment(preset, overrides);
    }
    if (*ana) return cmd_analyze(telemetry_path, aopt);
    if (*srv) return cmd_serve(host, port);
  } catch (const ricci::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
