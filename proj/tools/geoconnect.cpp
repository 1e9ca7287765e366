// Batch front end: scenario ingestion, command dispatch, and report
// emission. Exit codes are a stable contract: 0 = geodesic / success,
// 2 = obstructed, 3 = inconclusive, 1 = error.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "geoconnect/report.hpp"
#include "geoconnect/scenario.hpp"

namespace {

using namespace geoconnect;

struct CliOptions {
  std::vector<std::string> scenarios;
  std::string out_dir = ".";
  std::string emit = "csv";
  std::string path_file;
  int jobs = 1;
  std::optional<int> nodes, k_max, grid;
  std::optional<long> n_start;
  std::optional<double> tol_grad, tol_lim, tol_bvp, h_ode;
  std::optional<unsigned long> seed;
};

EmitLayout layout_of(const CliOptions& opts) {
  return opts.emit == "gnuplot-data" ? EmitLayout::gnuplot : EmitLayout::csv;
}

void apply_overrides(ConnectConfig& config, const CliOptions& opts) {
  if (opts.nodes) config.nodes = *opts.nodes;
  if (opts.n_start) config.n_start = *opts.n_start;
  if (opts.k_max) config.k_max = *opts.k_max;
  if (opts.grid) config.grid = *opts.grid;
  if (opts.tol_grad) config.tol_grad = *opts.tol_grad;
  if (opts.tol_lim) config.tol_lim = *opts.tol_lim;
  if (opts.tol_bvp) config.tol_bvp = *opts.tol_bvp;
  if (opts.h_ode) config.h_ode = *opts.h_ode;
  if (opts.seed) config.seed = *opts.seed;
}

std::string output_stem(const CliOptions& opts, const std::string& scenario_file) {
  std::filesystem::create_directories(opts.out_dir);
  return (std::filesystem::path(opts.out_dir) /
          std::filesystem::path(scenario_file).stem().string())
      .string();
}

void write_json(const std::string& file, const nlohmann::json& j) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write '" + file + "'");
  out << j.dump(2) << '\n';
}

int run_connect(const std::string& file, const CliOptions& opts, bool sweep_mode) {
  Scenario sc = load_scenario(file);
  apply_overrides(sc.config, opts);
  log_line(1, (sweep_mode ? "sweep " : "connect ") + file);
  const std::string stem = output_stem(opts, file);
  const std::string table_ext = layout_of(opts) == EmitLayout::csv ? ".csv" : ".dat";

  if (sc.gpw) {
    const GpwVerdict verdict =
        gpw_connect(*sc.gpw, sc.gpw_p, sc.gpw_q, sc.config.tol_bvp, sc.config.h_ode);
    write_json(stem + ".verdict.json", gpw_verdict_json(verdict));
    if (verdict.tag == GpwVerdict::Tag::geodesic)
      write_gpw_table(stem + ".path" + table_ext, verdict.path, layout_of(opts));
    std::cout << file << ": " << gpw_verdict_json(verdict)["tag"].get<std::string>() << "\n";
    return verdict.tag == GpwVerdict::Tag::geodesic ? 0 : 3;
  }

  const SpacetimeModel model(*sc.model);
  sc.config.full_schedule = sweep_mode;
  const ConnectVerdict verdict = connect(model, sc.endpoints, sc.config);
  write_json(stem + ".verdict.json", verdict_json(verdict));
  write_sweep_table(stem + ".sweep" + table_ext, verdict.diag.rows, layout_of(opts));
  if (verdict.tag == ConnectVerdict::Tag::geodesic)
    write_solution_table(stem + ".path" + table_ext, verdict.solution, layout_of(opts));
  else if (verdict.candidate.has_time())
    write_path_table(stem + ".candidate" + table_ext, verdict.candidate, layout_of(opts));
  std::cout << file << ": " << verdict_json(verdict)["tag"].get<std::string>() << " ("
            << verdict.diag.note << ")\n";
  return verdict_exit_code(verdict.tag);
}

int run_obstruct(const std::string& file, const CliOptions& opts) {
  Scenario sc = load_scenario(file);
  apply_overrides(sc.config, opts);
  if (!sc.model) throw Error("obstruct needs a split or builtin scenario");
  const std::string stem = output_stem(opts, file);
  const ObstructionCertificate cert =
      certify(*sc.model, sc.endpoints.xp, sc.endpoints.xq, sc.config.grid);
  write_json(stem + ".certificate.json", certificate_json(cert));
  bool any_reachable = false;
  for (const auto& m : cert.modes)
    if (m.reachable) {
      any_reachable = true;
      if (!m.witness.empty()) {
        DiscretePath w;
        w.nodes = m.witness;
        write_path_table(stem + ".witness-" + mode_name(m.mode) +
                             (layout_of(opts) == EmitLayout::csv ? ".csv" : ".dat"),
                         w, layout_of(opts));
      }
    }
  std::cout << file << ": "
            << (cert.obstructed() ? "obstructed"
                                  : (any_reachable ? "reachable" : "inconclusive"))
            << "\n";
  if (cert.obstructed()) return 2;
  return any_reachable ? 0 : 3;
}

int run_verify(const std::string& file, const CliOptions& opts) {
  if (opts.path_file.empty()) throw Error("verify needs --path FILE");
  Scenario sc = load_scenario(file);
  apply_overrides(sc.config, opts);
  if (!sc.model) throw Error("verify needs a split or builtin scenario");
  const SpacetimeModel model(*sc.model);
  const DiscretePath path = read_path_table(opts.path_file);
  if (!path.has_time()) throw Error("verify needs a path file with a t column");

  const GeodesicSystem system =
      sc.model->beta_is_zero() ? GeodesicSystem::lightlike : GeodesicSystem::stationary;
  const double residual = geodesic_residual(model, path, system);

  double pairing0 = 0.0, pairing_drift = 0.0, e0 = 0.0, e_drift = 0.0;
  for (int i = 0; i < path.segments(); ++i) {
    const SpacetimeVector zdot{path.velocity(i), path.t_velocity(i)};
    const Vec mid = path.midpoint(i);
    const double c = model.killing_pairing(mid, zdot);
    const double e = model.lorentz_inner(mid, zdot, zdot);
    if (i == 0) {
      pairing0 = c;
      e0 = e;
    }
    pairing_drift = std::max(pairing_drift, std::fabs(c - pairing0));
    e_drift = std::max(e_drift, std::fabs(e - e0));
  }

  nlohmann::json j;
  j["residual"] = fmt17(residual);
  j["killing_constant"] = fmt17(pairing0);
  j["killing_drift"] = fmt17(pairing_drift);
  j["energy"] = fmt17(e0);
  j["energy_drift"] = fmt17(e_drift);
  j["segments"] = path.segments();
  const std::string stem = output_stem(opts, file);
  write_json(stem + ".verify.json", j);
  std::cout << "residual " << fmt17(residual) << ", killing drift " << fmt17(pairing_drift)
            << ", energy drift " << fmt17(e_drift) << "\n";
  return 0;
}

int run_arrival(const std::string& file, const CliOptions& opts) {
  if (opts.path_file.empty()) throw Error("arrival needs --path FILE");
  Scenario sc = load_scenario(file);
  apply_overrides(sc.config, opts);
  if (!sc.model) throw Error("arrival needs a split or builtin scenario");
  const SpacetimeModel model(*sc.model);
  const DiscretePath path = read_path_table(opts.path_file);
  const ArrivalTime arrival = arrival_time(model, path, sc.endpoints.tp);

  DiscretePath lifted = path;
  lifted.t_nodes = arrival.t_nodes;
  const std::string stem = output_stem(opts, file);
  write_path_table(stem + ".lightlike" + (layout_of(opts) == EmitLayout::csv ? ".csv" : ".dat"),
                   lifted, layout_of(opts));
  nlohmann::json j;
  j["arrival_time"] = fmt17(arrival.T);
  j["max_null_defect"] = fmt17(arrival.max_null_defect);
  write_json(stem + ".arrival.json", j);
  std::cout << "arrival time " << fmt17(arrival.T) << " (max null defect "
            << fmt17(arrival.max_null_defect) << ")\n";
  return 0;
}

int aggregate(const std::vector<int>& codes) {
  for (int want : {1, 2, 3})
    for (int c : codes)
      if (c == want) return want;
  return 0;
}

int run_many(const CliOptions& opts, const std::function<int(const std::string&)>& one) {
  if (opts.scenarios.empty()) throw Error("no scenario file given");
  std::vector<int> codes(opts.scenarios.size(), 0);
  if (opts.jobs <= 1 || opts.scenarios.size() == 1) {
    for (std::size_t i = 0; i < opts.scenarios.size(); ++i) {
      try {
        codes[i] = one(opts.scenarios[i]);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        codes[i] = 1;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex io;
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= opts.scenarios.size()) return;
        try {
          codes[i] = one(opts.scenarios[i]);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(io);
          std::cerr << "error: " << e.what() << "\n";
          codes[i] = 1;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<int>(opts.jobs, static_cast<int>(opts.scenarios.size())); ++t)
      pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return aggregate(codes);
}

void add_common(CLI::App* cmd, CliOptions& opts, bool with_path_flag) {
  cmd->add_option("files", opts.scenarios, "scenario file(s)");
  cmd->add_option("--scenario", opts.scenarios, "scenario file(s)");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--emit", opts.emit, "output layout: csv or gnuplot-data")
      ->check(CLI::IsMember({"csv", "gnuplot-data"}));
  cmd->add_option("--jobs", opts.jobs, "run scenarios in parallel");
  cmd->add_option("--nodes", opts.nodes, "discrete path segments");
  cmd->add_option("--n-start", opts.n_start, "first perturbation index");
  cmd->add_option("--k-max", opts.k_max, "last doubling of the schedule");
  cmd->add_option("--tol-grad", opts.tol_grad, "gradient tolerance");
  cmd->add_option("--tol-lim", opts.tol_lim, "scheme convergence tolerance");
  cmd->add_option("--tol-bvp", opts.tol_bvp, "shooting tolerance");
  cmd->add_option("--grid", opts.grid, "obstruction grid resolution");
  cmd->add_option("--seed", opts.seed, "random seed");
  cmd->add_option("--h-ode", opts.h_ode, "integrator step");
  if (with_path_flag) cmd->add_option("--path", opts.path_file, "path table file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"connecting geodesics in split spacetimes with a causal symmetry"};
  app.require_subcommand(1);

  CliOptions opts;
  auto* connect_cmd = app.add_subcommand("connect", "run the full connection pipeline");
  add_common(connect_cmd, opts, false);
  auto* sweep_cmd = app.add_subcommand("sweep", "full perturbation sweep with diagnostics");
  add_common(sweep_cmd, opts, false);
  auto* obstruct_cmd = app.add_subcommand("obstruct", "run only the obstruction search");
  add_common(obstruct_cmd, opts, false);
  auto* gpw_cmd = app.add_subcommand("gpw-connect", "direct product-model connection");
  add_common(gpw_cmd, opts, false);
  auto* verify_cmd = app.add_subcommand("verify", "residual / conservation report for a path");
  add_common(verify_cmd, opts, true);
  auto* arrival_cmd = app.add_subcommand("arrival", "lightlike arrival time of a spatial path");
  add_common(arrival_cmd, opts, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (connect_cmd->parsed())
      return run_many(opts, [&](const std::string& f) { return run_connect(f, opts, false); });
    if (sweep_cmd->parsed())
      return run_many(opts, [&](const std::string& f) { return run_connect(f, opts, true); });
    if (obstruct_cmd->parsed())
      return run_many(opts, [&](const std::string& f) { return run_obstruct(f, opts); });
    if (gpw_cmd->parsed())
      return run_many(opts, [&](const std::string& f) { return run_connect(f, opts, false); });
    if (verify_cmd->parsed())
      return run_many(opts, [&](const std::string& f) { return run_verify(f, opts); });
    if (arrival_cmd->parsed())
      return run_many(opts, [&](const std::string& f) { return run_arrival(f, opts); });
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
