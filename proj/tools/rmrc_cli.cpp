// Command-line driver for the recovery benchmark.
#include "rmrc/bench.hpp"
#include "rmrc/errors.hpp"
#include "rmrc/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>

namespace fs = std::filesystem;
using namespace rmrc;

namespace {

struct Overrides {
  std::string config_path;
  std::string preset = "desk";
  std::optional<int> level;
  std::optional<Index> n_reduced;
  std::optional<std::size_t> set_size;
  std::optional<std::size_t> sensor_count;
  std::optional<long> pd_iterations;
  std::optional<std::string> output_dir;
  std::vector<Index> m_grid;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "JSON configuration file");
  app->add_option("--preset", o.preset, "Built-in configuration (desk or paper)")->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--level", o.level, "Mesh level (h = 2^-level)");
  app->add_option("--N", o.n_reduced, "Reduced basis size");
  app->add_option("--J", o.set_size, "Snapshots per set");
  app->add_option("--sensors", o.sensor_count, "Number of sensors");
  app->add_option("--pd-iterations", o.pd_iterations, "Primal-dual iteration budget");
  app->add_option("--out", o.output_dir, "Output directory");
  app->add_option("--m-grid", o.m_grid, "Measurement dimensions");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config_path.empty()
                           ? (o.preset == "paper" ? ExperimentConfig::paper() : ExperimentConfig::desk())
                           : load_config(o.config_path);
  if (o.level) c.level = *o.level;
  if (o.n_reduced) c.n_reduced = *o.n_reduced;
  if (o.set_size) c.set_size = *o.set_size;
  if (o.sensor_count) c.sensors.count = *o.sensor_count;
  if (o.pd_iterations) c.pd_iterations = *o.pd_iterations;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (!o.m_grid.empty()) c.m_grid = o.m_grid;
  c.validate();
  return c;
}

// Artifacts shared by the fit and evaluate commands.
struct Workspace {
  ExperimentConfig config;
  fs::path out;
  FemSpace space;
  MeasurementSpace mspace;
  ReducedBasis rb;

  static Workspace open(const ExperimentConfig& c) {
    const fs::path out = resolve_output_dir(c);
    FemSpace space = FemSpace::build(c.level);
    if (!fs::exists(out / "sensors.txt")) throw StageError("sensors", "missing " + (out / "sensors.txt").string() + "; run gen-sensors");
    MeasurementSpace ms = build_measurement_space(space, read_sensors(out / "sensors.txt"), c.kernel);
    if (!fs::exists(out / "basis" / "basis.csv")) throw StageError("greedy", "missing reduced basis; run greedy");
    ReducedBasis rb = read_reduced_basis(out / "basis", space.v_metric());
    return Workspace{c, out, std::move(space), std::move(ms), std::move(rb)};
  }

  Matrix set(SnapshotSet which) const {
    const fs::path dir = out / "sets" / set_name(which);
    if (!fs::exists(dir / "manifest.csv"))
      throw StageError("snapshots", "missing set " + set_name(which) + "; run gen-snapshots --set " + set_name(which));
    return snapshot_matrix(load_set(dir));
  }
};

AffineRecoveryMap best_one_space(const Workspace& ws, const AmbientBasis& ambient, const SetEvaluator& eval, Index m,
                                 std::optional<Index> n) {
  const Vector offset = ws.set(SnapshotSet::Greedy).rowwise().mean();
  const OrthonormalBasis wm = ws.mspace.subspace(m);
  auto build = [&](Index k) {
    AffineRecoveryMap map = affine_one_space_map(favorable_bases(ws.rb.basis.leading(k), wm), offset, ambient);
    map.basis_fingerprint = ambient.fingerprint();
    return map;
  };
  if (n) return build(*n);
  std::vector<double> errs;
  for (Index k = 1; k <= std::min(m, ws.rb.size()); ++k) {
    try {
      errs.push_back(eval.worst(build(k)).first);
    } catch (const UnstableSpace&) {
      errs.push_back(INFINITY);
    }
  }
  return build(select_nstar(errs));
}

int run(int argc, char** argv) {
  CLI::App app{"Optimal affine recovery benchmark"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Overrides o;
  add_common(&app, o);

  auto* sensors_cmd = app.add_subcommand("gen-sensors", "Draw the sensor network");
  auto* snaps_cmd = app.add_subcommand("gen-snapshots", "Solve and store a snapshot set");
  std::string which = "greedy";
  snaps_cmd->add_option("--set", which, "greedy, train or test")->required();
  auto* greedy_cmd = app.add_subcommand("greedy", "Build the reduced basis from the greedy set");
  auto* fit_cmd = app.add_subcommand("fit", "Fit one recovery map");
  std::string method;
  Index m = 0;
  std::optional<Index> n;
  std::string init = "zero";
  long subgrad_iterations = 100000;
  fit_cmd->add_option("method", method, "mvn, one, msa, wca or subgrad")
      ->required()
      ->check(CLI::IsMember({"mvn", "one", "msa", "wca", "subgrad"}));
  fit_cmd->add_option("--m", m, "Measurement dimension")->required();
  fit_cmd->add_option("--n", n, "Reduced dimension of the one-space map (default: best on test set)");
  fit_cmd->add_option("--init", init, "Initial map for wca/subgrad")->check(CLI::IsMember({"zero", "one"}));
  fit_cmd->add_option("--subgrad-iterations", subgrad_iterations, "Subgradient iteration budget");
  auto* eval_cmd = app.add_subcommand("evaluate", "Worst-case test errors of a stored map");
  std::string map_path;
  eval_cmd->add_option("map", map_path, "Map file")->required()->check(CLI::ExistingFile);
  auto* report_cmd = app.add_subcommand("report", "Print the summary of a finished run");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run every stage end to end");
  std::string init_pipeline;
  pipeline_cmd->add_option("--init", init_pipeline, "PD initialization")->check(CLI::IsMember({"zero", "one"}));
  auto* config_cmd = app.add_subcommand("show-config", "Print the resolved configuration as JSON");

  CLI11_PARSE(app, argc, argv);
  ExperimentConfig config = resolve(o);
  if (*config_cmd) {
    std::cout << config_json(config);
    return 0;
  }
  const fs::path out = resolve_output_dir(config);

  if (*sensors_cmd) {
    const auto sensors = draw_sensors(config.sensor_draw());
    build_measurement_space(FemSpace::build(config.level), sensors, config.kernel);
    write_sensors(out / "sensors.txt", sensors);
    std::cout << "wrote " << sensors.size() << " sensors to " << (out / "sensors.txt").string() << '\n';
    return 0;
  }
  if (*snaps_cmd) {
    const SnapshotSet s = parse_set_name(which);
    const FemSpace space = FemSpace::build(config.level);
    generate_set(config, s, space, out / "sets" / set_name(s));
    std::cout << "wrote " << config.set_size << " snapshots to " << (out / "sets" / set_name(s)).string() << '\n';
    return 0;
  }
  if (*greedy_cmd) {
    const FemSpace space = FemSpace::build(config.level);
    const fs::path dir = out / "sets" / "greedy";
    if (!fs::exists(dir / "manifest.csv")) throw StageError("greedy", "missing greedy set; run gen-snapshots --set greedy");
    const ReducedBasis rb = greedy_reduced_basis(snapshot_matrix(load_set(dir)), space.v_metric(), config.n_reduced);
    write_reduced_basis(out / "basis", rb, space.level());
    ErrorReport r;
    r.greedy_history = rb.errors;
    io::Table t{{"n", "error"}, {}};
    for (std::size_t k = 0; k < rb.errors.size(); ++k)
      t.rows.push_back({std::to_string(k + 1), io::format_double(rb.errors[k])});
    io::write_table(out / "greedy.csv", t);
    std::cout << "reduced basis of size " << rb.size() << '\n';
    return 0;
  }
  if (*fit_cmd) {
    const Workspace ws = Workspace::open(config);
    const AmbientBasis ambient = ambient_basis(ws.mspace.subspace(m), ws.rb.basis);
    const SetEvaluator train(ws.space, ambient, ws.set(SnapshotSet::Training));
    AffineRecoveryMap map;
    std::vector<ConvergenceRecord> log;
    auto warm = [&]() -> std::optional<AffineRecoveryMap> {
      if (init != "one") return std::nullopt;
      const SetEvaluator test(ws.space, ambient, ws.set(SnapshotSet::Test));
      return best_one_space(ws, ambient, test, m, n);
    };
    if (method == "mvn") {
      map = minimal_norm_map(m, ambient.n_complement);
    } else if (method == "one") {
      const SetEvaluator test(ws.space, ambient, ws.set(SnapshotSet::Test));
      map = best_one_space(ws, ambient, test, m, n);
    } else if (method == "msa") {
      map = msa_fit(train.measurements(), train.complements());
    } else if (method == "wca") {
      PdConfig pd;
      pd.max_iterations = config.pd_iterations;
      pd.log_stride = config.pd_log_stride;
      pd.theta = config.pd_theta;
      pd.warm_start = warm();
      FitResult r = pd_fit(MinMaxProblem(train.measurements(), train.complements()), pd);
      map = std::move(r.map);
      log = std::move(r.log);
    } else {
      SubgradientConfig sg;
      sg.max_iterations = subgrad_iterations;
      sg.log_stride = config.pd_log_stride;
      sg.warm_start = warm();
      FitResult r = subgradient_fit(MinMaxProblem(train.measurements(), train.complements()), sg);
      map = std::move(r.map);
      log = std::move(r.log);
    }
    map.basis_fingerprint = ambient.fingerprint();
    const fs::path path = out / "maps" / (method + "_m" + std::to_string(m) + ".map");
    write_map(path, map);
    if (!log.empty()) {
      ErrorReport r;
      r.pd_logs[m] = log;
      io::Table t{{"iteration", "objective", "objective_sqrt", "wall_time"}, {}};
      for (const auto& rec : log)
        t.rows.push_back({std::to_string(rec.iteration), io::format_double(rec.objective),
                          io::format_double(std::sqrt(rec.objective)), io::format_double(rec.seconds)});
      io::write_table(out / ("convergence_" + (method == "wca" ? std::string("pd") : method) + "_m" + std::to_string(m) + ".csv"), t);
    }
    const auto [ev, el] = train.worst(map);
    std::cout << "wrote " << path.string() << " (training error V " << ev << ", L2 " << el << ")\n";
    return 0;
  }
  if (*eval_cmd) {
    const Workspace ws = Workspace::open(config);
    const AffineRecoveryMap map = read_map(map_path);
    const AmbientBasis ambient = ambient_basis(ws.mspace.subspace(map.m), ws.rb.basis);
    if (map.n_complement != ambient.n_complement || map.basis_fingerprint != ambient.fingerprint())
      throw StageError("evaluate", "map was fitted in a different ambient basis");
    const SetEvaluator test(ws.space, ambient, ws.set(SnapshotSet::Test));
    const auto [ev, el] = test.worst(map);
    std::cout << map.method << " m=" << map.m << " worst test error V " << ev << " L2 " << el << '\n';
    return 0;
  }
  if (*report_cmd) {
    if (!fs::exists(out / "summary.txt")) throw StageError("report", "no summary in " + out.string());
    std::cout << io::read_file(out / "summary.txt");
    return 0;
  }
  if (*pipeline_cmd) {
    if (!init_pipeline.empty()) config.pd_init = init_pipeline;
    const ErrorReport r = run_pipeline(config);
    std::cout << summary_text(r);
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const StageError& e) {
    std::cerr << "rmrc: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "rmrc: " << e.what() << '\n';
    return 1;
  }
}
