#include "rmrc/bench.hpp"

#include "rmrc/errors.hpp"
#include "rmrc/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace rmrc {

namespace fs = std::filesystem;
using nlohmann::json;

std::string set_name(SnapshotSet which) {
  switch (which) {
    case SnapshotSet::Greedy: return "greedy";
    case SnapshotSet::Training: return "train";
    case SnapshotSet::Test: return "test";
  }
  return "unknown";
}

SnapshotSet parse_set_name(const std::string& name) {
  if (name == "greedy") return SnapshotSet::Greedy;
  if (name == "train" || name == "training") return SnapshotSet::Training;
  if (name == "test") return SnapshotSet::Test;
  throw InvalidArgument("unknown snapshot set '" + name + "' (expected greedy, train or test)");
}

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig ExperimentConfig::desk() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::paper() {
  ExperimentConfig c;
  c.level = 7;
  c.sensors.count = 50;
  c.n_reduced = 110;
  c.set_size = 1000;
  c.m_grid = {10, 20, 30, 40, 50};
  c.pd_iterations = 100000;
  c.output_dir = "rmrc-paper";
  return c;
}

void ExperimentConfig::validate() const {
  if (level < FemSpace::kMinLevel || level > FemSpace::kMaxLevel) throw InvalidArgument("config: level out of range");
  if (p < 1) throw InvalidArgument("config: p must be >= 1");
  if (sensors.count < 1) throw InvalidArgument("config: sensor count must be >= 1");
  for (Index m : m_grid) {
    if (m < 1 || static_cast<std::size_t>(m) > sensors.count)
      throw InvalidArgument("config: m grid entry " + std::to_string(m) + " exceeds the sensor count");
  }
  if (n_reduced < 1 || static_cast<std::size_t>(n_reduced) > set_size)
    throw InvalidArgument("config: N must satisfy 1 <= N <= J");
  if (seed_greedy == seed_training || seed_greedy == seed_test || seed_training == seed_test)
    throw InvalidArgument("config: the three snapshot sets need distinct seeds");
  if (pd_init != "zero" && pd_init != "one") throw InvalidArgument("config: pd_init must be 'zero' or 'one'");
  if (pd_iterations < 0 || subgradient_iterations < 0) throw InvalidArgument("config: iteration counts must be >= 0");
}

std::uint64_t ExperimentConfig::seed_for(SnapshotSet which) const {
  switch (which) {
    case SnapshotSet::Greedy: return seed_greedy;
    case SnapshotSet::Training: return seed_training;
    case SnapshotSet::Test: return seed_test;
  }
  return 0;
}

SensorDraw ExperimentConfig::sensor_draw() const {
  SensorDraw d = sensors;
  if (pin_reported_sensor) d.pinned.emplace_back(9, Sensor{{0.23, 0.75}, 0.06});
  return d;
}

namespace {

std::string kernel_name(KernelShape k) { return k == KernelShape::Exponential ? "exponential" : "gaussian"; }

KernelShape parse_kernel(const std::string& s) {
  if (s == "exponential") return KernelShape::Exponential;
  if (s == "gaussian") return KernelShape::Gaussian;
  throw InvalidArgument("config: kernel must be 'exponential' or 'gaussian'");
}

json to_json(const ExperimentConfig& c) {
  return json{{"level", c.level},
              {"p", c.p},
              {"source", c.source},
              {"kernel", kernel_name(c.kernel)},
              {"sensor_count", c.sensors.count},
              {"center_box", {c.sensors.center_lo, c.sensors.center_hi}},
              {"tau_range", {c.sensors.tau_lo, c.sensors.tau_hi}},
              {"seed_sensors", c.sensors.seed},
              {"pin_reported_sensor", c.pin_reported_sensor},
              {"N", c.n_reduced},
              {"J", c.set_size},
              {"seed_greedy", c.seed_greedy},
              {"seed_train", c.seed_training},
              {"seed_test", c.seed_test},
              {"m_grid", c.m_grid},
              {"pd_iterations", c.pd_iterations},
              {"pd_log_stride", c.pd_log_stride},
              {"pd_theta", c.pd_theta},
              {"pd_init", c.pd_init},
              {"subgradient_iterations", c.subgradient_iterations},
              {"output_dir", c.output_dir.string()},
              {"persist_sets", c.persist_sets}};
}

ExperimentConfig from_json(const json& j) {
  ExperimentConfig c = j.value("preset", std::string("desk")) == "paper" ? ExperimentConfig::paper()
                                                                         : ExperimentConfig::desk();
  static const std::set<std::string> known{"preset", "level", "p", "source", "kernel", "sensor_count", "center_box",
                                           "tau_range", "seed_sensors", "pin_reported_sensor", "N", "J",
                                           "seed_greedy", "seed_train", "seed_test", "m_grid", "pd_iterations",
                                           "pd_log_stride", "pd_theta", "pd_init", "subgradient_iterations",
                                           "output_dir", "persist_sets"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw InvalidArgument("config: unknown key '" + item.key() + "'");
  }
  c.level = j.value("level", c.level);
  c.p = j.value("p", c.p);
  c.source = j.value("source", c.source);
  if (j.contains("kernel")) c.kernel = parse_kernel(j["kernel"].get<std::string>());
  c.sensors.count = j.value("sensor_count", c.sensors.count);
  if (j.contains("center_box")) {
    c.sensors.center_lo = j["center_box"].at(0).get<double>();
    c.sensors.center_hi = j["center_box"].at(1).get<double>();
  }
  if (j.contains("tau_range")) {
    c.sensors.tau_lo = j["tau_range"].at(0).get<double>();
    c.sensors.tau_hi = j["tau_range"].at(1).get<double>();
  }
  c.sensors.seed = j.value("seed_sensors", c.sensors.seed);
  c.pin_reported_sensor = j.value("pin_reported_sensor", c.pin_reported_sensor);
  c.n_reduced = j.value("N", c.n_reduced);
  c.set_size = j.value("J", c.set_size);
  c.seed_greedy = j.value("seed_greedy", c.seed_greedy);
  c.seed_training = j.value("seed_train", c.seed_training);
  c.seed_test = j.value("seed_test", c.seed_test);
  if (j.contains("m_grid")) c.m_grid = j["m_grid"].get<std::vector<Index>>();
  c.pd_iterations = j.value("pd_iterations", c.pd_iterations);
  c.pd_log_stride = j.value("pd_log_stride", c.pd_log_stride);
  c.pd_theta = j.value("pd_theta", c.pd_theta);
  c.pd_init = j.value("pd_init", c.pd_init);
  c.subgradient_iterations = j.value("subgradient_iterations", c.subgradient_iterations);
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  c.persist_sets = j.value("persist_sets", c.persist_sets);
  return c;
}

}  // namespace

ExperimentConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw InvalidArgument("config " + path.string() + ": " + e.what());
  }
  ExperimentConfig c = from_json(j);
  c.validate();
  return c;
}

std::string config_json(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

void save_config(const fs::path& path, const ExperimentConfig& config) { io::write_file(path, config_json(config)); }

fs::path resolve_output_dir(const ExperimentConfig& config) {
  if (config.output_dir.is_absolute()) return config.output_dir;
  if (const char* root = std::getenv("RMRC_OUTPUT_ROOT"); root && *root) return fs::path(root) / config.output_dir;
  return config.output_dir;
}

// ---------------------------------------------------------------------------
// Snapshot sets

std::vector<ParameterVector> draw_parameters(int p, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ParameterVector> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    std::vector<double> values(static_cast<std::size_t>(p * p));
    for (double& v : values) v = -1.0 + 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    out.emplace_back(p, std::move(values));
  }
  return out;
}

std::vector<Snapshot> generate_set(const ExperimentConfig& config, SnapshotSet which, const FemSpace& space,
                                   const std::optional<fs::path>& dir) {
  const std::uint64_t seed = config.seed_for(which);
  const auto params = draw_parameters(config.p, config.set_size, seed);
  std::vector<Snapshot> out;
  out.reserve(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    Snapshot s = solve_forward(space, params[j], ConstantSource{config.source});
    s.seed = seed;
    s.index = static_cast<std::int64_t>(j);
    out.push_back(std::move(s));
  }
  if (dir) persist_set(*dir, out, space.level());
  return out;
}

void persist_set(const fs::path& dir, const std::vector<Snapshot>& snapshots, int level) {
  fs::create_directories(dir);
  io::Table manifest{{"index", "file", "seed", "parameter_hash"}, {}};
  for (std::size_t j = 0; j < snapshots.size(); ++j) {
    std::ostringstream name;
    name << std::setw(5) << std::setfill('0') << j << ".rmrc";
    io::write_snapshot(dir / name.str(), snapshots[j], level);
    const auto& param = snapshots[j].parameter;
    manifest.rows.push_back({std::to_string(j), name.str(), std::to_string(snapshots[j].seed),
                             param ? std::to_string(param->hash()) : std::string("none")});
  }
  io::write_table(dir / "manifest.csv", manifest);
}

std::vector<Snapshot> load_set(const fs::path& dir) {
  const auto manifest = io::read_table(dir / "manifest.csv");
  std::vector<Snapshot> out;
  out.reserve(manifest.rows.size());
  for (const auto& row : manifest.rows) out.push_back(io::read_snapshot(dir / row.at(1)));
  return out;
}

void check_disjoint(const std::vector<const std::vector<Snapshot>*>& sets) {
  std::map<std::uint64_t, std::pair<std::size_t, const ParameterVector*>> seen;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    for (const auto& s : *sets[k]) {
      if (!s.parameter) continue;
      const auto [it, inserted] = seen.emplace(s.parameter->hash(), std::make_pair(k, &*s.parameter));
      if (!inserted && it->second.first != k && *it->second.second == *s.parameter)
        throw InvalidArgument("snapshot sets " + std::to_string(it->second.first) + " and " + std::to_string(k) +
                              " share a parameter vector");
    }
  }
}

void write_reduced_basis(const fs::path& dir, const ReducedBasis& rb, int level) {
  fs::create_directories(dir);
  io::Table table{{"n", "selected", "error", "file"}, {}};
  for (Index k = 0; k < rb.size(); ++k) {
    std::ostringstream name;
    name << "basis_" << std::setw(4) << std::setfill('0') << k << ".rmrc";
    Snapshot s;
    s.coefficients = rb.basis.vectors.col(k);
    s.index = rb.selected[static_cast<std::size_t>(k)];
    io::write_snapshot(dir / name.str(), s, level);
    table.rows.push_back({std::to_string(k + 1), std::to_string(rb.selected[static_cast<std::size_t>(k)]),
                          io::format_double(rb.errors[static_cast<std::size_t>(k)]), name.str()});
  }
  io::write_table(dir / "basis.csv", table);
}

ReducedBasis read_reduced_basis(const fs::path& dir, const Metric& metric) {
  const auto table = io::read_table(dir / "basis.csv");
  ReducedBasis rb;
  rb.basis.metric = metric;
  std::vector<Vector> cols;
  for (const auto& row : table.rows) {
    rb.selected.push_back(std::stoll(row.at(1)));
    rb.errors.push_back(io::parse_double(row.at(2)));
    cols.push_back(io::read_snapshot(dir / row.at(3)).coefficients);
  }
  rb.basis.vectors.resize(cols.empty() ? 0 : cols.front().size(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) rb.basis.vectors.col(static_cast<Index>(k)) = cols[k];
  return rb;
}

// ---------------------------------------------------------------------------
// Evaluation

SetEvaluator::SetEvaluator(const FemSpace& space, const AmbientBasis& ambient, const Matrix& snapshots)
    : m_(ambient.m), n_(ambient.n_complement) {
  const Matrix& psi = ambient.basis.vectors;
  coords_ = ambient.coordinates(snapshots);
  const Matrix m_psi = space.mass() * psi;
  gram_l2_ = psi.transpose() * m_psi;
  const Index count = snapshots.cols();
  out_v2_.resize(count);
  out_l2_.resize(count);
  cross_l2_.resize(psi.cols(), count);
  constexpr Index block = 64;
  for (Index start = 0; start < count; start += block) {
    const Index width = std::min(block, count - start);
    const Matrix r = snapshots.middleCols(start, width) - psi * coords_.middleCols(start, width);
    const Matrix kr = space.stiffness() * r;
    const Matrix mr = space.mass() * r;
    out_v2_.segment(start, width) = r.cwiseProduct(kr).colwise().sum().transpose().cwiseMax(0.0);
    out_l2_.segment(start, width) = r.cwiseProduct(mr).colwise().sum().transpose().cwiseMax(0.0);
    cross_l2_.middleCols(start, width) = psi.transpose() * mr;
  }
}

namespace {

// Ambient coordinates of u - A(P_W u); the W block is always zero.
Matrix coordinate_defect(const Matrix& coords, Index m, Index n, const AffineRecoveryMap& map) {
  if (map.m != m || map.n_complement != n) throw InvalidArgument("SetEvaluator: map dimensions differ from the ambient basis");
  Matrix d = Matrix::Zero(m + n, coords.cols());
  d.bottomRows(n) = coords.bottomRows(n) - map.B * coords.topRows(m);
  d.bottomRows(n).colwise() -= map.c;
  return d;
}

}  // namespace

double SetEvaluator::worst_ambient(const AffineRecoveryMap& map) const {
  const Matrix d = coordinate_defect(coords_, m_, n_, map);
  return d.cols() == 0 ? 0.0 : std::sqrt(d.colwise().squaredNorm().maxCoeff());
}

Matrix SetEvaluator::errors(const AffineRecoveryMap& map) const {
  const Index count = coords_.cols();
  const Matrix d = coordinate_defect(coords_, m_, n_, map);
  Matrix out(count, 2);
  const Matrix gd = gram_l2_ * d;
  for (Index j = 0; j < count; ++j) {
    const double v2 = out_v2_(j) + d.col(j).squaredNorm();
    const double l2 = out_l2_(j) + 2.0 * d.col(j).dot(cross_l2_.col(j)) + d.col(j).dot(gd.col(j));
    out(j, 0) = std::sqrt(std::max(0.0, v2));
    out(j, 1) = std::sqrt(std::max(0.0, l2));
  }
  return out;
}

std::pair<double, double> SetEvaluator::worst(const AffineRecoveryMap& map) const {
  const Matrix e = errors(map);
  if (e.rows() == 0) return {0.0, 0.0};
  return {e.col(0).maxCoeff(), e.col(1).maxCoeff()};
}

const MethodError* ErrorReport::find(const std::string& method, Index m, bool training) const {
  const auto& list = training ? training_errors : test_errors;
  for (const auto& e : list) {
    if (e.method == method && e.m == m) return &e;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void log_line(const std::string& s) { std::cerr << "[rmrc] " << s << std::endl; }

}  // namespace

ErrorReport run_pipeline(const ExperimentConfig& config) {
  stage("config", [&] { config.validate(); });
  const fs::path out = resolve_output_dir(config);
  stage("io", [&] {
    fs::create_directories(out);
    save_config(out / "config.json", config);
  });

  const FemSpace space = stage("fem", [&] { return FemSpace::build(config.level); });
  const auto sensors = stage("sensors", [&] {
    auto s = draw_sensors(config.sensor_draw());
    write_sensors(out / "sensors.txt", s);
    return s;
  });
  const MeasurementSpace mspace =
      stage("sensors", [&] { return build_measurement_space(space, sensors, config.kernel); });
  log_line("measurement space of dimension " + std::to_string(mspace.dim()));

  auto make_set = [&](SnapshotSet which) {
    return stage("snapshots", [&] {
      std::optional<fs::path> dir;
      if (config.persist_sets) dir = out / "sets" / set_name(which);
      return generate_set(config, which, space, dir);
    });
  };
  const auto greedy_set = make_set(SnapshotSet::Greedy);
  const auto training_set = make_set(SnapshotSet::Training);
  const auto test_set = make_set(SnapshotSet::Test);
  stage("snapshots", [&] { check_disjoint({&greedy_set, &training_set, &test_set}); });
  const Matrix greedy_mat = snapshot_matrix(greedy_set);
  const Matrix training_mat = snapshot_matrix(training_set);
  const Matrix test_mat = snapshot_matrix(test_set);

  ErrorReport report;
  const ReducedBasis rb = stage("greedy", [&] {
    auto r = greedy_reduced_basis(greedy_mat, space.v_metric(), config.n_reduced);
    write_reduced_basis(out / "basis", r, space.level());
    return r;
  });
  report.greedy_history = rb.errors;
  log_line("greedy basis of size " + std::to_string(rb.size()) + ", final error " +
           (rb.errors.empty() ? std::string("n/a") : io::format_double(rb.errors.back())));

  stage("truncation", [&] {
    const std::array<Matrix, 2> sets{greedy_mat, test_mat};
    report.eps_N = truncation_error(sets, rb.basis);
    // Running eps_n for n = 1..N from cumulative projections.
    Vector norms2(greedy_mat.cols() + test_mat.cols());
    Matrix coords(rb.size(), norms2.size());
    const Matrix kg = space.stiffness() * greedy_mat;
    const Matrix kt = space.stiffness() * test_mat;
    norms2 << greedy_mat.cwiseProduct(kg).colwise().sum().transpose(), test_mat.cwiseProduct(kt).colwise().sum().transpose();
    coords << rb.basis.vectors.transpose() * kg, rb.basis.vectors.transpose() * kt;
    Vector remaining = norms2;
    for (Index n = 0; n < rb.size(); ++n) {
      remaining -= coords.row(n).transpose().cwiseAbs2();
      report.truncation_history.push_back(std::sqrt(std::max(0.0, remaining.maxCoeff())));
    }
    if (!report.truncation_history.empty()) report.truncation_history.back() = report.eps_N;
  });
  log_line("eps_N = " + io::format_double(report.eps_N));

  const Vector offset = greedy_mat.rowwise().mean();

  for (const Index m : config.m_grid) {
    const std::string tag = "m=" + std::to_string(m);
    const AmbientBasis ambient = stage("ambient", [&] { return ambient_basis(mspace.subspace(m), rb.basis); });
    if (!ambient.dropped.empty())
      log_line(tag + ": " + std::to_string(ambient.dropped.size()) + " reduced-basis vectors lie in W_m");
    const SetEvaluator test_eval(space, ambient, test_mat);
    const SetEvaluator train_eval(space, ambient, training_mat);

    auto record = [&](const AffineRecoveryMap& map) {
      const auto [tv, tl] = test_eval.worst(map);
      const auto [rv, rl] = train_eval.worst(map);
      report.test_errors.push_back({map.method, m, tv, tl, test_eval.worst_ambient(map)});
      report.training_errors.push_back({map.method, m, rv, rl, train_eval.worst_ambient(map)});
      write_map(out / "maps" / (map.method + "_m" + std::to_string(m) + ".map"), map);
    };

    AffineRecoveryMap mvn = minimal_norm_map(m, ambient.n_complement);
    mvn.basis_fingerprint = ambient.fingerprint();
    record(mvn);

    // One-space maps for every n <= m; n* chosen on the test set.
    const AffineRecoveryMap one = stage("one", [&] {
      const OrthonormalBasis wm = mspace.subspace(m);
      std::vector<double> errs;
      std::vector<AffineRecoveryMap> maps;
      const Index n_max = std::min(m, rb.size());
      for (Index n = 1; n <= n_max; ++n) {
        const FavorablePair pair = favorable_bases(rb.basis.leading(n), wm);
        const double mu = stability_mu(pair);
        if (!std::isfinite(mu)) {
          log_line(tag + ": skipping n=" + std::to_string(n) + " (V_n meets the complement of W)");
          errs.push_back(std::numeric_limits<double>::infinity());
          maps.push_back(mvn);
          continue;
        }
        AffineRecoveryMap map = affine_one_space_map(pair, offset, ambient);
        map.basis_fingerprint = ambient.fingerprint();
        const auto [ev, el] = test_eval.worst(map);
        report.one_space.push_back({m, n, ev, el, mu});
        errs.push_back(ev);
        maps.push_back(std::move(map));
      }
      if (errs.empty()) return mvn;
      const Index nstar = select_nstar(errs);
      report.nstar[m] = nstar;
      return maps[static_cast<std::size_t>(nstar - 1)];
    });
    record(one);

    AffineRecoveryMap msa = stage("msa", [&] { return msa_fit(train_eval.measurements(), train_eval.complements()); });
    msa.basis_fingerprint = ambient.fingerprint();
    record(msa);

    const MinMaxProblem problem(train_eval.measurements(), train_eval.complements());
    FitResult wca = stage("wca", [&] {
      PdConfig pd;
      pd.max_iterations = config.pd_iterations;
      pd.log_stride = config.pd_log_stride;
      pd.theta = config.pd_theta;
      if (config.pd_init == "one") pd.warm_start = one;
      return pd_fit(problem, pd);
    });
    wca.map.basis_fingerprint = ambient.fingerprint();
    report.pd_logs[m] = wca.log;
    record(wca.map);
    log_line(tag + ": PD objective " + io::format_double(wca.final_objective) + " after " +
             std::to_string(wca.iterations) + " iterations");

    if (config.subgradient_iterations > 0) {
      stage("subgrad", [&] {
        SubgradientConfig sg;
        sg.max_iterations = config.subgradient_iterations;
        sg.log_stride = config.pd_log_stride;
        if (config.pd_init == "one") sg.warm_start = one;
        report.subgradient_logs[m] = subgradient_fit(problem, sg).log;
      });
    }

    const auto* e_wca = report.find("wca", m, true);
    for (const std::string other : {"msa", "one"}) {
      const auto* e = report.find(other, m, true);
      if (e_wca->error_ambient > e->error_ambient + 1e-6) {
        report.dominance_violations.push_back(tag + ": training error of wca " + io::format_double(e_wca->error_ambient) +
                                              " exceeds " + other + " " + io::format_double(e->error_ambient));
      }
    }
  }

  stage("report", [&] { report_emit(report, out); });
  if (!report.dominance_violations.empty()) throw StageError("dominance", report.dominance_violations.front());
  return report;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

io::Table convergence_table(const std::vector<ConvergenceRecord>& log) {
  io::Table t{{"iteration", "objective", "objective_sqrt", "wall_time"}, {}};
  for (const auto& r : log) {
    t.rows.push_back({std::to_string(r.iteration), io::format_double(r.objective),
                      io::format_double(std::sqrt(std::max(0.0, r.objective))), io::format_double(r.seconds)});
  }
  return t;
}

io::Table error_table(const std::vector<MethodError>& errors, bool with_ambient) {
  io::Table t{{"method", "m", "error_V", "error_L2"}, {}};
  if (with_ambient) t.header.push_back("error_V_ambient");
  for (const auto& e : errors) {
    t.rows.push_back({e.method, std::to_string(e.m), io::format_double(e.error_v), io::format_double(e.error_l2)});
    if (with_ambient) t.rows.back().push_back(io::format_double(e.error_ambient));
  }
  return t;
}

}  // namespace

std::string summary_text(const ErrorReport& report) {
  std::set<Index> ms;
  for (const auto& e : report.test_errors) ms.insert(e.m);
  std::ostringstream out;
  out << "Worst-case reconstruction error on the test set\n";
  out << "eps_N = " << std::scientific << std::setprecision(3) << report.eps_N << "\n";
  for (const bool l2 : {false, true}) {
    out << '\n' << (l2 ? "L2 norm" : "H1_0 norm") << '\n';
    out << std::setw(6) << "m" << std::setw(12) << "mvn" << std::setw(12) << "one" << std::setw(12) << "msa"
        << std::setw(12) << "wca" << std::setw(6) << "n*" << '\n';
    for (Index m : ms) {
      out << std::setw(6) << m;
      for (const std::string method : {"mvn", "one", "msa", "wca"}) {
        const auto* e = report.find(method, m);
        if (e)
          out << std::setw(12) << (l2 ? e->error_l2 : e->error_v);
        else
          out << std::setw(12) << "-";
      }
      const auto it = report.nstar.find(m);
      out << std::setw(6) << (it == report.nstar.end() ? 0 : it->second) << '\n';
    }
  }
  if (!report.dominance_violations.empty()) {
    out << "\nTraining-set dominance violations:\n";
    for (const auto& v : report.dominance_violations) out << "  " << v << '\n';
  }
  return out.str();
}

void report_emit(const ErrorReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  io::write_table(dir / "errors.csv", error_table(report.test_errors, false));
  io::write_table(dir / "training_errors.csv", error_table(report.training_errors, true));

  io::Table one{{"m", "n", "error_V", "error_L2", "mu"}, {}};
  io::Table mu{{"m", "n", "mu"}, {}};
  for (const auto& e : report.one_space) {
    one.rows.push_back({std::to_string(e.m), std::to_string(e.n), io::format_double(e.error_v),
                        io::format_double(e.error_l2), io::format_double(e.mu)});
    mu.rows.push_back({std::to_string(e.m), std::to_string(e.n), io::format_double(e.mu)});
  }
  io::write_table(dir / "one_space.csv", one);
  io::write_table(dir / "mu.csv", mu);

  io::Table nstar{{"m", "n_star"}, {}};
  for (const auto& [m, n] : report.nstar) nstar.rows.push_back({std::to_string(m), std::to_string(n)});
  io::write_table(dir / "nstar.csv", nstar);

  io::Table greedy{{"n", "error"}, {}};
  for (std::size_t k = 0; k < report.greedy_history.size(); ++k)
    greedy.rows.push_back({std::to_string(k + 1), io::format_double(report.greedy_history[k])});
  io::write_table(dir / "greedy.csv", greedy);

  io::Table trunc{{"n", "eps"}, {}};
  for (std::size_t k = 0; k < report.truncation_history.size(); ++k)
    trunc.rows.push_back({std::to_string(k + 1), io::format_double(report.truncation_history[k])});
  io::write_table(dir / "truncation.csv", trunc);

  for (const auto& [m, log] : report.pd_logs)
    io::write_table(dir / ("convergence_pd_m" + std::to_string(m) + ".csv"), convergence_table(log));
  for (const auto& [m, log] : report.subgradient_logs)
    io::write_table(dir / ("convergence_subgrad_m" + std::to_string(m) + ".csv"), convergence_table(log));

  io::write_file(dir / "summary.txt", summary_text(report));
}

}  // namespace rmrc
