#pragma once

#include "rmrc/fem.hpp"
#include "rmrc/optim.hpp"
#include "rmrc/recovery.hpp"
#include "rmrc/reduced.hpp"
#include "rmrc/sensing.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rmrc {

enum class SnapshotSet { Greedy, Training, Test };
std::string set_name(SnapshotSet which);
SnapshotSet parse_set_name(const std::string& name);

struct ExperimentConfig {
  int level = 5;
  int p = 4;
  double source = 1.0;
  KernelShape kernel = KernelShape::Exponential;
  SensorDraw sensors{20, 0.1, 0.9, 0.05, 0.1, 101, {}};
  /// Pin sensor #10 to the center and spread reported for the published network.
  bool pin_reported_sensor = true;
  Index n_reduced = 40;
  std::size_t set_size = 200;
  std::uint64_t seed_greedy = 202;
  std::uint64_t seed_training = 303;
  std::uint64_t seed_test = 404;
  std::vector<Index> m_grid{10, 20};
  long pd_iterations = 50000;
  long pd_log_stride = 1000;
  double pd_theta = 1.0;
  /// "zero" (minimal-norm map) or "one" (best one-space map).
  std::string pd_init = "zero";
  /// Subgradient baseline budget per m; 0 disables it.
  long subgradient_iterations = 0;
  std::filesystem::path output_dir = "rmrc-out";
  bool persist_sets = true;

  static ExperimentConfig desk();
  static ExperimentConfig paper();
  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
  std::uint64_t seed_for(SnapshotSet which) const;
  /// Sensor draw with the pinned entries applied.
  SensorDraw sensor_draw() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);
std::string config_json(const ExperimentConfig& config);
/// Applies RMRC_OUTPUT_ROOT to a relative output directory.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

/// J i.i.d. uniform parameter draws on [-1,1]^{p x p}.
std::vector<ParameterVector> draw_parameters(int p, std::size_t count, std::uint64_t seed);

/// Draws and solves one snapshot set; persists it under `dir` when given.
std::vector<Snapshot> generate_set(const ExperimentConfig& config, SnapshotSet which, const FemSpace& space,
                                   const std::optional<std::filesystem::path>& dir = std::nullopt);
void persist_set(const std::filesystem::path& dir, const std::vector<Snapshot>& snapshots, int level);
std::vector<Snapshot> load_set(const std::filesystem::path& dir);
/// Throws when two sets share a parameter vector.
void check_disjoint(const std::vector<const std::vector<Snapshot>*>& sets);

void write_reduced_basis(const std::filesystem::path& dir, const ReducedBasis& rb, int level);
ReducedBasis read_reduced_basis(const std::filesystem::path& dir, const Metric& metric);

/// Worst-case errors ||u - A(P_W u)|| of affine maps over one snapshot set,
/// evaluated through ambient coordinates.
class SetEvaluator {
 public:
  SetEvaluator(const FemSpace& space, const AmbientBasis& ambient, const Matrix& snapshots);

  const Matrix& coordinates() const { return coords_; }
  Matrix measurements() const { return coords_.topRows(m_); }
  Matrix complements() const { return coords_.bottomRows(n_); }
  /// Per-snapshot (V, L2) errors.
  Matrix errors(const AffineRecoveryMap& map) const;
  /// Maximum over the set, V norm then L2 norm.
  std::pair<double, double> worst(const AffineRecoveryMap& map) const;
  /// max_j ||P u^j - A(P_W u^j)||_V with P the projection onto W + V_N.
  double worst_ambient(const AffineRecoveryMap& map) const;

 private:
  Index m_, n_;
  Matrix coords_;
  Vector out_v2_;   // ||u - P u||_V^2
  Vector out_l2_;   // ||u - P u||_L2^2
  Matrix cross_l2_; // Psi^T M (u - P u)
  Matrix gram_l2_;  // Psi^T M Psi
};

struct MethodError {
  std::string method;
  Index m = 0;
  double error_v = 0.0;
  double error_l2 = 0.0;
  /// V error restricted to W + V_N, the quantity every fit optimizes.
  double error_ambient = 0.0;
};

struct OneSpaceEntry {
  Index m = 0;
  Index n = 0;
  double error_v = 0.0;
  double error_l2 = 0.0;
  double mu = 0.0;
};

struct ErrorReport {
  std::vector<MethodError> test_errors;
  std::vector<MethodError> training_errors;
  std::vector<OneSpaceEntry> one_space;
  std::map<Index, Index> nstar;
  std::vector<double> greedy_history;
  std::vector<double> truncation_history;  // eps_n over greedy and test sets
  double eps_N = 0.0;
  std::map<Index, std::vector<ConvergenceRecord>> pd_logs;
  std::map<Index, std::vector<ConvergenceRecord>> subgradient_logs;
  std::vector<std::string> dominance_violations;

  const MethodError* find(const std::string& method, Index m, bool training = false) const;
};

/// Runs the full benchmark. Outputs are written before the training-set
/// dominance check (on errors within W + V_N), which throws
/// StageError("dominance") on violation.
ErrorReport run_pipeline(const ExperimentConfig& config);

/// Writes errors.csv, training_errors.csv, one_space.csv, mu.csv, nstar.csv,
/// greedy.csv, truncation.csv, convergence logs and summary.txt into `dir`.
void report_emit(const ErrorReport& report, const std::filesystem::path& dir);
std::string summary_text(const ErrorReport& report);

}  // namespace rmrc
