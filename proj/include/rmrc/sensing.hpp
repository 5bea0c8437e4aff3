#pragma once

#include "rmrc/fem.hpp"

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace rmrc {

/// Local-average sensor with kernel centered at `center` and spread `tau`.
struct Sensor {
  Point center;
  double tau = 0.0;
};

/// Radial profile of the averaging kernel.
enum class KernelShape {
  /// exp(-|r| / (2 tau^2)), the form used by the published benchmark.
  Exponential,
  /// exp(-|r|^2 / (2 tau^2)).
  Gaussian,
};

/// Load vector of the sensor functional over interior nodes, normalized so
/// that the kernel integrates to one over the domain (boundary nodes included).
/// The kernel is evaluated with the edge-midpoint rule and cut off at 8 tau.
Vector kernel_load_vector(const FemSpace& space, const Sensor& sensor, KernelShape shape = KernelShape::Exponential);

/// omega with K omega = F, i.e. <omega, v>_V = l(v) for every discrete v.
Snapshot riesz_representer(const FemSpace& space, const Sensor& sensor, KernelShape shape = KernelShape::Exponential);

/// W = span of the representers, with a V-orthonormal basis whose leading m
/// vectors span W_m (sensor order is preserved).
class MeasurementSpace {
 public:
  MeasurementSpace(std::vector<Sensor> sensors, Matrix representers, OrthonormalBasis basis, KernelShape shape)
      : sensors_(std::move(sensors)), representers_(std::move(representers)), basis_(std::move(basis)), shape_(shape) {}

  Index dim() const { return basis_.size(); }
  const std::vector<Sensor>& sensors() const { return sensors_; }
  const Matrix& representers() const { return representers_; }
  const OrthonormalBasis& basis() const { return basis_; }
  KernelShape shape() const { return shape_; }
  /// Orthonormal basis of W_m.
  OrthonormalBasis subspace(Index m) const;

 private:
  std::vector<Sensor> sensors_;
  Matrix representers_;
  OrthonormalBasis basis_;
  KernelShape shape_;
};

/// Throws DegenerateSensor when a representer is dependent on the preceding
/// ones (residual below 1e-12 of its norm).
MeasurementSpace build_measurement_space(const FemSpace& space, std::vector<Sensor> sensors,
                                         KernelShape shape = KernelShape::Exponential);

/// Coordinates of P_{W_m} u in the orthonormal basis.
Vector measure(const MeasurementSpace& mspace, const Vector& u, Index m);

struct SensorDraw {
  std::size_t count = 50;
  double center_lo = 0.1;
  double center_hi = 0.9;
  double tau_lo = 0.05;
  double tau_hi = 0.1;
  std::uint64_t seed = 1;
  /// Sensors fixed by position (0-based) instead of drawn.
  std::vector<std::pair<std::size_t, Sensor>> pinned;
};

std::vector<Sensor> draw_sensors(const SensorDraw& draw);

/// Plain-text table: one row per sensor with center-x, center-y, tau.
void write_sensors(const std::filesystem::path& path, const std::vector<Sensor>& sensors);
std::vector<Sensor> read_sensors(const std::filesystem::path& path);

}  // namespace rmrc
