#include "rmrc/sensing.hpp"

#include "rmrc/errors.hpp"
#include "rmrc/io.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace rmrc {

namespace {

void validate(const Sensor& s) {
  if (!(s.center.x > 0.0 && s.center.x < 1.0 && s.center.y > 0.0 && s.center.y < 1.0))
    throw InvalidArgument("sensor center must lie strictly inside the unit square");
  if (!(s.tau > 0.0)) throw InvalidArgument("sensor spread must be positive");
}

double kernel(double r, double tau, KernelShape shape) {
  const double d = 2.0 * tau * tau;
  return shape == KernelShape::Exponential ? std::exp(-r / d) : std::exp(-r * r / d);
}

void factor(Eigen::SimplicialLLT<SparseMatrix>& llt, const FemSpace& space) {
  llt.compute(space.stiffness());
  if (llt.info() != Eigen::Success) throw NumericFailure("riesz_representer: stiffness factorization failed", -1.0);
}

Vector solve_checked(const Eigen::SimplicialLLT<SparseMatrix>& llt, const FemSpace& space, const Vector& f) {
  Vector omega = llt.solve(f);
  const double r = (space.stiffness() * omega - f).norm() / std::max(f.norm(), 1e-300);
  if (!std::isfinite(r) || r > 1e-9) throw NumericFailure("riesz_representer: residual " + std::to_string(r), r);
  return omega;
}

}  // namespace

Vector kernel_load_vector(const FemSpace& space, const Sensor& sensor, KernelShape shape) {
  validate(sensor);
  const double cutoff = 8.0 * sensor.tau;
  const double reach = cutoff + space.h();
  const double weight = space.element_area() / 3.0;
  Vector all = Vector::Zero(space.num_nodes());
  double total = 0.0;
  const auto& nodes = space.nodes();
  for (Index e = 0; e < space.num_elements(); ++e) {
    const Point c = space.centroid(e);
    if (std::hypot(c.x - sensor.center.x, c.y - sensor.center.y) > reach) continue;
    const auto& t = space.triangles()[static_cast<std::size_t>(e)];
    for (int a = 0; a < 3; ++a) {
      const Index na = t[a], nb = t[(a + 1) % 3];
      const Point& pa = nodes[static_cast<std::size_t>(na)];
      const Point& pb = nodes[static_cast<std::size_t>(nb)];
      const double r = std::hypot(0.5 * (pa.x + pb.x) - sensor.center.x, 0.5 * (pa.y + pb.y) - sensor.center.y);
      if (r > cutoff) continue;
      const double q = weight * kernel(r, sensor.tau, shape);
      total += q;
      all(na) += 0.5 * q;
      all(nb) += 0.5 * q;
    }
  }
  if (!(total > 0.0)) throw NumericFailure("kernel_load_vector: kernel mass vanished on the mesh", total);
  Vector f(space.num_interior());
  for (Index k = 0; k < space.num_interior(); ++k) f(k) = all(space.node_of_interior(k)) / total;
  return f;
}

Snapshot riesz_representer(const FemSpace& space, const Sensor& sensor, KernelShape shape) {
  Eigen::SimplicialLLT<SparseMatrix> llt;
  factor(llt, space);
  Snapshot s;
  s.coefficients = solve_checked(llt, space, kernel_load_vector(space, sensor, shape));
  return s;
}

OrthonormalBasis MeasurementSpace::subspace(Index m) const {
  if (m < 1 || m > dim()) throw InvalidArgument("MeasurementSpace::subspace: m out of range");
  return basis_.leading(m);
}

MeasurementSpace build_measurement_space(const FemSpace& space, std::vector<Sensor> sensors, KernelShape shape) {
  if (sensors.empty()) throw InvalidArgument("build_measurement_space: no sensors");
  Eigen::SimplicialLLT<SparseMatrix> llt;
  factor(llt, space);
  Matrix representers(space.num_interior(), static_cast<Index>(sensors.size()));
  OrthonormalBuilder builder(space.v_metric(), space.num_interior());
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const Vector omega = solve_checked(llt, space, kernel_load_vector(space, sensors[i], shape));
    representers.col(static_cast<Index>(i)) = omega;
    if (!builder.append(omega, 1e-12)) {
      throw DegenerateSensor("build_measurement_space: representer of sensor index " + std::to_string(i) +
                                 " is linearly dependent on the preceding sensors",
                             i);
    }
  }
  return MeasurementSpace(std::move(sensors), std::move(representers), builder.basis(), shape);
}

Vector measure(const MeasurementSpace& mspace, const Vector& u, Index m) {
  return mspace.subspace(m).coordinates(u);
}

std::vector<Sensor> draw_sensors(const SensorDraw& draw) {
  if (!(draw.center_lo > 0.0 && draw.center_hi < 1.0 && draw.center_lo <= draw.center_hi))
    throw InvalidArgument("draw_sensors: center box must lie inside the unit square");
  if (!(draw.tau_lo > 0.0 && draw.tau_lo <= draw.tau_hi)) throw InvalidArgument("draw_sensors: invalid spread range");
  std::mt19937_64 rng(draw.seed);
  // 53-bit uniform on [0,1); identical on every platform, unlike std distributions.
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  std::vector<Sensor> out(draw.count);
  for (auto& s : out) {
    s.center.x = uniform(draw.center_lo, draw.center_hi);
    s.center.y = uniform(draw.center_lo, draw.center_hi);
    s.tau = uniform(draw.tau_lo, draw.tau_hi);
  }
  for (const auto& [pos, sensor] : draw.pinned) {
    if (pos < out.size()) {
      validate(sensor);
      out[pos] = sensor;
    }
  }
  return out;
}

void write_sensors(const std::filesystem::path& path, const std::vector<Sensor>& sensors) {
  std::ostringstream out;
  out << "# center_x center_y tau\n";
  for (const auto& s : sensors) {
    out << io::format_double(s.center.x) << ' ' << io::format_double(s.center.y) << ' '
        << io::format_double(s.tau) << '\n';
  }
  io::write_file(path, out.str());
}

std::vector<Sensor> read_sensors(const std::filesystem::path& path) {
  std::istringstream in(io::read_file(path));
  std::vector<Sensor> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string x, y, tau;
    if (!(row >> x >> y >> tau)) throw std::runtime_error("read_sensors: malformed row '" + line + "'");
    Sensor s{{io::parse_double(x), io::parse_double(y)}, io::parse_double(tau)};
    validate(s);
    out.push_back(s);
  }
  return out;
}

}  // namespace rmrc
