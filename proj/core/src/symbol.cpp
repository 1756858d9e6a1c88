#include "spintorus/symbol.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spintorus/errors.hpp"

namespace spintorus {

namespace {

using cd = std::complex<double>;

double difference_step(const FieldConfig& cfg, const Vec3& x) {
  static const double root = std::cbrt(std::numeric_limits<double>::epsilon());
  return root * std::max(x.norm(), 1e-3 * cfg.length_scale);
}

void check_domain(const FieldConfig& cfg, const Vec3& x) {
  if (cfg.singular_radius > 0.0 && x.norm() < cfg.singular_radius) {
    throw DomainError("potential evaluated inside singular radius");
  }
}

Vec3 difference_gradient(const std::function<double(const Vec3&)>& f, const Vec3& x, double h) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 up = x, down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

Mat3 difference_jacobian(const std::function<Vec3(const Vec3&)>& f, const Vec3& x, double h) {
  Mat3 j;
  for (int c = 0; c < 3; ++c) {
    Vec3 up = x, down = x;
    up[c] += h;
    down[c] -= h;
    j.col(c) = (f(up) - f(down)) / (2.0 * h);
  }
  return j;
}

Vec3 curl_from_jacobian(const Mat3& j) {
  return {j(2, 1) - j(1, 2), j(0, 2) - j(2, 0), j(1, 0) - j(0, 1)};
}

Vec3 grad_phi(const FieldConfig& cfg, const Vec3& x) {
  if (cfg.grad_phi) return cfg.grad_phi(x);
  return difference_gradient(cfg.phi, x, difference_step(cfg, x));
}

Mat3 jacobian_a(const FieldConfig& cfg, const Vec3& x) {
  if (!cfg.vector_potential) return Mat3::Zero();
  if (cfg.vector_potential_jacobian) return cfg.vector_potential_jacobian(x);
  return difference_jacobian(cfg.vector_potential, x, difference_step(cfg, x));
}

const std::array<Eigen::Matrix2cd, 3>& pauli() {
  static const std::array<Eigen::Matrix2cd, 3> s = [] {
    std::array<Eigen::Matrix2cd, 3> m;
    m[0] << 0, 1, 1, 0;
    m[1] << 0, cd(0, -1), cd(0, 1), 0;
    m[2] << 1, 0, 0, -1;
    return m;
  }();
  return s;
}

/// Greedy Gram-Schmidt on projected standard basis vectors.
EigenBasis orthonormal_range(const DiracMatrix& projector) {
  EigenBasis out = EigenBasis::Zero();
  std::array<bool, 4> used{};
  for (int col = 0; col < 2; ++col) {
    int best = -1;
    double best_norm = -1.0;
    Eigen::Vector4cd best_vec;
    for (int i = 0; i < 4; ++i) {
      if (used[i]) continue;
      Eigen::Vector4cd v = projector.col(i);
      for (int k = 0; k < col; ++k) v -= out.col(k) * (out.col(k).adjoint() * v)(0);
      const double n = v.norm();
      if (n > best_norm + 1e-14) {
        best = i;
        best_norm = n;
        best_vec = v;
      }
    }
    used[best] = true;
    out.col(col) = best_vec / best_norm;
  }
  return out;
}

}  // namespace

Units natural_units(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("coupling must be positive");
  return Units{1.0, 1.0, 1.0, std::sqrt(alpha)};
}

void FieldConfig::validate() const {
  if (!(units.mass > 0.0 && units.light_speed > 0.0 && units.hbar > 0.0 && units.charge > 0.0)) {
    throw std::invalid_argument("mass, light speed, hbar and charge must be positive");
  }
  if (!phi) throw std::invalid_argument("scalar potential is not set");
  if (!(length_scale > 0.0)) throw std::invalid_argument("length scale must be positive");
}

FieldConfig coulomb_field(const Units& units) {
  FieldConfig cfg;
  cfg.units = units;
  const double e = units.charge;
  const double e2 = e * e;
  cfg.phi = [e](const Vec3& x) { return -e / x.norm(); };
  cfg.grad_phi = [e](const Vec3& x) {
    const double r = x.norm();
    return Vec3(e * x / (r * r * r));
  };
  cfg.central = RadialProfile{
      "coulomb", [e2](double r) { return -e2 / r; }, [e2](double r) { return e2 / (r * r); }, e2};
  cfg.length_scale = units.hbar * units.hbar / (units.mass * e2);
  cfg.singular_radius = 1e-8 * units.hbar / (units.mass * units.light_speed);
  cfg.validate();
  return cfg;
}

FieldConfig harmonic_field(double stiffness, const Units& units) {
  if (!(stiffness > 0.0)) throw std::invalid_argument("harmonic stiffness must be positive");
  FieldConfig cfg;
  cfg.units = units;
  const double e = units.charge;
  cfg.phi = [=](const Vec3& x) { return 0.5 * stiffness * x.squaredNorm() / e; };
  cfg.grad_phi = [=](const Vec3& x) { return Vec3(stiffness * x / e); };
  cfg.central = RadialProfile{"harmonic", [=](double r) { return 0.5 * stiffness * r * r; },
                              [=](double r) { return stiffness * r; }, 0.0};
  cfg.length_scale = std::pow(units.hbar * units.hbar / (units.mass * stiffness), 0.25);
  cfg.validate();
  return cfg;
}

FieldConfig polynomial_field(const std::map<int, double>& coefficients, const Units& units) {
  FieldConfig cfg;
  cfg.units = units;
  const double e = units.charge;
  auto value = [coefficients](double r) {
    double v = 0.0;
    for (const auto& [k, c] : coefficients) v += (k == 0) ? c : c * std::pow(r, k);
    return v;
  };
  auto derivative = [coefficients](double r) {
    double d = 0.0;
    for (const auto& [k, c] : coefficients) {
      if (k != 0) d += k * c * std::pow(r, k - 1);
    }
    return d;
  };
  bool singular = false;
  int lowest = 0;
  for (const auto& [k, c] : coefficients) {
    if (c != 0.0 && k < 0) {
      singular = true;
      lowest = std::min(lowest, k);
    }
  }
  cfg.phi = [value, e](const Vec3& x) { return value(x.norm()) / e; };
  cfg.grad_phi = [derivative, e](const Vec3& x) {
    const double r = x.norm();
    if (r == 0.0) return Vec3(Vec3::Zero());
    return Vec3(derivative(r) * x / (r * e));
  };
  double strength = 0.0;
  if (lowest == -1) {
    const double c = coefficients.at(-1);
    if (c < 0.0) strength = -c;
  }
  cfg.central = RadialProfile{"custom-polynomial", value, derivative, strength};
  if (singular) cfg.singular_radius = 1e-8 * units.hbar / (units.mass * units.light_speed);
  cfg.validate();
  return cfg;
}

FieldConfig with_uniform_magnetic_field(FieldConfig cfg, const Vec3& b_field) {
  Mat3 cross;
  cross << 0, -b_field.z(), b_field.y(), b_field.z(), 0, -b_field.x(), -b_field.y(), b_field.x(), 0;
  auto previous = cfg.vector_potential;
  auto previous_jacobian = cfg.vector_potential_jacobian;
  if (previous && !previous_jacobian) {
    // keep the combined jacobian analytic only if both parts are
    cfg.vector_potential = [previous, b_field](const Vec3& x) {
      return Vec3(previous(x) + 0.5 * b_field.cross(x));
    };
  } else {
    cfg.vector_potential = [previous, b_field](const Vec3& x) {
      Vec3 a = 0.5 * b_field.cross(x);
      if (previous) a += previous(x);
      return a;
    };
    cfg.vector_potential_jacobian = [previous_jacobian, cross](const Vec3& x) {
      Mat3 j = 0.5 * cross;
      if (previous_jacobian) j += previous_jacobian(x);
      return j;
    };
  }
  cfg.central.reset();
  return cfg;
}

Vec3 electric_field(const FieldConfig& cfg, const Vec3& x) {
  check_domain(cfg, x);
  return -grad_phi(cfg, x);
}

Vec3 magnetic_field(const FieldConfig& cfg, const Vec3& x) {
  check_domain(cfg, x);
  return curl_from_jacobian(jacobian_a(cfg, x));
}

Vec3 vector_potential(const FieldConfig& cfg, const Vec3& x) {
  return cfg.vector_potential ? cfg.vector_potential(x) : Vec3(Vec3::Zero());
}

FieldConsistency check_field_consistency(const FieldConfig& cfg, const Vec3& x) {
  check_domain(cfg, x);
  FieldConsistency out;
  const double h = difference_step(cfg, x);
  if (cfg.grad_phi) {
    out.gradient_mismatch = (cfg.grad_phi(x) - difference_gradient(cfg.phi, x, h)).norm();
  }
  if (cfg.vector_potential && cfg.vector_potential_jacobian) {
    const Vec3 analytic = curl_from_jacobian(cfg.vector_potential_jacobian(x));
    const Vec3 numeric = curl_from_jacobian(difference_jacobian(cfg.vector_potential, x, h));
    out.curl_mismatch = (analytic - numeric).norm();
  }
  return out;
}

Vec3 kinetic_momentum(const PhasePoint& pt, const FieldConfig& cfg) {
  const Units& u = cfg.units;
  return pt.p - (u.charge / u.light_speed) * vector_potential(cfg, pt.x);
}

double kinetic_energy(const PhasePoint& pt, const FieldConfig& cfg) {
  const Units& u = cfg.units;
  const double mc2 = u.rest_energy();
  return std::sqrt(u.light_speed * u.light_speed * kinetic_momentum(pt, cfg).squaredNorm() +
                   mc2 * mc2);
}

DiracMatrix dirac_symbol(const PhasePoint& pt, const FieldConfig& cfg) {
  check_domain(cfg, pt.x);
  const Units& u = cfg.units;
  const Vec3 pi = kinetic_momentum(pt, cfg);
  const double mc2 = u.rest_energy();
  const double potential = u.charge * cfg.phi(pt.x);

  Eigen::Matrix2cd off = Eigen::Matrix2cd::Zero();
  for (int i = 0; i < 3; ++i) off += u.light_speed * pi[i] * pauli()[i];

  DiracMatrix h = DiracMatrix::Zero();
  h.block<2, 2>(0, 2) = off;
  h.block<2, 2>(2, 0) = off;
  h.block<2, 2>(0, 0) = Eigen::Matrix2cd::Identity() * (mc2 + potential);
  h.block<2, 2>(2, 2) = Eigen::Matrix2cd::Identity() * (-mc2 + potential);
  return h;
}

HamiltonianPair classical_hamiltonians(const PhasePoint& pt, const FieldConfig& cfg) {
  check_domain(cfg, pt.x);
  const double potential = cfg.units.charge * cfg.phi(pt.x);
  const double eps = kinetic_energy(pt, cfg);
  return {potential + eps, potential - eps};
}

double classical_hamiltonian(const PhasePoint& pt, const FieldConfig& cfg, Branch branch) {
  const auto h = classical_hamiltonians(pt, cfg);
  return branch == Branch::positive ? h.h_plus : h.h_minus;
}

PhaseGradient hamiltonian_gradient(const PhasePoint& pt, const FieldConfig& cfg, Branch branch) {
  check_domain(cfg, pt.x);
  const Units& u = cfg.units;
  const double sign = branch_sign(branch);
  const double c = u.light_speed;
  const Vec3 pi = kinetic_momentum(pt, cfg);
  const double eps = kinetic_energy(pt, cfg);
  PhaseGradient g;
  g.d_p = sign * c * c * pi / eps;
  g.d_x = u.charge * grad_phi(cfg, pt.x);
  if (cfg.vector_potential) {
    g.d_x -= sign * (u.charge * c / eps) * jacobian_a(cfg, pt.x).transpose() * pi;
  }
  return g;
}

EigenFrame eigen_split(const PhasePoint& pt, const FieldConfig& cfg) {
  const DiracMatrix h = dirac_symbol(pt, cfg);
  const auto [hp, hm] = classical_hamiltonians(pt, cfg);
  const DiracMatrix id = DiracMatrix::Identity();
  const DiracMatrix p_plus = (h - hm * id) / (hp - hm);
  const DiracMatrix p_minus = (hp * id - h) / (hp - hm);
  return {hp, hm, orthonormal_range(p_plus), orthonormal_range(p_minus)};
}

Vec3 precession_field(const PhasePoint& pt, const FieldConfig& cfg) {
  check_domain(cfg, pt.x);
  const Units& u = cfg.units;
  const double c = u.light_speed;
  const double mc2 = u.rest_energy();
  const Vec3 pi = kinetic_momentum(pt, cfg);
  const double eps = kinetic_energy(pt, cfg);
  Vec3 field = (u.charge * c * c / (eps * (eps + mc2))) * pi.cross(electric_field(cfg, pt.x));
  if (cfg.vector_potential) field -= (u.charge * c / eps) * magnetic_field(cfg, pt.x);
  return field;
}

}  // namespace spintorus
