#pragma once

// Collective noise: every photon of a quartet sees the same unitary.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "dfsqkd/statevector.hpp"

namespace dfsqkd {

struct DephasingParam {
  double phi = 0.0;
};

struct RotationParam {
  double theta = 0.0;
};

/// Angle reduced into [0, 2pi) for reporting.
inline double reduce_angle(double radians) {
  double r = std::fmod(radians, 2.0 * std::numbers::pi);
  if (r < 0) r += 2.0 * std::numbers::pi;
  return r;
}

struct FixedNoise {
  double value = 0.0;
};

struct UniformNoise {
  double lo = 0.0;
  double hi = 0.0;
};

/// Noise parameter is constant within a quartet; UniformNoise redraws it for
/// every quartet.
using NoisePolicy = std::variant<FixedNoise, UniformNoise>;

inline void validate(const NoisePolicy& policy) {
  if (const auto* u = std::get_if<UniformNoise>(&policy)) {
    if (!std::isfinite(u->lo) || !std::isfinite(u->hi)) throw std::invalid_argument("noise bounds must be finite");
    if (u->lo > u->hi) throw std::invalid_argument("noise policy requires lo <= hi");
  } else if (!std::isfinite(std::get<FixedNoise>(policy).value)) {
    throw std::invalid_argument("noise value must be finite");
  }
}

template <RandomSource R>
double sample_noise(const NoisePolicy& policy, R& rand) {
  if (const auto* f = std::get_if<FixedNoise>(&policy)) return f->value;
  const auto& u = std::get<UniformNoise>(policy);
  if (u.lo == u.hi) return u.lo;
  return u.lo + (u.hi - u.lo) * rand.uniform();
}

inline Matrix2 dephasing_matrix(DephasingParam p) {
  return {{{Amplitude(1.0), Amplitude(0.0)}, {Amplitude(0.0), std::polar(1.0, p.phi)}}};
}

/// Columns are U|0> = cos|0> + sin|1> and U|1> = -sin|0> + cos|1>.
inline Matrix2 rotation_matrix(RotationParam p) {
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  return {{{Amplitude(c), Amplitude(-s)}, {Amplitude(s), Amplitude(c)}}};
}

namespace detail {

inline StateVector apply_collective(StateVector s, std::span<const int> photons, const Matrix2& u) {
  for (std::size_t i = 0; i < photons.size(); ++i)
    for (std::size_t j = i + 1; j < photons.size(); ++j)
      if (photons[i] == photons[j]) throw std::invalid_argument("collective noise: duplicate photon index");
  for (int q : photons) s = apply_single_qubit(s, q, u);
  return s;
}

}  // namespace detail

inline StateVector collective_dephasing(const StateVector& s, std::span<const int> photons, DephasingParam p) {
  return detail::apply_collective(s, photons, dephasing_matrix(p));
}

inline StateVector collective_rotation(const StateVector& s, std::span<const int> photons, RotationParam p) {
  return detail::apply_collective(s, photons, rotation_matrix(p));
}

/// All qubits of the register.
inline std::vector<int> all_photons(const StateVector& s) {
  std::vector<int> q(static_cast<std::size_t>(s.num_qubits()));
  for (int i = 0; i < s.num_qubits(); ++i) q[static_cast<std::size_t>(i)] = i;
  return q;
}

}  // namespace dfsqkd
