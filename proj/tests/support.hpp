#pragma once

// Test-only generators and brute-force references. Nothing here calls the
// engine's basis-change or projection code, so results can be compared
// against it.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "dfsqkd/random.hpp"
#include "dfsqkd/statevector.hpp"

namespace testsupport {

using dfsqkd::Amplitude;
using dfsqkd::Matrix2;
using dfsqkd::Rng;
using dfsqkd::StateVector;

inline double gaussian(Rng& rng) {
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline StateVector random_state(int n, Rng& rng) {
  std::vector<Amplitude> amps(std::size_t{1} << n);
  for (auto& a : amps) a = {gaussian(rng), gaussian(rng)};
  return StateVector::normalized(n, std::move(amps));
}

/// e^{ia} [[e^{ib} cos t, -e^{ic} sin t], [e^{-ic} sin t, e^{-ib} cos t]]
inline Matrix2 random_unitary(Rng& rng) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double a = two_pi * rng.uniform(), b = two_pi * rng.uniform(), c = two_pi * rng.uniform();
  const double t = two_pi * rng.uniform();
  const Amplitude g = std::polar(1.0, a);
  return {{{g * std::polar(std::cos(t), b), -g * std::polar(std::sin(t), c)},
           {g * std::polar(std::sin(t), -c), g * std::polar(std::cos(t), -b)}}};
}

/// Basis state from a literal like "0110".
inline std::size_t index_of(std::string_view bits) {
  std::size_t i = 0;
  for (char ch : bits) i = (i << 1) | static_cast<std::size_t>(ch == '1');
  return i;
}

/// |<s|psi>|^2 for a product string over {0,1,+,-}, summed directly over the
/// computational basis with <+|x> = 1/sqrt2 and <-|x> = (-1)^x / sqrt2.
inline double brute_probability(const StateVector& psi, std::string_view s) {
  const int n = psi.num_qubits();
  Amplitude acc{};
  for (std::size_t x = 0; x < psi.dim(); ++x) {
    double coeff = 1.0;
    for (int q = 0; q < n; ++q) {
      const int xb = static_cast<int>((x >> (n - 1 - q)) & 1U);
      switch (s[static_cast<std::size_t>(q)]) {
        case '0': coeff *= (xb == 0); break;
        case '1': coeff *= (xb == 1); break;
        case '+': coeff *= std::sqrt(0.5); break;
        case '-': coeff *= (xb ? -1.0 : 1.0) * std::sqrt(0.5); break;
      }
    }
    acc += coeff * psi[x];
  }
  return std::norm(acc);
}

/// All 2^n strings over the given two-letter alphabet.
inline std::vector<std::string> all_strings(int n, char zero, char one) {
  std::vector<std::string> out;
  for (std::size_t x = 0; x < (std::size_t{1} << n); ++x) {
    std::string s;
    for (int q = 0; q < n; ++q) s.push_back(((x >> (n - 1 - q)) & 1U) ? one : zero);
    out.push_back(s);
  }
  return out;
}

/// Dense 4-qubit ket from (amplitude, bitstring) terms written out by hand.
inline StateVector ket4(std::initializer_list<std::pair<double, const char*>> terms) {
  std::vector<Amplitude> amps(16);
  for (const auto& [a, bits] : terms) amps[index_of(bits)] += a;
  return StateVector::normalized(4, std::move(amps));
}

}  // namespace testsupport
