#pragma once

#include <array>
#include <cstddef>

namespace blockprop {

/// Classical fourth-order Runge-Kutta step on a fixed-size state vector.
/// Deterministic: no adaptivity, no error control. Both the epidemic and the
/// replicator integrators go through this.
template <std::size_t N, typename Rhs>
std::array<double, N> rk4_step(const std::array<double, N>& y, double h, Rhs&& rhs) {
  std::array<double, N> k1 = rhs(y);
  std::array<double, N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  std::array<double, N> k2 = rhs(tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  std::array<double, N> k3 = rhs(tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
  std::array<double, N> k4 = rhs(tmp);
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace blockprop
