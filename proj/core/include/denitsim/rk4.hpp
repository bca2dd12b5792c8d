#pragma once

#include <cstddef>
#include <vector>

namespace denitsim {

/// Scratch buffers for rk4_step so repeated stepping never allocates.
struct Rk4Workspace {
  std::vector<double> k1, k2, k3, k4, tmp;
  void resize(std::size_t n) {
    k1.resize(n);
    k2.resize(n);
    k3.resize(n);
    k4.resize(n);
    tmp.resize(n);
  }
};

/// One classical fixed-step 4th-order step of y' = f(t, y), in place.
/// `rhs(t, y, dydt)` must fill dydt; y and dydt have equal size.
template <class Rhs>
void rk4_step(std::vector<double>& y, double t, double dt, Rhs&& rhs,
              Rk4Workspace& ws) {
  const std::size_t n = y.size();
  ws.resize(n);
  rhs(t, y, ws.k1);
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + 0.5 * dt * ws.k1[i];
  rhs(t + 0.5 * dt, ws.tmp, ws.k2);
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + 0.5 * dt * ws.k2[i];
  rhs(t + 0.5 * dt, ws.tmp, ws.k3);
  for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + dt * ws.k3[i];
  rhs(t + dt, ws.tmp, ws.k4);
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += w * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
  }
}

}  // namespace denitsim
