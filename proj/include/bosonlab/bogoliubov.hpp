#pragma once

#include "bosonlab/nls.hpp"

namespace bosonlab {

// Fluctuation field around the mean-field solution. The flow is R-linear but
// not C-linear (the pairing term conjugates xi), so xi is kept as a single
// complex array and conjugated in place.
using SymplecticState = Field;

// d/dt xi = -i [ (-Delta) xi + 2|phi|^2 xi + phi^2 conj(xi) ]
inline SymplecticState bogoliubov_rhs(LaplacianKind kind,
                                      const SymplecticState& xi,
                                      const Field& phi) {
  xi.require_same_grid(phi);
  Field out = laplacian_apply(kind, xi);
  for (int j = 0; j < xi.grid().m; ++j) {
    out[j] += 2.0 * std::norm(phi[j]) * xi[j] + phi[j] * phi[j] * std::conj(xi[j]);
    out[j] *= cplx(0.0, -1.0);
  }
  return out;
}

// beta(t,s) xi_s: classical RK4 along the stored NLS trajectory, phi
// interpolated in time; t < s integrates backward. The flow preserves
// Im<.,.> (symplectic form) up to integrator error.
inline SymplecticState beta_apply(const NlsTrajectory& traj,
                                  const SymplecticState& xi_s, double s,
                                  double t, double dt) {
  if (!(dt > 0.0)) throw validation_error("beta_apply: dt must be positive");
  const double tol = 1e-9 * std::max(1.0, traj.final_time());
  if (s < -tol || s > traj.final_time() + tol || t < -tol ||
      t > traj.final_time() + tol)
    throw range_error("beta_apply: times outside the trajectory range");
  if (t == s) return xi_s;
  const LaplacianKind kind = traj.laplacian_kind();
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t - s) / dt - 1e-9)));
  const double h = (t - s) / n;
  SymplecticState xi = xi_s;
  for (int j = 0; j < n; ++j) {
    const double tj = s + j * h;
    const Field phi1 = traj.field_at(tj);
    const Field phi2 = traj.field_at(tj + 0.5 * h);
    const Field phi3 = traj.field_at(tj + h);
    const SymplecticState k1 = bogoliubov_rhs(kind, xi, phi1);
    SymplecticState y = xi;
    y.values() += 0.5 * h * k1.values();
    const SymplecticState k2 = bogoliubov_rhs(kind, y, phi2);
    y = xi;
    y.values() += 0.5 * h * k2.values();
    const SymplecticState k3 = bogoliubov_rhs(kind, y, phi2);
    y = xi;
    y.values() += h * k3.values();
    const SymplecticState k4 = bogoliubov_rhs(kind, y, phi3);
    xi.values() += (h / 6.0) * (k1.values() + 2.0 * k2.values() +
                                2.0 * k3.values() + k4.values());
    if (!xi.values().allFinite())
      throw integration_error("beta_apply: non-finite state at step " +
                              std::to_string(j));
  }
  return xi;
}

}  // namespace bosonlab
