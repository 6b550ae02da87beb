#pragma once

#include <cmath>
#include <vector>

#include "bosonlab/grid.hpp"

namespace bosonlab {

// P(phi) = 1/2 dx sum |phi|^4, the on-site quartic energy.
inline double quartic_energy(const Field& phi) {
  double s = 0.0;
  for (int j = 0; j < phi.grid().m; ++j) {
    const double a = std::norm(phi[j]);
    s += a * a;
  }
  return 0.5 * phi.grid().dx() * s;
}

// h(phi) = <phi, -Delta phi> + P(phi) with the configured Laplacian.
inline double energy(LaplacianKind kind, const Field& phi) {
  const double kin = inner_product(phi, laplacian_apply(kind, phi)).real();
  return kin + quartic_energy(phi);
}

// Time-sampled solution of the discrete defocusing cubic NLS
//   i d/dt phi = -Delta phi + |phi|^2 phi
// together with mass, energy and the accumulated phase
// omega(t) = int_0^t P(phi_s) ds (trapezoid rule on the sample grid).
class NlsTrajectory {
 public:
  NlsTrajectory(Grid grid, LaplacianKind kind) : grid_(grid), kind_(kind) {}

  const Grid& grid() const { return grid_; }
  LaplacianKind laplacian_kind() const { return kind_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& masses() const { return masses_; }
  const std::vector<double>& energies() const { return energies_; }
  const std::vector<double>& omega() const { return omega_; }
  double final_time() const { return times_.back(); }
  std::size_t samples() const { return times_.size(); }
  Field field(std::size_t k) const { return Field(grid_, fields_[k]); }

  // worst ratio |phi|_inf^2 / (2 |phi| |d phi|) seen along the run
  double linf_ratio_max() const { return linf_ratio_max_; }

  // phi at an arbitrary time: exact hit where possible, otherwise cubic
  // 4-point Lagrange interpolation on the uniform sample grid.
  Field field_at(double t) const {
    const double tol = 1e-9 * std::max(1.0, final_time());
    if (t < -tol || t > final_time() + tol)
      throw range_error("NlsTrajectory: time outside the stored range");
    const double step = times_.size() > 1 ? times_[1] - times_[0] : 1.0;
    const double pos = t / step;
    const auto nearest = static_cast<std::ptrdiff_t>(std::llround(pos));
    if (nearest >= 0 && nearest < static_cast<std::ptrdiff_t>(times_.size()) &&
        std::abs(pos - nearest) < 1e-9)
      return Field(grid_, fields_[nearest]);
    std::ptrdiff_t i0 = static_cast<std::ptrdiff_t>(std::floor(pos)) - 1;
    i0 = std::max<std::ptrdiff_t>(
        0, std::min<std::ptrdiff_t>(i0, static_cast<std::ptrdiff_t>(times_.size()) - 4));
    Vector acc = Vector::Zero(grid_.m);
    for (int a = 0; a < 4; ++a) {
      double w = 1.0;
      for (int b = 0; b < 4; ++b) {
        if (a == b) continue;
        w *= (t - times_[i0 + b]) / (times_[i0 + a] - times_[i0 + b]);
      }
      acc += w * fields_[i0 + a];
    }
    return Field(grid_, std::move(acc));
  }

  double omega_at(double t) const {
    const double tol = 1e-9 * std::max(1.0, final_time());
    if (t < -tol || t > final_time() + tol)
      throw range_error("NlsTrajectory: time outside the stored range");
    if (times_.size() == 1) return 0.0;
    const double step = times_[1] - times_[0];
    const auto i = std::min<std::size_t>(
        times_.size() - 2,
        static_cast<std::size_t>(std::max(0.0, std::floor(t / step))));
    const double w = (t - times_[i]) / step;
    return (1.0 - w) * omega_[i] + w * omega_[i + 1];
  }

  void append(double t, Vector values) {
    Field f(grid_, values);
    times_.push_back(t);
    masses_.push_back(squared_norm(f));
    energies_.push_back(energy(kind_, f));
    const double p = quartic_energy(f);
    if (omega_.empty()) {
      omega_.push_back(0.0);
    } else {
      const double dt = t - times_[times_.size() - 2];
      omega_.push_back(omega_.back() + 0.5 * dt * (last_p_ + p));
    }
    last_p_ = p;
    const double dn = norm(derivative_spectral(f));
    if (dn > 1e-14) {
      const double linf2 = f.values().cwiseAbs2().maxCoeff();
      linf_ratio_max_ =
          std::max(linf_ratio_max_, linf2 / (2.0 * norm(f) * dn));
    }
    fields_.push_back(std::move(values));
  }

 private:
  Grid grid_;
  LaplacianKind kind_;
  std::vector<double> times_, masses_, energies_, omega_;
  std::vector<Vector> fields_;
  double last_p_ = 0.0;
  double linf_ratio_max_ = 0.0;
};

// Strang split-step: half nonlinear phase, exact kinetic exponential in the
// DFT basis (finite-difference kind uses its exact eigenvalues
// (2/dx)^2 sin^2(pi k/m)), half nonlinear phase. Mass is conserved to
// rounding; energy drift is O(dt^2).
inline NlsTrajectory nls_evolve(const Field& phi0, double t_final, double dt,
                                LaplacianKind kind, int sample_stride = 1) {
  if (!(dt > 0.0)) throw validation_error("nls_evolve: dt must be positive");
  if (t_final < 0.0) throw validation_error("nls_evolve: t_final must be >= 0");
  if (sample_stride < 1) throw validation_error("nls_evolve: bad sample stride");
  const Grid& g = phi0.grid();
  const int steps = static_cast<int>(std::llround(t_final / dt));
  if (std::abs(steps * dt - t_final) > 1e-9 * std::max(1.0, t_final))
    throw validation_error("nls_evolve: dt must divide t_final");

  Vector kinetic_phase(g.m);
  for (int k = 0; k < g.m; ++k)
    kinetic_phase[k] = std::polar(1.0, -dt * laplacian_eigenvalue(kind, g, k));

  NlsTrajectory traj(g, kind);
  Vector cur = phi0.values();
  traj.append(0.0, cur);
  for (int s = 1; s <= steps; ++s) {
    for (int j = 0; j < g.m; ++j)
      cur[j] *= std::polar(1.0, -0.5 * dt * std::norm(cur[j]));
    Vector f = dft(cur);
    for (int k = 0; k < g.m; ++k) f[k] *= kinetic_phase[k];
    cur = idft(f);
    for (int j = 0; j < g.m; ++j)
      cur[j] *= std::polar(1.0, -0.5 * dt * std::norm(cur[j]));
    if (s % sample_stride == 0 || s == steps) {
      if (!cur.allFinite())
        throw integration_error("nls_evolve: non-finite field at step " +
                                std::to_string(s));
      traj.append(s * dt, cur);
    }
  }
  return traj;
}

}  // namespace bosonlab
