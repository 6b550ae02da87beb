#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "bosonlab/operators.hpp"

namespace bosonlab {

struct ExpmvStats {
  int substeps = 0;
  int matvecs = 0;
  double norm_defect = 0.0;  // | |out| - |in| |
};

namespace detail {

// exp(-i tau T) e1 for the real symmetric tridiagonal Lanczos matrix
inline Vector phase_exp_tridiag(const Eigen::VectorXd& alpha,
                                const Eigen::VectorXd& beta, double tau) {
  const int k = static_cast<int>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  Vector u = Vector::Zero(k);
  const Eigen::MatrixXd& q = es.eigenvectors();
  for (int i = 0; i < k; ++i) {
    const cplx phase = std::polar(1.0, -tau * es.eigenvalues()[i]);
    u += phase * q(0, i) * q.col(i).cast<cplx>();
  }
  return u;
}

}  // namespace detail

// e^{-i tau H} v for Hermitian sparse H: dense eigendecomposition for small
// problems, adaptive Lanczos otherwise. The result norm matches the input
// norm to within tol (the exact map is unitary).
inline Vector expmv(const SparseMatrixC& h, const Vector& v, double tau,
                    double tol = 1e-10, ExpmvStats* stats = nullptr,
                    int krylov_dim = 32) {
  const Eigen::Index dim = h.rows();
  ExpmvStats local;
  const double beta0 = v.norm();
  if (tau == 0.0 || beta0 == 0.0) {
    if (stats) *stats = local;
    return v;
  }

  if (dim <= 128) {
    Eigen::MatrixXcd dense(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    Vector w = es.eigenvectors().adjoint() * v;
    for (Eigen::Index i = 0; i < dim; ++i)
      w[i] *= std::polar(1.0, -tau * es.eigenvalues()[i]);
    Vector out = es.eigenvectors() * w;
    local.substeps = 1;
    local.norm_defect = std::abs(out.norm() - beta0);
    if (stats) *stats = local;
    return out;
  }

  const int kmax = std::min<Eigen::Index>(krylov_dim, dim);
  Vector cur = v;
  double remaining = tau;

  while (std::abs(remaining) > std::abs(tau) * 1e-15) {
    const double beta = cur.norm();
    if (beta == 0.0) break;

    // Lanczos with one full reorthogonalization pass per vector
    Eigen::MatrixXcd basis(dim, kmax);
    Eigen::VectorXd alpha(kmax), off(kmax);
    basis.col(0) = cur / beta;
    int k = 0;
    bool breakdown = false;
    for (; k < kmax; ++k) {
      Vector w = h * basis.col(k);
      ++local.matvecs;
      alpha[k] = w.dot(basis.col(k)).real();
      w -= alpha[k] * basis.col(k);
      if (k > 0) w -= off[k - 1] * basis.col(k - 1);
      for (int j = 0; j <= k; ++j) w -= basis.col(j).dot(w) * basis.col(j);
      off[k] = w.norm();
      if (off[k] < 1e-14 * std::max(1.0, std::abs(alpha[k]))) {
        breakdown = true;  // invariant subspace: exponential exact below
        ++k;
        break;
      }
      if (k + 1 < kmax) basis.col(k + 1) = w / off[k];
    }

    double step = remaining;
    Vector u;
    for (;;) {
      u = detail::phase_exp_tridiag(alpha.head(k), off.head(k), step);
      if (breakdown) break;
      const double err = beta * off[k - 1] * std::abs(u[k - 1]) * std::abs(step);
      if (err <= tol * std::max(beta, 1.0) * std::abs(step / tau)) break;
      step *= 0.5;
      if (std::abs(step) < std::abs(tau) * 1e-12)
        throw numerical_error(
            "expmv: Krylov iteration failed to reach the requested accuracy",
            err);
    }
    cur = beta * (basis.leftCols(k) * u);
    remaining -= step;
    ++local.substeps;
  }

  local.norm_defect = std::abs(cur.norm() - beta0);
  if (stats) *stats = local;
  return cur;
}

inline FockVector expmv(const SparseHermitianOperator& h, const FockVector& psi,
                        double tau, double tol = 1e-10,
                        ExpmvStats* stats = nullptr) {
  return FockVector(psi.basis(), expmv(h.matrix(), psi.coeffs(), tau, tol, stats));
}

// Step log for a propagator run: per-step truncation losses plus the
// unitarity defect trail. "Loss" per step is the norm actually dropped plus,
// for generators that change particle number, the mass sitting in the top
// sector (the only place cutoff error can enter). Exceeding the budget kills
// the run rather than silently passing.
struct PropagatorRun {
  double budget = std::numeric_limits<double>::infinity();
  int steps = 0;
  double cumulative_loss = 0.0;
  double max_norm_defect = 0.0;
  std::vector<double> step_losses;

  void record(double loss, double norm_defect) {
    ++steps;
    step_losses.push_back(loss);
    cumulative_loss += loss;
    max_norm_defect = std::max(max_norm_defect, norm_defect);
    if (!(cumulative_loss <= budget))
      throw truncation_error("propagator run exceeded its truncation budget",
                             cumulative_loss);
  }
};

namespace detail {

inline double step_truncation_loss(const SparseHermitianOperator& op,
                                   const FockVector& before,
                                   const FockVector& after) {
  const double in2 = before.squared_norm();
  double loss = std::max(0.0, 1.0 - after.squared_norm() / in2);
  if (op.sector_step() > 0)
    loss += after.sector_mass(after.basis()->n_max()) / in2;
  return loss;
}

}  // namespace detail

// e^{-i t/eps H} psi in physical time t; the 1/eps of the mean-field scaling
// is applied here, not by the caller.
inline FockVector evolve_autonomous(const LadderConvention& conv,
                                    const SparseHermitianOperator& h,
                                    const FockVector& psi, double t, double dt,
                                    double tol = 1e-10,
                                    PropagatorRun* run = nullptr) {
  if (!(dt > 0.0)) throw validation_error("evolve_autonomous: dt must be positive");
  if (t == 0.0) return psi;
  const int n_chunks = std::max(1, static_cast<int>(std::ceil(std::abs(t) / dt - 1e-9)));
  const double h_step = t / n_chunks;
  FockVector cur = psi;
  for (int j = 0; j < n_chunks; ++j) {
    ExpmvStats st;
    FockVector next = expmv(h, cur, h_step / conv.epsilon, tol, &st);
    if (run) run->record(detail::step_truncation_loss(h, cur, next), st.norm_defect);
    cur = std::move(next);
  }
  return cur;
}

enum class FreezeRule { left_endpoint, midpoint };

// Piecewise-frozen propagator U_n(t,s) on a uniform n-step partition of the
// interval between s and t: generators are evaluated at the left endpoint of
// each cell (the construction behind the non-autonomous existence proof) and
// exponentiated exactly. Backward evolution (t < s) composes the adjoint
// factors in reverse, so U_n(s,t) U_n(t,s) = 1 up to Krylov tolerance.
inline FockVector evolve_nonautonomous(
    const std::function<SparseHermitianOperator(double)>& generator,
    const FockVector& psi, double s, double t, int n_steps, double tol = 1e-10,
    PropagatorRun* run = nullptr,
    FreezeRule rule = FreezeRule::left_endpoint) {
  if (n_steps < 1)
    throw validation_error("evolve_nonautonomous: need n_steps >= 1");
  if (t == s) return psi;
  const double h = (t - s) / n_steps;
  FockVector cur = psi;
  for (int j = 0; j < n_steps; ++j) {
    double freeze = t > s ? s + j * h : s + (j + 1) * h;
    if (rule == FreezeRule::midpoint) freeze += (t > s ? 0.5 : -0.5) * h;
    const SparseHermitianOperator op = generator(freeze);
    ExpmvStats st;
    FockVector next = expmv(op, cur, h, tol, &st);
    if (!next.coeffs().allFinite())
      throw integration_error("evolve_nonautonomous: non-finite state at step " +
                              std::to_string(j));
    if (run) run->record(detail::step_truncation_loss(op, cur, next), st.norm_defect);
    cur = std::move(next);
  }
  return cur;
}

}  // namespace bosonlab
