#pragma once

#include <Eigen/Sparse>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "bosonlab/fock.hpp"

namespace bosonlab {

using SparseMatrixC = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;

// Assembled Fock-space operator. Hermiticity is checked at assembly time and
// the defect recorded; sector_step is the largest |delta n| the operator
// couples (0: number conserving, 1: displacement, 2: pairing).
class SparseHermitianOperator {
 public:
  SparseHermitianOperator(BasisPtr basis, const std::vector<Triplet>& triplets,
                          int sector_step, std::string label)
      : basis_(std::move(basis)),
        sector_step_(sector_step),
        label_(std::move(label)) {
    const auto dim = static_cast<Eigen::Index>(basis_->size());
    mat_.resize(dim, dim);
    mat_.setFromTriplets(triplets.begin(), triplets.end());
    mat_.makeCompressed();
    max_abs_ = 0.0;
    for (Eigen::Index k = 0; k < mat_.nonZeros(); ++k)
      max_abs_ = std::max(max_abs_, std::abs(mat_.valuePtr()[k]));
    SparseMatrixC diff = SparseMatrixC(mat_.adjoint()) - mat_;
    hermiticity_defect_ = 0.0;
    for (Eigen::Index k = 0; k < diff.nonZeros(); ++k)
      hermiticity_defect_ =
          std::max(hermiticity_defect_, std::abs(diff.valuePtr()[k]));
    if (hermiticity_defect_ > 1e-12 * std::max(max_abs_, 1.0))
      throw validation_error(label_ + ": assembled matrix is not Hermitian");
  }

  const BasisPtr& basis() const { return basis_; }
  const SparseMatrixC& matrix() const { return mat_; }
  std::size_t dim() const { return basis_->size(); }
  int sector_step() const { return sector_step_; }
  const std::string& label() const { return label_; }
  double hermiticity_defect() const { return hermiticity_defect_; }
  double max_abs() const { return max_abs_; }

  // crude operator-norm bound used to size Krylov substeps
  double inf_norm() const {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(mat_.rows());
    for (int k = 0; k < mat_.outerSize(); ++k)
      for (SparseMatrixC::InnerIterator it(mat_, k); it; ++it)
        row[it.row()] += std::abs(it.value());
    return row.size() ? row.maxCoeff() : 0.0;
  }

  Vector apply(const Vector& v) const { return mat_ * v; }

  FockVector apply(const FockVector& psi) const {
    return FockVector(psi.basis(), mat_ * psi.coeffs());
  }

  void write_matrix_market(std::ostream& os) const {
    os << "%%MatrixMarket matrix coordinate complex general\n";
    os << "% " << label_ << "\n";
    os << mat_.rows() << " " << mat_.cols() << " " << mat_.nonZeros() << "\n";
    char buf[96];
    for (int k = 0; k < mat_.outerSize(); ++k)
      for (SparseMatrixC::InnerIterator it(mat_, k); it; ++it) {
        std::snprintf(buf, sizeof(buf), "%ld %ld %.16e %.16e\n",
                      static_cast<long>(it.row() + 1),
                      static_cast<long>(it.col() + 1), it.value().real(),
                      it.value().imag());
        os << buf;
      }
  }

 private:
  BasisPtr basis_;
  SparseMatrixC mat_;
  int sector_step_;
  std::string label_;
  double hermiticity_defect_ = 0.0;
  double max_abs_ = 0.0;
};

namespace detail {

// shared loop: column-wise matrix elements of eps_scale * sum A_xy c_x^dag c_y
inline void append_one_body(std::vector<Triplet>& trips,
                            const OccupationBasis& b,
                            const Eigen::MatrixXcd& a, double scale) {
  std::vector<occ_t> tmp(b.modes());
  for (std::size_t r = 0; r < b.size(); ++r) {
    auto occ = b.occupation(r);
    cplx diag = 0.0;
    for (int x = 0; x < b.modes(); ++x)
      if (occ[x]) diag += a(x, x) * double(occ[x]);
    if (diag != cplx(0.0))
      trips.emplace_back(r, r, scale * diag);
    std::copy(occ.begin(), occ.end(), tmp.begin());
    for (int y = 0; y < b.modes(); ++y) {
      if (occ[y] == 0) continue;
      for (int x = 0; x < b.modes(); ++x) {
        if (x == y || a(x, y) == cplx(0.0)) continue;
        tmp[y] = static_cast<occ_t>(occ[y] - 1);
        tmp[x] = static_cast<occ_t>(occ[x] + 1);
        const double amp = std::sqrt(double(occ[y]) * (occ[x] + 1.0));
        trips.emplace_back(b.index(tmp), r, scale * a(x, y) * amp);
        tmp[y] = occ[y];
        tmp[x] = occ[x];
      }
    }
  }
}

}  // namespace detail

// dGamma(A) as a sparse matrix (eps-scaled, sector preserving).
inline SparseHermitianOperator assemble_dgamma(const LadderConvention& conv,
                                               BasisPtr basis,
                                               const Eigen::MatrixXcd& a,
                                               const std::string& label = "dGamma") {
  const OccupationBasis& b = *basis;
  if (a.rows() != b.modes() || a.cols() != b.modes())
    throw structural_error("assemble_dgamma: matrix size does not match modes");
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(a.cwiseAbs().maxCoeff(), 1.0))
    throw validation_error("assemble_dgamma: matrix is not Hermitian");
  std::vector<Triplet> trips;
  detail::append_one_body(trips, b, a, conv.epsilon);
  return SparseHermitianOperator(std::move(basis), trips, 0, label);
}

inline SparseHermitianOperator assemble_number(const LadderConvention& conv,
                                               BasisPtr basis) {
  const OccupationBasis& b = *basis;
  std::vector<Triplet> trips;
  for (std::size_t r = 0; r < b.size(); ++r)
    trips.emplace_back(r, r, conv.epsilon * b.sector_of(r));
  return SparseHermitianOperator(std::move(basis), trips, 0, "N");
}

// H_eps = dGamma(-Delta) + P^Wick, number conserving; the quartic part is
// diagonal in the site occupation basis.
inline SparseHermitianOperator assemble_h_epsilon(const LadderConvention& conv,
                                                  BasisPtr basis,
                                                  LaplacianKind kind) {
  const OccupationBasis& b = *basis;
  if (b.modes() != conv.grid.m)
    throw structural_error("assemble_h_epsilon: basis does not match grid");
  std::vector<Triplet> trips;
  detail::append_one_body(trips, b, one_body_laplacian_matrix(kind, conv.grid),
                          conv.epsilon);
  const double q = conv.epsilon * conv.epsilon / (2.0 * conv.grid.dx());
  for (std::size_t r = 0; r < b.size(); ++r) {
    auto occ = b.occupation(r);
    double w = 0.0;
    for (occ_t v : occ) w += double(v) * (v - 1.0);
    if (w != 0.0) trips.emplace_back(r, r, q * w);
  }
  return SparseHermitianOperator(std::move(basis), trips, 0, "H_eps");
}

// Quadratic generator of the fluctuation dynamics around phi:
//   A2 = dGamma_1(-Delta) + sum_x [ 2|phi_x|^2 c_x^dag c_x
//        + 1/2 (phi_x^2 c_x^dag c_x^dag + conj phi_x^2 c_x c_x) ].
// Built with unscaled ladders, so the matrix is independent of eps; the
// pairing coefficient is pinned by the coherent-symbol calibration
// <E(z), eps A2 E(z)> = <z,-Delta z> + P2[z]. Pairing amplitudes that would
// cross the cutoff are dropped (the projected matrix stays Hermitian).
inline SparseHermitianOperator assemble_a2(const LadderConvention& conv,
                                           BasisPtr basis, const Field& phi,
                                           LaplacianKind kind) {
  (void)conv;  // eps-independent by construction
  const OccupationBasis& b = *basis;
  if (phi.grid().m != b.modes())
    throw structural_error("assemble_a2: field grid does not match basis");
  std::vector<Triplet> trips;
  detail::append_one_body(trips, b,
                          one_body_laplacian_matrix(kind, phi.grid()), 1.0);
  std::vector<occ_t> tmp(b.modes());
  for (std::size_t r = 0; r < b.size(); ++r) {
    auto occ = b.occupation(r);
    const int n = b.sector_of(r);
    cplx diag = 0.0;
    for (int x = 0; x < b.modes(); ++x)
      if (occ[x]) diag += 2.0 * std::norm(phi[x]) * double(occ[x]);
    if (diag != cplx(0.0)) trips.emplace_back(r, r, diag);
    std::copy(occ.begin(), occ.end(), tmp.begin());
    for (int x = 0; x < b.modes(); ++x) {
      // pair creation on site x (and its adjoint, generated explicitly so
      // the triplet list is symmetric under conjugation)
      if (n + 2 <= b.n_max() && phi[x] != cplx(0.0)) {
        tmp[x] = static_cast<occ_t>(occ[x] + 2);
        const double amp = std::sqrt((occ[x] + 1.0) * (occ[x] + 2.0));
        const cplx val = 0.5 * phi[x] * phi[x] * amp;
        trips.emplace_back(b.index(tmp), r, val);
        tmp[x] = occ[x];
      }
      if (occ[x] >= 2 && phi[x] != cplx(0.0)) {
        tmp[x] = static_cast<occ_t>(occ[x] - 2);
        const double amp = std::sqrt(double(occ[x]) * (occ[x] - 1.0));
        const cplx val = 0.5 * std::conj(phi[x] * phi[x]) * amp;
        trips.emplace_back(b.index(tmp), r, val);
        tmp[x] = occ[x];
      }
    }
  }
  return SparseHermitianOperator(std::move(basis), trips, 2, "A2");
}

// R = (a*(f) + a(f)) / sqrt(2), the Hermitian generator with W(f) = e^{iR}.
inline SparseHermitianOperator assemble_displacement_generator(
    const LadderConvention& conv, BasisPtr basis, const Field& f) {
  const OccupationBasis& b = *basis;
  if (f.grid() != conv.grid || b.modes() != conv.grid.m)
    throw structural_error("assemble_displacement_generator: grid mismatch");
  const double s = conv.epsilon * conv.grid.dx();
  std::vector<Triplet> trips;
  std::vector<occ_t> tmp(b.modes());
  for (std::size_t r = 0; r < b.size(); ++r) {
    auto occ = b.occupation(r);
    const int n = b.sector_of(r);
    std::copy(occ.begin(), occ.end(), tmp.begin());
    for (int x = 0; x < b.modes(); ++x) {
      if (f[x] == cplx(0.0)) continue;
      if (n < b.n_max()) {
        tmp[x] = static_cast<occ_t>(occ[x] + 1);
        trips.emplace_back(b.index(tmp), r,
                           std::sqrt(0.5 * s * (occ[x] + 1.0)) * f[x]);
        tmp[x] = occ[x];
      }
      if (occ[x] > 0) {
        tmp[x] = static_cast<occ_t>(occ[x] - 1);
        trips.emplace_back(b.index(tmp), r,
                           std::sqrt(0.5 * s * occ[x]) * std::conj(f[x]));
        tmp[x] = occ[x];
      }
    }
  }
  return SparseHermitianOperator(std::move(basis), trips, 1, "displacement");
}

}  // namespace bosonlab
