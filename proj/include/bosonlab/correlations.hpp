#pragma once

#include <nlohmann/json.hpp>
#include <utility>
#include <vector>

#include "bosonlab/fock.hpp"

namespace bosonlab {

// k-particle correlation matrix in orthonormal site-mode coordinates,
// trace-normalized. Multi-indices flatten as x_1 + m x_2 + ... (first slot
// fastest). Producers validate the Hermitian / PSD / unit-trace /
// symmetric-subspace invariants on construction.
class ReducedDensityMatrix {
 public:
  ReducedDensityMatrix(int k, int m, Eigen::MatrixXcd mat)
      : k_(k), m_(m), mat_(std::move(mat)) {
    std::size_t dim = 1;
    for (int i = 0; i < k_; ++i) dim *= m_;
    if (mat_.rows() != static_cast<Eigen::Index>(dim) || mat_.cols() != mat_.rows())
      throw structural_error("ReducedDensityMatrix: bad shape");
    validate();
  }

  int order() const { return k_; }
  int modes() const { return m_; }
  const Eigen::MatrixXcd& matrix() const { return mat_; }

  void validate() const {
    const double scale = std::max(1.0, mat_.cwiseAbs().maxCoeff());
    if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw validation_error("ReducedDensityMatrix: not Hermitian");
    if (std::abs(mat_.trace().real() - 1.0) > 1e-10 ||
        std::abs(mat_.trace().imag()) > 1e-10)
      throw validation_error("ReducedDensityMatrix: trace is not 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat_);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw validation_error("ReducedDensityMatrix: negative eigenvalue");
    // supported on the symmetric subspace: invariant under slot swaps
    for (int slot = 0; slot + 1 < k_; ++slot) {
      double defect = 0.0;
      for (Eigen::Index r = 0; r < mat_.rows(); ++r)
        for (Eigen::Index c = 0; c < mat_.cols(); ++c)
          defect = std::max(defect,
                            std::abs(mat_(r, c) - mat_(swap_slot(r, slot),
                                                       swap_slot(c, slot))));
      if (defect > 1e-10 * scale)
        throw validation_error("ReducedDensityMatrix: not permutation symmetric");
    }
  }

  Eigen::Index swap_slot(Eigen::Index flat, int slot) const {
    std::vector<int> digits(k_);
    Eigen::Index rest = flat;
    for (int i = 0; i < k_; ++i) {
      digits[i] = rest % m_;
      rest /= m_;
    }
    std::swap(digits[slot], digits[slot + 1]);
    Eigen::Index out = 0;
    for (int i = k_ - 1; i >= 0; --i) out = out * m_ + digits[i];
    return out;
  }

 private:
  int k_, m_;
  Eigen::MatrixXcd mat_;
};

namespace detail {

// c_x applied to the coefficients of a pure n-sector segment
inline Vector lower_site_sector(const OccupationBasis& b, int n,
                                const Vector& segment, int x) {
  Vector out = Vector::Zero(b.sector_size(n - 1));
  const std::size_t off_n = b.sector_offset(n);
  const std::size_t off_lo = b.sector_offset(n - 1);
  std::vector<occ_t> tmp(b.modes());
  for (Eigen::Index i = 0; i < segment.size(); ++i) {
    if (segment[i] == cplx(0.0)) continue;
    auto occ = b.occupation(off_n + i);
    if (occ[x] == 0) continue;
    std::copy(occ.begin(), occ.end(), tmp.begin());
    tmp[x] = static_cast<occ_t>(occ[x] - 1);
    out[b.index(tmp) - off_lo] += std::sqrt(double(occ[x])) * segment[i];
  }
  return out;
}

inline long double falling_factorial(int n, int k) {
  long double r = 1.0L;
  for (int i = 0; i < k; ++i) r *= (n - i);
  return r;  // n! / (n-k)!
}

}  // namespace detail

// gamma_k of a normalized single-sector state:
//   gamma[x,y] = (n-k)!/n! <Psi, c_{y1}^dag ... c_{yk}^dag c_{xk} ... c_{x1} Psi>.
// The (n-k)!/n! factor makes the trace exactly 1.
inline ReducedDensityMatrix reduced_density(const FockVector& psi, int k) {
  const OccupationBasis& b = *psi.basis();
  if (std::abs(psi.norm() - 1.0) > 1e-8)
    throw validation_error("reduced_density: state is not normalized");
  const int n = psi.single_sector();
  if (n < 0)
    throw structural_error("reduced_density: state has multi-sector support");
  if (k < 1 || k > n)
    throw range_error("reduced_density: need 1 <= k <= sector number");
  const int m = b.modes();

  // all k-fold lowerings, tuple index x_1 + m x_2 + ...
  std::vector<Vector> lowered;
  lowered.emplace_back(
      psi.coeffs().segment(b.sector_offset(n), b.sector_size(n)));
  std::size_t dim = 1;
  for (int level = 0; level < k; ++level) {
    std::vector<Vector> next(dim * m);
    for (std::size_t tup = 0; tup < dim; ++tup)
      for (int x = 0; x < m; ++x)
        next[tup + dim * x] =
            detail::lower_site_sector(b, n - level, lowered[tup], x);
    lowered = std::move(next);
    dim *= m;
  }

  const double fac =
      static_cast<double>(1.0L / detail::falling_factorial(n, k));
  Eigen::MatrixXcd mat(dim, dim);
  for (std::size_t row = 0; row < dim; ++row) {
    for (std::size_t col = row; col < dim; ++col) {
      const cplx v = fac * lowered[col].dot(lowered[row]);
      mat(row, col) = v;
      mat(col, row) = std::conj(v);
    }
  }
  return ReducedDensityMatrix(k, m, std::move(mat));
}

// |phihat^{x k}><phihat^{x k}| for the normalized mode vector of phi.
inline ReducedDensityMatrix hartree_projector(const Field& phi, int k) {
  const double nf = norm(phi);
  if (!(nf > 0.0)) throw validation_error("hartree_projector: zero field");
  const int m = phi.grid().m;
  const double sdx = std::sqrt(phi.grid().dx());
  Vector mode(m);
  for (int x = 0; x < m; ++x) mode[x] = phi[x] * sdx / nf;
  std::size_t dim = 1;
  for (int i = 0; i < k; ++i) dim *= m;
  Vector v(dim);
  for (std::size_t flat = 0; flat < dim; ++flat) {
    cplx a = 1.0;
    std::size_t rest = flat;
    for (int i = 0; i < k; ++i) {
      a *= mode[rest % m];
      rest /= m;
    }
    v[flat] = a;
  }
  return ReducedDensityMatrix(k, m, v * v.adjoint());
}

// |gamma - rho|_1 = sum of |eigenvalues| of the Hermitian difference
// (full trace norm, not halved).
inline double trace_distance(const ReducedDensityMatrix& a,
                             const ReducedDensityMatrix& bmat) {
  if (a.order() != bmat.order() || a.modes() != bmat.modes())
    throw structural_error("trace_distance: shape mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.matrix() - bmat.matrix());
  return es.eigenvalues().cwiseAbs().sum();
}

// Contract the last slot: gamma_k -> gamma_{k-1}.
inline ReducedDensityMatrix partial_trace_last(const ReducedDensityMatrix& g) {
  if (g.order() < 2)
    throw range_error("partial_trace_last: need order >= 2");
  const int m = g.modes();
  Eigen::Index dim = g.matrix().rows() / m;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (int z = 0; z < m; ++z)
    out += g.matrix().block(z * dim, z * dim, dim, dim);
  return ReducedDensityMatrix(g.order() - 1, m, std::move(out));
}

// Both routes of the chaos observable identity:
//   first:  <Psi, prod a*(f_i) prod a(g_j) Psi>        (Wick route)
//   second: eps^p n!/(n-p)! Tr[gamma_p Btilde]          (RDM route)
// with Btilde the symmetrized product kernel of |fhat_i><ghat_i| factors.
inline std::pair<cplx, cplx> wick_vs_rdm_crosscheck(
    const LadderConvention& conv, const FockVector& psi,
    const std::vector<Field>& fs, const std::vector<Field>& gs) {
  if (fs.size() != gs.size() || fs.empty())
    throw validation_error("wick_vs_rdm_crosscheck: need equal nonempty lists");
  const int p = static_cast<int>(fs.size());
  const int n = psi.single_sector();
  if (n < 0)
    throw structural_error("wick_vs_rdm_crosscheck: multi-sector state");
  const cplx lhs = wick_rank_one_expectation(conv, psi, fs, gs);
  if (p > n) return {lhs, 0.0};

  const int m = psi.basis()->modes();
  const double sdx = std::sqrt(conv.grid.dx());
  std::size_t dim = 1;
  for (int i = 0; i < p; ++i) dim *= m;
  Eigen::MatrixXcd kernel(dim, dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      cplx v = 1.0;
      std::size_t rr = r, cc = c;
      for (int i = 0; i < p; ++i) {
        v *= fs[i][rr % m] * sdx * std::conj(gs[i][cc % m] * sdx);
        rr /= m;
        cc /= m;
      }
      kernel(r, c) = v;
    }
  // symmetrize both sides over adjacent slot swaps (p <= 3 in practice)
  std::vector<int> perm(p);
  for (int i = 0; i < p; ++i) perm[i] = i;
  Eigen::MatrixXcd sym = Eigen::MatrixXcd::Zero(dim, dim);
  int count = 0;
  std::sort(perm.begin(), perm.end());
  do {
    Eigen::MatrixXcd pm = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t flat = 0; flat < dim; ++flat) {
      std::vector<int> digit(p);
      std::size_t rest = flat;
      for (int i = 0; i < p; ++i) {
        digit[i] = rest % m;
        rest /= m;
      }
      std::size_t target = 0;
      for (int i = p - 1; i >= 0; --i) target = target * m + digit[perm[i]];
      pm(target, flat) = 1.0;
    }
    sym += pm;
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  sym /= count;
  const Eigen::MatrixXcd btilde = sym * kernel * sym;

  const ReducedDensityMatrix gamma = reduced_density(psi, p);
  const double scale = std::pow(conv.epsilon, p) *
                       static_cast<double>(detail::falling_factorial(n, p));
  const cplx rhs = scale * (gamma.matrix() * btilde).trace();
  return {lhs, rhs};
}

inline nlohmann::json rdm_to_json(const ReducedDensityMatrix& g) {
  nlohmann::json j;
  j["k"] = g.order();
  j["modes"] = g.modes();
  j["dim"] = g.matrix().rows();
  j["trace"] = g.matrix().trace().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.matrix());
  j["eigenvalues"] = std::vector<double>(
      es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  nlohmann::json tri = nlohmann::json::array();
  for (Eigen::Index r = 0; r < g.matrix().rows(); ++r)
    for (Eigen::Index c = r; c < g.matrix().cols(); ++c)
      tri.push_back({g.matrix()(r, c).real(), g.matrix()(r, c).imag()});
  j["upper_triangle"] = std::move(tri);
  return j;
}

}  // namespace bosonlab
