#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "bosonlab/basis.hpp"
#include "bosonlab/grid.hpp"

namespace bosonlab {

// Semiclassical scaling of the ladder algebra: [a(f), a*(g)] = eps <f,g>.
// An L^2 grid function f enters through its orthonormal-mode amplitudes
// f(x) sqrt(dx), so a(f) = sqrt(eps) sum_x conj(fhat_x) c_x with canonical
// site ladders c_x.
struct LadderConvention {
  double epsilon;
  Grid grid;

  LadderConvention(double eps, const Grid& g) : epsilon(eps), grid(g) {
    if (!(eps > 0.0))
      throw validation_error("LadderConvention: epsilon must be positive");
  }
};

class FockVector {
 public:
  explicit FockVector(BasisPtr basis)
      : basis_(std::move(basis)), coeffs_(Vector::Zero(basis_->size())) {}
  FockVector(BasisPtr basis, Vector coeffs)
      : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (static_cast<std::size_t>(coeffs_.size()) != basis_->size())
      throw structural_error("FockVector: coefficient count mismatch");
  }

  const BasisPtr& basis() const { return basis_; }
  const Vector& coeffs() const { return coeffs_; }
  Vector& coeffs() { return coeffs_; }

  double squared_norm() const { return coeffs_.squaredNorm(); }
  double norm() const { return coeffs_.norm(); }

  double sector_mass(int n) const {
    return coeffs_
        .segment(basis_->sector_offset(n), basis_->sector_size(n))
        .squaredNorm();
  }

  // Sector carrying all but `tol` of the mass, or -1 if support is mixed.
  int single_sector(double tol = 1e-12) const {
    const double total = squared_norm();
    for (int n = 0; n <= basis_->n_max(); ++n) {
      const double mass = sector_mass(n);
      if (mass > tol * total && mass >= (1.0 - tol) * total) return n;
    }
    return -1;
  }

  static FockVector vacuum(BasisPtr basis) {
    FockVector v(std::move(basis));
    v.coeffs()[0] = 1.0;
    return v;
  }

  void require_same_basis(const FockVector& o) const {
    if (basis_.get() != o.basis_.get() &&
        (basis_->modes() != o.basis_->modes() ||
         basis_->n_max() != o.basis_->n_max()))
      throw structural_error("FockVector: basis mismatch");
  }

  FockVector& operator+=(const FockVector& o) {
    require_same_basis(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  FockVector& operator-=(const FockVector& o) {
    require_same_basis(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  FockVector& operator*=(cplx a) {
    coeffs_ *= a;
    return *this;
  }
  friend FockVector operator+(FockVector a, const FockVector& b) { return a += b; }
  friend FockVector operator-(FockVector a, const FockVector& b) { return a -= b; }
  friend FockVector operator*(cplx a, FockVector v) { return v *= a; }

 private:
  BasisPtr basis_;
  Vector coeffs_;
};

inline cplx inner_product(const FockVector& a, const FockVector& b) {
  a.require_same_basis(b);
  return a.coeffs().dot(b.coeffs());
}

// ---------------------------------------------------------------------------
// ladder operators

namespace detail {

inline void require_field_grid(const LadderConvention& conv, const Field& f) {
  if (f.grid() != conv.grid)
    throw structural_error("ladder operator: field grid does not match convention");
}

inline long double factorial_ld(int n) {
  long double r = 1.0L;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// sqrt(n! / prod n_x!) for the occupation vector of a sector-n state
inline double multinomial_amplitude(std::span<const occ_t> occ, int n) {
  long double r = factorial_ld(n);
  for (occ_t v : occ) r /= factorial_ld(v);
  return static_cast<double>(std::sqrt(r));
}

}  // namespace detail

// a(f): maps sector n to n-1, never truncates.
inline FockVector annihilate(const LadderConvention& conv, const Field& f,
                             const FockVector& psi) {
  detail::require_field_grid(conv, f);
  const OccupationBasis& b = *psi.basis();
  if (b.modes() != conv.grid.m)
    throw structural_error("annihilate: basis does not match grid");
  FockVector out(psi.basis());
  const double s = conv.epsilon * conv.grid.dx();
  std::vector<occ_t> tmp(b.modes());
  for (std::size_t r = 0; r < b.size(); ++r) {
    const cplx c = psi.coeffs()[r];
    if (c == cplx(0.0)) continue;
    auto occ = b.occupation(r);
    std::copy(occ.begin(), occ.end(), tmp.begin());
    for (int x = 0; x < b.modes(); ++x) {
      if (occ[x] == 0) continue;
      tmp[x] = static_cast<occ_t>(occ[x] - 1);
      out.coeffs()[b.index(tmp)] +=
          std::sqrt(s * occ[x]) * std::conj(f[x]) * c;
      tmp[x] = occ[x];
    }
  }
  return out;
}

struct CreationResult {
  FockVector state;
  double truncation_loss;  // squared norm dropped above n_max
};

// a*(f): adjoint of a(f); amplitude pushed past n_max is dropped and the
// lost squared norm reported.
inline CreationResult create(const LadderConvention& conv, const Field& f,
                             const FockVector& psi) {
  detail::require_field_grid(conv, f);
  const OccupationBasis& b = *psi.basis();
  FockVector out(psi.basis());
  double loss = 0.0;
  const double s = conv.epsilon * conv.grid.dx();
  std::vector<occ_t> tmp(b.modes());
  for (std::size_t r = 0; r < b.size(); ++r) {
    const cplx c = psi.coeffs()[r];
    if (c == cplx(0.0)) continue;
    auto occ = b.occupation(r);
    const int n = b.sector_of(r);
    if (n == b.n_max()) {
      for (int x = 0; x < b.modes(); ++x)
        loss += s * (occ[x] + 1.0) * std::norm(f[x]) * std::norm(c);
      continue;
    }
    std::copy(occ.begin(), occ.end(), tmp.begin());
    for (int x = 0; x < b.modes(); ++x) {
      tmp[x] = static_cast<occ_t>(occ[x] + 1);
      out.coeffs()[b.index(tmp)] += std::sqrt(s * (occ[x] + 1.0)) * f[x] * c;
      tmp[x] = occ[x];
    }
  }
  return {std::move(out), loss};
}

// dGamma(A) = eps sum_{x,y} A_xy c_x^dag c_y for Hermitian A in orthonormal
// site modes; sector preserving.
inline FockVector dgamma_apply(const LadderConvention& conv,
                               const Eigen::MatrixXcd& a,
                               const FockVector& psi) {
  const OccupationBasis& b = *psi.basis();
  if (a.rows() != b.modes() || a.cols() != b.modes())
    throw structural_error("dgamma_apply: matrix size does not match modes");
  const double scale = a.cwiseAbs().maxCoeff();
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
    throw validation_error("dgamma_apply: matrix is not Hermitian");
  FockVector out(psi.basis());
  std::vector<occ_t> tmp(b.modes());
  for (std::size_t r = 0; r < b.size(); ++r) {
    const cplx c = psi.coeffs()[r];
    if (c == cplx(0.0)) continue;
    auto occ = b.occupation(r);
    cplx diag = 0.0;
    for (int x = 0; x < b.modes(); ++x) diag += a(x, x) * double(occ[x]);
    out.coeffs()[r] += conv.epsilon * diag * c;
    std::copy(occ.begin(), occ.end(), tmp.begin());
    for (int y = 0; y < b.modes(); ++y) {
      if (occ[y] == 0) continue;
      for (int x = 0; x < b.modes(); ++x) {
        if (x == y || a(x, y) == cplx(0.0)) continue;
        tmp[y] = static_cast<occ_t>(occ[y] - 1);
        tmp[x] = static_cast<occ_t>(occ[x] + 1);
        const double amp = std::sqrt(double(occ[y]) * (occ[x] + 1.0));
        out.coeffs()[b.index(tmp)] += conv.epsilon * a(x, y) * amp * c;
        tmp[y] = occ[y];
        tmp[x] = occ[x];
      }
    }
  }
  return out;
}

// N = dGamma(1): diagonal, eps * n per sector.
inline FockVector number_apply(const LadderConvention& conv,
                               const FockVector& psi) {
  FockVector out = psi;
  const OccupationBasis& b = *psi.basis();
  for (int n = 0; n <= b.n_max(); ++n)
    out.coeffs()
        .segment(b.sector_offset(n), b.sector_size(n)) *= conv.epsilon * n;
  return out;
}

// P^Wick for the on-site pair interaction: (eps^2 / 2 dx) sum_x n_x (n_x - 1),
// the lattice version of (1/2) int |z|^4 with delta(x-y) -> delta_xy / dx.
inline FockVector quartic_onsite_apply(const LadderConvention& conv,
                                       const FockVector& psi) {
  const OccupationBasis& b = *psi.basis();
  FockVector out(psi.basis());
  const double s = conv.epsilon * conv.epsilon / (2.0 * conv.grid.dx());
  for (std::size_t r = 0; r < b.size(); ++r) {
    const cplx c = psi.coeffs()[r];
    if (c == cplx(0.0)) continue;
    auto occ = b.occupation(r);
    double w = 0.0;
    for (occ_t v : occ) w += double(v) * (v - 1.0);
    out.coeffs()[r] = s * w * c;
  }
  return out;
}

// <Psi, prod a*(f_i) prod a(g_j) Psi> via two annihilation-only passes
// (annihilation never truncates, so the value is exact on the cutoff space).
inline cplx wick_rank_one_expectation(const LadderConvention& conv,
                                      const FockVector& psi,
                                      const std::vector<Field>& fs,
                                      const std::vector<Field>& gs) {
  if (fs.size() != gs.size() || fs.empty())
    throw validation_error("wick_rank_one_expectation: need equal nonempty lists");
  FockVector left = psi;
  for (const Field& f : fs) left = annihilate(conv, f, left);
  FockVector right = psi;
  for (const Field& g : gs) right = annihilate(conv, g, right);
  return inner_product(left, right);
}

// ---------------------------------------------------------------------------
// reference states

inline double poisson_tail(int n_max, double mean) {
  if (mean == 0.0) return 0.0;
  // sum_{n > n_max} e^-mean mean^n / n!
  double log_term =
      (n_max + 1) * std::log(mean) - mean - std::lgamma(n_max + 2.0);
  double term = std::exp(log_term);
  double tail = 0.0;
  for (int n = n_max + 1; n < n_max + 2000; ++n) {
    tail += term;
    term *= mean / (n + 1);
    if (term < tail * 1e-18 + 1e-300) break;
  }
  return tail;
}

inline int required_n_max(double mean, double tail_threshold) {
  int n = static_cast<int>(mean);
  while (poisson_tail(n, mean) >= tail_threshold) ++n;
  return n;
}

// Normalized n-fold product state phi^{x n} / |phi|^n.
inline FockVector hermite_state(const LadderConvention& conv, BasisPtr basis,
                                const Field& phi, int n) {
  detail::require_field_grid(conv, phi);
  if (n > basis->n_max())
    throw capacity_error("hermite_state: n exceeds basis cutoff");
  const double nf = norm(phi);
  if (!(nf > 0.0) && n > 0)
    throw validation_error("hermite_state: zero field");
  FockVector out(basis);
  const OccupationBasis& b = *basis;
  const double sdx = std::sqrt(conv.grid.dx());
  Vector mode(b.modes());
  for (int x = 0; x < b.modes(); ++x)
    mode[x] = n > 0 ? phi[x] * sdx / nf : cplx(0.0);
  for (std::size_t r = b.sector_offset(n); r < b.sector_offset(n) + b.sector_size(n);
       ++r) {
    auto occ = b.occupation(r);
    cplx amp = detail::multinomial_amplitude(occ, n);
    for (int x = 0; x < b.modes(); ++x)
      for (int k = 0; k < occ[x]; ++k) amp *= mode[x];
    out.coeffs()[r] = amp;
  }
  return out;
}

// Coherent state E(phi) = e^{-|phi|^2/2 eps} sum_n eps^{-n/2} phi^{x n}/sqrt(n!),
// built directly from the series. Mode amplitudes alpha_x = phi(x) sqrt(dx/eps),
// Poisson-distributed total number with mean |phi|^2/eps.
inline FockVector coherent_state(const LadderConvention& conv, BasisPtr basis,
                                 const Field& phi,
                                 double tail_threshold = 1e-8) {
  detail::require_field_grid(conv, phi);
  const double mean = squared_norm(phi) / conv.epsilon;
  const double tail = poisson_tail(basis->n_max(), mean);
  if (tail >= tail_threshold)
    throw capacity_error(
        "coherent_state: Poisson tail " + std::to_string(tail) +
        " exceeds threshold; need n_max >= " +
        std::to_string(required_n_max(mean, tail_threshold)));
  const OccupationBasis& b = *basis;
  FockVector out(basis);
  const double sdx = std::sqrt(conv.grid.dx() / conv.epsilon);
  Vector alpha(b.modes());
  for (int x = 0; x < b.modes(); ++x) alpha[x] = phi[x] * sdx;
  const double w = std::exp(-0.5 * mean);
  std::vector<occ_t> tmp(b.modes());
  for (std::size_t r = 0; r < b.size(); ++r) {
    auto occ = b.occupation(r);
    long double denom = 1.0L;
    cplx amp = w;
    for (int x = 0; x < b.modes(); ++x) {
      denom *= detail::factorial_ld(occ[x]);
      for (int k = 0; k < occ[x]; ++k) amp *= alpha[x];
    }
    out.coeffs()[r] = amp / static_cast<double>(std::sqrt(denom));
  }
  return out;
}

// ---------------------------------------------------------------------------
// first-quantized sector tensors (orthonormal mode coordinates, index
// x_1 + m x_2 + m^2 x_3 + ...)

inline std::size_t tensor_size(int modes, int n) {
  std::size_t s = 1;
  for (int i = 0; i < n; ++i) s *= modes;
  return s;
}

// Occupation coefficients -> symmetric n-particle tensor.
inline Vector sector_to_tensor(const FockVector& psi, int n) {
  const OccupationBasis& b = *psi.basis();
  const int m = b.modes();
  Vector t = Vector::Zero(tensor_size(m, n));
  std::vector<occ_t> occ(m);
  for (std::size_t flat = 0; flat < static_cast<std::size_t>(t.size()); ++flat) {
    std::fill(occ.begin(), occ.end(), occ_t(0));
    std::size_t rest = flat;
    for (int i = 0; i < n; ++i) {
      ++occ[rest % m];
      rest /= m;
    }
    const cplx c = psi.coeffs()[b.index(occ)];
    if (c == cplx(0.0)) continue;
    t[flat] = c / detail::multinomial_amplitude(occ, n);
  }
  return t;
}

// Symmetric n-particle tensor -> occupation coefficients. The tensor must be
// permutation symmetric; a representative entry is read per occupation.
inline FockVector sector_from_tensor(BasisPtr basis, int n, const Vector& t) {
  const OccupationBasis& b = *basis;
  const int m = b.modes();
  if (static_cast<std::size_t>(t.size()) != tensor_size(m, n))
    throw structural_error("sector_from_tensor: tensor size mismatch");
  FockVector out(basis);
  for (std::size_t r = b.sector_offset(n);
       r < b.sector_offset(n) + b.sector_size(n); ++r) {
    auto occ = b.occupation(r);
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (int x = m - 1; x >= 0; --x)
      for (int k = 0; k < occ[x]; ++k) {
        flat += static_cast<std::size_t>(x) * stride;
        stride *= m;
      }
    out.coeffs()[r] = t[flat] * detail::multinomial_amplitude(occ, n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// binary checkpoint format: magic, order tag, m, n_max, eps, count, coeffs
// (little endian, IEEE-754 doubles)

namespace detail {
constexpr char kFockMagic[4] = {'B', 'L', 'F', 'K'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw validation_error("fock checkpoint: truncated file");
  return v;
}
}  // namespace detail

inline void save_fock_vector(std::ostream& os, const FockVector& psi,
                             double epsilon) {
  os.write(detail::kFockMagic, 4);
  detail::write_pod<std::uint32_t>(os, OccupationBasis::kOrderTag);
  detail::write_pod<std::uint32_t>(os, psi.basis()->modes());
  detail::write_pod<std::uint32_t>(os, psi.basis()->n_max());
  detail::write_pod<double>(os, epsilon);
  detail::write_pod<std::uint64_t>(os, psi.basis()->size());
  for (std::size_t r = 0; r < psi.basis()->size(); ++r) {
    detail::write_pod<double>(os, psi.coeffs()[r].real());
    detail::write_pod<double>(os, psi.coeffs()[r].imag());
  }
}

inline FockVector load_fock_vector(std::istream& is, double* epsilon_out = nullptr) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, detail::kFockMagic, 4) != 0)
    throw validation_error("fock checkpoint: bad magic");
  const auto tag = detail::read_pod<std::uint32_t>(is);
  if (tag != OccupationBasis::kOrderTag)
    throw validation_error("fock checkpoint: unknown basis-order version " +
                           std::to_string(tag));
  const auto m = detail::read_pod<std::uint32_t>(is);
  const auto n_max = detail::read_pod<std::uint32_t>(is);
  const double eps = detail::read_pod<double>(is);
  const auto count = detail::read_pod<std::uint64_t>(is);
  auto basis = make_basis(static_cast<int>(m), static_cast<int>(n_max));
  if (count != basis->size())
    throw validation_error("fock checkpoint: coefficient count mismatch");
  Vector coeffs(count);
  for (std::uint64_t r = 0; r < count; ++r) {
    const double re = detail::read_pod<double>(is);
    const double im = detail::read_pod<double>(is);
    coeffs[r] = cplx(re, im);
  }
  if (epsilon_out) *epsilon_out = eps;
  return FockVector(std::move(basis), std::move(coeffs));
}

}  // namespace bosonlab
