#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

#include "bosonlab/errors.hpp"

namespace bosonlab {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;

enum class LaplacianKind { finite_difference, spectral };

inline const char* to_string(LaplacianKind k) {
  return k == LaplacianKind::finite_difference ? "finite_difference"
                                               : "spectral";
}

// Uniform periodic lattice on [0, L): x_j = j * dx, dx = L / m.
struct Grid {
  int m = 0;
  double length = 0.0;

  Grid() = default;
  Grid(int m_, double length_) : m(m_), length(length_) {
    if (m < 1) throw validation_error("Grid: need at least one site");
    if (!(length > 0.0)) throw validation_error("Grid: length must be positive");
  }

  double dx() const { return length / m; }
  double site(int j) const { return j * dx(); }

  bool operator==(const Grid& o) const {
    return m == o.m && length == o.length;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

// Complex one-body field sampled on a Grid.
class Field {
 public:
  explicit Field(const Grid& g) : grid_(g), values_(Vector::Zero(g.m)) {}
  Field(const Grid& g, Vector v) : grid_(g), values_(std::move(v)) {
    if (values_.size() != grid_.m)
      throw structural_error("Field: value count does not match grid");
  }

  const Grid& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  cplx operator[](int j) const { return values_[j]; }
  cplx& operator[](int j) { return values_[j]; }

  Field conjugated() const { return Field(grid_, values_.conjugate()); }

  Field& operator+=(const Field& o) {
    require_same_grid(o);
    values_ += o.values_;
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(o);
    values_ -= o.values_;
    return *this;
  }
  Field& operator*=(cplx a) {
    values_ *= a;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(cplx a, Field f) { return f *= a; }

  void require_same_grid(const Field& o) const {
    if (grid_ != o.grid_) throw structural_error("Field: grid mismatch");
  }

 private:
  Grid grid_;
  Vector values_;
};

// <f,g> = dx * sum conj(f) g; conjugate linear in the first slot.
inline cplx inner_product(const Field& f, const Field& g) {
  f.require_same_grid(g);
  return f.grid().dx() * f.values().dot(g.values());
}

inline double squared_norm(const Field& f) {
  return f.grid().dx() * f.values().squaredNorm();
}

inline double norm(const Field& f) { return std::sqrt(squared_norm(f)); }

// Plain O(m^2) transforms; every grid in this project is tiny.
// Forward: F_k = sum_j f_j e^{-2 pi i j k / m}; inverse carries the 1/m.
inline Vector dft(const Vector& f) {
  const int m = static_cast<int>(f.size());
  Vector out(m);
  const double w = -2.0 * std::numbers::pi / m;
  for (int k = 0; k < m; ++k) {
    cplx acc = 0.0;
    for (int j = 0; j < m; ++j)
      acc += f[j] * std::polar(1.0, w * j * k);
    out[k] = acc;
  }
  return out;
}

inline Vector idft(const Vector& F) {
  const int m = static_cast<int>(F.size());
  Vector out(m);
  const double w = 2.0 * std::numbers::pi / m;
  for (int j = 0; j < m; ++j) {
    cplx acc = 0.0;
    for (int k = 0; k < m; ++k)
      acc += F[k] * std::polar(1.0, w * j * k);
    out[j] = acc / static_cast<double>(m);
  }
  return out;
}

// DFT bin k as a signed frequency index in (-m/2, m/2].
inline int signed_frequency(int k, int m) { return 2 * k <= m ? k : k - m; }

// Eigenvalue of +(-Delta) on the plane wave e^{2 pi i k x / L}.
inline double laplacian_eigenvalue(LaplacianKind kind, const Grid& g, int k) {
  if (kind == LaplacianKind::spectral) {
    const double xi = 2.0 * std::numbers::pi * signed_frequency(k, g.m) / g.length;
    return xi * xi;
  }
  const double s = std::sin(std::numbers::pi * k / g.m);
  const double c = 2.0 / g.dx();
  return c * c * s * s;
}

// Applies +(-Delta), positive semidefinite for both kinds.
inline Field laplacian_apply(LaplacianKind kind, const Field& f) {
  const Grid& g = f.grid();
  if (kind == LaplacianKind::finite_difference) {
    const int m = g.m;
    const double inv = 1.0 / (g.dx() * g.dx());
    Vector out(m);
    for (int j = 0; j < m; ++j) {
      const cplx left = f.values()[(j + m - 1) % m];
      const cplx right = f.values()[(j + 1) % m];
      out[j] = -(right - 2.0 * f.values()[j] + left) * inv;
    }
    return Field(g, std::move(out));
  }
  Vector F = dft(f.values());
  for (int k = 0; k < g.m; ++k) F[k] *= laplacian_eigenvalue(kind, g, k);
  return Field(g, idft(F));
}

// Spectral first derivative; the Nyquist mode is dropped (its symmetric
// derivative is ambiguous), which is harmless on band-limited data.
inline Field derivative_spectral(const Field& f) {
  const Grid& g = f.grid();
  Vector F = dft(f.values());
  for (int k = 0; k < g.m; ++k) {
    const int kk = signed_frequency(k, g.m);
    if (g.m % 2 == 0 && kk == g.m / 2) {
      F[k] = 0.0;
      continue;
    }
    F[k] *= cplx(0.0, 2.0 * std::numbers::pi * kk / g.length);
  }
  return Field(g, idft(F));
}

// The m x m matrix of +(-Delta) in orthonormal site modes. Multiplying grid
// values by sqrt(dx) commutes with both stencils, so this is the same matrix
// that acts on raw field values.
inline Eigen::MatrixXcd one_body_laplacian_matrix(LaplacianKind kind,
                                                  const Grid& g) {
  const int m = g.m;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(m, m);
  if (kind == LaplacianKind::finite_difference) {
    const double inv = 1.0 / (g.dx() * g.dx());
    for (int j = 0; j < m; ++j) {
      a(j, j) += 2.0 * inv;
      a(j, (j + 1) % m) -= inv;
      a(j, (j + m - 1) % m) -= inv;
    }
    return a;
  }
  // circulant built from the spectral symbol
  for (int k = 0; k < m; ++k) {
    const double lam = laplacian_eigenvalue(kind, g, k);
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y)
        a(x, y) += lam *
                   std::polar(1.0 / m, 2.0 * std::numbers::pi * k * (x - y) / m);
  }
  // clip the imaginary dust so the matrix is exactly Hermitian
  for (int x = 0; x < m; ++x)
    for (int y = x; y < m; ++y) {
      const cplx v = 0.5 * (a(x, y) + std::conj(a(y, x)));
      a(x, y) = v;
      a(y, x) = std::conj(v);
    }
  return a;
}

}  // namespace bosonlab
