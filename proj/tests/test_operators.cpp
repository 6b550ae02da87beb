#include <catch2/catch_amalgamated.hpp>
#include <sstream>

#include "bosonlab/nls.hpp"
#include "bosonlab/operators.hpp"
#include "test_helpers.hpp"

using namespace bosonlab;
using namespace testkit;

TEST_CASE("H_eps annihilates the vacuum") {
  Grid g(3, 1.0);
  LadderConvention conv(0.5, g);
  auto basis = make_basis(3, 4);
  for (auto kind : {LaplacianKind::finite_difference, LaplacianKind::spectral}) {
    auto h = assemble_h_epsilon(conv, basis, kind);
    CHECK(h.apply(FockVector::vacuum(basis)).norm() < 1e-15);
    CHECK(h.hermiticity_defect() <= 1e-12 * std::max(1.0, h.max_abs()));
    CHECK(h.sector_step() == 0);
  }
}

TEST_CASE("single-site model is diagonal with eigenvalue eps^2 n(n-1)/(2dx)") {
  Grid g(1, 0.7);
  LadderConvention conv(0.6, g);
  auto basis = make_basis(1, 6);
  auto h = assemble_h_epsilon(conv, basis, LaplacianKind::finite_difference);
  for (int n = 0; n <= 6; ++n) {
    FockVector e(basis);
    e.coeffs()[n] = 1.0;
    FockVector he = h.apply(e);
    const double want =
        conv.epsilon * conv.epsilon * n * (n - 1.0) / (2.0 * g.dx());
    CHECK(std::abs(he.coeffs()[n] - cplx(want)) < 1e-13);
    CHECK(he.norm() == Catch::Approx(std::abs(want)).margin(1e-13));
  }
}

TEST_CASE("matvec agrees with the defining apply functions") {
  Grid g(3, 1.0);
  LadderConvention conv(0.45, g);
  auto basis = make_basis(3, 5);
  Rng rng(31);
  for (auto kind : {LaplacianKind::finite_difference, LaplacianKind::spectral}) {
    auto h = assemble_h_epsilon(conv, basis, kind);
    const Eigen::MatrixXcd lap = one_body_laplacian_matrix(kind, g);
    for (int rep = 0; rep < 5; ++rep) {
      FockVector psi = random_fock(basis, rng);
      FockVector via_matrix = h.apply(psi);
      FockVector via_apply = dgamma_apply(conv, lap, psi);
      via_apply += quartic_onsite_apply(conv, psi);
      CHECK((via_matrix.coeffs() - via_apply.coeffs()).norm() < 1e-12);
    }
  }
}

TEST_CASE("H_eps commutes with the number operator") {
  Grid g(4, 1.0);
  LadderConvention conv(0.25, g);
  auto basis = make_basis(4, 5);
  Rng rng(32);
  auto h = assemble_h_epsilon(conv, basis, LaplacianKind::finite_difference);
  auto n_op = assemble_number(conv, basis);
  for (int rep = 0; rep < 5; ++rep) {
    FockVector psi = random_fock(basis, rng);
    const Vector hn = h.apply(n_op.apply(psi)).coeffs();
    const Vector nh = n_op.apply(h.apply(psi)).coeffs();
    CHECK((hn - nh).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("finite-difference hops connect adjacent-site occupations only") {
  Grid g(4, 1.0);
  LadderConvention conv(1.0, g);
  auto basis = make_basis(4, 3);
  auto h = assemble_h_epsilon(conv, basis, LaplacianKind::finite_difference);
  const auto& mat = h.matrix();
  for (int col = 0; col < mat.outerSize(); ++col)
    for (SparseMatrixC::InnerIterator it(mat, col); it; ++it) {
      if (it.row() == it.col()) continue;
      auto a = basis->occupation(it.row());
      auto b = basis->occupation(it.col());
      int from = -1, to = -1;
      for (int x = 0; x < 4; ++x) {
        if (a[x] == b[x]) continue;
        if (a[x] == b[x] + 1) to = x;
        else if (a[x] + 1 == b[x]) from = x;
        else FAIL("off-diagonal entry changes a site by more than one");
      }
      REQUIRE(from >= 0);
      REQUIRE(to >= 0);
      const int d = std::abs(from - to);
      CHECK((d == 1 || d == 3));  // periodic neighbors on 4 sites
    }
}

TEST_CASE("sector expectation matches the first-quantized explicit formula") {
  Grid g(3, 1.0);
  LadderConvention conv(0.4, g);
  auto basis = make_basis(3, 3);
  Rng rng(33);
  for (auto kind : {LaplacianKind::finite_difference, LaplacianKind::spectral}) {
    auto h = assemble_h_epsilon(conv, basis, kind);
    for (int n = 1; n <= 3; ++n) {
      FockVector psi(basis);
      for (std::size_t r = basis->sector_offset(n);
           r < basis->sector_offset(n) + basis->sector_size(n); ++r)
        psi.coeffs()[r] = rng.complex_normal();
      psi *= 1.0 / psi.norm();
      const double got = inner_product(psi, h.apply(psi)).real();

      // first-quantized oracle on the n-particle tensor:
      //   eps n <Psi, (-Delta x 1...) Psi> + eps^2 n(n-1)/2 dx^{n-1} sum_diag
      const Vector t = sector_to_tensor(psi, n);  // mode coordinates
      const int m = g.m;
      const Eigen::MatrixXcd lap = one_body_laplacian_matrix(kind, g);
      std::size_t dim = t.size();
      Vector lap1 = Vector::Zero(dim);
      for (std::size_t flat = 0; flat < dim; ++flat) {
        const int x1 = static_cast<int>(flat % m);
        for (int y = 0; y < m; ++y)
          lap1[flat] += lap(x1, y) * t[flat - x1 + y];
      }
      double kinetic = conv.epsilon * n * t.dot(lap1).real();
      double diag = 0.0;
      // psi(x,x,x3,...) in L^2 values: tensor / dx^{n/2}
      for (std::size_t flat = 0; flat < dim; ++flat) {
        const int x1 = static_cast<int>(flat % m);
        const int x2 = static_cast<int>((flat / m) % m);
        if (x1 == x2) diag += std::norm(t[flat]);
      }
      // dx^{n-1} sum |psi|^2 = dx^{n-1} sum |t|^2 / dx^n = sum |t|^2 / dx
      const double quartic = conv.epsilon * conv.epsilon * n * (n - 1.0) / 2.0 *
                             diag / g.dx();
      CHECK(got == Catch::Approx(kinetic + quartic).margin(1e-12));
    }
  }
}

TEST_CASE("mean-field energy consistency of hermite states") {
  Grid g(4, 1.0);
  Rng rng(34);
  Field phi = normalized(gauss_field(g, 0.5, 0.15));
  const double h_classical = energy(LaplacianKind::finite_difference, phi);
  double prev_gap = 1e9;
  for (int n = 2; n <= 8; n *= 2) {
    LadderConvention conv(1.0 / n, g);
    auto basis = make_basis(4, n);
    auto h = assemble_h_epsilon(conv, basis, LaplacianKind::finite_difference);
    FockVector psi = hermite_state(conv, basis, phi, n);
    const double got = inner_product(psi, h.apply(psi)).real();
    // <phi^n, H phi^n> = kinetic + (1 - 1/n) P -> h(phi)
    const double gap = std::abs(got - h_classical);
    CHECK(gap < prev_gap + 1e-12);
    prev_gap = gap;
    const double predicted = h_classical - quartic_energy(phi) / n;
    CHECK(got == Catch::Approx(predicted).margin(1e-10));
  }
}

TEST_CASE("A2 with zero field is the unscaled kinetic dGamma") {
  Grid g(3, 1.0);
  LadderConvention conv(0.5, g);
  auto basis = make_basis(3, 4);
  auto a2 = assemble_a2(conv, basis, Field(g), LaplacianKind::finite_difference);
  LadderConvention unscaled(1.0, g);
  auto kin = assemble_dgamma(unscaled, basis,
                             one_body_laplacian_matrix(
                                 LaplacianKind::finite_difference, g));
  CHECK((SparseMatrixC(a2.matrix() - kin.matrix())).norm() < 1e-14);
}

TEST_CASE("A2 is independent of epsilon") {
  Grid g(3, 1.0);
  auto basis = make_basis(3, 5);
  Rng rng(35);
  Field phi = random_field(g, rng);
  auto a = assemble_a2(LadderConvention(1.0, g), basis, phi,
                       LaplacianKind::finite_difference);
  auto b = assemble_a2(LadderConvention(0.125, g), basis, phi,
                       LaplacianKind::finite_difference);
  CHECK((SparseMatrixC(a.matrix() - b.matrix())).norm() == 0.0);
}

TEST_CASE("A2 coherent-symbol calibration") {
  Grid g(2, 1.0);
  LadderConvention conv(0.5, g);
  auto basis = make_basis(2, 30);
  Rng rng(36);
  Field phi = normalized(random_field(g, rng), 0.7);  // the mean-field point
  auto a2 = assemble_a2(conv, basis, phi, LaplacianKind::finite_difference);
  for (int rep = 0; rep < 3; ++rep) {
    Field zeta = normalized(random_field(g, rng), 0.6);
    FockVector e = coherent_state(conv, basis, zeta, 1e-7);
    const cplx got = conv.epsilon * inner_product(e, a2.apply(e));
    // symbol: <zeta, -Delta zeta> + 2 int |phi|^2 |zeta|^2 + Re int phi^2 conj(zeta)^2
    const Field lap = laplacian_apply(LaplacianKind::finite_difference, zeta);
    double symbol = inner_product(zeta, lap).real();
    for (int j = 0; j < g.m; ++j) {
      symbol += 2.0 * std::norm(phi[j]) * std::norm(zeta[j]) * g.dx();
      symbol += (phi[j] * phi[j] * std::conj(zeta[j]) * std::conj(zeta[j]))
                    .real() *
                g.dx();
    }
    CHECK(std::abs(got - cplx(symbol)) < 2e-5 * std::max(1.0, std::abs(symbol)));
  }
}

TEST_CASE("A2 preserves particle-number parity exactly") {
  Grid g(3, 1.0);
  LadderConvention conv(1.0, g);
  auto basis = make_basis(3, 5);
  Rng rng(37);
  Field phi = random_field(g, rng);
  auto a2 = assemble_a2(conv, basis, phi, LaplacianKind::finite_difference);
  const auto& mat = a2.matrix();
  for (int col = 0; col < mat.outerSize(); ++col)
    for (SparseMatrixC::InnerIterator it(mat, col); it; ++it) {
      const int dn = basis->sector_of(it.row()) - basis->sector_of(it.col());
      CHECK((dn == 0 || dn == 2 || dn == -2));
    }
  // <odd | A2 | even> = 0 exactly
  FockVector even(basis), odd(basis);
  for (std::size_t r = 0; r < basis->size(); ++r) {
    if (basis->sector_of(r) % 2 == 0) even.coeffs()[r] = rng.complex_normal();
    else odd.coeffs()[r] = rng.complex_normal();
  }
  CHECK(std::abs(inner_product(odd, a2.apply(even))) == 0.0);
}

TEST_CASE("matrix-market export is well formed") {
  Grid g(2, 1.0);
  LadderConvention conv(1.0, g);
  auto basis = make_basis(2, 2);
  auto h = assemble_h_epsilon(conv, basis, LaplacianKind::finite_difference);
  std::stringstream ss;
  h.write_matrix_market(ss);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "%%MatrixMarket matrix coordinate complex general");
  std::getline(ss, line);  // label comment
  long rows = 0, cols = 0, nnz = 0;
  ss >> rows >> cols >> nnz;
  CHECK(rows == static_cast<long>(basis->size()));
  CHECK(cols == rows);
  CHECK(nnz == h.matrix().nonZeros());
  long count = 0;
  long i = 0, j = 0;
  double re = 0.0, im = 0.0;
  while (ss >> i >> j >> re >> im) {
    CHECK(i >= 1);
    CHECK(i <= rows);
    ++count;
  }
  CHECK(count == nnz);
}
