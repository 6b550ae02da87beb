#include <catch2/catch_amalgamated.hpp>

#include "bosonlab/bogoliubov.hpp"
#include "test_helpers.hpp"

using namespace bosonlab;
using namespace testkit;

namespace {

NlsTrajectory traj_for(const Field& phi0, double t_final, LaplacianKind kind) {
  return nls_evolve(phi0, t_final, 1e-3, kind);
}

}  // namespace

TEST_CASE("free flow: rhs reduces to the kinetic term") {
  Grid g(8, 1.0);
  Rng rng(71);
  Field xi = random_field(g, rng);
  for (auto kind : {LaplacianKind::spectral, LaplacianKind::finite_difference}) {
    Field got = bogoliubov_rhs(kind, xi, Field(g));
    Field want = laplacian_apply(kind, xi);
    want *= cplx(0.0, -1.0);
    CHECK((got.values() - want.values()).norm() < 1e-14);
  }
}

TEST_CASE("zero fluctuation stays zero") {
  Grid g(8, 1.0);
  Rng rng(72);
  Field phi = random_field(g, rng);
  CHECK(norm(bogoliubov_rhs(LaplacianKind::spectral, Field(g), phi)) == 0.0);
}

TEST_CASE("single-site closed form") {
  Grid g(1, 1.0);  // Laplacian vanishes on one site
  const cplx xi0(0.37, -0.21), phi0(0.84, 0.56);
  Field xi(g, Vector::Constant(1, xi0));
  Field phi(g, Vector::Constant(1, phi0));
  const Field got = bogoliubov_rhs(LaplacianKind::finite_difference, xi, phi);
  const cplx want = cplx(0.0, -1.0) * (2.0 * std::norm(phi0) * xi0 +
                                       phi0 * phi0 * std::conj(xi0));
  CHECK(std::abs(got[0] - want) < 1e-15);
}

TEST_CASE("identity at coincident times") {
  Grid g(8, 1.0);
  Rng rng(73);
  Field phi0 = gauss_field(g, 0.5, 0.12);
  NlsTrajectory traj = traj_for(phi0, 0.5, LaplacianKind::finite_difference);
  Field xi = random_field(g, rng);
  Field out = beta_apply(traj, xi, 0.3, 0.3, 1e-3);
  CHECK((out.values() - xi.values()).norm() == 0.0);
}

TEST_CASE("free trajectory reproduces the kinetic exponential") {
  Grid g(4, 1.0);
  Rng rng(74);
  for (auto kind : {LaplacianKind::spectral, LaplacianKind::finite_difference}) {
    NlsTrajectory traj = traj_for(Field(g), 1.0, kind);
    Field xi = random_field(g, rng);
    Field got = beta_apply(traj, xi, 0.0, 1.0, 1e-3);
    // oracle: diagonalize the discrete Laplacian in the DFT basis
    Vector f = dft(xi.values());
    for (int k = 0; k < g.m; ++k)
      f[k] *= std::polar(1.0, -laplacian_eigenvalue(kind, g, k) * 1.0);
    const Vector want = idft(f);
    CHECK((got.values() - want).norm() < 1e-8);
  }
}

TEST_CASE("group law") {
  Grid g(6, 1.0);
  Rng rng(75);
  Field phi0 = gauss_field(g, 0.5, 0.15, 1.3);
  NlsTrajectory traj = traj_for(phi0, 1.0, LaplacianKind::finite_difference);
  Field xi = random_field(g, rng);
  Field two_leg = beta_apply(traj, beta_apply(traj, xi, 0.0, 0.5, 1e-3), 0.5,
                             1.0, 1e-3);
  Field direct = beta_apply(traj, xi, 0.0, 1.0, 1e-3);
  CHECK((two_leg.values() - direct.values()).norm() <= 1e-7 * norm(xi));
}

TEST_CASE("reversibility") {
  Grid g(6, 1.0);
  Rng rng(76);
  Field phi0 = gauss_field(g, 0.4, 0.12, 1.1);
  NlsTrajectory traj = traj_for(phi0, 0.8, LaplacianKind::finite_difference);
  Field xi = random_field(g, rng);
  Field there = beta_apply(traj, xi, 0.0, 0.8, 1e-3);
  Field back = beta_apply(traj, there, 0.8, 0.0, 1e-3);
  CHECK((back.values() - xi.values()).norm() <= 1e-7 * norm(xi));
}

TEST_CASE("symplectic form is conserved") {
  Grid g(6, 1.0);
  Rng rng(77);
  Field phi0 = gauss_field(g, 0.5, 0.15, 1.4);
  NlsTrajectory traj = traj_for(phi0, 1.0, LaplacianKind::finite_difference);
  for (int rep = 0; rep < 5; ++rep) {
    Field xi = random_field(g, rng);
    Field eta = random_field(g, rng);
    const double before = inner_product(xi, eta).imag();
    Field bxi = beta_apply(traj, xi, 0.0, 1.0, 1e-3);
    Field beta_eta = beta_apply(traj, eta, 0.0, 1.0, 1e-3);
    const double after = inner_product(bxi, beta_eta).imag();
    CHECK(std::abs(after - before) <= 1e-7 * norm(xi) * norm(eta));
  }
}

TEST_CASE("flow is real linear but not complex linear") {
  Grid g(6, 1.0);
  Rng rng(78);
  Field phi0 = gauss_field(g, 0.5, 0.15, 1.4);  // nonzero pairing term
  NlsTrajectory traj = traj_for(phi0, 0.5, LaplacianKind::finite_difference);
  Field xi = random_field(g, rng);
  Field eta = random_field(g, rng);
  const double a = -0.7, b = 1.9;

  Field combo = xi;
  combo *= a;
  Field beta_eta_scaled = eta;
  beta_eta_scaled *= b;
  combo += beta_eta_scaled;
  Field lhs = beta_apply(traj, combo, 0.0, 0.5, 1e-3);
  Field rhs = beta_apply(traj, xi, 0.0, 0.5, 1e-3);
  rhs *= a;
  Field rhs2 = beta_apply(traj, eta, 0.0, 0.5, 1e-3);
  rhs2 *= b;
  rhs += rhs2;
  CHECK((lhs.values() - rhs.values()).norm() <=
        1e-10 * (std::abs(a) * norm(xi) + std::abs(b) * norm(eta)));

  // complex scalars do NOT commute with the flow: the pairing term
  // conjugates xi, so an accidentally C-linear implementation would differ
  Field ixi = xi;
  ixi *= cplx(0.0, 1.0);
  Field beta_of_ixi = beta_apply(traj, ixi, 0.0, 0.5, 1e-3);
  Field i_beta_xi = beta_apply(traj, xi, 0.0, 0.5, 1e-3);
  i_beta_xi *= cplx(0.0, 1.0);
  CHECK((beta_of_ixi.values() - i_beta_xi.values()).norm() >
        1e-3 * norm(xi));
}

TEST_CASE("range and step validation") {
  Grid g(4, 1.0);
  Field phi0 = gauss_field(g, 0.5, 0.15);
  NlsTrajectory traj = traj_for(phi0, 0.5, LaplacianKind::finite_difference);
  Field xi(g, Vector::Ones(4));
  CHECK_THROWS_AS(beta_apply(traj, xi, 0.0, 0.9, 1e-3), range_error);
  CHECK_THROWS_AS(beta_apply(traj, xi, -0.2, 0.4, 1e-3), range_error);
  CHECK_THROWS_AS(beta_apply(traj, xi, 0.0, 0.4, 0.0), validation_error);
}
