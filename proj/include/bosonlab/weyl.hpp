#pragma once

#include "bosonlab/propagate.hpp"

namespace bosonlab {

struct WeylResult {
  FockVector state;
  double truncation_loss;  // 1 - |out|^2 / |in|^2
};

// W(f) Psi with W(f) = exp(i [a*(f)+a(f)] / sqrt(2)). The exponential is
// taken on a basis enlarged by `headroom` extra sectors and the result
// projected back, so the reported loss is the mass the displaced state
// actually carries past the cutoff (the exponential of the cutoff generator
// alone would be unitary and hide it). Graded ordering makes the embedding a
// plain head copy.
inline WeylResult weyl_apply(const LadderConvention& conv, const Field& f,
                             const FockVector& psi, double tol = 1e-10,
                             int headroom = 8, double loss_ceiling = 1e-6) {
  const BasisPtr& base = psi.basis();
  if (base->modes() != conv.grid.m)
    throw structural_error("weyl_apply: basis does not match grid");
  const double in2 = psi.squared_norm();
  if (in2 == 0.0) return {psi, 0.0};

  BasisPtr big = make_basis(base->modes(), base->n_max() + headroom,
                            OccupationBasis::kDefaultStateLimit * 4);
  Vector embedded = Vector::Zero(big->size());
  embedded.head(base->size()) = psi.coeffs();

  const SparseHermitianOperator r =
      assemble_displacement_generator(conv, big, f);
  // W(f) = e^{+iR}; expmv computes e^{-i tau R}, so tau = -1
  Vector out = expmv(r.matrix(), embedded, -1.0, tol);

  Vector head = out.head(base->size());
  const double loss = std::max(0.0, 1.0 - head.squaredNorm() / in2);
  if (loss > loss_ceiling)
    throw truncation_error("weyl_apply: truncation loss " +
                               std::to_string(loss) + " above ceiling",
                           loss);
  return {FockVector(base, std::move(head)), loss};
}

}  // namespace bosonlab
