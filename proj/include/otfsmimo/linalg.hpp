#ifndef OTFSMIMO_LINALG_HPP
#define OTFSMIMO_LINALG_HPP

#include <string>

#include "otfsmimo/types.hpp"

namespace otfsmimo {

/// Normalized n-point DFT matrix: entry (p,q) = exp(-j2*pi*p*q/n)/sqrt(n).
/// Unitary by construction. Throws std::invalid_argument for n < 1.
CMat dft_matrix(int n);

/// Kronecker product. Throws std::invalid_argument on empty operands.
CMat kron(const CMat& a, const CMat& b);

/// Pi^l where Pi = circ{[0,1,0,...,0]^T} is the forward cyclic shift of size
/// mn x mn; maps basis vector e_i to e_{(i+l) mod mn}. Entries are exact 0/1.
CMat delay_shift_power(int mn, long l);

/// Delta^kappa = diag{exp(j*2*pi*kappa*i/mn)}, i = 0..mn-1. Fractional
/// exponents are allowed (fractional Doppler).
CMat doppler_diag_power(int mn, double kappa);

struct HermitianSolveOptions {
  /// When set, add ridge eps = 1e-10 * trace(G)/dim before factorizing
  /// instead of failing on ill-conditioned Gram matrices (stress runs only).
  bool ridge = false;
};

/// Solve g X = b for Hermitian positive definite g. The input is symmetrized
/// as (g + g^H)/2 before the Cholesky factorization. Throws SingularGramError
/// naming `context` when g is not PD or the reciprocal condition estimate
/// falls below 1e-12.
CMat hermitian_solve(const CMat& g, const CMat& b,
                     const HermitianSolveOptions& opts = {},
                     const std::string& context = "hermitian_solve");

/// log2 det(a) for Hermitian positive definite a, via Cholesky.
/// Throws NumericalError on non-PD input.
double logdet_hermitian(const CMat& a);

/// Receive/transmit unitary sandwich pair. `left` applies to the receive
/// side (MN x MN); `right` is the per-antenna transmit-side factor (MN x MN),
/// applied as I_Nt (x) right.
struct UnitaryTransform {
  CMat left;
  CMat right;

  bool is_unitary(double tol = 1e-10) const;
};

}  // namespace otfsmimo

#endif  // OTFSMIMO_LINALG_HPP
