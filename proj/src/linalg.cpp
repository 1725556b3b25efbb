#include "otfsmimo/linalg.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

namespace otfsmimo {

CMat dft_matrix(int n) {
  if (n < 1) {
    throw std::invalid_argument("dft_matrix: size must be >= 1, got " +
                                std::to_string(n));
  }
  CMat f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      const double arg = -2.0 * M_PI * static_cast<double>(p) * q / n;
      f(p, q) = scale * Complex(std::cos(arg), std::sin(arg));
    }
  }
  return f;
}

CMat kron(const CMat& a, const CMat& b) {
  if (a.size() == 0 || b.size() == 0) {
    throw std::invalid_argument("kron: operands must be non-empty");
  }
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMat delay_shift_power(int mn, long l) {
  if (mn < 1) throw std::invalid_argument("delay_shift_power: mn must be >= 1");
  if (l < 0) throw std::invalid_argument("delay_shift_power: l must be >= 0");
  CMat pi = CMat::Zero(mn, mn);
  for (int j = 0; j < mn; ++j) {
    pi((j + l) % mn, j) = 1.0;
  }
  return pi;
}

CMat doppler_diag_power(int mn, double kappa) {
  if (mn < 1) throw std::invalid_argument("doppler_diag_power: mn must be >= 1");
  CMat d = CMat::Zero(mn, mn);
  for (int i = 0; i < mn; ++i) {
    const double arg = 2.0 * M_PI * kappa * i / mn;
    d(i, i) = Complex(std::cos(arg), std::sin(arg));
  }
  return d;
}

CMat hermitian_solve(const CMat& g, const CMat& b,
                     const HermitianSolveOptions& opts,
                     const std::string& context) {
  if (g.rows() != g.cols()) {
    throw std::invalid_argument(context + ": Gram matrix must be square");
  }
  if (b.rows() != g.rows()) {
    throw std::invalid_argument(context + ": rhs row count mismatch");
  }
  CMat sym = 0.5 * (g + g.adjoint());
  if (opts.ridge) {
    const double eps = 1e-10 * sym.trace().real() / static_cast<double>(sym.rows());
    sym.diagonal().array() += eps;
  }
  Eigen::LLT<CMat> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw SingularGramError(context + ": Gram matrix is not positive definite");
  }
  const double rcond = llt.rcond();
  if (!(rcond > 1e-12)) {
    std::ostringstream oss;
    oss << context << ": Gram condition estimate " << 1.0 / rcond
        << " exceeds 1e12";
    throw SingularGramError(oss.str());
  }
  return llt.solve(b);
}

double logdet_hermitian(const CMat& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("logdet_hermitian: matrix must be square");
  }
  const CMat sym = 0.5 * (a + a.adjoint());
  Eigen::LLT<CMat> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("logdet_hermitian: matrix is not positive definite");
  }
  // det(A) = prod |L_ii|^2 for A = L L^H.
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    acc += std::log2(l(i, i).real());
  }
  return 2.0 * acc;
}

bool UnitaryTransform::is_unitary(double tol) const {
  auto check = [tol](const CMat& u) {
    if (u.rows() != u.cols() || u.size() == 0) return false;
    const CMat err = u * u.adjoint() - CMat::Identity(u.rows(), u.cols());
    return err.norm() <= tol * std::sqrt(static_cast<double>(u.rows()));
  };
  return check(left) && check(right);
}

}  // namespace otfsmimo
