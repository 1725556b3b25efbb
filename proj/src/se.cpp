#include "otfsmimo/se.hpp"

#include <cmath>

#include "otfsmimo/linalg.hpp"

namespace otfsmimo {

double alpha_se_otfs(const GridDims& dims) {
  return 1.0 / static_cast<double>(dims.mn());
}

double alpha_se_ofdm(const GridDims& dims) {
  const double mn = dims.mn();
  return (1.0 / mn) * ((mn - dims.lcp) / mn);
}

double se_mmse_sic(const SEInputs& inputs) {
  const Eigen::Index mn = inputs.dbar.rows();
  const CMat psi = 0.5 * (inputs.psi + inputs.psi.adjoint());
  CMat solved;
  try {
    solved = hermitian_solve(psi, inputs.dbar, {}, "se_mmse_sic Psi");
  } catch (const SingularGramError& e) {
    throw NumericalError(e.what());
  }
  const CMat m = CMat::Identity(mn, mn) + inputs.dbar.adjoint() * solved;
  return inputs.alpha_se * logdet_hermitian(m);
}

SEInputs accumulate_psi(const std::vector<std::vector<CMat>>& d_per_realization,
                        int self_index, double alpha_se) {
  if (d_per_realization.empty()) {
    throw std::invalid_argument("accumulate_psi: need at least one realization");
  }
  const Eigen::Index mn = d_per_realization.front().at(self_index).rows();
  PsiAccumulator acc(static_cast<int>(mn), alpha_se);
  for (const auto& row : d_per_realization) acc.add(row, self_index);
  return acc.finalize();
}

PsiAccumulator::PsiAccumulator(int mn, double alpha_se)
    : sum_self_(CMat::Zero(mn, mn)),
      sum_ddh_(CMat::Zero(mn, mn)),
      alpha_se_(alpha_se) {}

void PsiAccumulator::add(const std::vector<CMat>& d_row, int self_index) {
  for (const auto& d : d_row) sum_ddh_.noalias() += d * d.adjoint();
  sum_self_ += d_row.at(self_index);
  ++count_;
}

SEInputs PsiAccumulator::finalize() const {
  if (count_ == 0) {
    throw std::invalid_argument("PsiAccumulator: no realizations added");
  }
  SEInputs out;
  out.alpha_se = alpha_se_;
  out.dbar = sum_self_ / static_cast<double>(count_);
  const Eigen::Index mn = out.dbar.rows();
  CMat psi = CMat::Identity(mn, mn) + sum_ddh_ / static_cast<double>(count_) -
             out.dbar * out.dbar.adjoint();
  out.psi = 0.5 * (psi + psi.adjoint());
  return out;
}

double se_fzf_closed(double es, double alpha_fzf, const GridDims& dims,
                     LinkModulation mod) {
  const double base = std::log2(1.0 + alpha_fzf * alpha_fzf * es);
  const double alpha_se =
      mod == LinkModulation::Otfs ? alpha_se_otfs(dims) : alpha_se_ofdm(dims);
  return dims.mn() * alpha_se * base;
}

namespace {

// chi[k] = E{exp(j*pi*k*sin(phi))} for the configured prior; real by
// symmetry. UniformSin integrates to sinc(k) (zero at nonzero integers),
// UniformPhi to J0(pi*k).
std::vector<double> characteristic_sequence(int nt, AoaPrior prior) {
  std::vector<double> chi(nt, 0.0);
  chi[0] = 1.0;
  for (int k = 1; k < nt; ++k) {
    chi[k] = prior == AoaPrior::UniformSin
                 ? 0.0
                 : std::cyl_bessel_j(0.0, M_PI * static_cast<double>(k));
  }
  return chi;
}

// One sample of E{|theta_a theta_b^H|^2 | phi_a}: the expectation over the
// second angle is taken analytically through chi, which strips the
// heavy-tailed Dirichlet peak from the plain estimator.
double conditional_moment(double sin_a, int nt, const std::vector<double>& chi) {
  double acc = static_cast<double>(nt);  // k = 0 term
  for (int k = 1; k < nt; ++k) {
    acc += 2.0 * (nt - k) * chi[k] * std::cos(M_PI * k * sin_a);
  }
  return acc;
}

double draw_sin(Rng& rng, AoaPrior prior) {
  if (prior == AoaPrior::UniformSin) return rng.uniform(-1.0, 1.0);
  return std::sin(rng.uniform(-M_PI / 2.0, M_PI / 2.0));
}

}  // namespace

SteeringMoments estimate_steering_moments(Rng& rng, int nt, int p_paths,
                                          long n_samples, AoaPrior prior) {
  if (n_samples < 1) {
    throw std::invalid_argument("estimate_steering_moments: n_samples must be >= 1");
  }
  SteeringMoments m;
  m.same_path = static_cast<double>(nt) * nt;
  const auto chi = characteristic_sequence(nt, prior);

  double cross_acc = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    cross_acc += conditional_moment(draw_sin(rng, prior), nt, chi);
  }
  m.cross_user = cross_acc / static_cast<double>(n_samples);

  if (p_paths >= 2) {
    double same_acc = 0.0;
    for (long i = 0; i < n_samples; ++i) {
      same_acc += conditional_moment(draw_sin(rng, prior), nt, chi);
    }
    m.same_user_cross_path = same_acc / static_cast<double>(n_samples);
  } else {
    m.same_user_cross_path = m.cross_user;
  }
  return m;
}

double se_pzf_high_closed(const ClosedFormContext& ctx) {
  const double am2 = ctx.alpha_mrt * ctx.alpha_mrt;
  const double denom = 1.0 + ctx.k_l * ctx.es * am2 * ctx.moments.cross_user;
  return std::log2(1.0 + ctx.es * ctx.alpha_pzf * ctx.alpha_pzf / denom);
}

double se_pzf_high_approx(double es, double alpha_pzf, double alpha_mrt,
                          int k_l, int nt) {
  const double denom = 1.0 + k_l * es * alpha_mrt * alpha_mrt * nt;
  return std::log2(1.0 + es * alpha_pzf * alpha_pzf / denom);
}

namespace {

double logdet_rate(double es_nt, const CMat& inner, double alpha_se,
                   const char* what) {
  const Eigen::Index mn = inner.rows();
  CMat sym = 0.5 * (inner + inner.adjoint());
  CMat solved;
  try {
    solved = hermitian_solve(sym, CMat::Identity(mn, mn), {}, what);
  } catch (const SingularGramError& e) {
    throw NumericalError(std::string(what) +
                         ": interference matrix not positive definite (" +
                         e.what() + ")");
  }
  const CMat m = CMat::Identity(mn, mn) + es_nt * solved;
  return alpha_se * logdet_hermitian(m);
}

}  // namespace

double se_mrt_low_closed(const ClosedFormContext& ctx, const CMat& inter_term,
                         const GridDims& dims) {
  const int mn = dims.mn();
  const double am2 = ctx.alpha_mrt * ctx.alpha_mrt;
  const double nt = ctx.nt;
  const double p = ctx.p_paths;
  const double self_term =
      ctx.es * am2 *
      ((p + 1.0) / p * nt * nt +
       (p - 1.0) / p * ctx.moments.same_user_cross_path);
  const double intra_term =
      ctx.es * am2 * (ctx.k_l - 1) * ctx.moments.cross_user;
  CMat inner = (1.0 - ctx.es * nt + self_term + intra_term) *
               CMat::Identity(mn, mn);
  inner += static_cast<double>(ctx.k_h) * inter_term;
  return logdet_rate(ctx.es * nt, inner, alpha_se_ofdm(dims),
                     "se_mrt_low_closed");
}

double se_mrt_low_approx(const ClosedFormContext& ctx, const CMat& inter_term,
                         const GridDims& dims) {
  const int mn = dims.mn();
  const double am2 = ctx.alpha_mrt * ctx.alpha_mrt;
  const double nt = ctx.nt;
  const double psi = 1.0 +
                     (nt + (nt - 1.0) / ctx.p_paths + ctx.k_l) * ctx.es * am2 * nt -
                     ctx.es * nt;
  CMat inner = psi * CMat::Identity(mn, mn);
  inner += static_cast<double>(ctx.k_h) * inter_term;
  return logdet_rate(ctx.es * nt, inner, alpha_se_ofdm(dims),
                     "se_mrt_low_approx");
}

}  // namespace otfsmimo
