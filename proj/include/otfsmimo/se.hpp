#ifndef OTFSMIMO_SE_HPP
#define OTFSMIMO_SE_HPP

#include <vector>

#include "otfsmimo/rng.hpp"
#include "otfsmimo/types.hpp"

namespace otfsmimo {

/// Inputs of the MMSE-SIC rate expression: D̄ = E{D_kk}, Psi the effective
/// noise-plus-interference covariance, and the per-symbol normalization
/// (1/MN for OTFS, (1/MN)*(MN-Lcp)/MN for OFDM).
struct SEInputs {
  CMat dbar;
  CMat psi;
  double alpha_se = 0.0;
};

/// SE_k = alpha_se * log2 det(I + D̄^H Psi^-1 D̄), in bits/s/Hz.
/// Throws NumericalError when Psi is not positive definite.
double se_mmse_sic(const SEInputs& inputs);

/// Build SEInputs from per-realization effective-channel products.
/// d_per_realization[r][j] = D_kk'(r) for interferer index j; self_index
/// marks the desired user's column. Psi = I + sum_j mean_r(D D^H)
/// - D̄ D̄^H, symmetrized. Throws std::invalid_argument on an empty list.
SEInputs accumulate_psi(const std::vector<std::vector<CMat>>& d_per_realization,
                        int self_index, double alpha_se);

/// Streaming equivalent of accumulate_psi for long Monte Carlo runs; add()
/// must be called in a fixed realization order for bit-reproducibility.
class PsiAccumulator {
 public:
  PsiAccumulator(int mn, double alpha_se);

  /// d_row[j] = D_kk' for this realization; self_index marks D_kk.
  void add(const std::vector<CMat>& d_row, int self_index);
  SEInputs finalize() const;
  int count() const { return count_; }

 private:
  CMat sum_self_;
  CMat sum_ddh_;
  double alpha_se_;
  int count_ = 0;
};

/// Per-symbol SE normalization constants.
double alpha_se_otfs(const GridDims& dims);
double alpha_se_ofdm(const GridDims& dims);

enum class LinkModulation { Otfs, Ofdm };

/// FZF closed form: log2(1 + alpha^2 Es) for OTFS users, scaled by
/// (MN-Lcp)/MN for OFDM users.
double se_fzf_closed(double es, double alpha_fzf, const GridDims& dims,
                     LinkModulation mod);

/// Monte Carlo estimates of E{|theta_a theta_b^H|^2} under the configured
/// AoA prior: exact Nt^2 for the same path, sampled for same-user distinct
/// paths and for independent-user pairs.
struct SteeringMoments {
  double same_path = 0.0;
  double same_user_cross_path = 0.0;
  double cross_user = 0.0;
};

SteeringMoments estimate_steering_moments(Rng& rng, int nt, int p_paths,
                                          long n_samples, AoaPrior prior);

/// Constants feeding the closed-form SE expressions.
struct ClosedFormContext {
  double es = 1.0;
  double alpha_pzf = 0.0;
  double alpha_mrt = 0.0;
  int nt = 0;
  int p_paths = 1;
  int k_h = 0;
  int k_l = 0;
  SteeringMoments moments;
};

/// PZF/HL high-mobility closed form:
/// log2(1 + Es a_PZF^2 / (1 + K_l Es a_MRT^2 m_cross)).
double se_pzf_high_closed(const ClosedFormContext& ctx);

/// Corollary approximation with m_cross -> Nt:
/// log2(1 + Es a_PZF^2 / (1 + K_l Es a_MRT^2 Nt)).
double se_pzf_high_approx(double es, double alpha_pzf, double alpha_mrt,
                          int k_l, int nt);

/// MRT low-mobility closed form; inter_term is the sample mean of
/// D_{k_l k_h'} D^H over realizations (no closed form exists for it).
/// Throws NumericalError when the inner matrix is not positive definite.
double se_mrt_low_closed(const ClosedFormContext& ctx, const CMat& inter_term,
                         const GridDims& dims);

/// Corollary approximation with the psi scalar absorbing the diagonal terms.
double se_mrt_low_approx(const ClosedFormContext& ctx, const CMat& inter_term,
                         const GridDims& dims);

}  // namespace otfsmimo

#endif  // OTFSMIMO_SE_HPP
