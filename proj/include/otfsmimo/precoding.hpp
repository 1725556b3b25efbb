#ifndef OTFSMIMO_PRECODING_HPP
#define OTFSMIMO_PRECODING_HPP

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "otfsmimo/channel.hpp"
#include "otfsmimo/types.hpp"

namespace otfsmimo {

/// User channel plus the modulation it is served with. In the hybrid scheme
/// high-mobility users run OTFS (delay-Doppler grid) and low-mobility users
/// run OFDM; the all-OFDM baselines force otfs = false for everyone.
struct ModulatedUser {
  UserChannel chan;
  bool otfs = true;
};

/// Receive-side transformed TD response of a user (L_k H^TD), the common
/// left factor of every domain matrix the user appears in.
CMat c_matrix(const ModulatedUser& user);

/// Block-stacked multiuser channel. `order` records (user_id, domain tag)
/// per block row, top to bottom.
struct StackedChannel {
  std::vector<std::pair<int, Domain>> order;
  CMat mat;  // (#users * MN) x (Nt * MN)
};

/// Per-user precoding matrices plus the normalization constants used to
/// build them. ws[i] belongs to user_ids[i] and is Nt*MN x MN, expressed in
/// that user's own modulation domain.
struct PrecoderSet {
  std::vector<int> user_ids;
  std::vector<CMat> ws;
  double alpha_fzf = 0.0;
  double alpha_pzf = 0.0;
  double alpha_mrt = 0.0;
  PrecoderKind kind = PrecoderKind::Fzf;

  const CMat& w_for(int user_id) const;
};

/// b_K^{(k)} (x) I_MN: K*MN x MN selector, identity block at block-row k
/// (1-based). Throws std::invalid_argument for k out of [1, K].
CMat selection_operator(int k_users, int k_index, int mn);

/// ZF normalization alpha = sqrt(group*mn / mean_r Tr[(H H^H)^-1]) over
/// r_norm draws of the stacked channel. The generator must be deterministic
/// in its draw index. Propagates SingularGramError from any draw.
double estimate_zf_alpha(const std::function<CMat(int)>& stacked_draw,
                         int group_users, int mn, int r_norm);

/// estimate_zf_alpha plus the Monte Carlo spread of the estimate itself.
struct ZfAlphaEstimate {
  double alpha = 0.0;
  double mean_trace = 0.0;
  double rel_std_error = 0.0;  // standard error of alpha relative to alpha
};

ZfAlphaEstimate estimate_zf_alpha_detailed(
    const std::function<CMat(int)>& stacked_draw, int group_users, int mn,
    int r_norm);

/// Full-ZF stack with the given transmit side: every user's channel in that
/// precoding domain (own-domain matrix for users modulated there, the cross
/// matrix for the rest). Block order: high-mobility users ascending id, then
/// low-mobility ascending id for tx_dd = true (H^FZF_H); the reverse group
/// order for tx_dd = false (H^FZF_L).
StackedChannel fzf_stack(const std::vector<ModulatedUser>& users, bool tx_dd);

/// ZF-group stack in the given transmit domain (H^PZF when the group shares
/// one modulation). Same ordering convention as fzf_stack.
StackedChannel pzf_stack(const std::vector<ModulatedUser>& group, bool tx_dd);

/// FZF precoders for all users: W_k = alpha * H^H (H H^H)^-1 (b_k (x) I)
/// with H = H^FZF_H for OTFS users and H^FZF_L for OFDM users.
/// Requires K <= Nt (full row rank).
PrecoderSet fzf_precoders(const std::vector<ModulatedUser>& users,
                          double alpha_fzf);

/// PZF precoders over the ZF group only: within-group zero-forcing, each
/// member's stack being the group expressed in that member's precoding
/// domain.
PrecoderSet pzf_precoders(const std::vector<ModulatedUser>& zf_group,
                          double alpha_pzf);

/// MRT precoders: W_k = (1/sqrt(Nt)) * (H_k^own)^H with the user's
/// own-domain channel.
PrecoderSet mrt_precoders(const std::vector<ModulatedUser>& mrt_group);

/// alpha_MRT closed form (no estimation).
inline double mrt_alpha(int nt) {
  return 1.0 / std::sqrt(static_cast<double>(nt));
}

}  // namespace otfsmimo

#endif  // OTFSMIMO_PRECODING_HPP
