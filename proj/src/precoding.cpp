#include "otfsmimo/precoding.hpp"

#include <algorithm>
#include <numeric>

namespace otfsmimo {

namespace {

// Per-antenna transmit-side factor of a precoding domain.
CMat tx_right_factor(const GridDims& d, bool tx_dd) {
  if (tx_dd) {
    return kron(dft_matrix(d.n).adjoint(), CMat::Identity(d.m, d.m));
  }
  return kron(CMat::Identity(d.n, d.n), dft_matrix(d.m).adjoint());
}

// Users in stack order: own-modulation group of the tx domain first, then
// the cross group, ascending id within each.
std::vector<const ModulatedUser*> stack_order(
    const std::vector<ModulatedUser>& users, bool tx_dd) {
  std::vector<const ModulatedUser*> ordered;
  ordered.reserve(users.size());
  for (const auto& u : users) ordered.push_back(&u);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [tx_dd](const ModulatedUser* a, const ModulatedUser* b) {
                     const bool a_own = a->otfs == tx_dd;
                     const bool b_own = b->otfs == tx_dd;
                     if (a_own != b_own) return a_own;
                     return a->chan.user_id < b->chan.user_id;
                   });
  return ordered;
}

Domain block_domain(bool otfs_user, bool tx_dd) {
  if (otfs_user) return tx_dd ? Domain::DD : Domain::CrossDD;
  return tx_dd ? Domain::CrossTF : Domain::TF;
}

StackedChannel build_stack(const std::vector<ModulatedUser>& users,
                           bool tx_dd) {
  if (users.empty()) {
    throw std::invalid_argument("stacked channel: empty user set");
  }
  const GridDims& d = users.front().chan.dims;
  const int mn = d.mn();
  const CMat right = tx_right_factor(d, tx_dd);
  const auto ordered = stack_order(users, tx_dd);

  StackedChannel s;
  s.mat.resize(static_cast<Eigen::Index>(users.size()) * mn,
               static_cast<Eigen::Index>(d.nt) * mn);
  for (std::size_t b = 0; b < ordered.size(); ++b) {
    const auto& u = *ordered[b];
    const CMat c = rx_transformed_td(u.chan, u.otfs);
    for (int a = 0; a < d.nt; ++a) {
      s.mat.block(b * mn, static_cast<Eigen::Index>(a) * mn, mn, mn)
          .noalias() = c.middleCols(static_cast<Eigen::Index>(a) * mn, mn) * right;
    }
    s.order.emplace_back(u.chan.user_id, block_domain(u.otfs, tx_dd));
  }
  return s;
}

// Canonical receive-transformed stack (high/OTFS-independent order:
// mobility then id, matching fzf_stack's tx_dd = true convention) plus the
// id -> block index map. The Gram of this stack equals the Gram of any
// tx-domain stack with the same block order.
struct CStack {
  CMat mat;
  std::vector<int> ids;
  std::vector<bool> otfs;
  int index_of(int user_id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == user_id) return static_cast<int>(i);
    }
    throw std::invalid_argument("unknown user id in stack");
  }
};

CStack build_cstack(const std::vector<ModulatedUser>& users, bool tx_dd) {
  const GridDims& d = users.front().chan.dims;
  const int mn = d.mn();
  const auto ordered = stack_order(users, tx_dd);
  CStack cs;
  cs.mat.resize(static_cast<Eigen::Index>(users.size()) * mn,
                static_cast<Eigen::Index>(d.nt) * mn);
  for (std::size_t b = 0; b < ordered.size(); ++b) {
    cs.mat.middleRows(b * mn, mn) = c_matrix(*ordered[b]);
    cs.ids.push_back(ordered[b]->chan.user_id);
    cs.otfs.push_back(ordered[b]->otfs);
  }
  return cs;
}

// Effective time-domain ZF precoders V_k = alpha S^H (S S^H)^-1 (b_k (x) I)
// for every stack member; W_k = (I_Nt (x) R_k^H) V_k restores the
// modulation-domain precoder. The transmit-side unitary factor cancels
// inside the Gram, so one Cholesky serves all members.
std::vector<CMat> zf_effective_precoders(const CStack& cs, double alpha,
                                         const GridDims& d,
                                         const std::string& context) {
  const int mn = d.mn();
  const CMat gram = cs.mat * cs.mat.adjoint();
  const CMat x = hermitian_solve(gram, CMat::Identity(gram.rows(), gram.cols()),
                                 {}, context);
  const CMat v_all = alpha * (cs.mat.adjoint() * x);
  std::vector<CMat> v;
  v.reserve(cs.ids.size());
  for (std::size_t b = 0; b < cs.ids.size(); ++b) {
    v.push_back(v_all.middleCols(b * mn, mn));
  }
  return v;
}

CMat to_domain_precoder(const CMat& v, const GridDims& d, bool otfs_user) {
  // W = (I_Nt (x) R^H) V, blockwise per antenna.
  const CMat rh = tx_right_factor(d, otfs_user).adjoint();
  const int mn = d.mn();
  CMat w(v.rows(), v.cols());
  for (int a = 0; a < d.nt; ++a) {
    w.middleRows(static_cast<Eigen::Index>(a) * mn, mn).noalias() =
        rh * v.middleRows(static_cast<Eigen::Index>(a) * mn, mn);
  }
  return w;
}

}  // namespace

CMat c_matrix(const ModulatedUser& user) {
  return rx_transformed_td(user.chan, user.otfs);
}

const CMat& PrecoderSet::w_for(int user_id) const {
  for (std::size_t i = 0; i < user_ids.size(); ++i) {
    if (user_ids[i] == user_id) return ws[i];
  }
  throw std::invalid_argument("PrecoderSet: unknown user id " +
                              std::to_string(user_id));
}

CMat selection_operator(int k_users, int k_index, int mn) {
  if (k_index < 1 || k_index > k_users) {
    throw std::invalid_argument("selection_operator: index " +
                                std::to_string(k_index) + " out of [1, " +
                                std::to_string(k_users) + "]");
  }
  CMat b = CMat::Zero(static_cast<Eigen::Index>(k_users) * mn, mn);
  b.middleRows(static_cast<Eigen::Index>(k_index - 1) * mn, mn) =
      CMat::Identity(mn, mn);
  return b;
}

ZfAlphaEstimate estimate_zf_alpha_detailed(
    const std::function<CMat(int)>& stacked_draw, int group_users, int mn,
    int r_norm) {
  if (r_norm < 1) throw std::invalid_argument("estimate_zf_alpha: R_norm must be >= 1");
  std::vector<double> traces(r_norm);
  for (int r = 0; r < r_norm; ++r) {
    const CMat h = stacked_draw(r);
    const CMat gram = h * h.adjoint();
    const CMat inv = hermitian_solve(
        gram, CMat::Identity(gram.rows(), gram.cols()), {},
        "estimate_zf_alpha draw " + std::to_string(r));
    traces[r] = inv.trace().real();
  }
  ZfAlphaEstimate est;
  est.mean_trace =
      std::accumulate(traces.begin(), traces.end(), 0.0) / r_norm;
  est.alpha = std::sqrt(static_cast<double>(group_users) * mn / est.mean_trace);
  if (r_norm > 1) {
    double ss = 0.0;
    for (double t : traces) ss += (t - est.mean_trace) * (t - est.mean_trace);
    const double se_trace = std::sqrt(ss / (r_norm - 1.0) / r_norm);
    // alpha ~ T^-1/2, so the relative spread halves.
    est.rel_std_error = 0.5 * se_trace / est.mean_trace;
  }
  return est;
}

double estimate_zf_alpha(const std::function<CMat(int)>& stacked_draw,
                         int group_users, int mn, int r_norm) {
  return estimate_zf_alpha_detailed(stacked_draw, group_users, mn, r_norm)
      .alpha;
}

StackedChannel fzf_stack(const std::vector<ModulatedUser>& users, bool tx_dd) {
  return build_stack(users, tx_dd);
}

StackedChannel pzf_stack(const std::vector<ModulatedUser>& group, bool tx_dd) {
  return build_stack(group, tx_dd);
}

PrecoderSet fzf_precoders(const std::vector<ModulatedUser>& users,
                          double alpha_fzf) {
  if (users.empty()) throw std::invalid_argument("fzf_precoders: no users");
  const GridDims& d = users.front().chan.dims;
  if (static_cast<int>(users.size()) > d.nt) {
    throw std::invalid_argument("fzf_precoders: K exceeds Nt, stacked channel is rank deficient");
  }
  const CStack cs = build_cstack(users, true);
  const auto v = zf_effective_precoders(cs, alpha_fzf, d, "FZF stacked Gram");

  PrecoderSet set;
  set.kind = PrecoderKind::Fzf;
  set.alpha_fzf = alpha_fzf;
  for (const auto& u : users) {
    const int b = cs.index_of(u.chan.user_id);
    set.user_ids.push_back(u.chan.user_id);
    set.ws.push_back(to_domain_precoder(v[b], d, u.otfs));
  }
  return set;
}

PrecoderSet pzf_precoders(const std::vector<ModulatedUser>& zf_group,
                          double alpha_pzf) {
  if (zf_group.empty()) throw std::invalid_argument("pzf_precoders: empty ZF group");
  const GridDims& d = zf_group.front().chan.dims;
  if (static_cast<int>(zf_group.size()) > d.nt) {
    throw std::invalid_argument("pzf_precoders: group size exceeds Nt");
  }
  const CStack cs = build_cstack(zf_group, true);
  const auto v = zf_effective_precoders(cs, alpha_pzf, d, "PZF stacked Gram");

  PrecoderSet set;
  set.kind = PrecoderKind::PzfMrt;
  set.alpha_pzf = alpha_pzf;
  set.alpha_mrt = mrt_alpha(d.nt);
  for (const auto& u : zf_group) {
    const int b = cs.index_of(u.chan.user_id);
    set.user_ids.push_back(u.chan.user_id);
    set.ws.push_back(to_domain_precoder(v[b], d, u.otfs));
  }
  return set;
}

PrecoderSet mrt_precoders(const std::vector<ModulatedUser>& mrt_group) {
  if (mrt_group.empty()) throw std::invalid_argument("mrt_precoders: empty MRT group");
  const GridDims& d = mrt_group.front().chan.dims;
  const double alpha = mrt_alpha(d.nt);

  PrecoderSet set;
  set.kind = PrecoderKind::PzfMrt;
  set.alpha_mrt = alpha;
  for (const auto& u : mrt_group) {
    const ChannelMatrix td = td_channel(u.chan);
    const ChannelMatrix own = u.otfs ? dd_channel(td, d) : tf_channel(td, d);
    set.user_ids.push_back(u.chan.user_id);
    set.ws.push_back(alpha * own.mat.adjoint());
  }
  return set;
}

}  // namespace otfsmimo
