#ifndef OTFSMIMO_CHANNEL_HPP
#define OTFSMIMO_CHANNEL_HPP

#include <iosfwd>
#include <vector>

#include "otfsmimo/linalg.hpp"
#include "otfsmimo/rng.hpp"
#include "otfsmimo/types.hpp"

namespace otfsmimo {

/// One resolvable path: complex gain, integer delay index, real (possibly
/// fractional) Doppler index, and angle of arrival in radians.
struct PathParams {
  Complex gain;
  int delay_index = 0;
  double doppler_index = 0.0;
  double aoa = 0.0;
};

struct UserChannel {
  int user_id = 0;
  Mobility mobility = Mobility::High;
  GridDims dims;
  std::vector<PathParams> paths;
};

/// Dense channel matrix tagged with the domain it lives in (MN x Nt*MN).
struct ChannelMatrix {
  Domain domain = Domain::TD;
  CMat mat;
};

/// Half-wavelength ULA steering row vector (1 x nt):
/// entry i = exp(-j*pi*i*sin(aoa)). Squared norm is nt exactly.
CMat steering_vector(double aoa, int nt);

/// Draw P paths for one user: gains CN(0, 1/P) (uniform power delay
/// profile), integer delays uniform on {0..l_max}, continuous Doppler
/// uniform on [-k_max, k_max], AoA from `prior`. Deterministic given the
/// generator state.
UserChannel draw_user_channel(Rng& rng, Mobility mobility,
                              const GridDims& dims, int p_paths, int l_max,
                              double k_max, AoaPrior prior);

/// Time-domain response: H^TD = sum_i theta_i (x) (h_i Pi^{l_i} Delta^{k_i}),
/// shape MN x Nt*MN. Large-scale fading is fixed at 1 (inverse power
/// control).
ChannelMatrix td_channel(const UserChannel& user);

/// Domain-equivalent channels; each requires a TD-tagged input and preserves
/// the Frobenius norm (unitary sandwiches).
ChannelMatrix dd_channel(const ChannelMatrix& td, const GridDims& dims);
ChannelMatrix tf_channel(const ChannelMatrix& td, const GridDims& dims);
ChannelMatrix cross_dd_channel(const ChannelMatrix& td, const GridDims& dims);
ChannelMatrix cross_tf_channel(const ChannelMatrix& td, const GridDims& dims);

/// Receive/transmit transform pair that produces a given domain matrix from
/// the TD response (left is MN x MN, right is the per-antenna factor).
UnitaryTransform domain_transform(Domain domain, const GridDims& dims);

/// Left (receive-side) half-transform of the TD response: L * H^TD.
/// The DD side applies F_N (x) I_M, the TF side I_N (x) F_M. All stacked
/// channels and precoder products in the engine are built from these.
CMat rx_transformed_td(const UserChannel& user, bool dd_receive);

/// Debug dump: one whitespace-separated record per path with fields
/// (user, i, re(h), im(h), l, k, phi).
void dump_paths(const std::vector<UserChannel>& users, std::ostream& os);

/// Per-user receive-side channels needed to assemble a received frame:
/// `own` couples transmissions precoded in the user's own modulation domain,
/// `cross` couples the other modulation group. `otfs` tags the user's
/// modulation (true = DD-grid/OTFS, false = TF-grid/OFDM).
struct UserRxChannels {
  int user_id = 0;
  Mobility mobility = Mobility::High;
  bool otfs = true;
  CMat own;
  CMat cross;
};

/// Received vector for one user split into the Eq.-(8)/(9)-style parts.
/// total = desired + intra + inter + noise (exact closure).
struct ReceivedSignal {
  int user_id = 0;
  CVec total;
  CVec desired;
  CVec intra;
  CVec inter;
};

/// Assemble per-user received vectors for one realization. `precoders[k]`
/// is user k's precoding matrix in its own modulation domain (Nt*MN x MN);
/// symbols and noise are per-user MN vectors. Intra collects same-modulation
/// interferers, inter the other modulation group. Throws
/// std::invalid_argument on mismatched user sets or dimensions.
std::vector<ReceivedSignal> assemble_received_signal(
    const std::vector<UserRxChannels>& channels,
    const std::vector<CMat>& precoders, const std::vector<CVec>& symbols,
    double es, const std::vector<CVec>& noise);

}  // namespace otfsmimo

#endif  // OTFSMIMO_CHANNEL_HPP
