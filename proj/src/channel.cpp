#include "otfsmimo/channel.hpp"

#include <cmath>
#include <ostream>

namespace otfsmimo {

namespace {

const char* domain_name(Domain d) {
  switch (d) {
    case Domain::TD: return "TD";
    case Domain::DD: return "DD";
    case Domain::TF: return "TF";
    case Domain::CrossDD: return "crossDD";
    case Domain::CrossTF: return "crossTF";
  }
  return "?";
}

void require_td(const ChannelMatrix& m, const char* op) {
  if (m.domain != Domain::TD) {
    throw std::invalid_argument(std::string(op) + ": expected a TD-tagged channel, got " +
                                domain_name(m.domain));
  }
}

// H_out = left * H_td * (I_Nt (x) right), applied per antenna block so the
// Nt*MN x Nt*MN transmit transform is never materialized.
CMat sandwich(const CMat& td, const CMat& left, const CMat& right, int nt) {
  const Eigen::Index mn = td.rows();
  CMat out(mn, td.cols());
  const CMat lh = left * td;
  for (int a = 0; a < nt; ++a) {
    out.middleCols(a * mn, mn).noalias() = lh.middleCols(a * mn, mn) * right;
  }
  return out;
}

// gain * Pi^l * Delta^k assembled directly: column j carries
// gain * exp(j*2*pi*k*j/MN) at row (j + l) mod MN.
CMat path_matrix(const PathParams& p, int mn) {
  CMat a = CMat::Zero(mn, mn);
  for (int j = 0; j < mn; ++j) {
    const double arg = 2.0 * M_PI * p.doppler_index * j / mn;
    a((j + p.delay_index) % mn, j) = p.gain * Complex(std::cos(arg), std::sin(arg));
  }
  return a;
}

}  // namespace

CMat steering_vector(double aoa, int nt) {
  if (nt < 1) throw std::invalid_argument("steering_vector: nt must be >= 1");
  CMat theta(1, nt);
  const double s = std::sin(aoa);
  for (int i = 0; i < nt; ++i) {
    const double arg = -M_PI * i * s;
    theta(0, i) = Complex(std::cos(arg), std::sin(arg));
  }
  return theta;
}

UserChannel draw_user_channel(Rng& rng, Mobility mobility,
                              const GridDims& dims, int p_paths, int l_max,
                              double k_max, AoaPrior prior) {
  if (p_paths < 1) throw std::invalid_argument("draw_user_channel: P must be >= 1");
  UserChannel u;
  u.mobility = mobility;
  u.dims = dims;
  u.paths.resize(p_paths);
  const double var_per_dim = 1.0 / (2.0 * p_paths);
  for (auto& path : u.paths) {
    path.gain = rng.cgaussian(var_per_dim);
    path.delay_index = rng.uniform_int(0, l_max);
    path.doppler_index = rng.uniform(-k_max, k_max);
    if (prior == AoaPrior::UniformSin) {
      path.aoa = std::asin(rng.uniform(-1.0, 1.0));
    } else {
      path.aoa = rng.uniform(-M_PI / 2.0, M_PI / 2.0);
    }
  }
  return u;
}

ChannelMatrix td_channel(const UserChannel& user) {
  const int mn = user.dims.mn();
  const int nt = user.dims.nt;
  if (user.paths.empty()) {
    throw std::invalid_argument("td_channel: user has no paths");
  }
  CMat h = CMat::Zero(mn, static_cast<Eigen::Index>(nt) * mn);
  for (const auto& p : user.paths) {
    const CMat a = path_matrix(p, mn);
    const CMat theta = steering_vector(p.aoa, nt);
    for (int ant = 0; ant < nt; ++ant) {
      h.middleCols(static_cast<Eigen::Index>(ant) * mn, mn) += theta(0, ant) * a;
    }
  }
  return {Domain::TD, std::move(h)};
}

UnitaryTransform domain_transform(Domain domain, const GridDims& dims) {
  const CMat fn = dft_matrix(dims.n);
  const CMat fm = dft_matrix(dims.m);
  const CMat im = CMat::Identity(dims.m, dims.m);
  const CMat in = CMat::Identity(dims.n, dims.n);
  const CMat l_dd = kron(fn, im);
  const CMat l_tf = kron(in, fm);
  const CMat r_dd = kron(fn.adjoint(), im);
  const CMat r_tf = kron(in, fm.adjoint());
  switch (domain) {
    case Domain::DD: return {l_dd, r_dd};
    case Domain::TF: return {l_tf, r_tf};
    case Domain::CrossDD: return {l_dd, r_tf};
    case Domain::CrossTF: return {l_tf, r_dd};
    case Domain::TD: break;
  }
  throw std::invalid_argument("domain_transform: TD has no transform pair");
}

namespace {

ChannelMatrix transformed(const ChannelMatrix& td, const GridDims& dims,
                          Domain target, const char* op) {
  require_td(td, op);
  const UnitaryTransform t = domain_transform(target, dims);
  return {target, sandwich(td.mat, t.left, t.right, dims.nt)};
}

}  // namespace

ChannelMatrix dd_channel(const ChannelMatrix& td, const GridDims& dims) {
  return transformed(td, dims, Domain::DD, "dd_channel");
}

ChannelMatrix tf_channel(const ChannelMatrix& td, const GridDims& dims) {
  return transformed(td, dims, Domain::TF, "tf_channel");
}

ChannelMatrix cross_dd_channel(const ChannelMatrix& td, const GridDims& dims) {
  return transformed(td, dims, Domain::CrossDD, "cross_dd_channel");
}

ChannelMatrix cross_tf_channel(const ChannelMatrix& td, const GridDims& dims) {
  return transformed(td, dims, Domain::CrossTF, "cross_tf_channel");
}

CMat rx_transformed_td(const UserChannel& user, bool dd_receive) {
  const GridDims& d = user.dims;
  const CMat left = dd_receive
                        ? kron(dft_matrix(d.n), CMat::Identity(d.m, d.m))
                        : kron(CMat::Identity(d.n, d.n), dft_matrix(d.m));
  return left * td_channel(user).mat;
}

void dump_paths(const std::vector<UserChannel>& users, std::ostream& os) {
  os << "# user i re_h im_h l k phi\n";
  char line[192];
  for (const auto& u : users) {
    for (std::size_t i = 0; i < u.paths.size(); ++i) {
      const auto& p = u.paths[i];
      std::snprintf(line, sizeof(line), "%d %zu %.17g %.17g %d %.17g %.17g\n",
                    u.user_id, i, p.gain.real(), p.gain.imag(), p.delay_index,
                    p.doppler_index, p.aoa);
      os << line;
    }
  }
}

std::vector<ReceivedSignal> assemble_received_signal(
    const std::vector<UserRxChannels>& channels,
    const std::vector<CMat>& precoders, const std::vector<CVec>& symbols,
    double es, const std::vector<CVec>& noise) {
  const std::size_t k = channels.size();
  if (precoders.size() != k || symbols.size() != k || noise.size() != k) {
    throw std::invalid_argument(
        "assemble_received_signal: user sets of channels, precoders, symbols "
        "and noise must match");
  }
  const double root_es = std::sqrt(es);
  // Precoded transmit contributions x_k' = W_k' s_k' (per-user effective
  // vectors seen through each receiver's own/cross matrix).
  std::vector<CVec> tx(k);
  for (std::size_t j = 0; j < k; ++j) {
    if (precoders[j].cols() != symbols[j].rows()) {
      throw std::invalid_argument("assemble_received_signal: symbol length mismatch");
    }
    tx[j] = precoders[j] * symbols[j];
  }

  std::vector<ReceivedSignal> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& rx = channels[i];
    const Eigen::Index mn = rx.own.rows();
    if (noise[i].rows() != mn) {
      throw std::invalid_argument("assemble_received_signal: noise length mismatch");
    }
    ReceivedSignal sig;
    sig.user_id = rx.user_id;
    sig.desired = CVec::Zero(mn);
    sig.intra = CVec::Zero(mn);
    sig.inter = CVec::Zero(mn);
    for (std::size_t j = 0; j < k; ++j) {
      const bool same_group = channels[j].otfs == rx.otfs;
      const CMat& h = same_group ? rx.own : rx.cross;
      const CVec y = root_es * (h * tx[j]);
      if (j == i) {
        sig.desired = y;
      } else if (same_group) {
        sig.intra += y;
      } else {
        sig.inter += y;
      }
    }
    sig.total = sig.desired + sig.intra + sig.inter + noise[i];
    out[i] = std::move(sig);
  }
  return out;
}

}  // namespace otfsmimo
