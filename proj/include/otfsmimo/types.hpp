#ifndef OTFSMIMO_TYPES_HPP
#define OTFSMIMO_TYPES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace otfsmimo {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Signal-domain tag of a channel matrix. TD is the raw time-domain
/// response; DD/TF are the own-domain equivalents; CrossDD/CrossTF couple a
/// receiver in one domain to a transmitter precoded in the other.
enum class Domain { TD, DD, TF, CrossDD, CrossTF };

enum class Mobility { High, Low };

/// Angle-of-arrival prior for the uniform linear array.
/// UniformSin draws sin(phi) uniformly on [-1,1]; UniformPhi draws phi
/// uniformly on [-pi/2, pi/2].
enum class AoaPrior { UniformSin, UniformPhi };

enum class Scheme { FZF, PZF_HL, PZF_SW, OFDM_only_FZF, OFDM_only_PZF };

enum class GroupingCriterion { Mobility, ChannelGain };

enum class PrecoderKind { Fzf, PzfMrt };

/// Frame geometry: M subcarriers x N slots on Nt antennas, with the OFDM
/// cyclic-prefix budget expressed as a symbol count Lcp out of M*N.
struct GridDims {
  int m = 8;
  int n = 8;
  int nt = 100;
  int lcp = 13;

  int mn() const { return m * n; }

  /// CP symbol count for a fractional budget, rounded up so the CP is never
  /// under-provisioned.
  static int cp_symbols(int mn, double cp_fraction) {
    return static_cast<int>(std::ceil(cp_fraction * mn));
  }
};

inline GridDims make_grid(int m, int n, int nt, double cp_fraction = 0.2) {
  GridDims d;
  d.m = m;
  d.n = n;
  d.nt = nt;
  d.lcp = GridDims::cp_symbols(m * n, cp_fraction);
  return d;
}

/// Scenario/config validation failure (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A Gram matrix came out non-positive-definite or ill-conditioned.
class SingularGramError : public std::runtime_error {
 public:
  explicit SingularGramError(const std::string& msg)
      : std::runtime_error(msg) {}
};

/// Any other numerical failure (CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline const char* to_string(Mobility m) {
  return m == Mobility::High ? "high" : "low";
}

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::FZF: return "fzf";
    case Scheme::PZF_HL: return "pzf_hl";
    case Scheme::PZF_SW: return "pzf_sw";
    case Scheme::OFDM_only_FZF: return "ofdm_only_fzf";
    case Scheme::OFDM_only_PZF: return "ofdm_only_pzf";
  }
  return "?";
}

inline const char* to_string(GroupingCriterion g) {
  return g == GroupingCriterion::Mobility ? "mobility" : "channel_gain";
}

inline const char* to_string(AoaPrior p) {
  return p == AoaPrior::UniformSin ? "uniform_sin" : "uniform_phi";
}

}  // namespace otfsmimo

#endif  // OTFSMIMO_TYPES_HPP
