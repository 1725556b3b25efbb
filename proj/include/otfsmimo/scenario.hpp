#ifndef OTFSMIMO_SCENARIO_HPP
#define OTFSMIMO_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otfsmimo/channel.hpp"
#include "otfsmimo/precoding.hpp"
#include "otfsmimo/se.hpp"
#include "otfsmimo/types.hpp"

namespace otfsmimo {

/// One simulation campaign: geometry, user population, precoding scheme,
/// SNR grid and Monte Carlo sizes. SNR maps to symbol power directly
/// (Es = 10^(snr/10), unit noise covariance).
struct Scenario {
  GridDims dims = make_grid(8, 8, 100, 0.2);
  int k_h = 3;
  int k_l = 3;
  int p_paths = 2;
  int l_max = 4;
  double k_max_high = 4.0;
  double k_max_low = 2.0;
  AoaPrior aoa_prior = AoaPrior::UniformSin;
  Scheme scheme = Scheme::FZF;
  GroupingCriterion grouping = GroupingCriterion::Mobility;
  int k_s = 3;
  std::vector<double> snr_db = {-10, -5, 0, 5, 10, 15, 20};
  int realizations = 100;
  int norm_realizations = 100;
  long moment_samples = 100000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  /// Keep per-(user,snr) SEInputs in the result for numerical diagnostics.
  bool capture_se_inputs = false;

  int k_total() const { return k_h + k_l; }
  /// Throws ConfigError on invariant violations (including the ZF rank
  /// conditions K <= Nt / K_zf <= Nt).
  void validate() const;
};

/// Disjoint ZF/MRT user partition.
struct GroupAssignment {
  std::vector<int> zf_group;
  std::vector<int> mrt_group;
  GroupingCriterion criterion = GroupingCriterion::Mobility;
};

/// HL grouping: ZF for every high-mobility user, MRT for the rest.
GroupAssignment group_hl(const std::vector<UserChannel>& users);

/// SW grouping: ZF for the k_s users with the largest small-scale gain
/// sum_i |h_i|^2, ties broken by ascending user id. Recomputed per
/// realization by the engine.
GroupAssignment group_sw(const std::vector<UserChannel>& users, int k_s);

struct UserSnrResult {
  int user_id = 0;
  Mobility mobility = Mobility::High;
  std::string group_role;  // "zf", "mrt" or "n/a"
  double snr_db = 0.0;
  double se_sim = 0.0;
  std::optional<double> se_closed;
  std::optional<double> se_approx;
  double ci95 = 0.0;  // half-width from per-realization SE samples
};

struct GroupMeans {
  double snr_db = 0.0;
  std::optional<double> high_mean;
  std::optional<double> low_mean;
  std::optional<double> high_ci95;
  std::optional<double> low_ci95;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<UserSnrResult> rows;  // ordered by (snr index, user_id)
  std::vector<GroupMeans> group_means;
  double alpha_fzf = 0.0;
  double alpha_fzf_check = 0.0;  // independent alpha_FZF,L estimate
  double alpha_pzf = 0.0;
  double alpha_mrt = 0.0;
  SteeringMoments moments;
  double wall_seconds = 0.0;  // not serialized (outputs stay byte-stable)
  std::vector<SEInputs> se_inputs;  // row-aligned, when capture_se_inputs
};

/// Deterministic redraw of the realization-r channel set at one SNR point
/// (user ids 1..K, high-mobility first). Exposed so tests and the
/// acceptance suite can rebuild the exact realizations a run used.
std::vector<UserChannel> realization_channels(const Scenario& s, int snr_idx,
                                              int r);

/// Full Monte Carlo run: estimates the normalization constants on dedicated
/// substreams, sweeps the SNR grid with `realizations` channel draws per
/// point, and evaluates simulated and closed-form SE per user.
ScenarioResult run_scenario(const Scenario& s);

/// PZF/HL runs for each K_h split (K_l = K - K_h), sharing the base seed so
/// curves are comparable.
std::vector<ScenarioResult> sweep_kh(const Scenario& base,
                                     const std::vector<int>& kh_values);

/// Same pipeline with every user forced to OFDM (CP penalty for all).
ScenarioResult ofdm_baseline(const Scenario& s);

}  // namespace otfsmimo

#endif  // OTFSMIMO_SCENARIO_HPP
