#include <doctest.h>

#include <map>

#include "otfsmimo/scenario.hpp"

using namespace otfsmimo;

namespace {

Scenario tiny_scenario(Scheme scheme) {
  Scenario s;
  s.dims = make_grid(2, 2, 8);
  s.k_h = 2;
  s.k_l = 2;
  s.p_paths = 2;
  s.l_max = 1;
  s.scheme = scheme;
  s.grouping = scheme == Scheme::PZF_SW ? GroupingCriterion::ChannelGain
                                        : GroupingCriterion::Mobility;
  s.k_s = 2;
  s.snr_db = {0.0, 10.0};
  s.realizations = 12;
  s.norm_realizations = 16;
  s.moment_samples = 2000;
  s.seed = 99;
  s.threads = 2;
  return s;
}

UserChannel fixed_user(int id, double gain, const GridDims& dims) {
  UserChannel u;
  u.user_id = id;
  u.mobility = Mobility::Low;
  u.dims = dims;
  u.paths.push_back({Complex(std::sqrt(gain), 0.0), 0, 0.0, 0.0});
  return u;
}

}  // namespace

TEST_CASE("group_hl splits by mobility") {
  const GridDims dims = make_grid(2, 2, 4);
  std::vector<UserChannel> users;
  for (int i = 1; i <= 6; ++i) {
    UserChannel u = fixed_user(i, 1.0, dims);
    u.mobility = i <= 3 ? Mobility::High : Mobility::Low;
    users.push_back(u);
  }
  const GroupAssignment ga = group_hl(users);
  CHECK(ga.zf_group == std::vector<int>{1, 2, 3});
  CHECK(ga.mrt_group == std::vector<int>{4, 5, 6});

  for (auto& u : users) u.mobility = Mobility::High;
  CHECK(group_hl(users).mrt_group.empty());
  for (auto& u : users) u.mobility = Mobility::Low;
  CHECK(group_hl(users).zf_group.empty());
}

TEST_CASE("group_sw ranks by small-scale gain") {
  const GridDims dims = make_grid(2, 2, 4);

  SUBCASE("argmax selection") {
    const std::vector<UserChannel> users = {fixed_user(1, 0.3, dims),
                                            fixed_user(2, 0.9, dims)};
    const GroupAssignment ga = group_sw(users, 1);
    CHECK(ga.zf_group == std::vector<int>{2});
    CHECK(ga.mrt_group == std::vector<int>{1});
  }

  SUBCASE("ties break toward the lowest id") {
    const std::vector<UserChannel> users = {fixed_user(3, 0.5, dims),
                                            fixed_user(1, 0.5, dims),
                                            fixed_user(2, 0.5, dims)};
    const GroupAssignment ga = group_sw(users, 2);
    CHECK(ga.zf_group == std::vector<int>{1, 2});
  }

  SUBCASE("bounds are enforced") {
    const std::vector<UserChannel> users = {fixed_user(1, 1.0, dims),
                                            fixed_user(2, 1.0, dims)};
    CHECK_THROWS_AS(group_sw(users, 0), std::invalid_argument);
    CHECK_THROWS_AS(group_sw(users, 2), std::invalid_argument);
  }

  SUBCASE("each user is strong with frequency ~ K_s/K") {
    const int k = 4, k_s = 2, reps = 2000;
    std::map<int, int> hits;
    for (int r = 0; r < reps; ++r) {
      Rng rng(substream_seed(7, StreamTag::Realization, r));
      std::vector<UserChannel> users;
      for (int i = 1; i <= k; ++i) {
        UserChannel u = draw_user_channel(rng, Mobility::Low, dims, 2, 1, 2.0,
                                          AoaPrior::UniformSin);
        u.user_id = i;
        users.push_back(std::move(u));
      }
      for (int id : group_sw(users, k_s).zf_group) ++hits[id];
    }
    for (int i = 1; i <= k; ++i) {
      CHECK(static_cast<double>(hits[i]) / reps ==
            doctest::Approx(0.5).epsilon(0.05));
    }
  }
}

TEST_CASE("realization_channels is deterministic and ordered") {
  const Scenario s = tiny_scenario(Scheme::FZF);
  const auto a = realization_channels(s, 1, 5);
  const auto b = realization_channels(s, 1, 5);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].user_id == static_cast<int>(i) + 1);
    CHECK(a[i].mobility == (i < 2 ? Mobility::High : Mobility::Low));
    REQUIRE(a[i].paths.size() == b[i].paths.size());
    for (std::size_t j = 0; j < a[i].paths.size(); ++j) {
      CHECK(a[i].paths[j].gain == b[i].paths[j].gain);
    }
  }
  const auto c = realization_channels(s, 0, 5);
  CHECK(a[0].paths[0].gain != c[0].paths[0].gain);
}

TEST_CASE("FZF scenario: simulated SE matches Proposition 1 exactly") {
  Scenario s = tiny_scenario(Scheme::FZF);
  s.capture_se_inputs = true;
  const ScenarioResult res = run_scenario(s);
  REQUIRE(res.rows.size() == 8);

  for (const auto& row : res.rows) {
    const double es = std::pow(10.0, row.snr_db / 10.0);
    const double closed = se_fzf_closed(
        es, res.alpha_fzf, s.dims,
        row.mobility == Mobility::High ? LinkModulation::Otfs
                                       : LinkModulation::Ofdm);
    CHECK(std::abs(row.se_sim - closed) / closed <= 1e-6);
    REQUIRE(row.se_closed.has_value());
    CHECK(*row.se_closed == doctest::Approx(closed).epsilon(1e-12));
    CHECK_FALSE(row.se_approx.has_value());
    CHECK(row.group_role == "zf");
    CHECK(row.ci95 >= 0.0);
    CHECK(row.ci95 < 1e-10);  // per-realization FZF rates are constant
  }

  // interference vanished inside Psi as well
  for (const auto& in : res.se_inputs) {
    CHECK((in.psi - CMat::Identity(s.dims.mn(), s.dims.mn())).norm() <= 1e-8);
  }

  // alpha consistency estimates agree (2% contract at this R_norm is noisy,
  // so only sanity-check they are close)
  CHECK(res.alpha_fzf == doctest::Approx(res.alpha_fzf_check).epsilon(0.2));
}

TEST_CASE("scenario determinism is bit-exact and thread-independent") {
  Scenario s = tiny_scenario(Scheme::PZF_HL);
  const ScenarioResult a = run_scenario(s);
  s.threads = 1;
  const ScenarioResult b = run_scenario(s);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].se_sim == b.rows[i].se_sim);
    CHECK(a.rows[i].ci95 == b.rows[i].ci95);
    if (a.rows[i].se_closed) {
      CHECK(*a.rows[i].se_closed == *b.rows[i].se_closed);
    }
  }
}

TEST_CASE("engine products match the dense precoder/channel pipeline") {
  // Rebuild one PZF_HL SNR point with dense ops and compare the accumulated
  // D-bar/Psi against the engine's captured SEInputs.
  Scenario s = tiny_scenario(Scheme::PZF_HL);
  s.snr_db = {6.0};
  s.realizations = 5;
  s.capture_se_inputs = true;
  const ScenarioResult res = run_scenario(s);
  const int mn = s.dims.mn();
  const double es = std::pow(10.0, 6.0 / 10.0);
  const double root_es = std::sqrt(es);

  std::vector<PsiAccumulator> acc(
      4, PsiAccumulator(mn, alpha_se_otfs(s.dims)));
  for (int r = 0; r < s.realizations; ++r) {
    const auto users = realization_channels(s, 0, r);
    std::vector<ModulatedUser> mus;
    for (const auto& u : users) {
      mus.push_back({u, u.mobility == Mobility::High});
    }
    const PrecoderSet zf =
        pzf_precoders({mus.begin(), mus.begin() + 2}, res.alpha_pzf);
    const PrecoderSet mrt = mrt_precoders({mus.begin() + 2, mus.end()});

    for (int k = 0; k < 4; ++k) {
      const ChannelMatrix td = td_channel(users[k]);
      const CMat own = mus[k].otfs ? dd_channel(td, s.dims).mat
                                   : tf_channel(td, s.dims).mat;
      const CMat cross = mus[k].otfs ? cross_dd_channel(td, s.dims).mat
                                     : cross_tf_channel(td, s.dims).mat;
      std::vector<CMat> d_row;
      for (int j = 0; j < 4; ++j) {
        const CMat& w = j < 2 ? zf.w_for(j + 1) : mrt.w_for(j + 1);
        const CMat& h = mus[j].otfs == mus[k].otfs ? own : cross;
        d_row.push_back(root_es * CMat(h * w));
      }
      acc[k].add(d_row, k);
    }
  }

  for (int k = 0; k < 4; ++k) {
    const SEInputs dense = acc[k].finalize();
    const SEInputs& fast = res.se_inputs[k];
    CHECK((dense.dbar - fast.dbar).norm() < 1e-9);
    CHECK((dense.psi - fast.psi).norm() < 1e-9);
  }
}

TEST_CASE("PZF with an empty MRT group degenerates to FZF") {
  Scenario pzf = tiny_scenario(Scheme::PZF_HL);
  pzf.k_h = 4;
  pzf.k_l = 0;
  const ScenarioResult a = run_scenario(pzf);

  Scenario fzf = tiny_scenario(Scheme::FZF);
  fzf.k_h = 4;
  fzf.k_l = 0;
  const ScenarioResult b = run_scenario(fzf);

  CHECK(a.alpha_pzf == doctest::Approx(b.alpha_fzf).epsilon(1e-12));
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(std::abs(a.rows[i].se_sim - b.rows[i].se_sim) /
              b.rows[i].se_sim <=
          1e-6);
  }
}

TEST_CASE("PZF_HL rows carry closed forms, SW rows do not") {
  const ScenarioResult hl = run_scenario(tiny_scenario(Scheme::PZF_HL));
  for (const auto& row : hl.rows) {
    CHECK(row.se_closed.has_value());
    CHECK(row.se_approx.has_value());
    CHECK(row.group_role == (row.mobility == Mobility::High ? "zf" : "mrt"));
    CHECK(row.se_sim >= 0.0);
  }

  const ScenarioResult sw = run_scenario(tiny_scenario(Scheme::PZF_SW));
  for (const auto& row : sw.rows) {
    CHECK_FALSE(row.se_closed.has_value());
    CHECK_FALSE(row.se_approx.has_value());
    CHECK(row.group_role == "n/a");
  }
}

TEST_CASE("sweep_kh shares the seed and forces PZF_HL") {
  Scenario base = tiny_scenario(Scheme::PZF_HL);
  base.snr_db = {10.0};
  base.realizations = 6;
  const auto results = sweep_kh(base, {1, 2, 3});
  REQUIRE(results.size() == 3);
  for (std::size_t i = 0; i < results.size(); ++i) {
    CHECK(results[i].scenario.k_h == static_cast<int>(i) + 1);
    CHECK(results[i].scenario.k_l == 4 - results[i].scenario.k_h);
    CHECK(results[i].scenario.seed == base.seed);
    CHECK(results[i].scenario.scheme == Scheme::PZF_HL);
  }
  CHECK_THROWS_AS(sweep_kh(base, {0}), ConfigError);
  CHECK_THROWS_AS(sweep_kh(base, {5}), ConfigError);
}

TEST_CASE("ofdm_baseline") {
  SUBCASE("maps schemes onto their all-OFDM counterparts") {
    Scenario s = tiny_scenario(Scheme::PZF_HL);
    s.snr_db = {0.0};
    s.realizations = 4;
    const ScenarioResult res = ofdm_baseline(s);
    CHECK(res.scenario.scheme == Scheme::OFDM_only_PZF);
    for (const auto& row : res.rows) {
      CHECK_FALSE(row.se_closed.has_value());
      CHECK(row.group_role == (row.mobility == Mobility::High ? "zf" : "mrt"));
    }
  }

  SUBCASE("all-OFDM FZF matches the CP-penalized closed form") {
    Scenario s = tiny_scenario(Scheme::FZF);
    const ScenarioResult res = ofdm_baseline(s);
    CHECK(res.scenario.scheme == Scheme::OFDM_only_FZF);
    for (const auto& row : res.rows) {
      const double es = std::pow(10.0, row.snr_db / 10.0);
      const double closed =
          se_fzf_closed(es, res.alpha_fzf, s.dims, LinkModulation::Ofdm);
      CHECK(std::abs(row.se_sim - closed) / closed <= 1e-6);
    }
  }

  SUBCASE("with zero CP the hybrid and all-OFDM FZF coincide") {
    Scenario s = tiny_scenario(Scheme::FZF);
    s.dims = make_grid(2, 2, 8, 0.0);
    const ScenarioResult hybrid = run_scenario(s);
    const ScenarioResult ofdm = ofdm_baseline(s);
    REQUIRE(hybrid.rows.size() == ofdm.rows.size());
    for (std::size_t i = 0; i < hybrid.rows.size(); ++i) {
      CHECK(hybrid.rows[i].se_sim ==
            doctest::Approx(ofdm.rows[i].se_sim).epsilon(1e-9));
    }
  }
}

TEST_CASE("scenario validation rejects infeasible setups") {
  Scenario s = tiny_scenario(Scheme::FZF);
  s.dims.nt = 3;  // K = 4 > Nt
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_WITH_AS(s.validate(),
                       doctest::Contains("rank condition"), ConfigError);

  Scenario sw = tiny_scenario(Scheme::PZF_SW);
  sw.k_s = 4;  // must stay below K
  CHECK_THROWS_AS(sw.validate(), ConfigError);

  Scenario empty = tiny_scenario(Scheme::FZF);
  empty.snr_db.clear();
  CHECK_THROWS_AS(empty.validate(), ConfigError);

  Scenario mismatch = tiny_scenario(Scheme::PZF_HL);
  mismatch.grouping = GroupingCriterion::ChannelGain;
  CHECK_THROWS_AS(mismatch.validate(), ConfigError);
}

TEST_CASE("group partition covers every user in every realization") {
  Scenario s = tiny_scenario(Scheme::PZF_SW);
  for (int r = 0; r < 20; ++r) {
    const auto users = realization_channels(s, 0, r);
    const GroupAssignment ga = group_sw(users, s.k_s);
    std::vector<int> all = ga.zf_group;
    all.insert(all.end(), ga.mrt_group.begin(), ga.mrt_group.end());
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<int>{1, 2, 3, 4});
  }
}
