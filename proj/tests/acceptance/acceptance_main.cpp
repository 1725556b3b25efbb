// Acceptance suite: runs the production-scale checks (Nt = 100, M = N = 8,
// K = 6) and prints one PASS/FAIL line per criterion. Exit code 0 only when
// every criterion passes.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <sys/wait.h>
#include <vector>

#include "otfsmimo/io.hpp"
#include "otfsmimo/parallel.hpp"
#include "otfsmimo/precoding.hpp"
#include "otfsmimo/scenario.hpp"

using namespace otfsmimo;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

Scenario paper_scenario(Scheme scheme) {
  Scenario s;  // paper defaults: M = N = 8, Nt = 100, P = 2, K_h = K_l = 3
  s.scheme = scheme;
  s.grouping = scheme == Scheme::PZF_SW ? GroupingCriterion::ChannelGain
                                        : GroupingCriterion::Mobility;
  s.k_s = 3;
  s.seed = 1;
  return s;
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::min(std::abs(a), std::abs(b));
}

const GroupMeans& means_at(const ScenarioResult& res, double snr) {
  for (const auto& gm : res.group_means) {
    if (gm.snr_db == snr) return gm;
  }
  throw std::runtime_error("missing SNR point in result");
}

// ---------------------------------------------------------------------------
// Criterion 1: per-realization FZF orthogonality through the dense precoder
// and channel matrices, 50 realizations, <= 2 min.
bool criterion1(std::ostream& os) {
  Timer timer;
  Scenario s = paper_scenario(Scheme::FZF);
  const int mn = s.dims.mn();

  // The orthogonality ratio ||H_k W_k'|| / (alpha sqrt(MN)) is invariant to
  // alpha; a short estimate keeps the precoders at their nominal scale.
  auto draw = [&s](int r) {
    Rng rng(substream_seed(s.seed, StreamTag::AlphaZf, r));
    std::vector<ModulatedUser> mus;
    for (int k = 0; k < s.k_total(); ++k) {
      const Mobility mob = k < s.k_h ? Mobility::High : Mobility::Low;
      UserChannel u = draw_user_channel(
          rng, mob, s.dims, s.p_paths, s.l_max,
          mob == Mobility::High ? s.k_max_high : s.k_max_low, s.aoa_prior);
      u.user_id = k + 1;
      mus.push_back({std::move(u), mob == Mobility::High});
    }
    return fzf_stack(mus, true).mat;
  };
  const double alpha = estimate_zf_alpha(draw, s.k_total(), mn, 20);
  const double scale = alpha * std::sqrt(static_cast<double>(mn));

  const int n_real = 50;
  std::vector<double> max_off(n_real, 0.0), max_diag(n_real, 0.0);
  parallel_for(n_real, 0, [&](int r) {
    const auto users = realization_channels(s, 0, r);
    std::vector<ModulatedUser> mus;
    for (const auto& u : users) mus.push_back({u, u.mobility == Mobility::High});
    const PrecoderSet set = fzf_precoders(mus, alpha);
    for (const auto& rx : mus) {
      const ChannelMatrix td = td_channel(rx.chan);
      const CMat own = rx.otfs ? dd_channel(td, s.dims).mat
                               : tf_channel(td, s.dims).mat;
      const CMat cross = rx.otfs ? cross_dd_channel(td, s.dims).mat
                                 : cross_tf_channel(td, s.dims).mat;
      for (const auto& tx : mus) {
        const CMat& h = tx.otfs == rx.otfs ? own : cross;
        const CMat prod = h * set.w_for(tx.chan.user_id);
        if (tx.chan.user_id == rx.chan.user_id) {
          max_diag[r] = std::max(
              max_diag[r],
              (prod - alpha * CMat::Identity(mn, mn)).norm() / scale);
        } else {
          max_off[r] = std::max(max_off[r], prod.norm() / scale);
        }
      }
    }
  });
  const double off = *std::max_element(max_off.begin(), max_off.end());
  const double diag = *std::max_element(max_diag.begin(), max_diag.end());
  const double secs = timer.seconds();
  os << "max ||H_k W_k'||/(a sqrt(MN)) = " << off
     << ", max ||H_k W_k - a I||/(a sqrt(MN)) = " << diag << " over "
     << n_real << " realizations (" << secs << " s <= 120 s)";
  return off <= 1e-8 && diag <= 1e-8 && secs <= 120.0;
}

// ---------------------------------------------------------------------------
// Criteria 2 and 4 share one hybrid FZF run over the 7-point grid.
ScenarioResult run_fzf_for_c2() {
  Scenario s = paper_scenario(Scheme::FZF);
  s.realizations = 20;  // Proposition 1 holds per realization
  return run_scenario(s);
}

bool criterion2(const ScenarioResult& res, std::ostream& os) {
  double worst = 0.0;
  for (const auto& row : res.rows) {
    const double es = std::pow(10.0, row.snr_db / 10.0);
    const double closed = se_fzf_closed(
        es, res.alpha_fzf, res.scenario.dims,
        row.mobility == Mobility::High ? LinkModulation::Otfs
                                       : LinkModulation::Ofdm);
    worst = std::max(worst, std::abs(row.se_sim - closed) / closed);
  }
  os << "max |SE_sim - SE_closed|/SE_closed = " << worst
     << " over 7 SNR points x 6 users";
  return worst <= 1e-6;
}

bool criterion4(const ScenarioResult& res, std::ostream& os) {
  const double rel =
      std::abs(res.alpha_fzf - res.alpha_fzf_check) / res.alpha_fzf;
  os << "alpha_FZF,H = " << res.alpha_fzf << ", alpha_FZF,L = "
     << res.alpha_fzf_check << ", relative gap = " << rel * 100 << "% (R_norm "
     << res.scenario.norm_realizations << ")";
  return rel <= 0.02;
}

// ---------------------------------------------------------------------------
// Criterion 3: MRT normalization.
bool criterion3(std::ostream& os) {
  Scenario s = paper_scenario(Scheme::PZF_HL);
  const double denom = static_cast<double>(s.dims.nt) * s.dims.mn();
  const int n_real = 200;
  std::vector<double> sums(n_real, 0.0);
  parallel_for(n_real, 0, [&](int r) {
    const auto users = realization_channels(s, 0, r);
    double acc = 0.0;
    for (const auto& u : users) {
      const ChannelMatrix tf = tf_channel(td_channel(u), s.dims);
      acc += tf.mat.squaredNorm() / denom;
    }
    sums[r] = acc / static_cast<double>(users.size());
  });
  const double mean =
      std::accumulate(sums.begin(), sums.end(), 0.0) / n_real;
  const bool alpha_exact = mrt_alpha(s.dims.nt) == 1.0 / std::sqrt(100.0);
  os << "mean ||H_TF||_F^2/(Nt MN) = " << mean << " over " << n_real
     << " realizations x 6 users; alpha_MRT = " << mrt_alpha(s.dims.nt)
     << (alpha_exact ? " (exact)" : " (NOT exact)");
  return mean >= 0.95 && mean <= 1.05 && alpha_exact;
}

// ---------------------------------------------------------------------------
// Criteria 5, 6, 10 share one PZF_HL run at {0, 10, 20} dB, R = 100.
ScenarioResult run_pzf_for_c5(double* wall_seconds) {
  Scenario s = paper_scenario(Scheme::PZF_HL);
  s.snr_db = {0.0, 10.0, 20.0};
  s.capture_se_inputs = true;
  const ScenarioResult res = run_scenario(s);
  *wall_seconds = res.wall_seconds;
  return res;
}

bool criterion5(const ScenarioResult& res, double wall, std::ostream& os) {
  double worst = 0.0;
  for (double snr : {0.0, 10.0, 20.0}) {
    double sim = 0.0, closed = 0.0, approx = 0.0;
    int n = 0;
    for (const auto& row : res.rows) {
      if (row.snr_db != snr || row.mobility != Mobility::High) continue;
      sim += row.se_sim;
      closed += *row.se_closed;
      approx += *row.se_approx;
      ++n;
    }
    sim /= n;
    closed /= n;
    approx /= n;
    const double w = std::max(
        {rel_diff(sim, closed), rel_diff(sim, approx), rel_diff(closed, approx)});
    worst = std::max(worst, w);
    os << "[snr " << snr << ": sim " << sim << ", closed " << closed
       << ", approx " << approx << ", worst pair " << w * 100 << "%] ";
  }
  os << "(grid wall " << wall << " s <= 600 s)";
  return worst <= 0.10 && wall <= 600.0;
}

bool criterion6(const ScenarioResult& res, std::ostream& os) {
  double worst = 0.0;
  for (const auto& row : res.rows) {
    if (row.mobility != Mobility::Low) continue;
    const double w = std::max(rel_diff(row.se_sim, *row.se_closed),
                              rel_diff(row.se_sim, *row.se_approx));
    worst = std::max(worst, w);
  }
  os << "max per-user gap sim vs {closed, approx} = " << worst * 100
     << "% across 3 users x 3 SNRs";
  return worst <= 0.15;
}

bool criterion10(const ScenarioResult& res, std::ostream& os) {
  double worst_logdet = 0.0;
  double min_eig = 1e300;
  bool hermitian = true;
  for (const auto& in : res.se_inputs) {
    hermitian = hermitian && (in.psi - in.psi.adjoint()).norm() == 0.0;
    Eigen::SelfAdjointEigenSolver<CMat> eig(in.psi);
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    double oracle = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
      oracle += std::log2(eig.eigenvalues()(i));
    }
    const double ld = logdet_hermitian(in.psi);
    worst_logdet = std::max(
        worst_logdet,
        std::abs(ld - oracle) / std::max(1.0, std::abs(oracle)));

    // the SINR determinant matrix evaluated by se_mmse_sic
    const CMat m =
        CMat::Identity(in.psi.rows(), in.psi.rows()) +
        in.dbar.adjoint() * hermitian_solve(in.psi, in.dbar);
    const CMat msym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> eig2(msym);
    double oracle2 = 0.0;
    for (Eigen::Index i = 0; i < eig2.eigenvalues().size(); ++i) {
      oracle2 += std::log2(eig2.eigenvalues()(i));
    }
    const double ld2 = logdet_hermitian(msym);
    worst_logdet = std::max(
        worst_logdet,
        std::abs(ld2 - oracle2) / std::max(1.0, std::abs(oracle2)));
  }
  os << res.se_inputs.size() << " Psi matrices: Hermitian "
     << (hermitian ? "exactly" : "VIOLATED") << ", min eigenvalue " << min_eig
     << ", worst logdet-vs-eigen gap " << worst_logdet;
  return hermitian && min_eig > 0.0 && worst_logdet <= 1e-9;
}

// ---------------------------------------------------------------------------
// Criterion 7: Fig.-2 trend reproduction at {0, 10, 20} dB.
bool criterion7(const ScenarioResult& fzf, const ScenarioResult& pzf_hl,
                std::ostream& os) {
  Scenario sw = paper_scenario(Scheme::PZF_SW);
  sw.snr_db = {0.0, 10.0, 20.0};
  const ScenarioResult pzf_sw = run_scenario(sw);

  Scenario ofdm = paper_scenario(Scheme::OFDM_only_FZF);
  ofdm.snr_db = {0.0, 10.0, 20.0};
  ofdm.realizations = 20;  // exact per realization, like FZF
  const ScenarioResult ofdm_fzf = run_scenario(ofdm);

  bool ok = true;
  for (double snr : {0.0, 10.0, 20.0}) {
    const auto& f = means_at(fzf, snr);
    const auto& p = means_at(pzf_hl, snr);
    const auto& w = means_at(pzf_sw, snr);
    const auto& o = means_at(ofdm_fzf, snr);

    const bool a =
        *f.high_mean - *p.high_mean > *f.high_ci95 + *p.high_ci95;
    const bool b = *p.high_mean - *p.low_mean > *p.high_ci95 + *p.low_ci95;
    const double gap_hl = std::abs(*p.high_mean - *p.low_mean);
    const double gap_sw = std::abs(*w.high_mean - *w.low_mean);
    const bool c = gap_hl - gap_sw > (*p.high_ci95 + *p.low_ci95) +
                                         (*w.high_ci95 + *w.low_ci95);
    const double ofdm_all =
        0.5 * (*o.high_mean + *o.low_mean);  // same CP penalty for everyone
    const double ofdm_ci = std::max(*o.high_ci95, *o.low_ci95);
    const bool d = *f.high_mean - ofdm_all > *f.high_ci95 + ofdm_ci;

    os << "[snr " << snr << ": (a) fzf " << *f.high_mean << " vs pzf-high "
       << *p.high_mean << (a ? " ok" : " FAIL") << "; (b) pzf high vs low "
       << *p.low_mean << (b ? " ok" : " FAIL") << "; (c) gap HL " << gap_hl
       << " vs SW " << gap_sw << (c ? " ok" : " FAIL") << "; (d) ofdm-fzf "
       << ofdm_all << (d ? " ok" : " FAIL") << "] ";
    ok = ok && a && b && c && d;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 8: Fig.-3 trends, K = 6, K_h in 1..5 at 10 dB.
bool criterion8(std::ostream& os) {
  Scenario base = paper_scenario(Scheme::PZF_HL);
  base.snr_db = {10.0};
  const auto sweeps = sweep_kh(base, {1, 2, 3, 4, 5});

  std::vector<double> high_mean, high_ci, low_mean, low_ci;
  for (const auto& res : sweeps) {
    const auto& gm = res.group_means.front();
    high_mean.push_back(*gm.high_mean);
    high_ci.push_back(*gm.high_ci95);
    if (gm.low_mean) {
      low_mean.push_back(*gm.low_mean);
      low_ci.push_back(*gm.low_ci95);
    }
  }

  bool increasing = true;
  for (std::size_t i = 1; i < high_mean.size(); ++i) {
    increasing = increasing && (high_mean[i] - high_mean[i - 1] >
                                high_ci[i] + high_ci[i - 1]);
  }
  bool flat = true;
  for (std::size_t i = 0; i < low_mean.size(); ++i) {
    for (std::size_t j = i + 1; j < low_mean.size(); ++j) {
      flat = flat && (std::abs(low_mean[i] - low_mean[j]) <=
                      low_ci[i] + low_ci[j]);
    }
  }
  os << "high-mobility SE by K_h: ";
  for (double v : high_mean) os << v << " ";
  os << (increasing ? "(strictly increasing) " : "(NOT increasing) ");
  os << "low-mobility SE: ";
  for (double v : low_mean) os << v << " ";
  os << (flat ? "(flat within CI)" : "(NOT flat)");
  return increasing && flat;
}

// ---------------------------------------------------------------------------
// Criterion 9: CLI determinism and schema stability.
bool criterion9(std::ostream& os) {
#ifndef OTFSMIMO_CLI_PATH
  os << "CLI path not wired into the build";
  return false;
#else
  const std::string tmp = OTFSMIMO_TMP_DIR;
  const std::string cfg = tmp + "/acceptance_cfg.json";
  {
    std::ofstream out(cfg);
    out << R"({
      "dims": {"M": 4, "N": 4, "Nt": 16},
      "users": {"K_h": 2, "K_l": 2, "P": 2, "l_max": 2},
      "scheme": "pzf_hl",
      "snr_db": [0, 10],
      "monte_carlo": {"R": 20, "R_norm": 20, "moment_samples": 5000},
      "seed": 42
    })";
  }
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(OTFSMIMO_CLI_PATH) + " " + args +
                            " > " + tmp + "/c9.log 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  if (run("--config " + cfg + " --out " + tmp + "/c9_a.csv") != 0) {
    os << "first CLI run failed";
    return false;
  }
  if (run("--config " + cfg + " --out " + tmp + "/c9_b.csv --threads 1") != 0) {
    os << "second CLI run failed";
    return false;
  }
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const std::string a = slurp(tmp + "/c9_a.csv");
  const std::string b = slurp(tmp + "/c9_b.csv");
  const bool identical = !a.empty() && a == b;
  const bool header_ok = a.rfind(csv_header(), 0) == 0;
  os << "two seeded runs byte-identical: " << (identical ? "yes" : "NO")
     << "; header golden: " << (header_ok ? "yes" : "NO");
  return identical && header_ok;
#endif
}

struct CriterionDef {
  int id;
  const char* name;
  std::function<bool(std::ostream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[i + 1]);
    }
  }

  // Shared runs.
  ScenarioResult fzf_run, pzf_run;
  double pzf_wall = 0.0;
  bool fzf_ready = false, pzf_ready = false;
  auto need_fzf = [&]() {
    if (!fzf_ready) {
      fzf_run = run_fzf_for_c2();
      fzf_ready = true;
    }
  };
  auto need_pzf = [&]() {
    if (!pzf_ready) {
      pzf_run = run_pzf_for_c5(&pzf_wall);
      pzf_ready = true;
    }
  };

  const std::vector<CriterionDef> criteria = {
      {1, "ZF orthogonality (50 realizations, <= 2 min)", criterion1},
      {2, "Proposition 1 exactness over the SNR grid",
       [&](std::ostream& os) { need_fzf(); return criterion2(fzf_run, os); }},
      {3, "MRT normalization Tr -> Nt MN and alpha_MRT = 1/sqrt(Nt)",
       criterion3},
      {4, "alpha_FZF,H vs alpha_FZF,L within 2%",
       [&](std::ostream& os) { need_fzf(); return criterion4(fzf_run, os); }},
      {5, "Proposition 2 / Corollary agreement within 10%",
       [&](std::ostream& os) { need_pzf(); return criterion5(pzf_run, pzf_wall, os); }},
      {6, "Proposition 3 agreement within 15%",
       [&](std::ostream& os) { need_pzf(); return criterion6(pzf_run, os); }},
      {7, "Fig.-2 trends outside overlapping CIs",
       [&](std::ostream& os) { need_fzf(); need_pzf(); return criterion7(fzf_run, pzf_run, os); }},
      {8, "Fig.-3 trends (K_h sweep)", criterion8},
      {9, "Determinism and CSV schema", criterion9},
      {10, "Numerical hygiene of Psi and logdet",
       [&](std::ostream& os) { need_pzf(); return criterion10(pzf_run, os); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    std::ostringstream detail;
    bool ok = false;
    Timer timer;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail << "exception: " << e.what();
    }
    std::printf("[%s] criterion %2d: %s — %s (%.1f s)\n", ok ? "PASS" : "FAIL",
                c.id, c.name, detail.str().c_str(), timer.seconds());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) FAILED\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
