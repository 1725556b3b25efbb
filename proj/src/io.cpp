#include "otfsmimo/io.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace otfsmimo {

namespace {

using json = nlohmann::ordered_json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& section) {
  for (const auto& item : obj.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + section);
    }
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback,
         const std::string& section) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' in " + section + " has the wrong type");
  }
}

Scheme parse_scheme(const std::string& name) {
  if (name == "fzf") return Scheme::FZF;
  if (name == "pzf_hl") return Scheme::PZF_HL;
  if (name == "pzf_sw") return Scheme::PZF_SW;
  if (name == "ofdm_only_fzf") return Scheme::OFDM_only_FZF;
  if (name == "ofdm_only_pzf") return Scheme::OFDM_only_PZF;
  throw ConfigError("scheme must be one of fzf, pzf_hl, pzf_sw, ofdm_only_fzf, "
                    "ofdm_only_pzf; got '" + name + "'");
}

GroupingCriterion parse_criterion(const std::string& name) {
  if (name == "mobility") return GroupingCriterion::Mobility;
  if (name == "channel_gain") return GroupingCriterion::ChannelGain;
  throw ConfigError("grouping.criterion must be 'mobility' or 'channel_gain'; got '" +
                    name + "'");
}

AoaPrior parse_prior(const std::string& name) {
  if (name == "uniform_sin") return AoaPrior::UniformSin;
  if (name == "uniform_phi") return AoaPrior::UniformPhi;
  throw ConfigError("users.aoa_prior must be 'uniform_sin' or 'uniform_phi'; got '" +
                    name + "'");
}

// %.6g with a stable "-0" -> "0" normalization so outputs are byte-stable.
std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string opt_fmt6(const std::optional<double>& v) {
  return v ? fmt6(*v) : std::string();
}

}  // namespace

Scenario parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown_keys(root, {"dims", "users", "scheme", "grouping", "snr_db",
                             "monte_carlo", "seed"},
                      "config root");

  Scenario s;
  double cp_fraction = 0.2;
  if (root.contains("dims")) {
    const auto& d = root["dims"];
    reject_unknown_keys(d, {"M", "N", "Nt", "cp_fraction"}, "dims");
    s.dims.m = get_or<int>(d, "M", 8, "dims");
    s.dims.n = get_or<int>(d, "N", 8, "dims");
    s.dims.nt = get_or<int>(d, "Nt", 100, "dims");
    cp_fraction = get_or<double>(d, "cp_fraction", 0.2, "dims");
  }
  if (cp_fraction < 0.0 || cp_fraction >= 1.0) {
    throw ConfigError("dims.cp_fraction must lie in [0, 1)");
  }
  s.dims.lcp = GridDims::cp_symbols(s.dims.m * s.dims.n, cp_fraction);

  if (root.contains("users")) {
    const auto& u = root["users"];
    reject_unknown_keys(u,
                        {"K_h", "K_l", "P", "l_max", "k_max_high", "k_max_low",
                         "aoa_prior"},
                        "users");
    s.k_h = get_or<int>(u, "K_h", 3, "users");
    s.k_l = get_or<int>(u, "K_l", 3, "users");
    s.p_paths = get_or<int>(u, "P", 2, "users");
    s.l_max = get_or<int>(u, "l_max", 4, "users");
    s.k_max_high = get_or<double>(u, "k_max_high", 4.0, "users");
    s.k_max_low = get_or<double>(u, "k_max_low", 2.0, "users");
    s.aoa_prior = parse_prior(
        get_or<std::string>(u, "aoa_prior", "uniform_sin", "users"));
  }

  if (root.contains("scheme")) {
    if (!root["scheme"].is_string()) throw ConfigError("scheme must be a string");
    s.scheme = parse_scheme(root["scheme"].get<std::string>());
  }

  s.k_s = std::max(1, s.k_total() / 2);
  bool criterion_given = false;
  if (root.contains("grouping")) {
    const auto& g = root["grouping"];
    reject_unknown_keys(g, {"criterion", "K_s"}, "grouping");
    if (g.contains("criterion")) {
      s.grouping = parse_criterion(g["criterion"].get<std::string>());
      criterion_given = true;
    }
    s.k_s = get_or<int>(g, "K_s", s.k_s, "grouping");
  }
  if (!criterion_given) {
    s.grouping = s.scheme == Scheme::PZF_SW ? GroupingCriterion::ChannelGain
                                            : GroupingCriterion::Mobility;
  }

  if (root.contains("snr_db")) {
    if (!root["snr_db"].is_array()) throw ConfigError("snr_db must be an array");
    s.snr_db.clear();
    for (const auto& v : root["snr_db"]) {
      if (!v.is_number()) throw ConfigError("snr_db entries must be numbers");
      s.snr_db.push_back(v.get<double>());
    }
  }

  if (root.contains("monte_carlo")) {
    const auto& m = root["monte_carlo"];
    reject_unknown_keys(m, {"R", "R_norm", "moment_samples"}, "monte_carlo");
    s.realizations = get_or<int>(m, "R", 100, "monte_carlo");
    s.norm_realizations = get_or<int>(m, "R_norm", 100, "monte_carlo");
    s.moment_samples = get_or<long>(m, "moment_samples", 100000L, "monte_carlo");
  }

  s.seed = get_or<std::uint64_t>(root, "seed", 1, "config root");

  s.validate();
  return s;
}

Scenario parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

namespace {

json echo_json(const Scenario& s) {
  json root;
  root["dims"] = {{"M", s.dims.m},
                  {"N", s.dims.n},
                  {"Nt", s.dims.nt},
                  {"cp_fraction", static_cast<double>(s.dims.lcp) / s.dims.mn()}};
  root["users"] = {{"K_h", s.k_h},
                   {"K_l", s.k_l},
                   {"P", s.p_paths},
                   {"l_max", s.l_max},
                   {"k_max_high", s.k_max_high},
                   {"k_max_low", s.k_max_low},
                   {"aoa_prior", to_string(s.aoa_prior)}};
  root["scheme"] = to_string(s.scheme);
  root["grouping"] = {{"criterion", to_string(s.grouping)}, {"K_s", s.k_s}};
  root["snr_db"] = s.snr_db;
  root["monte_carlo"] = {{"R", s.realizations},
                         {"R_norm", s.norm_realizations},
                         {"moment_samples", s.moment_samples}};
  root["seed"] = s.seed;
  return root;
}

}  // namespace

std::string scenario_echo_json(const Scenario& s) { return echo_json(s).dump(2); }

std::string csv_header() {
  return "scheme,grouping,user_id,mobility,group_role,snr_db,se_sim,se_closed,"
         "se_approx,ci95,realizations,seed";
}

std::string to_csv(const ScenarioResult& result) {
  std::ostringstream os;
  os << csv_header() << "\n";
  const Scenario& s = result.scenario;
  for (const auto& row : result.rows) {
    os << to_string(s.scheme) << ',' << to_string(s.grouping) << ','
       << row.user_id << ',' << to_string(row.mobility) << ','
       << row.group_role << ',' << fmt6(row.snr_db) << ','
       << fmt6(row.se_sim) << ',' << opt_fmt6(row.se_closed) << ','
       << opt_fmt6(row.se_approx) << ',' << fmt6(row.ci95) << ','
       << s.realizations << ',' << s.seed << "\n";
  }
  return os.str();
}

std::string to_json(const ScenarioResult& result) {
  json root;
  root["scenario"] = echo_json(result.scenario);
  json alphas;
  alphas["alpha_fzf"] = result.alpha_fzf;
  alphas["alpha_fzf_check"] = result.alpha_fzf_check;
  alphas["alpha_pzf"] = result.alpha_pzf;
  alphas["alpha_mrt"] = result.alpha_mrt;
  root["alphas"] = alphas;
  json rows = json::array();
  const Scenario& s = result.scenario;
  for (const auto& row : result.rows) {
    json r;
    r["scheme"] = to_string(s.scheme);
    r["grouping"] = to_string(s.grouping);
    r["user_id"] = row.user_id;
    r["mobility"] = to_string(row.mobility);
    r["group_role"] = row.group_role;
    r["snr_db"] = row.snr_db;
    r["se_sim"] = row.se_sim;
    r["se_closed"] = row.se_closed ? json(*row.se_closed) : json(nullptr);
    r["se_approx"] = row.se_approx ? json(*row.se_approx) : json(nullptr);
    r["ci95"] = row.ci95;
    r["realizations"] = s.realizations;
    r["seed"] = s.seed;
    rows.push_back(std::move(r));
  }
  root["rows"] = rows;
  json means = json::array();
  for (const auto& gm : result.group_means) {
    json g;
    g["snr_db"] = gm.snr_db;
    g["high_mean"] = gm.high_mean ? json(*gm.high_mean) : json(nullptr);
    g["high_ci95"] = gm.high_ci95 ? json(*gm.high_ci95) : json(nullptr);
    g["low_mean"] = gm.low_mean ? json(*gm.low_mean) : json(nullptr);
    g["low_ci95"] = gm.low_ci95 ? json(*gm.low_ci95) : json(nullptr);
    means.push_back(std::move(g));
  }
  root["group_means"] = means;
  return root.dump(2) + "\n";
}

void emit_results(const ScenarioResult& result, OutputFormat format,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("cannot write output file '" + path + "'");
  out << (format == OutputFormat::Csv ? to_csv(result) : to_json(result));
  if (!out) throw NumericalError("write failed for '" + path + "'");
}

namespace {

std::vector<int> parse_kh_range(const std::string& text) {
  // "a..b" or a comma list.
  std::vector<int> values;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const int lo = std::stoi(text.substr(0, dots));
      const int hi = std::stoi(text.substr(dots + 2));
      if (hi < lo) throw ConfigError("--sweep-kh range is empty: " + text);
      for (int v = lo; v <= hi; ++v) values.push_back(v);
    } else {
      std::stringstream ss(text);
      std::string tok;
      while (std::getline(ss, tok, ',')) values.push_back(std::stoi(tok));
    }
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse --sweep-kh value '" + text + "'");
  }
  if (values.empty()) throw ConfigError("--sweep-kh produced no values");
  return values;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix + path.substr(dot);
}

void print_summary(const ScenarioResult& result) {
  const Scenario& s = result.scenario;
  for (const auto& gm : result.group_means) {
    std::ostringstream os;
    os << "scheme=" << to_string(s.scheme) << " snr_db=" << fmt6(gm.snr_db);
    if (gm.high_mean) os << " mean_se_high=" << fmt6(*gm.high_mean);
    if (gm.low_mean) os << " mean_se_low=" << fmt6(*gm.low_mean);
    std::cout << os.str() << "\n";
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Hybrid OTFS/OFDM massive MIMO downlink SE simulator"};
  std::string config_path;
  std::string out_path;
  std::string format_name = "csv";
  std::string scheme_name;
  std::string sweep_kh_text;
  std::int64_t seed_override = -1;
  int threads = 0;

  app.add_option("--config", config_path, "Scenario config (JSON)")->required();
  app.add_option("--out", out_path, "Output file path");
  app.add_option("--format", format_name, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed_override, "Override the config seed");
  app.add_option("--threads", threads, "Worker threads (0 = hardware)");
  app.add_option("--scheme", scheme_name, "Override the config scheme");
  app.add_option("--sweep-kh", sweep_kh_text,
                 "Run a PZF/HL K_h sweep, e.g. \"1..5\"");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    Scenario s = parse_config(config_path);
    if (seed_override >= 0) s.seed = static_cast<std::uint64_t>(seed_override);
    if (threads == 0) {
      if (const char* env = std::getenv("OTFSMIMO_THREADS")) {
        threads = std::atoi(env);
      }
    }
    if (threads > 0) s.threads = threads;
    if (!scheme_name.empty()) {
      s.scheme = parse_scheme(scheme_name);
      if (s.scheme == Scheme::PZF_SW) s.grouping = GroupingCriterion::ChannelGain;
      if (s.scheme == Scheme::PZF_HL) s.grouping = GroupingCriterion::Mobility;
      s.validate();
    }
    const OutputFormat fmt =
        format_name == "json" ? OutputFormat::Json : OutputFormat::Csv;
    const std::string ext = format_name == "json" ? ".json" : ".csv";
    if (out_path.empty()) out_path = "results" + ext;

    if (!sweep_kh_text.empty()) {
      const auto kh_values = parse_kh_range(sweep_kh_text);
      const auto results = sweep_kh(s, kh_values);
      for (std::size_t i = 0; i < results.size(); ++i) {
        const std::string path =
            with_suffix(out_path, "_kh" + std::to_string(kh_values[i]));
        emit_results(results[i], fmt, path);
        std::cout << "# K_h = " << kh_values[i] << " -> " << path << "\n";
        print_summary(results[i]);
      }
    } else {
      const ScenarioResult result = run_scenario(s);
      emit_results(result, fmt, out_path);
      print_summary(result);
      std::cerr << "# wall time " << fmt6(result.wall_seconds) << " s, output "
                << out_path << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace otfsmimo
