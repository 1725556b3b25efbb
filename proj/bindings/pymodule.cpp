#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "otfsmimo/io.hpp"
#include "otfsmimo/linalg.hpp"
#include "otfsmimo/scenario.hpp"

namespace py = pybind11;
using namespace otfsmimo;

namespace {

py::dict row_to_dict(const ScenarioResult& res, const UserSnrResult& row) {
  py::dict d;
  d["scheme"] = to_string(res.scenario.scheme);
  d["grouping"] = to_string(res.scenario.grouping);
  d["user_id"] = row.user_id;
  d["mobility"] = to_string(row.mobility);
  d["group_role"] = row.group_role;
  d["snr_db"] = row.snr_db;
  d["se_sim"] = row.se_sim;
  d["se_closed"] = row.se_closed ? py::object(py::float_(*row.se_closed))
                                 : py::object(py::none());
  d["se_approx"] = row.se_approx ? py::object(py::float_(*row.se_approx))
                                 : py::object(py::none());
  d["ci95"] = row.ci95;
  d["realizations"] = res.scenario.realizations;
  d["seed"] = res.scenario.seed;
  return d;
}

py::dict result_to_dict(const ScenarioResult& res) {
  py::dict out;
  py::list rows;
  for (const auto& row : res.rows) rows.append(row_to_dict(res, row));
  out["rows"] = rows;
  out["alpha_fzf"] = res.alpha_fzf;
  out["alpha_pzf"] = res.alpha_pzf;
  out["alpha_mrt"] = res.alpha_mrt;
  out["csv"] = to_csv(res);
  py::list means;
  for (const auto& gm : res.group_means) {
    py::dict g;
    g["snr_db"] = gm.snr_db;
    g["high_mean"] = gm.high_mean ? py::object(py::float_(*gm.high_mean))
                                  : py::object(py::none());
    g["low_mean"] = gm.low_mean ? py::object(py::float_(*gm.low_mean))
                                : py::object(py::none());
    means.append(g);
  }
  out["group_means"] = means;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hybrid OTFS/OFDM massive MIMO downlink SE simulator";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<SingularGramError>(m, "SingularGramError");
  py::register_exception<NumericalError>(m, "NumericalError");

  m.def("dft_matrix", &dft_matrix, py::arg("n"),
        "Normalized n-point DFT matrix (unitary).");
  m.def("kron", &kron, py::arg("a"), py::arg("b"), "Kronecker product.");
  m.def("delay_shift_power", &delay_shift_power, py::arg("mn"), py::arg("l"),
        "Forward cyclic shift matrix raised to the l-th power.");
  m.def("doppler_diag_power", &doppler_diag_power, py::arg("mn"),
        py::arg("kappa"), "Doppler phase diagonal with a real exponent.");
  m.def(
      "hermitian_solve",
      [](const CMat& g, const CMat& b) { return hermitian_solve(g, b); },
      py::arg("g"), py::arg("b"),
      "Solve g X = b for Hermitian positive definite g.");
  m.def("logdet_hermitian", &logdet_hermitian, py::arg("a"),
        "log2 det of a Hermitian positive definite matrix.");
  m.def(
      "steering_vector",
      [](double aoa, int nt) { return CMat(steering_vector(aoa, nt)); },
      py::arg("aoa"), py::arg("nt"), "Half-wavelength ULA steering vector.");
  m.def(
      "se_fzf_closed",
      [](double es, double alpha, int m, int n, int nt, double cp_fraction,
         bool otfs) {
        return se_fzf_closed(es, alpha, make_grid(m, n, nt, cp_fraction),
                             otfs ? LinkModulation::Otfs : LinkModulation::Ofdm);
      },
      py::arg("es"), py::arg("alpha_fzf"), py::arg("m") = 8, py::arg("n") = 8,
      py::arg("nt") = 100, py::arg("cp_fraction") = 0.2, py::arg("otfs") = true,
      "Closed-form FZF spectral efficiency.");
  m.def("se_pzf_high_approx", &se_pzf_high_approx, py::arg("es"),
        py::arg("alpha_pzf"), py::arg("alpha_mrt"), py::arg("k_l"),
        py::arg("nt"), "Corollary approximation of the PZF high-mobility SE.");
  m.def("csv_header", &csv_header, "Fixed result-table CSV header.");

  m.def(
      "run_scenario",
      [](const std::string& config_json) {
        return result_to_dict(run_scenario(parse_config_text(config_json)));
      },
      py::arg("config_json"),
      "Run a scenario from a JSON config string; returns rows and summary.");
  m.def(
      "run_scenario_file",
      [](const std::string& path) {
        return result_to_dict(run_scenario(parse_config(path)));
      },
      py::arg("path"), "Run a scenario from a JSON config file.");

  m.attr("__version__") = "0.1.0";
}
