#ifndef OTFSMIMO_IO_HPP
#define OTFSMIMO_IO_HPP

#include <string>
#include <vector>

#include "otfsmimo/scenario.hpp"

namespace otfsmimo {

enum class OutputFormat { Csv, Json };

/// Parse a JSON scenario config. Missing optional keys take the paper-setup
/// defaults; unknown keys are rejected. Throws ConfigError naming the key
/// and constraint.
Scenario parse_config(const std::string& path);
Scenario parse_config_text(const std::string& text);

/// Config-shaped echo of a scenario (round-trips through parse_config_text).
std::string scenario_echo_json(const Scenario& s);

/// Fixed CSV header (schema-stable, guarded by a golden test).
std::string csv_header();

std::string to_csv(const ScenarioResult& result);
std::string to_json(const ScenarioResult& result);

/// Write one result to `path` in the requested format. Byte-stable for
/// identical inputs. Throws NumericalError on unwritable paths.
void emit_results(const ScenarioResult& result, OutputFormat format,
                  const std::string& path);

/// CLI entry point (exit 0 success, 1 config error, 2 runtime/numerical).
int run_cli(int argc, char** argv);

}  // namespace otfsmimo

#endif  // OTFSMIMO_IO_HPP
