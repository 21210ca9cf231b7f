// Configuration-driven command line front end: build grids, dump them, and
// run price sweeps with optional Monte Carlo comparison columns.

#pragma once

#include <string>
#include <vector>

#include "jrmq/instruments.hpp"
#include "jrmq/jrmq.hpp"
#include "jrmq/mc.hpp"

namespace jrmq {

struct InstrumentConfig {
  enum class Type { european, bermudan, barrier, corridor };
  Type type = Type::european;
  OptionKind kind = OptionKind::put;
  std::vector<double> strikes;      // european / bermudan sweep; barrier uses
                                    // a single strike
  std::vector<double> levels;       // barrier levels
  std::vector<int> schedule;        // exercise / monitoring step indices
  std::vector<double> spreads;      // corridor spreads around the center
  double center = 0.0;              // corridor center; 0 selects S_0
  std::string implied_vol_model;    // "", "black" or "bachelier"
};

struct RunConfig {
  PresetParams model;
  GridSettings grid;
  std::vector<InstrumentConfig> instruments;
  MCConfig mc;
  std::string output_grid;
  std::string output_results;
  double discount_rate = 0.0;
  UnderlyingConvention convention = UnderlyingConvention::spot;
};

// Parses and schema-validates a JSON config; ConfigError messages carry the
// offending field path.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Commands: build-grid, price, compare-mc, dump-grid.
// Exit codes: 0 success, 2 config error, 3 convergence error, 4 I/O error.
int run_cli(int argc, const char* const* argv);

} // namespace jrmq
