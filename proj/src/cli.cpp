#include "jrmq/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "jrmq/grid_io.hpp"
#include "jrmq/pricing.hpp"

namespace jrmq {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& path,
                              const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

const json& field(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) config_fail(path + "." + key, "missing");
  return *it;
}

double number_at(const json& j, const std::string& path, const char* key) {
  const json& v = field(j, path, key);
  if (!v.is_number()) config_fail(path + "." + key, "must be a number");
  return v.get<double>();
}

int int_at(const json& j, const std::string& path, const char* key) {
  const json& v = field(j, path, key);
  if (!v.is_number_integer()) config_fail(path + "." + key,
                                          "must be an integer");
  return v.get<int>();
}

std::string string_at(const json& j, const std::string& path,
                      const char* key) {
  const json& v = field(j, path, key);
  if (!v.is_string()) config_fail(path + "." + key, "must be a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const json& v, const std::string& path) {
  if (v.is_object()) {
    // sweep form {"from": a, "to": b, "step": s}
    const double from = number_at(v, path, "from");
    const double to = number_at(v, path, "to");
    const double step = number_at(v, path, "step");
    if (step <= 0.0 || to < from) config_fail(path, "bad sweep range");
    std::vector<double> out;
    for (double x = from; x <= to + 1e-12 * step; x += step) {
      out.push_back(x);
    }
    return out;
  }
  if (!v.is_array() || v.empty()) {
    config_fail(path, "must be a nonempty array or a sweep object");
  }
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) config_fail(path, "entries must be numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> int_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) config_fail(path, "must be a nonempty array");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) config_fail(path, "entries must be integers");
    out.push_back(e.get<int>());
  }
  return out;
}

InstrumentConfig parse_instrument(const json& j, const std::string& path) {
  InstrumentConfig inst;
  const std::string type = string_at(j, path, "type");
  if (type == "european") {
    inst.type = InstrumentConfig::Type::european;
  } else if (type == "bermudan") {
    inst.type = InstrumentConfig::Type::bermudan;
  } else if (type == "barrier") {
    inst.type = InstrumentConfig::Type::barrier;
  } else if (type == "corridor") {
    inst.type = InstrumentConfig::Type::corridor;
  } else {
    config_fail(path + ".type", "unknown instrument type '" + type + "'");
  }

  if (j.contains("kind")) {
    const std::string kind = string_at(j, path, "kind");
    if (kind == "call") {
      inst.kind = OptionKind::call;
    } else if (kind == "put") {
      inst.kind = OptionKind::put;
    } else {
      config_fail(path + ".kind", "must be 'call' or 'put'");
    }
  }
  if (j.contains("implied_vol")) {
    inst.implied_vol_model = string_at(j, path, "implied_vol");
    if (inst.implied_vol_model != "black" &&
        inst.implied_vol_model != "bachelier" &&
        inst.implied_vol_model != "none") {
      config_fail(path + ".implied_vol",
                  "must be 'black', 'bachelier' or 'none'");
    }
    if (inst.implied_vol_model == "none") inst.implied_vol_model.clear();
  }

  switch (inst.type) {
    case InstrumentConfig::Type::european:
      inst.strikes = number_list(field(j, path, "strikes"), path + ".strikes");
      break;
    case InstrumentConfig::Type::bermudan:
      inst.strikes = number_list(field(j, path, "strikes"), path + ".strikes");
      inst.schedule = int_list(field(j, path, "schedule"), path + ".schedule");
      break;
    case InstrumentConfig::Type::barrier:
      inst.strikes = {number_at(j, path, "strike")};
      inst.levels = number_list(field(j, path, "levels"), path + ".levels");
      inst.schedule =
          int_list(field(j, path, "monitoring"), path + ".monitoring");
      break;
    case InstrumentConfig::Type::corridor:
      inst.spreads = number_list(field(j, path, "spreads"), path + ".spreads");
      if (j.contains("center")) {
        inst.center = number_at(j, path, "center");
        if (inst.center <= 0.0) config_fail(path + ".center", "must be > 0");
      }
      break;
  }
  return inst;
}

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  const json& model = field(j, "", "model");
  cfg.model.name = preset_from_string(string_at(model, "model", "name"));
  const json& params = field(model, "model", "params");
  if (!params.is_object()) config_fail("model.params", "must be an object");
  for (const auto& [key, value] : params.items()) {
    if (!value.is_number()) config_fail("model.params." + key,
                                        "must be a number");
    cfg.model.values[key] = value.get<double>();
  }
  try {
    make_preset(cfg.model);  // validates parameter constraints
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config field 'model.params': ") +
                      e.what());
  }
  cfg.discount_rate = cfg.model.at_or("r", 0.0);
  cfg.convention = (cfg.model.name == PresetName::sabr ||
                    cfg.model.name == PresetName::bachelier_sabr)
                       ? UnderlyingConvention::forward
                       : UnderlyingConvention::spot;

  const json& grid = field(j, "", "grid");
  cfg.grid.num_steps = int_at(grid, "grid", "K");
  cfg.grid.n_x = int_at(grid, "grid", "n_x");
  cfg.grid.n_y = int_at(grid, "grid", "n_y");
  if (cfg.grid.num_steps < 1) config_fail("grid.K", "must be >= 1");
  if (cfg.grid.n_x < 1) config_fail("grid.n_x", "must be >= 1");
  if (cfg.grid.n_y < 1) config_fail("grid.n_y", "must be >= 1");
  cfg.grid.method =
      joint_method_from_string(string_at(grid, "grid", "joint_method"));
  cfg.grid.x_mode =
      boundary_from_string(string_at(grid, "grid", "x_boundary"));
  cfg.grid.y_mode =
      boundary_from_string(string_at(grid, "grid", "y_boundary"));
  if (grid.contains("newton")) {
    const json& n = grid["newton"];
    cfg.grid.newton.max_iterations = int_at(n, "grid.newton",
                                            "max_iterations");
    cfg.grid.newton.gradient_tolerance =
        number_at(n, "grid.newton", "gradient_tolerance");
    cfg.grid.newton.damping = number_at(n, "grid.newton", "damping");
    if (cfg.grid.newton.max_iterations < 1) {
      config_fail("grid.newton.max_iterations", "must be >= 1");
    }
    if (!(cfg.grid.newton.gradient_tolerance > 0.0)) {
      config_fail("grid.newton.gradient_tolerance", "must be > 0");
    }
    if (!(cfg.grid.newton.damping > 0.0 && cfg.grid.newton.damping <= 1.0)) {
      config_fail("grid.newton.damping", "must be in (0, 1]");
    }
  }

  if (j.contains("instruments")) {
    const json& list = j["instruments"];
    if (!list.is_array()) config_fail("instruments", "must be an array");
    for (std::size_t n = 0; n < list.size(); ++n) {
      cfg.instruments.push_back(parse_instrument(
          list[n], "instruments[" + std::to_string(n) + "]"));
    }
  }

  if (j.contains("mc")) {
    const json& mc = j["mc"];
    cfg.mc.paths = static_cast<std::int64_t>(number_at(mc, "mc", "paths"));
    cfg.mc.steps = int_at(mc, "mc", "steps");
    if (cfg.mc.paths < 1) config_fail("mc.paths", "must be >= 1");
    if (cfg.mc.steps < 1) config_fail("mc.steps", "must be >= 1");
    if (mc.contains("seed")) {
      cfg.mc.seed = static_cast<std::uint64_t>(number_at(mc, "mc", "seed"));
    }
    if (mc.contains("truncation")) {
      cfg.mc.truncation =
          truncation_from_string(string_at(mc, "mc", "truncation"));
    }
    if (mc.contains("antithetic")) {
      const json& a = mc["antithetic"];
      if (!a.is_boolean()) config_fail("mc.antithetic", "must be a boolean");
      cfg.mc.antithetic = a.get<bool>();
    }
  }

  if (j.contains("output")) {
    const json& out = j["output"];
    if (out.contains("grid")) cfg.output_grid = string_at(out, "output", "grid");
    if (out.contains("results")) {
      cfg.output_results = string_at(out, "output", "results");
    }
  }
  return cfg;
}

std::vector<double> schedule_times(const std::vector<int>& steps, double dt) {
  std::vector<double> t;
  t.reserve(steps.size());
  for (int k : steps) t.push_back(k * dt);
  return t;
}

struct ResultRow {
  std::string instrument;
  double parameter;
  double grid_price;
  bool has_mc = false;
  double mc_price = 0.0;
  double mc_stderr = 0.0;
  bool has_iv = false;
  double iv = 0.0;
};

void write_results(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "instrument,parameter,grid_price,mc_price,mc_stderr,implied_vol\n";
  for (const auto& r : rows) {
    os << r.instrument << ',' << format_float(r.parameter) << ','
       << format_float(r.grid_price) << ',';
    if (r.has_mc) {
      os << format_float(r.mc_price) << ',' << format_float(r.mc_stderr);
    } else {
      os << ',';
    }
    os << ',';
    if (r.has_iv) os << format_float(r.iv);
    os << "\n";
  }
}

double smile_forward(const RunConfig& cfg, const QuantizationGrid& grid) {
  const double T = grid.model.horizon_T;
  return cfg.convention == UnderlyingConvention::forward
             ? grid.model.y0
             : grid.model.y0 * std::exp(cfg.discount_rate * T);
}

std::vector<ResultRow> price_instruments(const RunConfig& cfg,
                                         const QuantizationGrid& grid,
                                         bool with_mc) {
  std::vector<ResultRow> rows;
  const double T = grid.model.horizon_T;
  const double df = std::exp(-cfg.discount_rate * T);

  for (const auto& inst : cfg.instruments) {
    VanillaSpec base{inst.kind, 0.0, cfg.discount_rate, cfg.convention};
    switch (inst.type) {
      case InstrumentConfig::Type::european: {
        std::vector<MCEstimate> mc;
        if (with_mc) {
          mc = mc_european(grid.model, cfg.mc, base, inst.strikes);
        }
        for (std::size_t s = 0; s < inst.strikes.size(); ++s) {
          VanillaSpec v = base;
          v.strike = inst.strikes[s];
          ResultRow row{"european", v.strike, european_price(grid, v)};
          if (with_mc) {
            row.has_mc = true;
            row.mc_price = mc[s].value;
            row.mc_stderr = mc[s].std_error;
          }
          if (!inst.implied_vol_model.empty()) {
            row.has_iv = true;
            row.iv = implied_vol(row.grid_price, smile_forward(cfg, grid),
                                 v.strike, T, df,
                                 inst.implied_vol_model == "black"
                                     ? VolModel::black
                                     : VolModel::bachelier,
                                 inst.kind);
          }
          rows.push_back(row);
        }
        break;
      }
      case InstrumentConfig::Type::bermudan: {
        const auto times = schedule_times(inst.schedule, grid.dt);
        for (double strike : inst.strikes) {
          VanillaSpec v = base;
          v.strike = strike;
          ResultRow row{"bermudan", strike,
                        bermudan_price(grid, v, {inst.schedule})};
          if (with_mc) {
            const auto est = mc_bermudan_lsmc(grid.model, cfg.mc, v, times);
            row.has_mc = true;
            row.mc_price = est.value;
            row.mc_stderr = est.std_error;
          }
          rows.push_back(row);
        }
        break;
      }
      case InstrumentConfig::Type::barrier: {
        VanillaSpec v = base;
        v.strike = inst.strikes.front();
        std::vector<MCEstimate> mc;
        if (with_mc) {
          mc = mc_barrier(grid.model, cfg.mc, v, inst.levels,
                          schedule_times(inst.schedule, grid.dt));
        }
        for (std::size_t l = 0; l < inst.levels.size(); ++l) {
          ResultRow row{"barrier", inst.levels[l],
                        barrier_price(grid, v,
                                      {inst.levels[l], {inst.schedule}})};
          if (with_mc) {
            row.has_mc = true;
            row.mc_price = mc[l].value;
            row.mc_stderr = mc[l].std_error;
          }
          rows.push_back(row);
        }
        break;
      }
      case InstrumentConfig::Type::corridor: {
        const double center =
            inst.center > 0.0
                ? inst.center
                : spot_value(cfg.convention, cfg.discount_rate, grid.model.y0,
                             0.0, T);
        std::vector<CorridorSpec> corridors;
        for (double s : inst.spreads) {
          corridors.push_back(
              {center * (1.0 - s), center * (1.0 + s), cfg.discount_rate});
        }
        std::vector<MCEstimate> mc;
        if (with_mc) {
          mc = mc_corridor(grid.model, cfg.mc, corridors);
        }
        for (std::size_t c = 0; c < corridors.size(); ++c) {
          ResultRow left{"corridor_left", inst.spreads[c],
                         corridor_swap_left_endpoint(grid, corridors[c])};
          ResultRow interp{"corridor_interp", inst.spreads[c],
                           corridor_swap_interpolated(grid, corridors[c])};
          if (with_mc) {
            left.has_mc = interp.has_mc = true;
            left.mc_price = interp.mc_price = mc[c].value;
            left.mc_stderr = interp.mc_stderr = mc[c].std_error;
          }
          rows.push_back(left);
          rows.push_back(interp);
        }
        break;
      }
    }
  }
  return rows;
}

int cmd_build_grid(const RunConfig& cfg, const std::string& out_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = build_grid(cfg.model, cfg.grid);
  const auto t1 = std::chrono::steady_clock::now();
  const std::string path =
      out_path.empty() ? cfg.output_grid : out_path;
  if (path.empty()) {
    throw ConfigError("build-grid: no output path (--out or output.grid)");
  }
  write_grid_file(path, grid);
  const auto rep = check_grid_invariants(grid);
  std::cout << "grid: " << to_string(cfg.model.name) << " K="
            << cfg.grid.num_steps << " n_x=" << cfg.grid.n_x
            << " n_y=" << cfg.grid.n_y << " stages="
            << grid.stages.size() << "\n";
  std::cout << "build_seconds="
            << format_float(
                   std::chrono::duration<double>(t1 - t0).count())
            << " worst_invariant=" << format_float(rep.worst()) << "\n";
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_price(const RunConfig& cfg, const std::string& grid_path,
              const std::string& out_path, bool with_mc) {
  const auto grid =
      grid_path.empty() ? build_grid(cfg.model, cfg.grid)
                        : read_grid_file(grid_path);
  const auto rows = price_instruments(cfg, grid, with_mc);
  const std::string path =
      out_path.empty() ? cfg.output_results : out_path;
  if (path.empty()) {
    write_results(std::cout, rows);
  } else {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_results(os, rows);
    if (!os) throw IoError("write failed: " + path);
    std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
  }
  return 0;
}

int cmd_dump_grid(const std::string& grid_path, const std::string& out_path) {
  const auto grid = read_grid_file(grid_path);
  std::ostringstream os;
  write_grid(os, grid);
  if (out_path.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(out_path);
    if (!f) throw IoError("cannot open for writing: " + out_path);
    f << os.str();
    if (!f) throw IoError("write failed: " + out_path);
  }
  return 0;
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"joint recursive marginal quantization grids and pricing"};
  app.require_subcommand(1);

  std::string config_path, grid_path, out_path;
  bool no_mc = false;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "config file (JSON)");
    if (needs_config) c->required();
    sub->add_option("--out", out_path, "output path");
  };

  auto* build = app.add_subcommand("build-grid", "build and serialize a grid");
  add_common(build, true);

  auto* price = app.add_subcommand("price", "price configured instruments");
  add_common(price, true);
  price->add_option("--grid", grid_path, "grid file (rebuilt when absent)");
  price->add_flag("--no-mc", no_mc, "skip Monte Carlo columns");
  price->add_option("--seed", seed, "override mc.seed")
      ->each([&](const std::string&) { seed_set = true; });

  auto* compare = app.add_subcommand("compare-mc",
                                     "price with Monte Carlo comparison");
  add_common(compare, true);
  compare->add_option("--grid", grid_path, "grid file (rebuilt when absent)");
  compare->add_option("--seed", seed, "override mc.seed")
      ->each([&](const std::string&) { seed_set = true; });

  auto* dump = app.add_subcommand("dump-grid", "re-emit a grid file");
  dump->add_option("--grid", grid_path, "grid file")->required();
  dump->add_option("--out", out_path, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (dump->parsed()) {
      return cmd_dump_grid(grid_path, out_path);
    }
    RunConfig cfg = load_config(config_path);
    if (seed_set) cfg.mc.seed = seed;
    if (build->parsed()) {
      return cmd_build_grid(cfg, out_path);
    }
    if (price->parsed()) {
      return cmd_price(cfg, grid_path, out_path, !no_mc);
    }
    return cmd_price(cfg, grid_path, out_path, true);  // compare-mc
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

} // namespace jrmq
