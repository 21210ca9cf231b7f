// Two-factor stochastic volatility model description:
//   dX = a_x(X) dt + b_x(X) dW_x                      (independent process)
//   dY = a_y(Y) dt + b_y(X,Y) (rho dW_x + sqrt(1-rho^2) dW_perp)
// plus the Euler affine coefficients and the built-in presets.

#pragma once

#include <functional>
#include <map>
#include <string>

namespace jrmq {

// One-step Euler update written as m * Z + c.
struct AffinePair {
  double m = 0.0;  // diffusion over one step, b * sqrt(dt)
  double c = 0.0;  // deterministic part, state + drift * dt
};

struct ModelSpec {
  std::function<double(double)> drift_x;          // a_x(x), per unit time
  std::function<double(double)> diff_x;           // b_x(x), per sqrt(time)
  std::function<double(double)> drift_y;          // a_y(y), per unit time
  std::function<double(double, double)> diff_y;   // b_y(x, y), per sqrt(time)
  double rho = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double horizon_T = 1.0;
};

enum class PresetName { stein_stein, heston, sabr, bachelier_sabr };

const char* to_string(PresetName name);
PresetName preset_from_string(const std::string& s);

// Named parameter set for one of the built-in models.  Recognized keys
// depend on the preset: kappa/theta/sigma/r (Stein-Stein, Heston),
// nu/beta (SABR family), always rho/x0/y0/T.
struct PresetParams {
  PresetName name = PresetName::stein_stein;
  std::map<std::string, double> values;

  double at(const std::string& key) const;
  double at_or(const std::string& key, double fallback) const;
};

// Wires the drift/diffusion functions for the preset; throws
// std::invalid_argument when a parameter constraint is violated.
ModelSpec make_preset(const PresetParams& params);

// Parameter sets used throughout the reference experiments.
PresetParams stein_stein_defaults();     // kappa 4, theta 0.2, sigma 0.1, ...
PresetParams heston_defaults();          // kappa 2, theta 0.09, sigma 0.4, ...
PresetParams sabr_rates_defaults();      // beta 0.7, nu 0.3, y0 0.5%
PresetParams sabr_equity_defaults();     // beta 0.9, nu 0.4, y0 = 100 e^{rT}
PresetParams bachelier_sabr_defaults();  // beta 0, nu 0.3691

// m = b_x(x) sqrt(dt), c = x + a_x(x) dt.
AffinePair affine_x(const ModelSpec& spec, double x, double dt);

// Margined update for the dependent process: m = b_y(x,y) sqrt(dt),
// c = y + a_y(y) dt.  Never reads rho.
AffinePair affine_y_margined(const ModelSpec& spec, double x, double y,
                             double dt);

} // namespace jrmq
