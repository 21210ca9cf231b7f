#include "jrmq/model.hpp"

#include <cmath>
#include <stdexcept>

namespace jrmq {

namespace {

double checked_sqrt(double x, const char* what) {
  if (x < 0.0) {
    throw std::domain_error(std::string(what) +
                            ": sqrt of negative state " + std::to_string(x));
  }
  return std::sqrt(x);
}

double checked_pow(double y, double beta, const char* what) {
  if (y < 0.0 && beta != 0.0 && beta != 1.0) {
    throw std::domain_error(std::string(what) +
                            ": fractional power of negative state " +
                            std::to_string(y));
  }
  return std::pow(y, beta);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

} // namespace

const char* to_string(PresetName name) {
  switch (name) {
    case PresetName::stein_stein: return "stein_stein";
    case PresetName::heston: return "heston";
    case PresetName::sabr: return "sabr";
    case PresetName::bachelier_sabr: return "bachelier_sabr";
  }
  return "?";
}

PresetName preset_from_string(const std::string& s) {
  if (s == "stein_stein") return PresetName::stein_stein;
  if (s == "heston") return PresetName::heston;
  if (s == "sabr") return PresetName::sabr;
  if (s == "bachelier_sabr") return PresetName::bachelier_sabr;
  throw std::invalid_argument("unknown model preset: " + s);
}

double PresetParams::at(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) {
    throw std::invalid_argument(std::string("missing model parameter: ") +
                                key + " for preset " + to_string(name));
  }
  return it->second;
}

double PresetParams::at_or(const std::string& key, double fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

ModelSpec make_preset(const PresetParams& params) {
  ModelSpec spec;
  spec.rho = params.at("rho");
  spec.x0 = params.at("x0");
  spec.y0 = params.at("y0");
  spec.horizon_T = params.at_or("T", 1.0);
  require(std::fabs(spec.rho) <= 1.0, "model.rho: |rho| must be <= 1");
  require(spec.horizon_T > 0.0, "model.T: horizon must be positive");

  switch (params.name) {
    case PresetName::stein_stein: {
      const double kappa = params.at("kappa");
      const double theta = params.at("theta");
      const double sigma = params.at("sigma");
      const double r = params.at("r");
      spec.drift_x = [kappa, theta](double x) { return kappa * (theta - x); };
      spec.diff_x = [sigma](double) { return sigma; };
      spec.drift_y = [r](double y) { return r * y; };
      spec.diff_y = [](double x, double y) { return x * y; };
      break;
    }
    case PresetName::heston: {
      const double kappa = params.at("kappa");
      const double theta = params.at("theta");
      const double sigma = params.at("sigma");
      const double r = params.at("r");
      require(kappa > 0.0 && theta > 0.0 && sigma > 0.0,
              "model.params: heston requires kappa, theta, sigma > 0");
      spec.drift_x = [kappa, theta](double x) { return kappa * (theta - x); };
      spec.diff_x = [sigma](double x) {
        return sigma * checked_sqrt(x, "heston b_x");
      };
      spec.drift_y = [r](double y) { return r * y; };
      spec.diff_y = [](double x, double y) {
        return checked_sqrt(x, "heston b_y") * y;
      };
      break;
    }
    case PresetName::sabr:
    case PresetName::bachelier_sabr: {
      const double nu = params.at("nu");
      const double beta = params.name == PresetName::bachelier_sabr
                              ? 0.0
                              : params.at("beta");
      require(beta >= 0.0 && beta <= 1.0,
              "model.params.beta: sabr requires 0 <= beta <= 1");
      require(nu > 0.0, "model.params.nu: sabr requires nu > 0");
      spec.drift_x = [](double) { return 0.0; };
      spec.diff_x = [nu](double x) { return nu * x; };
      spec.drift_y = [](double) { return 0.0; };
      // CEV backbone C(y) = y^beta with zero offset
      spec.diff_y = [beta](double x, double y) {
        return x * checked_pow(y, beta, "sabr b_y");
      };
      break;
    }
  }
  return spec;
}

PresetParams stein_stein_defaults() {
  return {PresetName::stein_stein,
          {{"kappa", 4.0}, {"theta", 0.2}, {"sigma", 0.1}, {"r", 0.0953},
           {"rho", -0.5}, {"x0", 0.2}, {"y0", 100.0}, {"T", 1.0}}};
}

PresetParams heston_defaults() {
  return {PresetName::heston,
          {{"kappa", 2.0}, {"theta", 0.09}, {"sigma", 0.4}, {"r", 0.05},
           {"rho", -0.3}, {"x0", 0.09}, {"y0", 100.0}, {"T", 1.0}}};
}

PresetParams sabr_rates_defaults() {
  return {PresetName::sabr,
          {{"beta", 0.7}, {"nu", 0.3}, {"rho", -0.3}, {"x0", 0.2},
           {"y0", 0.005}, {"T", 1.0}, {"r", 0.0}}};
}

PresetParams sabr_equity_defaults() {
  const double r = 0.05, T = 1.0, s0 = 100.0;
  return {PresetName::sabr,
          {{"beta", 0.9}, {"nu", 0.4}, {"rho", -0.3}, {"x0", 0.4},
           {"y0", s0 * std::exp(r * T)}, {"T", T}, {"r", r}}};
}

PresetParams bachelier_sabr_defaults() {
  return {PresetName::bachelier_sabr,
          {{"nu", 0.3691}, {"rho", -0.0286}, {"x0", 0.0068}, {"y0", 0.0435},
           {"T", 1.0}, {"r", 0.0}}};
}

AffinePair affine_x(const ModelSpec& spec, double x, double dt) {
  return {spec.diff_x(x) * std::sqrt(dt), x + spec.drift_x(x) * dt};
}

AffinePair affine_y_margined(const ModelSpec& spec, double x, double y,
                             double dt) {
  return {spec.diff_y(x, y) * std::sqrt(dt), y + spec.drift_y(y) * dt};
}

} // namespace jrmq
