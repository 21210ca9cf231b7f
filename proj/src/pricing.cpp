#include "jrmq/pricing.hpp"

#include <algorithm>
#include <cmath>

#include "jrmq/gauss.hpp"

namespace jrmq {

namespace {

void validate_schedule(const QuantizationGrid& grid,
                       const std::vector<int>& steps, bool require_terminal) {
  if (steps.empty()) {
    throw ConfigError("schedule: at least one step index required");
  }
  int prev = 0;
  for (int k : steps) {
    if (k <= prev || k > grid.num_steps()) {
      throw ConfigError("schedule: step indices must be ascending in 1..K");
    }
    prev = k;
  }
  if (require_terminal && steps.back() != grid.num_steps()) {
    throw ConfigError("schedule: the last exercise step must be K");
  }
}

void require_no_absorption(const QuantizationGrid& grid, const char* what) {
  const auto& last = grid.stages.back();
  if (last.x.absorbed_mass > 0.0 || last.y.absorbed_mass > 0.0) {
    throw ConfigError(std::string(what) +
                      ": grids with absorbed mass are not supported");
  }
}

// discounted one-step expectation through the joint transition kernel
Matrix continuation_value(const QuantizationGrid& grid, int k,
                          const Matrix& next_value, double discount) {
  const auto t = joint_transition_tensor(grid, k);
  const auto& prev = grid.stages[k];
  Matrix value(prev.x.size(), prev.y.size());
  for (std::size_t i = 0; i < prev.x.size(); ++i) {
    for (std::size_t u = 0; u < prev.y.size(); ++u) {
      double acc = 0.0;
      for (std::size_t j = 0; j < next_value.rows(); ++j) {
        for (std::size_t v = 0; v < next_value.cols(); ++v) {
          acc += t(i, u, j, v) * next_value(j, v);
        }
      }
      value(i, u) = discount * acc;
    }
  }
  return value;
}

} // namespace

double european_price(const QuantizationGrid& grid, const VanillaSpec& spec) {
  const auto& last = grid.stages.back();
  const double df =
      std::exp(-spec.discount_rate * grid.model.horizon_T);
  double acc = 0.0;
  for (std::size_t v = 0; v < last.y.size(); ++v) {
    acc += vanilla_payoff(spec, last.y.codewords[v]) *
           last.y.probabilities[v];
  }
  acc += vanilla_payoff(spec, 0.0) * last.y.absorbed_mass;
  return df * acc;
}

double bermudan_price(const QuantizationGrid& grid, const VanillaSpec& spec,
                      const ExerciseSchedule& schedule) {
  validate_schedule(grid, schedule.step_indices, true);
  require_no_absorption(grid, "bermudan_price");
  const int K = grid.num_steps();
  const double horizon = grid.model.horizon_T;
  const double step_df = std::exp(-spec.discount_rate * grid.dt);

  const auto& last = grid.stages[K];
  Matrix value(last.x.size(), last.y.size());
  for (std::size_t j = 0; j < last.x.size(); ++j) {
    for (std::size_t v = 0; v < last.y.size(); ++v) {
      value(j, v) = vanilla_payoff(spec, last.y.codewords[v]);
    }
  }

  auto scheduled = schedule.step_indices;
  for (int k = K - 1; k >= 0; --k) {
    value = continuation_value(grid, k, value, step_df);
    if (std::binary_search(scheduled.begin(), scheduled.end(), k)) {
      const auto& st = grid.stages[k];
      const double t = k * grid.dt;
      for (std::size_t u = 0; u < st.y.size(); ++u) {
        const double s = spot_value(spec.convention, spec.discount_rate,
                                    st.y.codewords[u], t, horizon);
        const double exercise = vanilla_payoff(spec, s);
        for (std::size_t i = 0; i < st.x.size(); ++i) {
          value(i, u) = std::max(value(i, u), exercise);
        }
      }
    }
  }
  return value(0, 0);
}

double barrier_price(const QuantizationGrid& grid, const VanillaSpec& spec,
                     const BarrierSpec& barrier) {
  validate_schedule(grid, barrier.monitoring.step_indices, false);
  require_no_absorption(grid, "barrier_price");
  const int K = grid.num_steps();
  const double horizon = grid.model.horizon_T;
  const double step_df = std::exp(-spec.discount_rate * grid.dt);
  const auto& monitored = barrier.monitoring.step_indices;

  auto mask_stage = [&](Matrix& value, int k) {
    const auto& st = grid.stages[k];
    const double t = k * grid.dt;
    for (std::size_t u = 0; u < st.y.size(); ++u) {
      const double s = spot_value(spec.convention, spec.discount_rate,
                                  st.y.codewords[u], t, horizon);
      if (s >= barrier.level) {
        for (std::size_t i = 0; i < st.x.size(); ++i) value(i, u) = 0.0;
      }
    }
  };

  const auto& last = grid.stages[K];
  Matrix value(last.x.size(), last.y.size());
  for (std::size_t j = 0; j < last.x.size(); ++j) {
    for (std::size_t v = 0; v < last.y.size(); ++v) {
      value(j, v) = vanilla_payoff(spec, last.y.codewords[v]);
    }
  }
  if (std::binary_search(monitored.begin(), monitored.end(), K)) {
    mask_stage(value, K);
  }
  for (int k = K - 1; k >= 0; --k) {
    value = continuation_value(grid, k, value, step_df);
    if (k > 0 && std::binary_search(monitored.begin(), monitored.end(), k)) {
      mask_stage(value, k);
    }
  }
  // an option born at or above the barrier is worthless
  mask_stage(value, 0);
  return value(0, 0);
}

double corridor_swap_left_endpoint(const QuantizationGrid& grid,
                                   const CorridorSpec& corridor) {
  const int K = grid.num_steps();
  const double horizon = grid.model.horizon_T;
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto& st = grid.stages[k];
    const double t = k * grid.dt;
    for (std::size_t u = 0; u < st.y.size(); ++u) {
      const double s = st.y.codewords[u] *
                       std::exp(-corridor.rate * (horizon - t));
      if (s <= corridor.low || s >= corridor.high) continue;
      for (std::size_t i = 0; i < st.x.size(); ++i) {
        acc += st.x.codewords[i] * st.joint(i, u);
      }
    }
  }
  return acc * grid.dt / horizon;
}

double corridor_t_star(double s_k, double s_k1, double low, double high,
                       double t_k, double dt, CorridorEndpoint endpoint) {
  const double s = endpoint == CorridorEndpoint::left ? s_k : s_k1;
  if (s >= low && s <= high) {
    return endpoint == CorridorEndpoint::left ? t_k : t_k + dt;
  }
  if (s_k1 == s_k) {
    // flat segment outside the corridor never crosses it
    return t_k;
  }
  const double target = s > high ? high : low;
  return t_k + dt * (target - s_k) / (s_k1 - s_k);
}

double corridor_G(double t_k, double t_k1, double x_k, double s_k,
                  double x_k1, double s_k1, const CorridorSpec& corridor) {
  const double dt = t_k1 - t_k;
  const double t_minus = corridor_t_star(s_k, s_k1, corridor.low,
                                         corridor.high, t_k, dt,
                                         CorridorEndpoint::left);
  const double t_plus = corridor_t_star(s_k, s_k1, corridor.low,
                                        corridor.high, t_k, dt,
                                        CorridorEndpoint::right);
  const double a = t_plus - t_k;
  const double b = t_minus - t_k;
  return (x_k1 - x_k) / (2.0 * dt) * (a * a - b * b) + x_k * (t_plus - t_minus);
}

double corridor_swap_interpolated(const QuantizationGrid& grid,
                                  const CorridorSpec& corridor) {
  if (grid.settings.method != JointProbMethod::conditional_approximation) {
    throw ConfigError(
        "corridor_swap_interpolated: requires a grid built with the "
        "conditional approximation (the exact method does not expose the "
        "conditional factorization)");
  }
  const int K = grid.num_steps();
  const double horizon = grid.model.horizon_T;
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto& st = grid.stages[k];
    const auto& next = grid.stages[k + 1];
    const auto tensor = joint_transition_tensor(grid, k);
    const double t0 = k * grid.dt;
    const double t1 = (k + 1) * grid.dt;
    const double df0 = std::exp(-corridor.rate * (horizon - t0));
    const double df1 = std::exp(-corridor.rate * (horizon - t1));
    for (std::size_t u = 0; u < st.y.size(); ++u) {
      const double s_u = st.y.codewords[u] * df0;
      for (std::size_t v = 0; v < next.y.size(); ++v) {
        const double s_v = next.y.codewords[v] * df1;
        // the in-corridor sub-interval depends only on the price pair
        const double tm = corridor_t_star(s_u, s_v, corridor.low,
                                          corridor.high, t0, grid.dt,
                                          CorridorEndpoint::left);
        const double tp = corridor_t_star(s_u, s_v, corridor.low,
                                          corridor.high, t0, grid.dt,
                                          CorridorEndpoint::right);
        const double width = tp - tm;
        if (width == 0.0) continue;
        const double a = tp - t0;
        const double b = tm - t0;
        const double slope_factor = (a * a - b * b) / (2.0 * grid.dt);
        for (std::size_t i = 0; i < st.x.size(); ++i) {
          const double w = st.joint(i, u);
          if (w == 0.0) continue;
          const double x_i = st.x.codewords[i];
          for (std::size_t j = 0; j < next.x.size(); ++j) {
            const double p = tensor(i, u, j, v) * w;
            acc += p * ((next.x.codewords[j] - x_i) * slope_factor +
                        x_i * width);
          }
        }
      }
    }
  }
  return acc / horizon;
}

double black_price(OptionKind kind, double forward, double strike, double T,
                   double sigma, double df) {
  if (forward <= 0.0 || strike <= 0.0) {
    throw std::domain_error("black_price: forward and strike must be > 0");
  }
  const double sq = sigma * std::sqrt(T);
  if (sq <= 0.0) {
    return df * vanilla_payoff({kind, strike, 0.0}, forward);
  }
  const double d1 = std::log(forward / strike) / sq + 0.5 * sq;
  const double d2 = d1 - sq;
  if (kind == OptionKind::call) {
    return df * (forward * gauss::normal_cdf(d1) -
                 strike * gauss::normal_cdf(d2));
  }
  return df * (strike * gauss::normal_cdf(-d2) -
               forward * gauss::normal_cdf(-d1));
}

double bachelier_price(OptionKind kind, double forward, double strike,
                       double T, double sigma, double df) {
  const double sq = sigma * std::sqrt(T);
  const double sign = kind == OptionKind::call ? 1.0 : -1.0;
  const double moneyness = sign * (forward - strike);
  if (sq <= 0.0) return df * std::max(moneyness, 0.0);
  const double d = moneyness / sq;
  return df * (moneyness * gauss::normal_cdf(d) + sq * gauss::normal_pdf(d));
}

double implied_vol(double price, double forward, double strike, double T,
                   double df, VolModel model, OptionKind kind) {
  auto price_at = [&](double sigma) {
    return model == VolModel::black
               ? black_price(kind, forward, strike, T, sigma, df)
               : bachelier_price(kind, forward, strike, T, sigma, df);
  };
  const double intrinsic = price_at(0.0);
  if (!(price >= intrinsic - 1e-14)) {
    throw std::domain_error("implied_vol: price below intrinsic value");
  }
  double lo = 0.0;
  double hi = model == VolModel::black
                  ? 1.0
                  : 0.5 * (std::fabs(forward - strike) + forward + strike +
                           1.0) / std::sqrt(T);
  int expansions = 0;
  while (price_at(hi) < price) {
    hi *= 2.0;
    if (++expansions > 60) {
      throw std::domain_error("implied_vol: price above attainable bound");
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (price_at(mid) < price ? lo : hi) = mid;
    if (std::fabs(price_at(0.5 * (lo + hi)) - price) <= 1e-10 &&
        hi - lo <= 1e-14 * (1.0 + hi)) {
      break;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace jrmq
