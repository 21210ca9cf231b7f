// Instrument descriptions shared by the grid pricers and the Monte Carlo
// oracle.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace jrmq {

enum class OptionKind { call, put };

// spot: Y is the asset price itself, exercise compares against Y directly.
// forward: Y is the T-forward price; price comparisons at time t use
// S_t = Y_t exp(-r (T - t)).
enum class UnderlyingConvention { spot, forward };

struct VanillaSpec {
  OptionKind kind = OptionKind::put;
  double strike = 100.0;
  double discount_rate = 0.0;  // per year
  UnderlyingConvention convention = UnderlyingConvention::spot;
};

inline double vanilla_payoff(const VanillaSpec& spec, double s) {
  return spec.kind == OptionKind::call ? std::max(s - spec.strike, 0.0)
                                       : std::max(spec.strike - s, 0.0);
}

// Asset price implied by the dependent state at time t.
inline double spot_value(UnderlyingConvention conv, double rate, double y,
                         double t, double horizon) {
  return conv == UnderlyingConvention::forward
             ? y * std::exp(-rate * (horizon - t))
             : y;
}

// Exercise or monitoring dates as grid step indices in {1..K}.
struct ExerciseSchedule {
  std::vector<int> step_indices;
};

struct BarrierSpec {
  double level = 0.0;
  ExerciseSchedule monitoring;
};

// Volatility accrues while low < S_t < high; rate discounts Y into S.
struct CorridorSpec {
  double low = 0.0;
  double high = 0.0;
  double rate = 0.0;
};

} // namespace jrmq
