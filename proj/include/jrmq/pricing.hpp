// Derivative pricing on a completed quantization grid: European payoffs,
// Bermudan backward induction, discretely monitored up-and-out barriers and
// volatility corridor swaps (left-endpoint and interpolated estimators),
// plus Black/Bachelier implied volatility inversion for smile reporting.

#pragma once

#include "jrmq/instruments.hpp"
#include "jrmq/jrmq.hpp"

namespace jrmq {

// e^{-rT} E[payoff(Y_T)], including any absorbed mass as a payoff at zero.
double european_price(const QuantizationGrid& grid, const VanillaSpec& spec);

// Backward induction on the joint (x, y) nodes with exercise allowed at the
// scheduled steps; the last scheduled step must be K.  Requires a grid with
// no absorbed mass.
double bermudan_price(const QuantizationGrid& grid, const VanillaSpec& spec,
                      const ExerciseSchedule& schedule);

// Up-and-out option: the value is zeroed wherever the spot is at or above
// the barrier on a monitored step (inception counts as monitored).
double barrier_price(const QuantizationGrid& grid, const VanillaSpec& spec,
                     const BarrierSpec& barrier);

// (1/T) sum_k dt sum_{i,u} x_i 1{L < S_k < H} P(X_k=x_i, Y_k=y_u).
double corridor_swap_left_endpoint(const QuantizationGrid& grid,
                                   const CorridorSpec& corridor);

enum class CorridorEndpoint { left, right };

// Time at which the line through (t_k, s_k) and (t_k + dt, s_k1) enters or
// leaves the corridor, queried at one endpoint.
double corridor_t_star(double s_k, double s_k1, double low, double high,
                       double t_k, double dt, CorridorEndpoint endpoint);

// Closed-form integral of the linearly interpolated volatility over the
// sub-interval where the interpolated price lies inside the corridor.
double corridor_G(double t_k, double t_k1, double x_k, double s_k,
                  double x_k1, double s_k1, const CorridorSpec& corridor);

// Interpolated estimator weighting G by the four-index path probabilities;
// requires a grid built with the conditional approximation.
double corridor_swap_interpolated(const QuantizationGrid& grid,
                                  const CorridorSpec& corridor);

enum class VolModel { black, bachelier };

double black_price(OptionKind kind, double forward, double strike, double T,
                   double sigma, double df);
double bachelier_price(OptionKind kind, double forward, double strike,
                       double T, double sigma, double df);

// Volatility reproducing the given price to 1e-10; throws std::domain_error
// outside the arbitrage bounds of the chosen model.
double implied_vol(double price, double forward, double strike, double T,
                   double df, VolModel model, OptionKind kind);

} // namespace jrmq
