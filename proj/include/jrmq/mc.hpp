// Correlated two-factor Euler Monte Carlo used as the in-repo verification
// oracle: payoff estimators with standard errors and a least-squares
// regression pricer for Bermudan exercise.
//
// Reproducibility: every path derives its own generator state from
// (seed, path index), so estimates are bit-identical regardless of how the
// work would be scheduled; all estimators here run a single deterministic
// path loop.

#pragma once

#include <cstdint>
#include <vector>

#include "jrmq/instruments.hpp"
#include "jrmq/model.hpp"

namespace jrmq {

enum class Truncation { none, full };

Truncation truncation_from_string(const std::string& s);
const char* to_string(Truncation t);

struct MCConfig {
  std::int64_t paths = 100000;
  int steps = 120;
  std::uint64_t seed = 1;
  Truncation truncation = Truncation::full;
  bool antithetic = false;
};

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t paths_used = 0;
};

// SplitMix64-keyed per-path stream; normals via the inverse cdf.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path);
  double uniform();  // in (0,1)
  double normal();

 private:
  std::uint64_t state_;
};

// States of both factors recorded at the requested step indices
// (0 <= index <= steps), path-major.
struct PathEnsemble {
  std::int64_t paths = 0;
  std::vector<int> record_steps;
  std::vector<double> x;
  std::vector<double> y;

  double x_at(std::int64_t p, std::size_t r) const {
    return x[p * record_steps.size() + r];
  }
  double y_at(std::int64_t p, std::size_t r) const {
    return y[p * record_steps.size() + r];
  }
};

PathEnsemble simulate_paths(const ModelSpec& spec, const MCConfig& config,
                            const std::vector<int>& record_steps);

// Discounted European payoffs, one estimate per strike, all strikes priced
// on the same path set.
std::vector<MCEstimate> mc_european(const ModelSpec& spec,
                                    const MCConfig& config,
                                    const VanillaSpec& base,
                                    const std::vector<double>& strikes);

// Discretely monitored up-and-out option, one estimate per barrier level;
// monitoring_times are fractions of the horizon and must align with the MC
// step grid.
std::vector<MCEstimate> mc_barrier(const ModelSpec& spec,
                                   const MCConfig& config,
                                   const VanillaSpec& vanilla,
                                   const std::vector<double>& levels,
                                   const std::vector<double>& monitoring_times);

// Volatility corridor swaps by left-endpoint quadrature at the MC step
// resolution, one estimate per (low, high) corridor.
std::vector<MCEstimate> mc_corridor(const ModelSpec& spec,
                                    const MCConfig& config,
                                    const std::vector<CorridorSpec>& corridors);

// Longstaff-Schwartz lower-bound estimate: backward regression of
// continuation values on bivariate polynomials in (S, X) over in-the-money
// paths.  Falls back to a lower degree (with a stderr warning) when the
// regression is rank deficient.  The antithetic flag is ignored here.
MCEstimate mc_bermudan_lsmc(const ModelSpec& spec, const MCConfig& config,
                            const VanillaSpec& vanilla,
                            const std::vector<double>& exercise_times,
                            int basis_degree = 2);

} // namespace jrmq
