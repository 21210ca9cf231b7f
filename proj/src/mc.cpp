#include "jrmq/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "jrmq/errors.hpp"
#include "jrmq/gauss.hpp"

namespace jrmq {

namespace {

std::uint64_t splitmix_next(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double truncate_state(double v, Truncation t) {
  return t == Truncation::full ? std::max(v, 0.0) : v;
}

// Walk one path, calling visit(step_index, x, y) at step 0 and after every
// Euler update.  With antithetic sampling, paths 2m and 2m+1 share the
// stream of pair m with opposite innovation signs.
template <typename Visit>
void walk_path(const ModelSpec& spec, const MCConfig& cfg,
               std::int64_t path_index, Visit&& visit) {
  const std::uint64_t stream =
      cfg.antithetic ? static_cast<std::uint64_t>(path_index / 2)
                     : static_cast<std::uint64_t>(path_index);
  const double sign = (cfg.antithetic && (path_index & 1)) ? -1.0 : 1.0;
  PathRng rng(cfg.seed, stream);
  const double dt = spec.horizon_T / cfg.steps;
  const double sq = std::sqrt(dt);
  const double rho = spec.rho;
  const double srho = std::sqrt(std::max(0.0, (1.0 - rho) * (1.0 + rho)));
  double x = spec.x0;
  double y = spec.y0;
  visit(0, x, y);
  for (int k = 0; k < cfg.steps; ++k) {
    const double zx = sign * rng.normal();
    const double zy = rho * zx + srho * sign * rng.normal();
    // full truncation evaluates drift/diffusion at the clamped state while
    // propagating the raw one
    const double xe = truncate_state(x, cfg.truncation);
    const double ye = truncate_state(y, cfg.truncation);
    const double xn = x + spec.drift_x(xe) * dt + spec.diff_x(xe) * sq * zx;
    const double yn =
        y + spec.drift_y(ye) * dt + spec.diff_y(xe, ye) * sq * zy;
    x = xn;
    y = yn;
    visit(k + 1, x, y);
  }
}

double spot_of(const VanillaSpec& v, double y, double t, double horizon) {
  return v.convention == UnderlyingConvention::forward
             ? y * std::exp(-v.discount_rate * (horizon - t))
             : y;
}

// Accumulates mean and standard error over samples; with antithetic
// sampling each consecutive pair of paths forms one sample.  Sums are
// centered on the first sample so constant payoffs report a zero error.
class SweepAccumulator {
 public:
  SweepAccumulator(std::size_t width, bool antithetic)
      : antithetic_(antithetic), pending_(width), offset_(width), sum_(width),
        sum2_(width) {}

  void add(std::int64_t path_index, const std::vector<double>& values) {
    if (antithetic_ && (path_index & 1) == 0) {
      pending_ = values;
      has_pending_ = true;
      return;
    }
    if (antithetic_ && has_pending_) {
      std::vector<double> avg(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) {
        avg[i] = 0.5 * (pending_[i] + values[i]);
      }
      has_pending_ = false;
      accumulate(avg);
      return;
    }
    accumulate(values);
  }

  void flush_pending() {
    if (!has_pending_) return;
    has_pending_ = false;
    accumulate(pending_);
  }

  std::vector<MCEstimate> estimates(std::int64_t paths_used) const {
    std::vector<MCEstimate> out(sum_.size());
    for (std::size_t i = 0; i < sum_.size(); ++i) {
      const double mean_d = sum_[i] / samples_;
      const double var =
          std::max(0.0, sum2_[i] / samples_ - mean_d * mean_d);
      out[i].value = offset_[i] + mean_d;
      out[i].std_error = std::sqrt(var / samples_);
      out[i].paths_used = paths_used;
    }
    return out;
  }

 private:
  void accumulate(const std::vector<double>& values) {
    if (samples_ == 0) offset_ = values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - offset_[i];
      sum_[i] += d;
      sum2_[i] += d * d;
    }
    ++samples_;
  }

  bool antithetic_;
  bool has_pending_ = false;
  std::int64_t samples_ = 0;
  std::vector<double> pending_;
  std::vector<double> offset_;
  std::vector<double> sum_;
  std::vector<double> sum2_;
};

int time_to_step(double t, double horizon, int steps) {
  const double raw = t / horizon * steps;
  const int k = static_cast<int>(std::lround(raw));
  if (std::fabs(raw - k) > 1e-9 || k < 0 || k > steps) {
    throw ConfigError("monitoring/exercise time " + std::to_string(t) +
                      " does not align with the Monte Carlo step grid");
  }
  return k;
}

// dense least-squares solve of the normal equations with partial pivoting;
// returns false when the system is numerically rank deficient
bool solve_normal_equations(std::vector<std::vector<double>> a,
                            std::vector<double> b,
                            std::vector<double>& out) {
  const std::size_t n = b.size();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(a[i][i]));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    if (std::fabs(a[piv][col]) < 1e-12 * std::max(scale, 1.0)) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * out[c];
    out[i] = s / a[i][i];
  }
  return true;
}

// bivariate monomial basis in standardized (s, x) up to total degree d
void fill_basis(double s, double x, int degree, std::vector<double>& row) {
  row.clear();
  for (int total = 0; total <= degree; ++total) {
    for (int a = total; a >= 0; --a) {
      row.push_back(std::pow(s, a) * std::pow(x, total - a));
    }
  }
}

} // namespace

Truncation truncation_from_string(const std::string& s) {
  if (s == "none") return Truncation::none;
  if (s == "full") return Truncation::full;
  throw ConfigError("unknown truncation mode: " + s);
}

const char* to_string(Truncation t) {
  return t == Truncation::full ? "full" : "none";
}

PathRng::PathRng(std::uint64_t seed, std::uint64_t path) {
  state_ = seed ^ (0x9E3779B97F4A7C15ULL * (path + 1));
  splitmix_next(state_);
  splitmix_next(state_);
}

double PathRng::uniform() {
  return (splitmix_next(state_) >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double PathRng::normal() { return gauss::normal_inv_cdf(uniform()); }

PathEnsemble simulate_paths(const ModelSpec& spec, const MCConfig& config,
                            const std::vector<int>& record_steps) {
  if (config.paths < 1 || config.steps < 1) {
    throw ConfigError("mc: paths and steps must be at least 1");
  }
  PathEnsemble ens;
  ens.paths = config.paths;
  ens.record_steps = record_steps;
  std::sort(ens.record_steps.begin(), ens.record_steps.end());
  ens.record_steps.erase(
      std::unique(ens.record_steps.begin(), ens.record_steps.end()),
      ens.record_steps.end());
  for (int k : ens.record_steps) {
    if (k < 0 || k > config.steps) {
      throw ConfigError("mc: record step out of range");
    }
  }
  const std::size_t width = ens.record_steps.size();
  ens.x.assign(config.paths * width, 0.0);
  ens.y.assign(config.paths * width, 0.0);
  for (std::int64_t p = 0; p < config.paths; ++p) {
    std::size_t slot = 0;
    walk_path(spec, config, p, [&](int step, double x, double y) {
      if (slot < width && ens.record_steps[slot] == step) {
        ens.x[p * width + slot] = x;
        ens.y[p * width + slot] = y;
        ++slot;
      }
    });
  }
  return ens;
}

std::vector<MCEstimate> mc_european(const ModelSpec& spec,
                                    const MCConfig& config,
                                    const VanillaSpec& base,
                                    const std::vector<double>& strikes) {
  const double df = std::exp(-base.discount_rate * spec.horizon_T);
  SweepAccumulator acc(strikes.size(), config.antithetic);
  std::vector<double> payoffs(strikes.size());
  for (std::int64_t p = 0; p < config.paths; ++p) {
    double terminal = 0.0;
    walk_path(spec, config, p, [&](int step, double, double y) {
      if (step == config.steps) terminal = y;
    });
    for (std::size_t s = 0; s < strikes.size(); ++s) {
      VanillaSpec v = base;
      v.strike = strikes[s];
      payoffs[s] = df * vanilla_payoff(v, terminal);
    }
    acc.add(p, payoffs);
  }
  acc.flush_pending();
  return acc.estimates(config.paths);
}

std::vector<MCEstimate> mc_barrier(const ModelSpec& spec,
                                   const MCConfig& config,
                                   const VanillaSpec& vanilla,
                                   const std::vector<double>& levels,
                                   const std::vector<double>& monitoring_times) {
  std::vector<int> monitor_steps;
  monitor_steps.reserve(monitoring_times.size());
  for (double t : monitoring_times) {
    monitor_steps.push_back(time_to_step(t, spec.horizon_T, config.steps));
  }
  std::sort(monitor_steps.begin(), monitor_steps.end());
  const double df = std::exp(-vanilla.discount_rate * spec.horizon_T);
  const double horizon = spec.horizon_T;
  const double dt = horizon / config.steps;

  SweepAccumulator acc(levels.size(), config.antithetic);
  std::vector<char> knocked(levels.size());
  std::vector<double> payoffs(levels.size());
  for (std::int64_t p = 0; p < config.paths; ++p) {
    std::fill(knocked.begin(), knocked.end(), 0);
    double terminal = 0.0;
    std::size_t next_monitor = 0;
    walk_path(spec, config, p, [&](int step, double, double y) {
      const double s = spot_of(vanilla, y, step * dt, horizon);
      if (step == 0) {
        // an option born at or above the barrier is already knocked out
        for (std::size_t l = 0; l < levels.size(); ++l) {
          if (s >= levels[l]) knocked[l] = 1;
        }
      }
      while (next_monitor < monitor_steps.size() &&
             monitor_steps[next_monitor] == step) {
        for (std::size_t l = 0; l < levels.size(); ++l) {
          if (s >= levels[l]) knocked[l] = 1;
        }
        ++next_monitor;
      }
      if (step == config.steps) terminal = y;
    });
    const double pay = df * vanilla_payoff(vanilla, terminal);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      payoffs[l] = knocked[l] ? 0.0 : pay;
    }
    acc.add(p, payoffs);
  }
  acc.flush_pending();
  return acc.estimates(config.paths);
}

std::vector<MCEstimate> mc_corridor(const ModelSpec& spec,
                                    const MCConfig& config,
                                    const std::vector<CorridorSpec>& corridors) {
  const double horizon = spec.horizon_T;
  const double dt = horizon / config.steps;
  SweepAccumulator acc(corridors.size(), config.antithetic);
  std::vector<double> accrued(corridors.size());
  for (std::int64_t p = 0; p < config.paths; ++p) {
    std::fill(accrued.begin(), accrued.end(), 0.0);
    walk_path(spec, config, p, [&](int step, double x, double y) {
      if (step == config.steps) return;  // left-endpoint rule
      const double t = step * dt;
      for (std::size_t c = 0; c < corridors.size(); ++c) {
        const double s =
            y * std::exp(-corridors[c].rate * (horizon - t));
        if (s > corridors[c].low && s < corridors[c].high) {
          accrued[c] += x * dt;
        }
      }
    });
    for (double& a : accrued) a /= horizon;
    acc.add(p, accrued);
  }
  acc.flush_pending();
  return acc.estimates(config.paths);
}

MCEstimate mc_bermudan_lsmc(const ModelSpec& spec, const MCConfig& config,
                            const VanillaSpec& vanilla,
                            const std::vector<double>& exercise_times,
                            int basis_degree) {
  if (exercise_times.empty() || basis_degree < 0) {
    throw ConfigError("lsmc: empty exercise schedule or bad degree");
  }
  std::vector<double> times = exercise_times;
  std::sort(times.begin(), times.end());
  std::vector<int> steps;
  steps.reserve(times.size());
  for (double t : times) {
    steps.push_back(time_to_step(t, spec.horizon_T, config.steps));
  }

  MCConfig cfg = config;
  cfg.antithetic = false;
  const auto ens = simulate_paths(spec, cfg, steps);
  const std::size_t m_dates = ens.record_steps.size();
  const std::int64_t n = ens.paths;
  const double r = vanilla.discount_rate;
  const double horizon = spec.horizon_T;
  const double dt = horizon / config.steps;
  auto date_time = [&](std::size_t m) { return ens.record_steps[m] * dt; };

  std::vector<double> cash(n);
  std::vector<double> tau(n);
  for (std::int64_t p = 0; p < n; ++p) {
    const double s =
        spot_of(vanilla, ens.y_at(p, m_dates - 1), date_time(m_dates - 1),
                horizon);
    cash[p] = vanilla_payoff(vanilla, s);
    tau[p] = date_time(m_dates - 1);
  }

  bool warned = false;
  std::vector<double> row;
  for (std::size_t m = m_dates - 1; m-- > 0;) {
    const double t = date_time(m);
    // in-the-money paths only
    std::vector<std::int64_t> itm;
    itm.reserve(n);
    for (std::int64_t p = 0; p < n; ++p) {
      const double s = spot_of(vanilla, ens.y_at(p, m), t, horizon);
      if (vanilla_payoff(vanilla, s) > 0.0) itm.push_back(p);
    }
    if (itm.empty()) continue;

    // standardize the regressors over the ITM set
    double ms = 0.0, mx = 0.0, vs = 0.0, vx = 0.0;
    for (auto p : itm) {
      const double s = spot_of(vanilla, ens.y_at(p, m), t, horizon);
      const double x = ens.x_at(p, m);
      ms += s;
      mx += x;
      vs += s * s;
      vx += x * x;
    }
    ms /= itm.size();
    mx /= itm.size();
    vs = std::sqrt(std::max(vs / itm.size() - ms * ms, 0.0));
    vx = std::sqrt(std::max(vx / itm.size() - mx * mx, 0.0));
    if (vs <= 0.0) vs = 1.0;
    if (vx <= 0.0) vx = 1.0;

    // fit continuation values, dropping to a lower degree if the normal
    // equations are rank deficient
    std::vector<double> beta;
    int degree = basis_degree;
    for (; degree >= 0; --degree) {
      const std::size_t terms = (degree + 1) * (degree + 2) / 2;
      if (static_cast<std::size_t>(itm.size()) < terms) continue;
      std::vector<std::vector<double>> ata(terms,
                                           std::vector<double>(terms, 0.0));
      std::vector<double> atb(terms, 0.0);
      for (auto p : itm) {
        const double s =
            (spot_of(vanilla, ens.y_at(p, m), t, horizon) - ms) / vs;
        const double x = (ens.x_at(p, m) - mx) / vx;
        fill_basis(s, x, degree, row);
        const double target = cash[p] * std::exp(-r * (tau[p] - t));
        for (std::size_t a = 0; a < terms; ++a) {
          atb[a] += row[a] * target;
          for (std::size_t b = a; b < terms; ++b) {
            ata[a][b] += row[a] * row[b];
          }
        }
      }
      for (std::size_t a = 0; a < terms; ++a) {
        for (std::size_t b = 0; b < a; ++b) ata[a][b] = ata[b][a];
      }
      if (solve_normal_equations(std::move(ata), std::move(atb), beta)) {
        break;
      }
      if (!warned) {
        std::fprintf(stderr,
                     "lsmc: rank-deficient regression at t=%.4f, degree "
                     "lowered\n",
                     t);
        warned = true;
      }
    }
    if (degree < 0) continue;  // nothing fittable, never exercise here

    for (auto p : itm) {
      const double s_raw = spot_of(vanilla, ens.y_at(p, m), t, horizon);
      const double s = (s_raw - ms) / vs;
      const double x = (ens.x_at(p, m) - mx) / vx;
      fill_basis(s, x, degree, row);
      double continuation = 0.0;
      for (std::size_t a = 0; a < row.size(); ++a) {
        continuation += beta[a] * row[a];
      }
      const double immediate = vanilla_payoff(vanilla, s_raw);
      if (immediate >= continuation) {
        cash[p] = immediate;
        tau[p] = t;
      }
    }
  }

  const double offset = cash[0] * std::exp(-r * tau[0]);
  double sum = 0.0, sum2 = 0.0;
  for (std::int64_t p = 0; p < n; ++p) {
    const double d = cash[p] * std::exp(-r * tau[p]) - offset;
    sum += d;
    sum2 += d * d;
  }
  const double mean_d = sum / n;
  const double var = std::max(0.0, sum2 / n - mean_d * mean_d);
  return {offset + mean_d, std::sqrt(var / n), n};
}

} // namespace jrmq
